#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "model.hpp"
#include "waveops.hpp"

namespace latwave {

struct SimOptions {
    long sites = 1200;
    double horizon = 200.0;  // integrated up to the largest multiple of record_dt inside
    double record_dt = 1.0;  // front sampling cadence
    double dt = 0.0;         // 0 picks min(0.01, 0.2/(4d + Lip f)), snapped to divide record_dt
    long x0 = -1;            // front seat: step edge or profile centre, -1 picks sites/4
};

struct FrontTrack {
    std::vector<double> t;
    std::vector<double> x;      // half-height crossing, NaN when absent
    double speed = 0.0;         // least-squares slope over the last half of the samples
    double speed_r2 = 0.0;
    bool speed_valid = false;
    std::string diagnostic;     // reason when speed_valid is false
};

struct SimResult {
    std::vector<double> u;      // final state
    FrontTrack track;
    double dt = 0.0;
    long steps = 0;
};

// K left of x0, zero from x0 on.
std::vector<double> step_initial_data(const ReactionModel& m, long sites, long x0);

// Profile sampled on the integer lattice with its half-height point at x0.
std::vector<double> profile_initial_data(const GridFunction& phi, long sites, long x0);

// Method-of-lines evolution of the lattice equation with RK4 in time. The
// delayed convolution reads a linear-in-time history ring; zero delay couples
// the stages directly. End values of the initial data are frozen as ghosts.
SimResult simulate_lattice(const ReactionModel& m, const std::vector<double>& u0,
                           const SimOptions& opt = {});

void write_front_csv(const FrontTrack& track, std::ostream& os);
void write_front_csv(const FrontTrack& track, const std::string& path);

} // namespace latwave
