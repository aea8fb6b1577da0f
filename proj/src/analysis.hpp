#pragma once

#include <string>
#include <vector>

#include "solver.hpp"

namespace latwave {

struct RateFit {
    double rate = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    long nodes = 0;
};

// Least-squares slope of log phi over the nodes with phi in [1e-6 K, 1e-2 K].
// critical_form subtracts log|xi| first to absorb the linear prefactor of the
// minimal-speed tail. Throws WindowError when fewer than 10 nodes qualify.
RateFit fit_left_rate(const GridFunction& phi, bool critical_form = false);

// Same on the right with K - phi in [1e-6 K, 1e-2 K]; rate reported positive.
RateFit fit_right_rate(const GridFunction& phi);

struct DecayRates {
    RateFit left;
    RateFit right;
};
DecayRates estimate_decay_rates(const WaveProfile& p);

struct AlignResult {
    double shift = 0.0;        // applied to b: compares a(xi) with b(xi + shift)
    double sup_distance = 0.0; // symmetric sup over both node sets after the shift
};
// Translates b to match half-height crossings, then refines the shift by
// golden-section on the symmetric sup distance.
AlignResult align_profiles(const GridFunction& a, const GridFunction& b);
AlignResult align_profiles(const WaveProfile& a, const WaveProfile& b);

struct VerificationCheck {
    std::string name;
    bool passed = false;
    bool inconclusive = false; // rate fit with r2 below 0.9999
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
};

struct VerificationReport {
    std::vector<VerificationCheck> checks;
    bool passed = false;       // all checks passed (inconclusive ones do not fail)
    double residual_norm = 0.0;
    double fixed_point_gap = 0.0;
};

// Independent post-solve audit: strict interior bounds, strict monotonicity,
// residual norm, recomputed fixed-point gap, and tail rates against the
// dispersion roots.
VerificationReport verify_profile(const WaveProfile& p);

std::string verification_report_json(const VerificationReport& r);

} // namespace latwave
