#pragma once

#include <vector>

#include "bounds.hpp"

namespace latwave {

struct SolveOptions {
    long nodes_per_unit = 10;   // grid spacing is 1/nodes_per_unit
    double half_length = 0.0;   // 0 picks max(40, 20/lambda1, 20/upsilon)
    double tol = 1e-10;         // sup-norm step tolerance, in units of K
    long max_iterations = 100000;
    double q_factor = 1.25;     // q = q_factor * Q(c, eta), must be >= 1
    double eta = 0.0;           // 0 picks default_eta
    double xi_plus = 0.0;       // shift of the upper bracketing function
    double xi_minus = 0.0;      // shift of the lower bracketing function
    double min_gap = 1e-3;      // refuse c below c_star*(1+min_gap)
    int continuation_levels = 10; // solve_critical: deepest level J, speeds c_star*(1+2^-j)
    bool normalize = true;      // pin phi(0) = K/2 after convergence
};

struct WaveProfile {
    ReactionModel model;
    GridFunction phi;
    double c = 0.0;
    double c_star = 0.0;
    double lambda_star = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double upsilon = 0.0;
    double mu = 0.0;
    double eta = 0.0;
    double q = 0.0;
    long iterations = 0;        // operator applications during the fixed-point phase
    long polish_steps = 0;      // operator applications during normalization
    double final_step_norm = 0.0;
    double fixed_point_gap = 0.0;  // sup |T(phi) - phi| on the delivered profile
    double residual_norm = 0.0;    // trusted-band sup of the travelling-wave residual
    double max_upper_violation = 0.0; // worst breach of the descending chain
    double max_lower_violation = 0.0; // worst breach of the lower bracketing floor
    double fitted_left_rate = 0.0;
    double fitted_right_rate = 0.0;
    double left_r2 = 0.0;
    double right_r2 = 0.0;
    bool normalized = false;
    bool low_order_quadrature = false;
    bool critical = false;
    // solve_critical: aligned sup distances between consecutive continuation levels.
    std::vector<double> continuation_distances;
};

// Monotone fixed-point solve at a fixed supercritical speed. Starts from the
// upper bracketing function and iterates the damped integral operator until
// the sup step falls below tol*K, then recentres so phi(0) = K/2.
WaveProfile solve_profile(const ReactionModel& m, double c, const SolveOptions& opt = {});

// Continuation toward the minimal speed: solves at c_star*(1+2^-j) for
// j = 3..continuation_levels on a common grid and returns the last member.
// Consecutive profiles must approach each other or ConvergenceError is thrown.
WaveProfile solve_critical(const ReactionModel& m, const SolveOptions& opt = {});

// JSON summary of solve outcome and fitted tail data.
std::string profile_summary_json(const WaveProfile& p);

} // namespace latwave
