#pragma once

#include "model.hpp"

namespace latwave {

// Minimal wave speed and the tangency abscissa where the characteristic
// function touches zero from below.
struct SpeedResult {
    double c_star = 0.0;
    double lambda_star = 0.0;
    double delta_residual = 0.0;    // |characteristic value at the tangency|
    double dlambda_residual = 0.0;  // |its lambda-derivative there|
};

// Decay exponents at a fixed supercritical speed: lambda1 < lambda2 are the
// two positive zeros of the characteristic function at 0, upsilon the unique
// positive zero of the companion function at K.
struct RootSet {
    double c = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double upsilon = 0.0;
};

// Characteristic function of the linearization at the zero state:
//   c*lambda - d(e^l + e^-l - 2) - f_u(0,0) - f_v(0,0) e^{-l c tau} G(l)
double delta(const ReactionModel& m, double c, double lambda);
double delta_lambda(const ReactionModel& m, double c, double lambda);
double delta_lambda2(const ReactionModel& m, double c, double lambda);

// Companion function of the linearization at K:
//   c*lambda + d(e^l + e^-l - 2) + f_u(K,K) + f_v(K,K) e^{l c tau} G(-l)
double delta_tilde(const ReactionModel& m, double c, double lambda);
double delta_tilde_lambda(const ReactionModel& m, double c, double lambda);

// Location and value of max over lambda > 0 of delta(c, .). The maximum is
// unique (strict concavity in lambda); the value is strictly increasing in c.
struct DeltaMax {
    double lambda_hat = 0.0;
    double value = 0.0;
};
DeltaMax max_delta(const ReactionModel& m, double c);

SpeedResult minimal_speed(const ReactionModel& m);

// Requires c > c_star by at least 1e-9 relative; fills all of RootSet.
RootSet lambda_roots(const ReactionModel& m, double c);

double upsilon(const ReactionModel& m, double c);

} // namespace latwave
