#pragma once

#include "dispersion.hpp"
#include "waveops.hpp"

namespace latwave {

// Exponent ratio used by the bracketing pair. Stays strictly inside
// (1, min{1+sigma, lambda2/lambda1}): the midpoint when the ratio bound is
// slack, just under the ratio when it binds.
double default_eta(double sigma, double lambda_ratio);

// Grid half-length resolving both decay scales with at least 20 e-folds.
double default_half_length(double left_rate, double right_rate);
GridSpec default_grid(const ReactionModel& m, double c, long nodes_per_unit);

// Coefficient threshold Q(c, eta) for admissible bracketing data:
//   max{1, [2^{1+sigma} G^{1+sigma}(eta*lambda1) M / delta(c, eta*lambda1)]^{(eta-1)/sigma}}
double q_threshold(const ReactionModel& m, double c, double eta);

// Upper bracketing function min{K, e^{l1(xi+xi_plus)} + q e^{eta l1 (xi+xi_plus)}};
// equals K beyond the crossing, decays at rate lambda1 on the left.
GridFunction build_supersolution(const ReactionModel& m, double c, double eta, double q,
                                 double xi_plus, const GridSpec& grid);

// Lower bracketing function max{0, e^{l1(xi+xi_minus)} - q e^{eta l1 (xi+xi_minus)}};
// vanishes beyond its crossing, positive in between.
GridFunction build_subsolution(const ReactionModel& m, double c, double eta, double q,
                               double xi_minus, const GridSpec& grid);

} // namespace latwave
