#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "model.hpp"

namespace latwave {

// Uniform symmetric grid with spacing 1/m, so the unit shifts of the
// discrete Laplacian land exactly on nodes. Node i sits at (i - n_half)/m;
// the node count 2*n_half + 1 is always odd with node n_half at 0.
struct GridSpec {
    long m = 10;
    long n_half = 400;

    double spacing() const { return 1.0 / static_cast<double>(m); }
    long count() const { return 2 * n_half + 1; }
    double half_length() const { return static_cast<double>(n_half) / static_cast<double>(m); }
    double xi(long i) const { return static_cast<double>(i - n_half) / static_cast<double>(m); }
    double xi_min() const { return xi(0); }
    double xi_max() const { return xi(count() - 1); }

    // smallest admissible grid covering [-half_length, half_length]
    static GridSpec make(double half_length, long m);
};

enum class TailKind { exponential, constant };

// Profile-shaped function: node values on the grid, linear interpolation in
// between, and analytic tail extensions outside. The left tail decays to 0
// at rate left_rate, the right tail approaches K at rate right_rate; either
// side may instead be frozen at its end value (constant tails make the two
// equilibria exact fixed points of the wave operator).
struct GridFunction {
    GridSpec grid;
    std::vector<double> values;
    double K = 1.0;
    double left_rate = 1.0;
    double right_rate = 1.0;
    TailKind left_tail = TailKind::exponential;
    TailKind right_tail = TailKind::exponential;
    // Optional second left-tail component: when left_rate2 > 0 the left
    // extension is (front - left_coef2) e^{left_rate dxi}
    // + left_coef2 e^{left_rate2 dxi} with dxi = xi - xi_min <= 0, so
    // two-exponential bracketing functions extend exactly instead of being
    // overstated by a frozen single rate. Requires left_rate2 > left_rate
    // and left_coef2 < front; left_coef2 may be negative.
    double left_rate2 = 0.0;
    double left_coef2 = 0.0;

    double eval(double xi) const;
    // node value for 0 <= i < count, tail extension otherwise; index
    // arithmetic keeps tail abscissae exact
    double value_at_index(long i) const;
};

GridFunction constant_grid_function(const GridSpec& g, double value, double K);

// CSV serialization: '#'-prefixed metadata (c, K, rates, tail kinds), then a
// header row and one xi,value row per node at 12 significant digits.
void write_grid_csv(const GridFunction& g, std::ostream& os, double c);
void write_grid_csv(const GridFunction& g, const std::string& path, double c);
GridFunction read_grid_csv(std::istream& is, double* c_out = nullptr);
GridFunction read_grid_csv(const std::string& path, double* c_out = nullptr);

// phi(xi+1) - 2 phi(xi) + phi(xi-1) at node i (any i; tails extend)
double discrete_laplacian(const GridFunction& phi, long i);

// (h*phi)(xi_i - c*tau) using precomputed weights whose spacing matches the
// grid; the c*tau shift is evaluated by linear interpolation
double convolve_delayed(const GridFunction& phi, const KernelWeights& w, double c, double tau,
                        long i);

// Wave-operator residual c*phi' - d*lap - f at every node, with a trusted
// interior band: nodes within 1 + c*tau + kernel reach + 2 spacings of either
// boundary lean on the tail extensions and are excluded from the sup.
struct ResidualField {
    GridSpec grid;
    std::vector<double> values;
    long trusted_lo = 0;
    long trusted_hi = -1;  // inclusive; empty when hi < lo
    double interior_sup = 0.0;
};

ResidualField wave_residual(const ReactionModel& m, double c, const GridFunction& phi);

// (2d + max sampled |f_u|, |f_v| over [0,K]^2) / c; the integral operator
// below is order-preserving only above this threshold
double mu_lower_bound(const ReactionModel& m, double c);

// One sweep of the damped wave operator
//   T(phi)(xi) = (1/c) * integral_0^inf e^{-mu x} H(xi - x) dx,
//   H(y) = d*lap phi(y) + f(phi(y), (h*phi)(y - c tau)) + c mu phi(y),
// evaluated by an exponentially weighted nodal quadrature with positive
// weights (order is preserved node-by-node) that is exact for piecewise
// quadratic H. The semi-infinite reach is covered by a virtual pre-roll of
// the grid deep enough that the omitted mass is below 1e-14, seeded by the
// closed-form tail limits. Output values are clamped to [0, K].
// If the pair weights lose positivity (mu*spacing too large) a positive
// piecewise-linear quadrature is substituted and *low_order is set.
GridFunction apply_T_mu(const ReactionModel& m, double c, double mu, const GridFunction& phi,
                        bool* low_order = nullptr);

} // namespace latwave
