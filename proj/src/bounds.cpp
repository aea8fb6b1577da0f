#include "bounds.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace latwave {

double default_eta(double sigma, double lambda_ratio) {
    if (!(sigma > 0.0)) throw DomainError("default_eta: sigma must be positive");
    if (!(lambda_ratio > 1.0))
        throw DomainError("default_eta: lambda2/lambda1 must exceed 1");
    if (lambda_ratio < 1.0 + sigma) return lambda_ratio * (1.0 - 1e-3);
    return 1.0 + 0.5 * sigma;
}

double default_half_length(double left_rate, double right_rate) {
    if (!(left_rate > 0.0) || !(right_rate > 0.0))
        throw DomainError("default_half_length: decay rates must be positive");
    // the left-tail closure floor of the iteration scales like a few percent
    // of e^{-left_rate*L}, so 23 decades of rate keeps it well under a 1e-10
    // step tolerance; the right side only needs the profile resolved
    return std::max({40.0, 23.0 / left_rate, 20.0 / right_rate});
}

GridSpec default_grid(const ReactionModel& m, double c, long nodes_per_unit) {
    RootSet rs = lambda_roots(m, c);
    return GridSpec::make(default_half_length(rs.lambda1, rs.upsilon), nodes_per_unit);
}

double q_threshold(const ReactionModel& m, double c, double eta) {
    if (!(eta > 1.0)) throw DomainError("q_threshold: eta must exceed 1");
    if (!(eta <= 1.0 + m.sigma))
        throw DomainError("q_threshold: eta must not exceed 1 + sigma");
    RootSet rs = lambda_roots(m, c);
    double la = eta * rs.lambda1;
    if (!(la < rs.lambda2))
        throw DomainError("q_threshold: eta*lambda1 must stay below lambda2");
    double gap = delta(m, c, la);
    if (!(gap > 0.0))
        throw DomainError("q_threshold: delta(c, eta*lambda1) is not positive");
    double g = kernel_mgf(m.kernel, la);
    double base = std::pow(2.0, 1.0 + m.sigma) * std::pow(g, 1.0 + m.sigma) * m.M / gap;
    return std::max(1.0, std::pow(base, (eta - 1.0) / m.sigma));
}

GridFunction build_supersolution(const ReactionModel& m, double c, double eta, double q,
                                 double xi_plus, const GridSpec& grid) {
    double qmin = q_threshold(m, c, eta);
    if (!(q >= qmin)) throw DomainError("build_supersolution: q is below the admissible threshold");
    RootSet rs = lambda_roots(m, c);
    double l1 = rs.lambda1;

    GridFunction phi;
    phi.grid = grid;
    phi.K = m.K;
    phi.left_rate = l1;
    phi.left_tail = TailKind::exponential;
    phi.right_rate = rs.upsilon;
    phi.right_tail = TailKind::constant;
    phi.values.resize(grid.count());
    for (long i = 0; i < grid.count(); ++i) {
        double s = grid.xi(i) + xi_plus;
        double e1 = std::exp(l1 * s);
        phi.values[i] = std::min(m.K, e1 + q * std::exp(eta * l1 * s));
    }
    // exact left extension: the tail is a sum of two exponentials, and the
    // second one still matters at the boundary of practical grids
    if (phi.values.front() < m.K) {
        phi.left_rate2 = eta * l1;
        phi.left_coef2 = q * std::exp(eta * l1 * (grid.xi_min() + xi_plus));
    }
    return phi;
}

GridFunction build_subsolution(const ReactionModel& m, double c, double eta, double q,
                               double xi_minus, const GridSpec& grid) {
    double qmin = q_threshold(m, c, eta);
    if (!(q >= qmin)) throw DomainError("build_subsolution: q is below the admissible threshold");
    RootSet rs = lambda_roots(m, c);
    double l1 = rs.lambda1;
    // Positive part vanishes right of the crossing of the two exponentials.
    double xi_star = -xi_minus - std::log(q) / ((eta - 1.0) * l1);

    GridFunction phi;
    phi.grid = grid;
    phi.K = m.K;
    phi.left_rate = l1;
    phi.left_tail = TailKind::exponential;
    phi.right_rate = 0.0;
    phi.right_tail = TailKind::constant;
    phi.values.resize(grid.count());
    for (long i = 0; i < grid.count(); ++i) {
        double s = grid.xi(i) + xi_minus;
        if (grid.xi(i) >= xi_star) {
            phi.values[i] = 0.0;
            continue;
        }
        double e1 = std::exp(l1 * s);
        phi.values[i] = std::max(0.0, e1 - q * std::exp(eta * l1 * s));
    }
    // exact left extension of the two-exponential difference; skipped when
    // the crossing lies left of the grid and the stored front is already 0
    if (phi.values.front() > 0.0) {
        phi.left_rate2 = eta * l1;
        phi.left_coef2 = -q * std::exp(eta * l1 * (grid.xi_min() + xi_minus));
    }
    return phi;
}

} // namespace latwave
