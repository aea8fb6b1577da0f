#include "dispersion.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"
#include "rootfind.hpp"

namespace latwave {

namespace {

// practical right end of the lambda search when the moment abscissa is
// infinite: beyond it d*e^l dwarfs c*l and the characteristic value is
// certainly negative
double lambda_cap(const ReactionModel& m, double c) {
    if (m.df0.second > 0.0 && std::isfinite(m.kernel.lambda0))
        return m.kernel.lambda0 * (1.0 - 1e-9);
    double cap = 1.0;
    while (m.d * std::exp(cap) <= 1e3 * std::max(1.0, c) * cap && cap < 700.0) cap *= 2.0;
    return cap;
}

} // namespace

double delta(const ReactionModel& m, double c, double lambda) {
    if (!(lambda < m.lambda_plus()))
        throw DomainError("delta: lambda at or beyond the moment abscissa");
    double val = c * lambda - m.d * (std::exp(lambda) + std::exp(-lambda) - 2.0) - m.df0.first;
    if (m.df0.second != 0.0)
        val -= m.df0.second * std::exp(-lambda * c * m.tau) * kernel_mgf(m.kernel, lambda);
    return val;
}

double delta_lambda(const ReactionModel& m, double c, double lambda) {
    if (!(lambda < m.lambda_plus()))
        throw DomainError("delta_lambda: lambda at or beyond the moment abscissa");
    double val = c - m.d * (std::exp(lambda) - std::exp(-lambda));
    if (m.df0.second != 0.0) {
        double damp = std::exp(-lambda * c * m.tau);
        val -= m.df0.second * damp *
               (kernel_mgf_d1(m.kernel, lambda) - c * m.tau * kernel_mgf(m.kernel, lambda));
    }
    return val;
}

double delta_lambda2(const ReactionModel& m, double c, double lambda) {
    if (!(lambda < m.lambda_plus()))
        throw DomainError("delta_lambda2: lambda at or beyond the moment abscissa");
    double val = -m.d * (std::exp(lambda) + std::exp(-lambda));
    if (m.df0.second != 0.0) {
        double ct = c * m.tau;
        double damp = std::exp(-lambda * ct);
        val -= m.df0.second * damp *
               (kernel_mgf_d2(m.kernel, lambda) - 2.0 * ct * kernel_mgf_d1(m.kernel, lambda) +
                ct * ct * kernel_mgf(m.kernel, lambda));
    }
    return val;
}

double delta_tilde(const ReactionModel& m, double c, double lambda) {
    if (!(std::fabs(lambda) < m.kernel.lambda0) && m.dfK.second != 0.0)
        throw DomainError("delta_tilde: divergent exponential moment at -lambda");
    double val = c * lambda + m.d * (std::exp(lambda) + std::exp(-lambda) - 2.0) + m.dfK.first;
    if (m.dfK.second != 0.0)
        val += m.dfK.second * std::exp(lambda * c * m.tau) * kernel_mgf(m.kernel, -lambda);
    return val;
}

double delta_tilde_lambda(const ReactionModel& m, double c, double lambda) {
    if (!(std::fabs(lambda) < m.kernel.lambda0) && m.dfK.second != 0.0)
        throw DomainError("delta_tilde_lambda: divergent exponential moment at -lambda");
    double val = c + m.d * (std::exp(lambda) - std::exp(-lambda));
    if (m.dfK.second != 0.0) {
        double grow = std::exp(lambda * c * m.tau);
        val += m.dfK.second * grow *
               (c * m.tau * kernel_mgf(m.kernel, -lambda) - kernel_mgf_d1(m.kernel, -lambda));
    }
    return val;
}

DeltaMax max_delta(const ReactionModel& m, double c) {
    double cap = lambda_cap(m, c);
    double a = 1e-12;
    auto dl = [&](double l) { return delta_lambda(m, c, l); };
    auto dl2 = [&](double l) { return delta_lambda2(m, c, l); };

    if (dl(a) <= 0.0) {
        // maximum sits at the left edge; the value there is essentially
        // delta(c, 0) < 0 (happens for very small c)
        return {a, delta(m, c, a)};
    }
    // expand geometrically to find where the slope turns negative
    double b = std::min(1.0, 0.5 * cap);
    while (dl(b) > 0.0) {
        double nb = std::min(b * 2.0, cap);
        if (nb == b)
            throw ConvergenceError("max_delta: no interior maximum below the lambda cap");
        b = nb;
        if (b == cap && dl(b) > 0.0)
            throw ConvergenceError("max_delta: slope stays positive up to the lambda cap");
    }
    RootResult r = find_root(dl, dl2, a, b);
    if (!r.converged) throw ConvergenceError("max_delta: stationary point search stalled");
    return {r.x, delta(m, c, r.x)};
}

SpeedResult minimal_speed(const ReactionModel& m) {
    // m(c) = max_lambda delta(c, lambda) is strictly increasing in c, so a
    // plain bisection on it is safe once a sign change is bracketed
    double c_lo = 1e-8;
    if (max_delta(m, c_lo).value >= 0.0)
        throw ConvergenceError("minimal_speed: characteristic max nonnegative at c ~ 0");
    double c_hi = 1.0;
    int k = 0;
    while (max_delta(m, c_hi).value <= 0.0) {
        c_hi *= 2.0;
        if (++k > 60) throw ConvergenceError("minimal_speed: no sign change while raising c");
    }
    double c_mid = 0.5 * (c_lo + c_hi);
    DeltaMax dm{};
    for (int it = 0; it < 300; ++it) {
        c_mid = 0.5 * (c_lo + c_hi);
        dm = max_delta(m, c_mid);
        if (std::fabs(dm.value) < 1e-12) break;
        if (dm.value < 0.0) c_lo = c_mid; else c_hi = c_mid;
        if (c_hi - c_lo < 1e-16 * c_hi) break;
    }
    if (std::fabs(dm.value) >= 1e-12)
        throw ConvergenceError("minimal_speed: bisection failed to flatten the maximum");

    SpeedResult out;
    out.c_star = c_mid;
    out.lambda_star = dm.lambda_hat;
    out.delta_residual = std::fabs(dm.value);
    out.dlambda_residual = std::fabs(delta_lambda(m, c_mid, dm.lambda_hat));
    return out;
}

RootSet lambda_roots(const ReactionModel& m, double c) {
    SpeedResult sp = minimal_speed(m);
    if (!(c > sp.c_star * (1.0 + 1e-9)))
        throw DomainError("lambda_roots: c must exceed the minimal speed");
    DeltaMax dm = max_delta(m, c);
    if (!(dm.value > 0.0))
        throw ConvergenceError("lambda_roots: characteristic max not positive above c*");

    auto f = [&](double l) { return delta(m, c, l); };
    auto fd = [&](double l) { return delta_lambda(m, c, l); };

    // left root: walk down from the maximum until the value is negative
    double lo = 0.5 * dm.lambda_hat;
    while (f(lo) >= 0.0) {
        lo *= 0.5;
        if (lo < 1e-300) throw ConvergenceError("lambda_roots: no sign change toward 0");
    }
    RootResult r1 = find_root(f, fd, lo, dm.lambda_hat);

    // right root: expand toward the cap
    double cap = lambda_cap(m, c);
    double hi = std::min(cap, dm.lambda_hat * 2.0);
    while (f(hi) >= 0.0) {
        double nh = std::min(cap, hi * 2.0);
        if (nh == hi) throw ConvergenceError("lambda_roots: no sign change below the lambda cap");
        hi = nh;
    }
    RootResult r2 = find_root(f, fd, dm.lambda_hat, hi);
    if (!r1.converged || !r2.converged)
        throw ConvergenceError("lambda_roots: root polish did not converge");

    RootSet out;
    out.c = c;
    out.lambda1 = r1.x;
    out.lambda2 = r2.x;
    out.upsilon = upsilon(m, c);
    return out;
}

double upsilon(const ReactionModel& m, double c) {
    if (!(c >= 0.0)) throw DomainError("upsilon: c must be nonnegative");
    auto f = [&](double l) { return delta_tilde(m, c, l); };
    auto fd = [&](double l) { return delta_tilde_lambda(m, c, l); };
    if (!(f(1e-8) < 0.0))
        throw ConvergenceError("upsilon: companion function not negative near 0");
    // the bracket expansion must stay below the moment abscissa when G(-l)
    // enters with a nonzero coefficient
    double cap = (m.dfK.second != 0.0 && std::isfinite(m.kernel.lambda0))
                     ? m.kernel.lambda0 * (1.0 - 1e-9)
                     : std::numeric_limits<double>::infinity();
    double hi = std::min(1.0, cap);
    int k = 0;
    while (f(hi) <= 0.0) {
        double nh = std::min(hi * 2.0, cap);
        if (nh == hi || ++k > 200)
            throw ConvergenceError("upsilon: no sign change below the moment abscissa");
        hi = nh;
    }
    RootResult r = find_root(f, fd, 1e-8, hi);
    if (!r.converged) throw ConvergenceError("upsilon: root polish did not converge");
    return r.x;
}

} // namespace latwave
