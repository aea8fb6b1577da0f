#pragma once

#include <cmath>
#include <functional>

#include "errors.hpp"

namespace latwave {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iters = 0;
    bool converged = false;
};

// Safeguarded Newton on a bracketed sign change. Falls back to bisection
// whenever the Newton step leaves the bracket or stalls, so a valid initial
// bracket guarantees convergence. f(lo) and f(hi) must have opposite signs.
inline RootResult find_root(const std::function<double(double)>& f,
                            const std::function<double(double)>& df,
                            double lo, double hi,
                            double xtol = 1e-14, double ftol = 1e-13,
                            int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    RootResult r;
    if (flo == 0.0) { r.x = lo; r.converged = true; return r; }
    if (fhi == 0.0) { r.x = hi; r.fx = 0.0; r.converged = true; return r; }
    if ((flo < 0.0) == (fhi < 0.0))
        throw DomainError("find_root: endpoints do not bracket a sign change");
    // orient so that f(a) < 0
    double a = lo, b = hi;
    if (flo > 0.0) { a = hi; b = lo; std::swap(flo, fhi); }
    double x = 0.5 * (a + b);
    for (int it = 0; it < max_iter; ++it) {
        double fx = f(x);
        r.iters = it + 1;
        if (fx < 0.0) a = x; else b = x;
        if (std::fabs(fx) <= ftol && std::fabs(b - a) <= xtol * (1.0 + std::fabs(x))) {
            r.x = x; r.fx = fx; r.converged = true;
            return r;
        }
        double step_lo = std::min(a, b), step_hi = std::max(a, b);
        double dfx = df ? df(x) : 0.0;
        double xn;
        if (dfx != 0.0 && std::isfinite(dfx)) {
            xn = x - fx / dfx;
            if (!(xn > step_lo && xn < step_hi)) xn = 0.5 * (a + b);
        } else {
            xn = 0.5 * (a + b);
        }
        if (xn == x) xn = 0.5 * (a + b);
        x = xn;
    }
    r.x = x;
    r.fx = f(x);
    r.converged = std::fabs(r.fx) <= ftol * 1e3;
    return r;
}

// Root of an increasing-through-zero function starting from a lower point
// where f < 0; the upper end is found by doubling. Used where only the lower
// endpoint of the bracket is known a priori.
inline RootResult find_root_expand(const std::function<double(double)>& f,
                                   const std::function<double(double)>& df,
                                   double lo, double hi0,
                                   double xtol = 1e-14, double ftol = 1e-13) {
    double hi = hi0;
    for (int k = 0; k < 200; ++k) {
        if (f(hi) > 0.0) return find_root(f, df, lo, hi, xtol, ftol);
        hi *= 2.0;
        if (!std::isfinite(hi)) break;
    }
    throw DomainError("find_root_expand: no sign change found while expanding the bracket");
}

} // namespace latwave
