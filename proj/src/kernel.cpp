#include "kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace latwave {

const char* kernel_kind_name(KernelKind k) {
    switch (k) {
        case KernelKind::dirac: return "dirac";
        case KernelKind::gaussian: return "gaussian";
        case KernelKind::uniform: return "uniform";
        case KernelKind::tabulated: return "tabulated";
    }
    return "?";
}

double KernelSpec::support_radius() const {
    switch (kind) {
        case KernelKind::dirac: return 0.0;
        case KernelKind::gaussian: return std::numeric_limits<double>::infinity();
        case KernelKind::uniform: return half_width;
        case KernelKind::tabulated:
            return table_y.empty() ? 0.0 : std::max(std::fabs(table_y.front()), std::fabs(table_y.back()));
    }
    return 0.0;
}

namespace {

// sinh(x)/x with the removable singularity handled by series.
double sinhc(double x) {
    if (std::fabs(x) < 1e-4) {
        double x2 = x * x;
        return 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0);
    }
    return std::sinh(x) / x;
}

// d/dlambda [sinh(a l)/(a l)] = a*(u cosh u - sinh u)/u^2, u = a*lambda.
double sinhc_d1(double a, double lambda) {
    double u = a * lambda;
    if (std::fabs(u) < 1e-3) {
        double u2 = u * u;
        return a * (u / 3.0) * (1.0 + u2 / 10.0);
    }
    return a * (u * std::cosh(u) - std::sinh(u)) / (u * u);
}

double sinhc_d2(double a, double lambda) {
    double u = a * lambda;
    if (std::fabs(u) < 1e-2) {
        double u2 = u * u;
        return a * a * (1.0 / 3.0 + u2 / 10.0 * (1.0 + u2 / 9.333333333333334));
    }
    return a * a * ((u * u + 2.0) * std::sinh(u) - 2.0 * u * std::cosh(u)) / (u * u * u);
}

// Piecewise-linear density value for tabulated kernels.
double table_density(const KernelSpec& k, double y) {
    const auto& ys = k.table_y;
    const auto& hs = k.table_h;
    if (y <= ys.front() || y >= ys.back()) return 0.0;
    auto it = std::upper_bound(ys.begin(), ys.end(), y);
    size_t i = static_cast<size_t>(it - ys.begin());
    double t = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
    return hs[i - 1] + t * (hs[i] - hs[i - 1]);
}

// Adaptive Simpson on [a,b]; integrand must be smooth there.
double adapt_simpson(const std::function<double(double)>& f, double a, double b,
                     double fa, double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt_simpson(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adapt_simpson(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double integrate_segment(const std::function<double(double)>& f, double a, double b, double tol) {
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adapt_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Moment of order p (0, 1 or 2) of h(y)e^{-lambda y} over the table support.
double table_exp_moment(const KernelSpec& k, double lambda, int p) {
    double total = 0.0;
    for (size_t i = 0; i + 1 < k.table_y.size(); ++i) {
        double a = k.table_y[i], b = k.table_y[i + 1];
        if (b <= a) continue;
        auto f = [&](double y) {
            double v = table_density(k, y) * std::exp(-lambda * y);
            if (p == 1) v *= -y;
            if (p == 2) v *= y * y;
            return v;
        };
        total += integrate_segment(f, a, b, 1e-13);
    }
    return total;
}

} // namespace

double kernel_mgf(const KernelSpec& k, double lambda) {
    if (std::fabs(lambda) >= k.lambda0)
        throw DomainError("kernel_mgf: |lambda| at or beyond the moment abscissa");
    switch (k.kind) {
        case KernelKind::dirac: return 1.0;
        case KernelKind::gaussian: return std::exp(0.5 * lambda * lambda * k.variance);
        case KernelKind::uniform: return sinhc(k.half_width * lambda);
        case KernelKind::tabulated: return table_exp_moment(k, lambda, 0);
    }
    return 1.0;
}

double kernel_mgf_d1(const KernelSpec& k, double lambda) {
    if (std::fabs(lambda) >= k.lambda0)
        throw DomainError("kernel_mgf_d1: |lambda| at or beyond the moment abscissa");
    switch (k.kind) {
        case KernelKind::dirac: return 0.0;
        case KernelKind::gaussian:
            return lambda * k.variance * std::exp(0.5 * lambda * lambda * k.variance);
        case KernelKind::uniform: return sinhc_d1(k.half_width, lambda);
        case KernelKind::tabulated: return table_exp_moment(k, lambda, 1);
    }
    return 0.0;
}

double kernel_mgf_d2(const KernelSpec& k, double lambda) {
    if (std::fabs(lambda) >= k.lambda0)
        throw DomainError("kernel_mgf_d2: |lambda| at or beyond the moment abscissa");
    switch (k.kind) {
        case KernelKind::dirac: return 0.0;
        case KernelKind::gaussian: {
            double v = k.variance;
            return (v + lambda * lambda * v * v) * std::exp(0.5 * lambda * lambda * v);
        }
        case KernelKind::uniform: return sinhc_d2(k.half_width, lambda);
        case KernelKind::tabulated: return table_exp_moment(k, lambda, 2);
    }
    return 0.0;
}

namespace {

// Exact integral of the piecewise-linear table density over [a,b].
double table_cell_mass(const KernelSpec& k, double a, double b) {
    const auto& ys = k.table_y;
    double total = 0.0;
    // walk the breakpoints inside [a,b]; the density is linear in between
    double x = a;
    while (x < b) {
        auto it = std::upper_bound(ys.begin(), ys.end(), x);
        double nxt = (it == ys.end()) ? b : std::min(b, *it);
        if (nxt <= x) nxt = b;
        double mid = 0.5 * (x + nxt);
        total += table_density(k, mid) * (nxt - x);
        x = nxt;
    }
    return total;
}

} // namespace

KernelWeights kernel_weights(const KernelSpec& k, double spacing, double mass_tol) {
    return kernel_weights_shifted(k, spacing, mass_tol, 0.0);
}

KernelWeights kernel_weights_shifted(const KernelSpec& k, double spacing, double mass_tol,
                                     double shift) {
    if (!(spacing > 0.0)) throw DomainError("kernel_weights: spacing must be positive");
    if (!(mass_tol > 0.0) || mass_tol > 1e-3)
        throw DomainError("kernel_weights: mass_tol must lie in (0, 1e-3]");
    if (!(shift >= 0.0) || shift >= spacing)
        throw DomainError("kernel_weights: shift must lie in [0, spacing)");

    KernelWeights out;
    out.spacing = spacing;

    if (k.kind == KernelKind::dirac) {
        // a point mass cannot be placed between nodes; callers interpolate
        if (shift != 0.0)
            throw DomainError("kernel_weights: dirac kernel does not admit a fractional shift");
        out.reach = 0;
        out.w = {1.0};
        return out;
    }

    long reach = 0;
    if (k.kind == KernelKind::gaussian) {
        // smallest R with two-sided tail mass below mass_tol: erfc bound
        double sd = std::sqrt(k.variance);
        double x = 1.0;
        while (std::erfc(x / std::sqrt(2.0)) > mass_tol && x < 60.0) x += 1e-3;
        reach = static_cast<long>(std::ceil(x * sd / spacing));
    } else {
        reach = static_cast<long>(std::ceil(k.support_radius() / spacing));
    }
    if (reach < 1) reach = 1;
    if (shift != 0.0) ++reach;  // the shifted stencil loses node alignment

    auto density_weight = [&](double y) {
        double v = 0.0;
        switch (k.kind) {
            case KernelKind::gaussian:
                // plain samples: the trapezoid sum of an analytic rapidly
                // decaying density is accurate far beyond the cell average,
                // uniformly in the sample-grid offset
                v = spacing * std::exp(-0.5 * y * y / k.variance) /
                    std::sqrt(2.0 * M_PI * k.variance);
                break;
            case KernelKind::uniform: {
                double a = std::max(-k.half_width, y - 0.5 * spacing);
                double b = std::min(k.half_width, y + 0.5 * spacing);
                v = (b > a) ? (b - a) / (2.0 * k.half_width) : 0.0;
                break;
            }
            case KernelKind::tabulated: {
                double a = std::max(k.table_y.front(), y - 0.5 * spacing);
                double b = std::min(k.table_y.back(), y + 0.5 * spacing);
                v = (b > a) ? table_cell_mass(k, a, b) : 0.0;
                break;
            }
            case KernelKind::dirac: break;
        }
        return v;
    };

    std::vector<double> w(static_cast<size_t>(2 * reach + 1), 0.0);
    if (shift == 0.0) {
        // mirror so even symmetry holds bit-exactly
        for (long j = 0; j <= reach; ++j) {
            double v = density_weight(static_cast<double>(j) * spacing);
            w[static_cast<size_t>(reach + j)] = v;
            w[static_cast<size_t>(reach - j)] = v;
        }
    } else {
        for (long j = -reach; j <= reach; ++j)
            w[static_cast<size_t>(reach + j)] =
                density_weight(static_cast<double>(j) * spacing - shift);
    }

    // renormalize; nudge the center weight until the running sum is exactly 1
    double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(s > 0.0)) throw DomainError("kernel_weights: zero total mass on the stencil");
    for (auto& x : w) x /= s;
    for (int pass = 0; pass < 4; ++pass) {
        double t = std::accumulate(w.begin(), w.end(), 0.0);
        if (t == 1.0) break;
        w[static_cast<size_t>(reach)] += 1.0 - t;
    }

    out.reach = reach;
    out.w = std::move(w);
    return out;
}

} // namespace latwave
