#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "textio.hpp"

namespace latwave {

namespace {

RateFit lsq_line(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    RateFit f;
    f.nodes = static_cast<long>(x.size());
    f.rate = sxy / sxx;
    f.intercept = my - f.rate * mx;
    double ss_res = syy - sxy * sxy / sxx;
    f.r2 = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 0.0;
    return f;
}

double half_crossing(const GridFunction& g) {
    double half = 0.5 * g.K;
    for (long k = 0; k + 1 < g.grid.count(); ++k) {
        double a = g.values[static_cast<size_t>(k)];
        double b = g.values[static_cast<size_t>(k + 1)];
        if (a < half && b >= half)
            return g.grid.xi(k) + g.grid.spacing() * (half - a) / (b - a);
    }
    throw DomainError("profile has no half-height crossing inside the grid");
}

// Symmetric sup distance between a and b translated by s, probed on both
// node sets so the metric does not depend on the argument order.
double aligned_distance(const GridFunction& a, const GridFunction& b, double s) {
    double d = 0.0;
    for (long i = 0; i < a.grid.count(); ++i) {
        double xi = a.grid.xi(i);
        d = std::max(d, std::abs(a.values[static_cast<size_t>(i)] - b.eval(xi + s)));
    }
    for (long j = 0; j < b.grid.count(); ++j) {
        double xj = b.grid.xi(j);
        d = std::max(d, std::abs(b.values[static_cast<size_t>(j)] - a.eval(xj - s)));
    }
    return d;
}

} // namespace

RateFit fit_left_rate(const GridFunction& phi, bool critical_form) {
    double lo = 1e-6 * phi.K, hi = 1e-2 * phi.K;
    std::vector<double> xs, ys;
    for (long i = 0; i < phi.grid.count(); ++i) {
        double v = phi.values[static_cast<size_t>(i)];
        if (v < lo || v > hi) continue;
        double xi = phi.grid.xi(i);
        if (critical_form) {
            if (std::abs(xi) < 1e-8) continue;
            ys.push_back(std::log(v) - std::log(std::abs(xi)));
        } else {
            ys.push_back(std::log(v));
        }
        xs.push_back(xi);
    }
    if (xs.size() < 10) throw WindowError("left rate window holds fewer than 10 nodes");
    return lsq_line(xs, ys);
}

RateFit fit_right_rate(const GridFunction& phi) {
    double lo = 1e-6 * phi.K, hi = 1e-2 * phi.K;
    std::vector<double> xs, ys;
    for (long i = 0; i < phi.grid.count(); ++i) {
        double gap = phi.K - phi.values[static_cast<size_t>(i)];
        if (gap < lo || gap > hi) continue;
        xs.push_back(phi.grid.xi(i));
        ys.push_back(std::log(gap));
    }
    if (xs.size() < 10) throw WindowError("right rate window holds fewer than 10 nodes");
    RateFit f = lsq_line(xs, ys);
    f.rate = -f.rate;
    return f;
}

DecayRates estimate_decay_rates(const WaveProfile& p) {
    DecayRates r;
    r.left = fit_left_rate(p.phi, p.critical);
    r.right = fit_right_rate(p.phi);
    return r;
}

AlignResult align_profiles(const GridFunction& a, const GridFunction& b) {
    double s0 = half_crossing(b) - half_crossing(a);
    double lo = s0 - 1.0, hi = s0 + 1.0;
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = aligned_distance(a, b, x1);
    double f2 = aligned_distance(a, b, x2);
    for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = aligned_distance(a, b, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = aligned_distance(a, b, x2);
        }
    }
    AlignResult r;
    r.shift = f1 <= f2 ? x1 : x2;
    r.sup_distance = std::min(f1, f2);
    return r;
}

AlignResult align_profiles(const WaveProfile& a, const WaveProfile& b) {
    return align_profiles(a.phi, b.phi);
}

VerificationReport verify_profile(const WaveProfile& p) {
    VerificationReport rep;
    const double K = p.phi.K;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    {
        VerificationCheck c;
        c.name = "values_strictly_interior";
        double worst = std::numeric_limits<double>::infinity();
        for (double v : p.phi.values) worst = std::min(worst, std::min(v, K - v));
        c.measured = worst;
        c.target = 0.0;
        c.tolerance = 0.0;
        c.passed = worst > 0.0;
        rep.checks.push_back(c);
    }
    {
        VerificationCheck c;
        c.name = "nodes_strictly_increasing";
        double worst = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 1 < p.phi.values.size(); ++i)
            worst = std::min(worst, p.phi.values[i + 1] - p.phi.values[i]);
        c.measured = worst;
        c.target = 0.0;
        c.tolerance = 0.0;
        c.passed = worst > 0.0;
        rep.checks.push_back(c);
    }
    {
        VerificationCheck c;
        c.name = "residual_sup";
        ResidualField res = wave_residual(p.model, p.c, p.phi);
        c.measured = res.interior_sup;
        c.target = 0.0;
        c.tolerance = 1e-6 * K;
        c.passed = c.measured <= c.tolerance;
        rep.residual_norm = c.measured;
        rep.checks.push_back(c);
    }
    {
        VerificationCheck c;
        c.name = "fixed_point_gap";
        double mu = p.mu > 0.0 ? p.mu : 1.05 * mu_lower_bound(p.model, p.c);
        GridFunction applied = apply_T_mu(p.model, p.c, mu, p.phi);
        double gap = 0.0;
        for (size_t i = 0; i < applied.values.size(); ++i)
            gap = std::max(gap, std::abs(applied.values[i] - p.phi.values[i]));
        c.measured = gap;
        c.target = 0.0;
        c.tolerance = 1e-8 * K;
        c.passed = gap <= c.tolerance;
        rep.fixed_point_gap = gap;
        rep.checks.push_back(c);
    }
    {
        VerificationCheck c;
        c.name = "left_tail_rate";
        c.target = p.critical ? p.lambda_star : p.lambda1;
        c.tolerance = 0.02 * c.target;
        try {
            RateFit f = fit_left_rate(p.phi, p.critical);
            c.measured = f.rate;
            c.passed = std::abs(f.rate - c.target) <= c.tolerance;
            c.inconclusive = f.r2 < 0.9999;
        } catch (const WindowError&) {
            c.measured = nan;
            c.passed = false;
            c.inconclusive = true;
        }
        rep.checks.push_back(c);
    }
    {
        VerificationCheck c;
        c.name = "right_tail_rate";
        c.target = p.upsilon;
        c.tolerance = 0.02 * c.target;
        try {
            RateFit f = fit_right_rate(p.phi);
            c.measured = f.rate;
            c.passed = std::abs(f.rate - c.target) <= c.tolerance;
            c.inconclusive = f.r2 < 0.9999;
        } catch (const WindowError&) {
            c.measured = nan;
            c.passed = false;
            c.inconclusive = true;
        }
        rep.checks.push_back(c);
    }
    if (p.normalized) {
        VerificationCheck c;
        c.name = "half_height_centering";
        c.measured = std::abs(p.phi.eval(0.0) - 0.5 * K);
        c.target = 0.0;
        c.tolerance = 1e-9 * K;
        c.passed = c.measured <= c.tolerance;
        rep.checks.push_back(c);
    }

    rep.passed = true;
    for (const VerificationCheck& c : rep.checks)
        if (!c.passed && !c.inconclusive) rep.passed = false;
    return rep;
}

std::string verification_report_json(const VerificationReport& r) {
    JsonObj o;
    o.boolean("passed", r.passed);
    o.num("residual_norm", r.residual_norm);
    o.num("fixed_point_gap", r.fixed_point_gap);
    std::vector<std::string> rows;
    for (const VerificationCheck& c : r.checks) {
        JsonObj e;
        e.str("name", c.name);
        e.boolean("passed", c.passed);
        e.boolean("inconclusive", c.inconclusive);
        e.num("measured", c.measured);
        e.num("target", c.target);
        e.num("tolerance", c.tolerance);
        rows.push_back(e.inline_build());
    }
    o.raw("checks", json_array(rows));
    return o.build();
}

} // namespace latwave
