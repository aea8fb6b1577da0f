#include "waveops.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "errors.hpp"
#include "textio.hpp"

namespace latwave {

GridSpec GridSpec::make(double half_length, long m) {
    if (!(half_length > 0.0)) throw DomainError("GridSpec: half_length must be positive");
    if (m < 2) throw DomainError("GridSpec: spacing must be 1/m with m >= 2");
    GridSpec g;
    g.m = m;
    g.n_half = static_cast<long>(std::ceil(half_length * static_cast<double>(m) - 1e-9));
    if (g.n_half < m) g.n_half = m;  // cover at least [-1, 1]
    return g;
}

double GridFunction::value_at_index(long i) const {
    long n = grid.count();
    if (i >= 0 && i < n) return values[static_cast<size_t>(i)];
    if (i < 0) {
        if (left_tail == TailKind::constant) return values.front();
        double dxi = static_cast<double>(i) / static_cast<double>(grid.m);
        if (left_rate2 > 0.0)
            return (values.front() - left_coef2) * std::exp(left_rate * dxi) +
                   left_coef2 * std::exp(left_rate2 * dxi);
        return values.front() * std::exp(left_rate * dxi);
    }
    if (right_tail == TailKind::constant) return values.back();
    double dxi = static_cast<double>(i - (n - 1)) / static_cast<double>(grid.m);
    return K - (K - values.back()) * std::exp(-right_rate * dxi);
}

double GridFunction::eval(double xi) const {
    double lo = grid.xi_min(), hi = grid.xi_max();
    if (xi <= lo) {
        if (left_tail == TailKind::constant) return values.front();
        if (left_rate2 > 0.0)
            return (values.front() - left_coef2) * std::exp(left_rate * (xi - lo)) +
                   left_coef2 * std::exp(left_rate2 * (xi - lo));
        return values.front() * std::exp(left_rate * (xi - lo));
    }
    if (xi >= hi) {
        if (right_tail == TailKind::constant) return values.back();
        return K - (K - values.back()) * std::exp(-right_rate * (xi - hi));
    }
    double t = (xi - lo) * static_cast<double>(grid.m);
    long i = static_cast<long>(t);
    if (i > grid.count() - 2) i = grid.count() - 2;
    double fr = t - static_cast<double>(i);
    double a = values[static_cast<size_t>(i)];
    double b = values[static_cast<size_t>(i + 1)];
    return a + fr * (b - a);
}

GridFunction constant_grid_function(const GridSpec& g, double value, double K) {
    GridFunction f;
    f.grid = g;
    f.values.assign(static_cast<size_t>(g.count()), value);
    f.K = K;
    f.left_tail = TailKind::constant;
    f.right_tail = TailKind::constant;
    return f;
}

// ------------------------------------------------------------------- CSV io

void write_grid_csv(const GridFunction& g, std::ostream& os, double c) {
    if (std::isfinite(c)) os << "# c = " << fmt17(c) << "\n";
    os << "# K = " << fmt17(g.K) << "\n";
    os << "# left_rate = " << fmt17(g.left_rate) << "\n";
    os << "# right_rate = " << fmt17(g.right_rate) << "\n";
    if (g.left_rate2 > 0.0) {
        os << "# left_rate2 = " << fmt17(g.left_rate2) << "\n";
        os << "# left_coef2 = " << fmt17(g.left_coef2) << "\n";
    }
    if (g.left_tail == TailKind::constant) os << "# left_tail = constant\n";
    if (g.right_tail == TailKind::constant) os << "# right_tail = constant\n";
    os << "xi,value\n";
    for (long i = 0; i < g.grid.count(); ++i)
        os << fmt12(g.grid.xi(i)) << "," << fmt12(g.values[static_cast<size_t>(i)]) << "\n";
}

void write_grid_csv(const GridFunction& g, const std::string& path, double c) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_grid_csv(g, out, c);
    if (!out) throw IoError("write failed for '" + path + "'");
}

GridFunction read_grid_csv(std::istream& is, double* c_out) {
    GridFunction g;
    bool have_K = false;
    if (c_out) *c_out = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> xs, vs;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            std::string meta = line.substr(1);
            size_t eq = meta.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                size_t b = s.find_first_not_of(" \t\r");
                size_t e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            std::string key = trim(meta.substr(0, eq));
            std::string val = trim(meta.substr(eq + 1));
            if (key == "c" && c_out) *c_out = std::strtod(val.c_str(), nullptr);
            else if (key == "K") { g.K = std::strtod(val.c_str(), nullptr); have_K = true; }
            else if (key == "left_rate") g.left_rate = std::strtod(val.c_str(), nullptr);
            else if (key == "right_rate") g.right_rate = std::strtod(val.c_str(), nullptr);
            else if (key == "left_rate2") g.left_rate2 = std::strtod(val.c_str(), nullptr);
            else if (key == "left_coef2") g.left_coef2 = std::strtod(val.c_str(), nullptr);
            else if (key == "left_tail" && val == "constant") g.left_tail = TailKind::constant;
            else if (key == "right_tail" && val == "constant") g.right_tail = TailKind::constant;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;  // header row
        std::string s = line;
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream row(s);
        double x, v;
        if (!(row >> x >> v))
            throw ValidationError("grid CSV line " + std::to_string(lineno) +
                                  ": expected xi,value");
        xs.push_back(x);
        vs.push_back(v);
    }
    if (xs.size() < 3 || xs.size() % 2 == 0)
        throw ValidationError("grid CSV needs an odd node count of at least 3");
    double h = xs[1] - xs[0];
    if (!(h > 0.0)) throw ValidationError("grid CSV nodes must be increasing");
    long m = static_cast<long>(std::llround(1.0 / h));
    if (m < 2 || std::fabs(h * static_cast<double>(m) - 1.0) > 1e-9)
        throw ValidationError("grid CSV spacing must be 1/m for integer m >= 2");
    for (size_t i = 1; i < xs.size(); ++i)
        if (std::fabs(xs[i] - xs[i - 1] - h) > 1e-9)
            throw ValidationError("grid CSV spacing must be uniform");
    long n_half = (static_cast<long>(xs.size()) - 1) / 2;
    if (std::fabs(xs[static_cast<size_t>(n_half)]) > 1e-9)
        throw ValidationError("grid CSV nodes must be symmetric about 0");
    g.grid.m = m;
    g.grid.n_half = n_half;
    g.values = std::move(vs);
    if (!have_K) g.K = *std::max_element(g.values.begin(), g.values.end());
    // a second tail component must decay faster than the first and must
    // leave a positive leading coefficient; drop a malformed one
    if (g.left_rate2 != 0.0 &&
        (!(g.left_rate2 > g.left_rate) || !std::isfinite(g.left_coef2) ||
         !(g.values.front() - g.left_coef2 > 0.0))) {
        g.left_rate2 = 0.0;
        g.left_coef2 = 0.0;
    }
    return g;
}

GridFunction read_grid_csv(const std::string& path, double* c_out) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_grid_csv(in, c_out);
}

// ---------------------------------------------------------------- operators

double discrete_laplacian(const GridFunction& phi, long i) {
    return phi.value_at_index(i + phi.grid.m) - 2.0 * phi.value_at_index(i) +
           phi.value_at_index(i - phi.grid.m);
}

double convolve_delayed(const GridFunction& phi, const KernelWeights& w, double c, double tau,
                        long i) {
    if (std::fabs(w.spacing - phi.grid.spacing()) > 1e-12)
        throw DomainError("convolve_delayed: weight spacing does not match the grid");
    double delay = c * tau;
    double out = 0.0;
    if (delay == 0.0) {
        for (long k = -w.reach; k <= w.reach; ++k)
            out += w.weight(k) * phi.value_at_index(i - k);
    } else {
        double xi = phi.grid.xi(i) - delay;
        for (long k = -w.reach; k <= w.reach; ++k)
            out += w.weight(k) * phi.eval(xi - static_cast<double>(k) * w.spacing);
    }
    return out;
}

double mu_lower_bound(const ReactionModel& m, double c) {
    if (!(c > 0.0)) throw DomainError("mu_lower_bound: c must be positive");
    const int n = 65;
    double mx = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = m.K * i / (n - 1.0);
        for (int j = 0; j < n; ++j) {
            double v = m.K * j / (n - 1.0);
            mx = std::max(mx, std::max(std::fabs(m.f_u(u, v)), std::fabs(m.f_v(u, v))));
        }
    }
    return (2.0 * m.d + mx) / c;
}

namespace {

// Node-only evaluation of (h*phi)(xi_i - c*tau). The delay splits into a
// whole-node shift D and a fractional remainder rho*h; the remainder is
// folded into the kernel stencil itself, so every read is a plain node value
// under a nonnegative weight and the operator stays order-preserving. A
// point-mass kernel admits no shifted stencil; there the fractional read is
// log-linear between the two straddling nodes, which is exact on
// exponentials and monotone in both node values, with a linear fallback when
// a node is not strictly positive.
struct DelayedStencil {
    long whole = 0;    // integer part of the delay, in nodes
    double frac = 0.0; // fractional remainder, in node units, in [0,1)
    bool point_interp = false;
    KernelWeights kw;

    DelayedStencil(const ReactionModel& m, double c, double h) {
        double t = c * m.tau / h;
        whole = static_cast<long>(std::floor(t));
        frac = t - static_cast<double>(whole);
        if (frac < 1e-9) {
            frac = 0.0;
        } else if (frac > 1.0 - 1e-9) {
            frac = 0.0;
            ++whole;
        }
        if (m.kernel.kind == KernelKind::dirac && frac != 0.0) {
            point_interp = true;
            kw = kernel_weights(m.kernel, h, 1e-10);
        } else {
            kw = kernel_weights_shifted(m.kernel, h, 1e-10, frac * h);
        }
    }

    // widest node offsets read relative to the target node
    long reach_left() const { return whole + kw.reach + (point_interp ? 1 : 0); }
    long reach_right() const { return kw.reach - whole; }

    // S holds node values indexed j - j_base; i is the target node index
    double conv(const std::vector<double>& S, long j_base, long i) const {
        long p = i - whole;
        if (point_interp) {
            double ur = S[static_cast<size_t>(p - j_base)];
            double ul = S[static_cast<size_t>(p - 1 - j_base)];
            if (ur > 0.0 && ul > 0.0)
                return std::exp((1.0 - frac) * std::log(ur) + frac * std::log(ul));
            return (1.0 - frac) * ur + frac * ul;
        }
        double out = 0.0;
        for (long k = -kw.reach; k <= kw.reach; ++k)
            out += kw.weight(k) * S[static_cast<size_t>(p - k - j_base)];
        return out;
    }
};

} // namespace

ResidualField wave_residual(const ReactionModel& m, double c, const GridFunction& phi) {
    const GridSpec& gs = phi.grid;
    long n = gs.count();
    double h = gs.spacing();
    double delay = c * m.tau;
    DelayedStencil ds(m, c, h);

    // node values once over the widened range the stencil touches
    long j0 = -ds.reach_left(), j1 = n - 1 + ds.kw.reach;
    std::vector<double> S(static_cast<size_t>(j1 - j0 + 1));
    for (long j = j0; j <= j1; ++j)
        S[static_cast<size_t>(j - j0)] = phi.value_at_index(j);

    ResidualField out;
    out.grid = gs;
    out.values.resize(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) {
        // 4th order first derivative so the residual reflects the operator,
        // not the differencing
        double dphi = (-phi.value_at_index(i + 2) + 8.0 * phi.value_at_index(i + 1) -
                       8.0 * phi.value_at_index(i - 1) + phi.value_at_index(i - 2)) /
                      (12.0 * h);
        double lap = discrete_laplacian(phi, i);
        double conv = ds.conv(S, j0, i);
        out.values[static_cast<size_t>(i)] =
            c * dphi - m.d * lap - m.f(phi.values[static_cast<size_t>(i)], conv);
    }

    double band = 1.0 + delay + static_cast<double>(ds.kw.reach) * h + 2.0 * h;
    long skip = static_cast<long>(std::ceil(band * static_cast<double>(gs.m) - 1e-9));
    out.trusted_lo = skip;
    out.trusted_hi = n - 1 - skip;
    double sup = 0.0;
    for (long i = out.trusted_lo; i <= out.trusted_hi; ++i)
        sup = std::max(sup, std::fabs(out.values[static_cast<size_t>(i)]));
    out.interior_sup = sup;
    return out;
}

namespace {

// Weights of integral_0^{2h} l_k(t) e^{-mu(2h-t)} dt for the quadratic
// Lagrange basis on nodes {0, h, 2h}. Reduces to Simpson as mu -> 0; the
// center and right weights are always positive, the left one turns negative
// once mu*h grows past about 2.
void pair_weights_quadratic(double h, double mu, double w[3]) {
    double a = 2.0 * h, x = mu * a;
    double M0, M1, M2;  // integral of t^p e^{-mu(a-t)} over [0,a]
    if (x < 0.5) {
        // all-positive series, no cancellation
        double S0 = 0.0, S1 = 0.0, S2 = 0.0, term = 1.0;
        for (int k = 0; k < 40; ++k) {
            S0 += term / (k + 1.0);
            S1 += term / (k + 2.0);
            S2 += term / (k + 3.0);
            term *= x / (k + 1.0);
            if (term < 1e-20) break;
        }
        double ea = std::exp(-x);
        M0 = a * ea * S0;
        M1 = a * a * ea * S1;
        M2 = a * a * a * ea * S2;
    } else {
        M0 = -std::expm1(-x) / mu;
        M1 = (a - M0) / mu;
        M2 = (a * a - 2.0 * M1) / mu;
    }
    w[0] = (M2 - 3.0 * h * M1 + 2.0 * h * h * M0) / (2.0 * h * h);
    w[1] = (2.0 * h * M1 - M2) / (h * h);
    w[2] = (M2 - h * M1) / (2.0 * h * h);
}

// Same pair integral, exact on the basis {1, e^{rt}, e^{2rt}} instead of
// polynomials. With r set to the tail decay rate the march picks up no
// interpolation bias on an exponential tail, where the bracketing margins
// are far below the polynomial-rule error. Needs r*h large enough that the
// Vandermonde differences survive in double precision.
void pair_weights_exponential(double h, double mu, double r, double w[3]) {
    double a = 2.0 * h;
    double E2 = std::exp(-mu * a);
    double M0 = E2 * std::expm1(mu * a) / mu;
    double Mr = E2 * std::expm1((mu + r) * a) / (mu + r);
    double M2r = E2 * std::expm1((mu + 2.0 * r) * a) / (mu + 2.0 * r);
    double x = std::exp(r * h);
    double x2 = x * x;
    w[0] = (M2r - (x + x2) * Mr + x * x2 * M0) / ((1.0 - x) * (1.0 - x2));
    w[1] = (M2r - (1.0 + x2) * Mr + x2 * M0) / ((x - 1.0) * (x - x2));
    w[2] = (M2r - (1.0 + x) * Mr + x * M0) / ((x2 - 1.0) * (x2 - x));
}

// Same pair integral with the piecewise linear interpolant; strictly
// positive for every mu, used as the fallback when the quadratic weights
// lose positivity.
void pair_weights_linear(double h, double mu, double w[3]) {
    double x = mu * h;
    double n0, n1;  // integral of t^p e^{-mu(h-t)} over [0,h]
    if (x < 0.5) {
        double S0 = 0.0, S1 = 0.0, term = 1.0;
        for (int k = 0; k < 40; ++k) {
            S0 += term / (k + 1.0);
            S1 += term / (k + 2.0);
            term *= x / (k + 1.0);
            if (term < 1e-20) break;
        }
        double eh = std::exp(-x);
        n0 = h * eh * S0;
        n1 = h * h * eh * S1;
    } else {
        n0 = -std::expm1(-x) / mu;
        n1 = (h - n0) / mu;
    }
    double eh = std::exp(-x);
    w[0] = eh * (n0 - n1 / h);
    w[1] = eh * (n1 / h) + (n0 - n1 / h);
    w[2] = n1 / h;
}

} // namespace

GridFunction apply_T_mu(const ReactionModel& mdl, double c, double mu, const GridFunction& phi,
                        bool* low_order) {
    if (!(c > 0.0)) throw DomainError("apply_T_mu: c must be positive");
    if (!(mu > mu_lower_bound(mdl, c)))
        throw DomainError("apply_T_mu: mu must exceed the order-preservation bound");

    const GridSpec& gs = phi.grid;
    long n = gs.count();
    double h = gs.spacing();
    double delay = c * mdl.tau;

    // virtual pre-roll: extend the chain left until the exponential weight
    // of everything beyond it is under 1e-14
    long V = static_cast<long>(std::ceil(14.0 * std::log(10.0) / (mu * h)));
    V += V & 1L;
    if (V < 4) V = 4;

    DelayedStencil ds(mdl, c, h);

    // node values over the widened index range the stencil touches
    long j0 = -V - ds.reach_left(), j1 = n - 1 + ds.kw.reach;
    std::vector<double> S(static_cast<size_t>(j1 - j0 + 1));
    for (long j = j0; j <= j1; ++j)
        S[static_cast<size_t>(j - j0)] = phi.value_at_index(j);

    long total = V + n;
    std::vector<double> H(static_cast<size_t>(total));
    double cmu = c * mu;
    for (long s = 0; s < total; ++s) {
        long i = s - V;
        double u = phi.value_at_index(i);
        double lap = phi.value_at_index(i + gs.m) - 2.0 * u + phi.value_at_index(i - gs.m);
        H[static_cast<size_t>(s)] = mdl.d * lap + mdl.f(u, ds.conv(S, j0, i)) + cmu * u;
    }

    double w[3];
    bool positive = false;
    if (phi.left_tail == TailKind::exponential && phi.left_rate * h >= 1e-3) {
        pair_weights_exponential(h, mu, phi.left_rate, w);
        positive = w[0] > 0.0 && w[1] > 0.0 && w[2] > 0.0;
    }
    if (!positive) {
        pair_weights_quadratic(h, mu, w);
        positive = w[0] > 0.0 && w[1] > 0.0 && w[2] > 0.0;
    }
    bool fallback = !positive;
    if (fallback) pair_weights_linear(h, mu, w);
    if (low_order) *low_order = fallback;
    double E2 = std::exp(-2.0 * mu * h);

    // seeds: closed-form value of the integral at the two deepest virtual
    // nodes, where the tail extension is exact
    std::vector<double> T(static_cast<size_t>(total));
    for (long s = 0; s < 2; ++s) {
        long i = s - V;
        if (phi.left_tail == TailKind::exponential && phi.left_rate < mdl.kernel.lambda0) {
            double r = phi.left_rate;
            double kr = mdl.d * (std::exp(r) + std::exp(-r) - 2.0) + mdl.df0.first + cmu;
            if (mdl.df0.second != 0.0)
                kr += mdl.df0.second * std::exp(-r * delay) * kernel_mgf(mdl.kernel, r);
            T[static_cast<size_t>(s)] = phi.value_at_index(i) * kr / (c * (mu + r));
        } else {
            // constant tail: H is flat to the left, the integral telescopes
            T[static_cast<size_t>(s)] = H[static_cast<size_t>(s)] / cmu;
        }
    }
    for (long s = 2; s < total; ++s)
        T[static_cast<size_t>(s)] =
            E2 * T[static_cast<size_t>(s - 2)] +
            (w[0] * H[static_cast<size_t>(s - 2)] + w[1] * H[static_cast<size_t>(s - 1)] +
             w[2] * H[static_cast<size_t>(s)]) /
                c;

    GridFunction out = phi;
    for (long i = 0; i < n; ++i) {
        double v = T[static_cast<size_t>(V + i)];
        out.values[static_cast<size_t>(i)] = std::min(out.K, std::max(0.0, v));
    }
    if (out.left_tail == TailKind::exponential && out.left_rate2 > 0.0) {
        // unlike the leading rate, the second component is not a root of the
        // dispersion function, so one application scales it by the closed-form
        // factor of the linearization about 0
        double r2 = out.left_rate2;
        if (r2 < mdl.kernel.lambda0 && out.left_coef2 != 0.0) {
            double k2 = mdl.d * (std::exp(r2) + std::exp(-r2) - 2.0) + mdl.df0.first + cmu;
            if (mdl.df0.second != 0.0)
                k2 += mdl.df0.second * std::exp(-r2 * delay) * kernel_mgf(mdl.kernel, r2);
            out.left_coef2 *= k2 / (c * (mu + r2));
        }
        if (!(out.left_coef2 != 0.0) || r2 >= mdl.kernel.lambda0 ||
            !(out.values.front() - out.left_coef2 > 0.0)) {
            out.left_rate2 = 0.0;
            out.left_coef2 = 0.0;
        }
    }
    return out;
}

} // namespace latwave
