#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "errors.hpp"

namespace latwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- expressions

// Compiled arithmetic expression over the variables u and v. Compilation
// produces a postfix program; evaluation is allocation-free and reentrant.
class Expr {
public:
    static std::shared_ptr<const Expr> compile(const std::string& text,
                                               const std::map<std::string, double>& consts);

    double eval(double u, double v) const {
        double st[64];
        int sp = 0;
        for (const auto& in : prog_) {
            switch (in.op) {
                case Op::num: st[sp++] = in.c; break;
                case Op::var_u: st[sp++] = u; break;
                case Op::var_v: st[sp++] = v; break;
                case Op::add: sp--; st[sp - 1] += st[sp]; break;
                case Op::sub: sp--; st[sp - 1] -= st[sp]; break;
                case Op::mul: sp--; st[sp - 1] *= st[sp]; break;
                case Op::div: sp--; st[sp - 1] /= st[sp]; break;
                case Op::pow_: sp--; st[sp - 1] = std::pow(st[sp - 1], st[sp]); break;
                case Op::neg: st[sp - 1] = -st[sp - 1]; break;
                case Op::fexp: st[sp - 1] = std::exp(st[sp - 1]); break;
                case Op::flog: st[sp - 1] = std::log(st[sp - 1]); break;
                case Op::fsqrt: st[sp - 1] = std::sqrt(st[sp - 1]); break;
                case Op::fabs_: st[sp - 1] = std::fabs(st[sp - 1]); break;
                case Op::fsin: st[sp - 1] = std::sin(st[sp - 1]); break;
                case Op::fcos: st[sp - 1] = std::cos(st[sp - 1]); break;
                case Op::ftanh: st[sp - 1] = std::tanh(st[sp - 1]); break;
            }
        }
        return st[0];
    }

private:
    enum class Op : unsigned char {
        num, var_u, var_v, add, sub, mul, div, pow_, neg,
        fexp, flog, fsqrt, fabs_, fsin, fcos, ftanh
    };
    struct Instr {
        Op op;
        double c;
    };
    std::vector<Instr> prog_;
    friend class ExprParser;
};

class ExprParser {
public:
    ExprParser(const std::string& text, const std::map<std::string, double>& consts)
        : text_(text), consts_(consts) {}

    std::shared_ptr<const Expr> run() {
        auto out = std::make_shared<Expr>();
        prog_ = &out->prog_;
        expr(0);
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        if (depth_max_ > 60) fail("expression too deeply nested");
        return out;
    }

private:
    using Op = Expr::Op;

    void emit(Op op, double c = 0.0) {
        prog_->push_back({op, c});
        switch (op) {
            case Op::num: case Op::var_u: case Op::var_v:
                if (++stack_ > depth_max_) depth_max_ = stack_;
                break;
            case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow_:
                --stack_;
                break;
            default: break;  // unary ops keep the depth
        }
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    [[noreturn]] void fail(const std::string& what) {
        throw ValidationError("expression '" + text_ + "': " + what +
                              " at offset " + std::to_string(pos_));
    }

    void expr(int depth) {
        if (depth > 100) fail("expression too deeply nested");
        term(depth + 1);
        for (;;) {
            if (eat('+')) { term(depth + 1); emit(Op::add); }
            else if (eat('-')) { term(depth + 1); emit(Op::sub); }
            else break;
        }
    }

    void term(int depth) {
        factor(depth + 1);
        for (;;) {
            if (eat('*')) { factor(depth + 1); emit(Op::mul); }
            else if (eat('/')) { factor(depth + 1); emit(Op::div); }
            else break;
        }
    }

    // '-' binds looser than '^' so -u^2 means -(u^2)
    void factor(int depth) {
        if (depth > 100) fail("expression too deeply nested");
        if (eat('-')) {
            factor(depth + 1);
            emit(Op::neg);
            return;
        }
        primary(depth + 1);
        if (eat('^')) {
            factor(depth + 1);
            emit(Op::pow_);
        }
    }

    void primary(int depth) {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            expr(depth + 1);
            if (!eat(')')) fail("missing ')'");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* b = text_.c_str() + pos_;
            char* e = nullptr;
            double x = std::strtod(b, &e);
            if (e == b) fail("bad number");
            pos_ += static_cast<size_t>(e - b);
            emit(Op::num, x);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string id = text_.substr(start, pos_ - start);
            if (peek() == '(') {
                ++pos_;
                expr(depth + 1);
                if (!eat(')')) fail("missing ')' after " + id);
                if (id == "exp") emit(Op::fexp);
                else if (id == "log") emit(Op::flog);
                else if (id == "sqrt") emit(Op::fsqrt);
                else if (id == "abs") emit(Op::fabs_);
                else if (id == "sin") emit(Op::fsin);
                else if (id == "cos") emit(Op::fcos);
                else if (id == "tanh") emit(Op::ftanh);
                else fail("unknown function '" + id + "'");
                return;
            }
            if (id == "u") { emit(Op::var_u); return; }
            if (id == "v") { emit(Op::var_v); return; }
            if (id == "pi") { emit(Op::num, M_PI); return; }
            auto it = consts_.find(id);
            if (it == consts_.end()) fail("unknown symbol '" + id + "'");
            emit(Op::num, it->second);
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& text_;
    const std::map<std::string, double>& consts_;
    std::vector<Expr::Instr>* prog_ = nullptr;
    size_t pos_ = 0;
    int stack_ = 0, depth_max_ = 0;
};

std::shared_ptr<const Expr> Expr::compile(const std::string& text,
                                          const std::map<std::string, double>& consts) {
    return ExprParser(text, consts).run();
}

// -------------------------------------------------------- model internals

double fd_partial(const std::function<double(double, double)>& f, double K,
                  double u, double v, bool wrt_u) {
    double e = 1e-6 * K;
    auto g = [&](double x) { return wrt_u ? f(x, v) : f(u, x); };
    double x = wrt_u ? u : v;
    // keep all stencil points inside [0,K]; one-sided second order at edges
    if (x - e < 0.0) return (-3.0 * g(x) + 4.0 * g(x + e) - g(x + 2.0 * e)) / (2.0 * e);
    if (x + e > K) return (3.0 * g(x) - 4.0 * g(x - e) + g(x - 2.0 * e)) / (2.0 * e);
    return (g(x + e) - g(x - e)) / (2.0 * e);
}

// largest value of (f_u(0,0)u + f_v(0,0)v - f) / (u+v)^{1+sigma} over a grid
double growth_ratio_max(const ReactionModel& m, double sigma) {
    const int n = 256;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = m.K * i / (n - 1.0);
        for (int j = 0; j < n; ++j) {
            double v = m.K * j / (n - 1.0);
            if (u + v == 0.0) continue;
            double g = m.df0.first * u + m.df0.second * v - m.f(u, v);
            if (g <= 0.0) continue;
            double r = g / std::pow(u + v, 1.0 + sigma);
            if (r > worst) worst = r;
        }
    }
    return worst;
}

// table symmetrization shared by the loader and finalize(); throws when the
// breakpoints or densities are not even within 1e-12
void normalize_tabulated(KernelSpec& k) {
    if (k.table_y.size() != k.table_h.size() || k.table_y.size() < 2)
        throw ValidationError("tabulated kernel needs at least two (offset, density) rows");
    size_t n = k.table_y.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return k.table_y[a] < k.table_y[b]; });
    std::vector<double> y(n), h(n);
    for (size_t i = 0; i < n; ++i) {
        y[i] = k.table_y[order[i]];
        h[i] = k.table_h[order[i]];
        if (h[i] < 0.0) throw ValidationError("tabulated kernel density must be nonnegative");
        if (i > 0 && !(y[i] > y[i - 1]))
            throw ValidationError("tabulated kernel offsets must be distinct");
    }
    double yscale = std::max(1.0, std::fabs(y.back()));
    double hscale = std::max(1.0, *std::max_element(h.begin(), h.end()));
    for (size_t i = 0; i < n; ++i) {
        size_t j = n - 1 - i;
        if (std::fabs(y[i] + y[j]) > 1e-12 * yscale || std::fabs(h[i] - h[j]) > 1e-12 * hscale)
            throw ValidationError("tabulated kernel must be even about 0");
    }
    // exact evenness after the tolerance check
    for (size_t i = 0; i < n / 2; ++i) {
        size_t j = n - 1 - i;
        double hm = 0.5 * (h[i] + h[j]);
        h[i] = h[j] = hm;
        double ym = 0.5 * (y[j] - y[i]);
        y[i] = -ym;
        y[j] = ym;
    }
    double mass = 0.0;
    for (size_t i = 0; i + 1 < n; ++i) mass += 0.5 * (h[i] + h[i + 1]) * (y[i + 1] - y[i]);
    if (!(mass > 0.0)) throw ValidationError("tabulated kernel has zero mass");
    if (std::fabs(mass - 1.0) > 1e-10) {
        for (auto& x : h) x /= mass;
        k.renormalized = true;
    }
    k.table_y = std::move(y);
    k.table_h = std::move(h);
}

void validate_kernel(KernelSpec& k) {
    switch (k.kind) {
        case KernelKind::dirac:
            break;
        case KernelKind::gaussian:
            if (!(k.variance > 0.0)) throw ValidationError("gaussian kernel needs variance > 0");
            break;
        case KernelKind::uniform:
            if (!(k.half_width > 0.0)) throw ValidationError("uniform kernel needs half_width > 0");
            break;
        case KernelKind::tabulated:
            normalize_tabulated(k);
            break;
    }
    if (!(k.lambda0 > 0.0)) throw ValidationError("kernel lambda0 must be positive");
}

std::map<std::string, double> expression_env(const ReactionModel& m) {
    std::map<std::string, double> env = m.params;
    env["d"] = m.d;
    env["tau"] = m.tau;
    env["K"] = m.K;
    return env;
}

void bind_expressions(ReactionModel& m) {
    auto env = expression_env(m);
    auto pf = Expr::compile(m.expr_f, env);
    m.f = [pf](double u, double v) { return pf->eval(u, v); };
    if (!m.expr_fu.empty()) {
        auto p = Expr::compile(m.expr_fu, env);
        m.fu_fn = [p](double u, double v) { return p->eval(u, v); };
    } else {
        m.fu_fn = nullptr;
    }
    if (!m.expr_fv.empty()) {
        auto p = Expr::compile(m.expr_fv, env);
        m.fv_fn = [p](double u, double v) { return p->eval(u, v); };
    } else {
        m.fv_fn = nullptr;
    }
}

} // namespace

// ------------------------------------------------------------- ReactionModel

double ReactionModel::f_u(double u, double v) const {
    return fu_fn ? fu_fn(u, v) : fd_partial(f, K, u, v, true);
}

double ReactionModel::f_v(double u, double v) const {
    return fv_fn ? fv_fn(u, v) : fd_partial(f, K, u, v, false);
}

double ReactionModel::lambda_plus() const {
    return df0.second > 0.0 ? kernel.lambda0 : kInf;
}

void ReactionModel::finalize() {
    if (!(d > 0.0)) throw ValidationError("model coupling d must be positive");
    if (!(tau >= 0.0)) throw ValidationError("model delay tau must be nonnegative");
    if (!(K > 0.0)) throw ValidationError("model equilibrium K must be positive");
    if (!f) throw ValidationError("model nonlinearity f is not set");
    // zero means unset for both bound fields; any other value must be usable
    if (sigma != 0.0 && (!(sigma > 0.0) || sigma > 1.0))
        throw ValidationError("growth exponent sigma must lie in (0, 1]");
    if (M != 0.0 && !(M > 0.0 && std::isfinite(M)))
        throw ValidationError("growth bound M must be positive and finite");
    validate_kernel(kernel);

    df0 = {f_u(0.0, 0.0), f_v(0.0, 0.0)};
    dfK = {f_u(K, K), f_v(K, K)};

    bool have_M = M > 0.0 && std::isfinite(M);
    bool have_sigma = sigma > 0.0 && sigma <= 1.0;
    if (!have_M || !have_sigma) {
        if (have_sigma) {
            M = growth_ratio_max(*this, sigma);
        } else if (have_M) {
            sigma = 1.0;
        } else {
            double m1 = growth_ratio_max(*this, 1.0);
            double m05 = growth_ratio_max(*this, 0.5);
            if (m1 <= m05) { sigma = 1.0; M = m1; }
            else { sigma = 0.5; M = m05; }
        }
        if (!(M > 0.0)) M = 1.0;  // f linear: any positive constant works
        M *= 1.0 + 1e-9;          // headroom over the sampled maximum
        fitted_bound = true;
    }
}

// ---------------------------------------------------------- hypothesis check

ValidationReport check_hypotheses(const ReactionModel& m, int samples) {
    if (samples < 16) throw ValidationError("check_hypotheses needs samples >= 16");

    ValidationReport rep;
    rep.fitted_bound = m.fitted_bound;
    rep.M = m.M;
    rep.sigma = m.sigma;

    auto add = [&](const std::string& name, bool passed, double worst, double au, double av) {
        rep.checks.push_back({name, passed, worst, au, av});
    };

    double f00 = m.f(0.0, 0.0);
    add("f_vanishes_at_zero", std::fabs(f00) <= 1e-12, 1e-12 - std::fabs(f00), 0.0, 0.0);
    double fKK = m.f(m.K, m.K);
    add("f_vanishes_at_K", std::fabs(fKK) <= 1e-12, 1e-12 - std::fabs(fKK), m.K, m.K);

    {
        double worst = kInf, at = 0.0;
        for (int i = 1; i < samples; ++i) {
            double u = m.K * i / samples;
            double fv = m.f(u, u);
            if (fv < worst) { worst = fv; at = u; }
        }
        add("f_positive_on_diagonal", worst > 0.0, worst, at, at);
    }

    {
        double worst = kInf, au = 0.0, av = 0.0;
        for (int i = 0; i < samples; ++i) {
            double u = m.K * i / (samples - 1.0);
            for (int j = 0; j < samples; ++j) {
                double v = m.K * j / (samples - 1.0);
                double g = m.f_v(u, v);
                if (g < worst) { worst = g; au = u; av = v; }
            }
        }
        // absorbs finite-difference noise when partials are not analytic
        add("f_v_nonnegative", worst >= -1e-9 * std::max(1.0, m.K), worst, au, av);
    }

    {
        double lo = kInf, lou = 0.0, lov = 0.0;
        double hi = kInf, hiu = 0.0, hiv = 0.0;
        for (int i = 0; i < samples; ++i) {
            double u = m.K * i / (samples - 1.0);
            for (int j = 0; j < samples; ++j) {
                double v = m.K * j / (samples - 1.0);
                double g = m.df0.first * u + m.df0.second * v - m.f(u, v);
                if (g < lo) { lo = g; lou = u; lov = v; }
                double slack = (u + v == 0.0) ? 0.0
                             : m.M * std::pow(u + v, 1.0 + m.sigma) - g;
                if (slack < hi) { hi = slack; hiu = u; hiv = v; }
            }
        }
        double tol = 1e-12 * std::max(1.0, m.M * std::pow(2.0 * m.K, 1.0 + m.sigma));
        add("linearization_dominates_f", lo >= -tol, lo, lou, lov);
        add("growth_bound_holds", hi >= -tol, hi, hiu, hiv);
    }

    double s0 = m.df0.first + m.df0.second;
    add("unstable_zero_state", s0 > 0.0, s0, 0.0, 0.0);
    double sK = m.dfK.first + m.dfK.second;
    add("stable_K_state", sK < 0.0, -sK, m.K, m.K);

    {
        double mass = 1.0;
        if (m.kernel.kind == KernelKind::tabulated) {
            mass = 0.0;
            const auto& y = m.kernel.table_y;
            const auto& h = m.kernel.table_h;
            for (size_t i = 0; i + 1 < y.size(); ++i)
                mass += 0.5 * (h[i] + h[i + 1]) * (y[i + 1] - y[i]);
        }
        add("kernel_unit_mass", std::fabs(mass - 1.0) <= 1e-10, 1e-10 - std::fabs(mass - 1.0), 0.0, 0.0);

        double asym = 0.0;
        double hmin = 0.0;
        if (m.kernel.kind == KernelKind::tabulated) {
            const auto& y = m.kernel.table_y;
            const auto& h = m.kernel.table_h;
            hmin = *std::min_element(h.begin(), h.end());
            for (size_t i = 0; i < y.size(); ++i) {
                size_t j = y.size() - 1 - i;
                asym = std::max(asym, std::fabs(h[i] - h[j]));
                asym = std::max(asym, std::fabs(y[i] + y[j]));
            }
        }
        add("kernel_even_symmetry", asym <= 1e-12, 1e-12 - asym, 0.0, 0.0);
        add("kernel_density_nonnegative", hmin >= 0.0, hmin, 0.0, 0.0);

        double lt = std::isfinite(m.kernel.lambda0) ? 0.5 * m.kernel.lambda0 : 1.0;
        double g = kernel_mgf(m.kernel, lt);
        add("kernel_exponential_moment", std::isfinite(g) && g > 0.0, g, lt, 0.0);
    }

    rep.passed = std::all_of(rep.checks.begin(), rep.checks.end(),
                             [](const HypothesisCheck& c) { return c.passed; });
    return rep;
}

// -------------------------------------------------------------- bundled models

ReactionModel make_fisher(double d, double tau, KernelSpec kernel) {
    ReactionModel m;
    m.name = "fisher";
    m.d = d;
    m.tau = tau;
    m.K = 1.0;
    m.M = 1.0;
    m.sigma = 1.0;
    m.kernel = std::move(kernel);
    m.f = [](double u, double v) { return v * (1.0 - u); };
    m.fu_fn = [](double, double v) { return -v; };
    m.fv_fn = [](double u, double) { return 1.0 - u; };
    m.finalize();
    return m;
}

ReactionModel make_vector_disease(double a, double b, double d, double tau, KernelSpec kernel) {
    if (!(a > 0.0) || !(b > a))
        throw ValidationError("vector_disease requires 0 < a < b");
    ReactionModel m;
    m.name = "vector_disease";
    m.d = d;
    m.tau = tau;
    m.K = (b - a) / b;
    m.M = 0.25 * b;  // the excess over the linearization is b*u*v
    m.sigma = 1.0;
    m.kernel = std::move(kernel);
    m.params = {{"a", a}, {"b", b}};
    m.f = [a, b](double u, double v) { return -a * u + b * (1.0 - u) * v; };
    m.fu_fn = [a, b](double, double v) { return -a - b * v; };
    m.fv_fn = [b](double u, double) { return b * (1.0 - u); };
    m.finalize();
    return m;
}

ReactionModel make_nicholson(double a, double p, double q, double d, double tau,
                             KernelSpec kernel) {
    if (!(a > 0.0) || !(q > 0.0)) throw ValidationError("nicholson requires a > 0 and q > 0");
    if (!(p > a) || p > std::exp(1.0) * a)
        throw ValidationError("nicholson monotone range requires 1 < p/a <= e");
    ReactionModel m;
    m.name = "nicholson";
    m.d = d;
    m.tau = tau;
    m.K = std::log(p / a) / q;
    m.M = p * q;  // p*v*(1 - e^{-qv}) <= p*q*v^2
    m.sigma = 1.0;
    m.kernel = std::move(kernel);
    m.params = {{"a", a}, {"p", p}, {"q", q}};
    m.f = [a, p, q](double u, double v) { return -a * u + p * v * std::exp(-q * v); };
    m.fu_fn = [a](double, double) { return -a; };
    m.fv_fn = [p, q](double, double v) { return p * (1.0 - q * v) * std::exp(-q * v); };
    m.finalize();
    return m;
}

ReactionModel make_age_structured(double b, double gamma, double delta, double d, double tau,
                                  KernelSpec kernel) {
    if (!(b > 0.0) || !(delta > 0.0) || !(gamma >= 0.0))
        throw ValidationError("age_structured requires b > 0, delta > 0, gamma >= 0");
    double k0 = b * std::exp(-gamma * tau);  // the birth term carries the delay
    ReactionModel m;
    m.name = "age_structured";
    m.d = d;
    m.tau = tau;
    m.K = k0 / delta;
    m.M = delta;  // the excess over the linearization is delta*u^2
    m.sigma = 1.0;
    m.kernel = std::move(kernel);
    m.params = {{"b", b}, {"gamma", gamma}, {"delta", delta}};
    m.f = [k0, delta](double u, double v) { return k0 * v - delta * u * u; };
    m.fu_fn = [delta](double u, double) { return -2.0 * delta * u; };
    m.fv_fn = [k0](double, double) { return k0; };
    m.finalize();
    return m;
}

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& key, double dflt) {
    auto it = p.find(key);
    return it == p.end() ? dflt : it->second;
}

} // namespace

ReactionModel make_bundled(const std::string& name, const std::map<std::string, double>& params,
                           double d, double tau, KernelSpec kernel) {
    if (name == "fisher") return make_fisher(d, tau, std::move(kernel));
    if (name == "vector_disease")
        return make_vector_disease(param_or(params, "a", 1.0), param_or(params, "b", 2.0),
                                   d, tau, std::move(kernel));
    if (name == "nicholson")
        return make_nicholson(param_or(params, "a", 1.0), param_or(params, "p", 2.0),
                              param_or(params, "q", 1.0), d, tau, std::move(kernel));
    if (name == "age_structured")
        return make_age_structured(param_or(params, "b", 1.0), param_or(params, "gamma", 0.25),
                                   param_or(params, "delta", 1.0), d, tau, std::move(kernel));
    throw ValidationError("unknown model name '" + name +
                          "' (bundled: fisher, vector_disease, nicholson, age_structured)");
}

ReactionModel with_tau(const ReactionModel& m, double tau) {
    if (!(tau >= 0.0)) throw ValidationError("delay tau must be nonnegative");
    if (m.name == "age_structured")
        return make_age_structured(param_or(m.params, "b", 1.0), param_or(m.params, "gamma", 0.25),
                                   param_or(m.params, "delta", 1.0), m.d, tau, m.kernel);
    ReactionModel out = m;
    out.tau = tau;
    if (!out.expr_f.empty()) bind_expressions(out);  // rebind any tau occurrences
    out.finalize();
    return out;
}

// ----------------------------------------------------------- definition files

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

bool to_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.c_str();
    char* e = nullptr;
    out = std::strtod(b, &e);
    return e == b + s.size();
}

// cuts a '#' or ';' comment, respecting quoted strings
std::string strip_comment(const std::string& line) {
    char quote = '\0';
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quote != '\0') {
            if (c == quote) quote = '\0';
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#' || c == ';') {
            return line.substr(0, i);
        }
    }
    return line;
}

using KvMap = std::map<std::string, std::string>;

void parse_sections(const std::string& text, KvMap& model_kv, KvMap& kernel_kv) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ValidationError("model file line " + std::to_string(lineno) +
                                      ": unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "model" && section != "kernel")
                throw ValidationError("model file line " + std::to_string(lineno) +
                                      ": unknown section [" + section + "]");
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ValidationError("model file line " + std::to_string(lineno) +
                                  ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = strip_quotes(trim(s.substr(eq + 1)));
        if (!is_identifier(key))
            throw ValidationError("model file line " + std::to_string(lineno) +
                                  ": bad key '" + key + "'");
        if (section.empty())
            throw ValidationError("model file line " + std::to_string(lineno) +
                                  ": key outside of a section");
        KvMap& dst = (section == "model") ? model_kv : kernel_kv;
        if (!dst.emplace(key, val).second)
            throw ValidationError("model file line " + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
    }
}

KernelSpec kernel_from_kv(KvMap kv, const std::string& base_dir) {
    KernelSpec k;
    if (kv.empty()) return k;  // no [kernel] section: point mass
    auto take = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::string();
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    std::string kind = take("kind");
    if (kind.empty()) throw ValidationError("[kernel] section needs a kind");
    std::string variance = take("variance");
    std::string half_width = take("half_width");
    std::string table = take("table");
    std::string lambda0 = take("lambda0");
    if (!kv.empty())
        throw ValidationError("[kernel]: unknown key '" + kv.begin()->first + "'");

    auto need_number = [](const std::string& what, const std::string& v) {
        double x;
        if (!to_number(v, x))
            throw ValidationError("[kernel] " + what + ": bad number '" + v + "'");
        return x;
    };

    if (kind == "dirac") {
        k.kind = KernelKind::dirac;
    } else if (kind == "gaussian") {
        k.kind = KernelKind::gaussian;
        if (variance.empty()) throw ValidationError("gaussian kernel needs variance");
        k.variance = need_number("variance", variance);
    } else if (kind == "uniform") {
        k.kind = KernelKind::uniform;
        if (half_width.empty()) throw ValidationError("uniform kernel needs half_width");
        k.half_width = need_number("half_width", half_width);
    } else if (kind == "tabulated") {
        k.kind = KernelKind::tabulated;
        if (table.empty()) throw ValidationError("tabulated kernel needs a table path");
        std::filesystem::path p(table);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        std::ifstream in(p);
        if (!in) throw IoError("cannot open kernel table '" + p.string() + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = trim(strip_comment(line));
            if (s.empty()) continue;
            std::replace(s.begin(), s.end(), ',', ' ');
            std::istringstream row(s);
            double y, h;
            if (!(row >> y >> h)) {
                if (lineno == 1) continue;  // tolerate a header row
                throw ValidationError("kernel table '" + p.string() + "' line " +
                                      std::to_string(lineno) + ": expected two numbers");
            }
            k.table_y.push_back(y);
            k.table_h.push_back(h);
        }
    } else {
        throw ValidationError("unknown kernel kind '" + kind +
                              "' (dirac, gaussian, uniform, tabulated)");
    }
    if (!lambda0.empty()) k.lambda0 = need_number("lambda0", lambda0);
    return k;
}

const char* kReservedParams[] = {"u", "v", "pi", "d", "tau", "K", "M", "sigma",
                                 "name", "f", "f_u", "f_v",
                                 "exp", "log", "sqrt", "abs", "sin", "cos", "tanh"};

} // namespace

ReactionModel parse_model_text(const std::string& text, const std::string& base_dir) {
    KvMap model_kv, kernel_kv;
    parse_sections(text, model_kv, kernel_kv);
    if (model_kv.empty()) throw ValidationError("model file has no [model] section");

    KernelSpec kernel = kernel_from_kv(std::move(kernel_kv), base_dir);

    auto take = [&](const std::string& key) {
        auto it = model_kv.find(key);
        if (it == model_kv.end()) return std::string();
        std::string v = it->second;
        model_kv.erase(it);
        return v;
    };
    std::string name = take("name");
    std::string expr_f = take("f");
    std::string expr_fu = take("f_u");
    std::string expr_fv = take("f_v");

    auto take_number = [&](const std::string& key, double dflt, double& out) {
        std::string v = take(key);
        if (v.empty()) { out = dflt; return false; }
        if (!to_number(v, out))
            throw ValidationError("[model] " + key + ": bad number '" + v + "'");
        return true;
    };
    double d, tau, K, M, sigma;
    take_number("d", 1.0, d);
    take_number("tau", 0.0, tau);
    bool have_K = take_number("K", 0.0, K);
    bool have_M = take_number("M", 0.0, M);
    bool have_sigma = take_number("sigma", 0.0, sigma);

    // everything left must be a numeric free parameter
    std::map<std::string, double> params;
    for (const auto& [key, val] : model_kv) {
        for (const char* r : kReservedParams)
            if (key == r) throw ValidationError("[model]: '" + key + "' is a reserved name");
        double x;
        if (!to_number(val, x))
            throw ValidationError("[model] " + key + ": bad number '" + val + "'");
        params[key] = x;
    }

    bool bundled = !name.empty() && (name == "fisher" || name == "vector_disease" ||
                                     name == "nicholson" || name == "age_structured");
    if (bundled && !expr_f.empty())
        throw ValidationError("give either a bundled model name or an f expression, not both");

    if (bundled) {
        ReactionModel m = make_bundled(name, params, d, tau, std::move(kernel));
        // explicit file values override the factory (validation judges them)
        bool redo = false;
        if (have_K) { m.K = K; redo = true; }
        if (have_M) { m.M = M; redo = true; }
        if (have_sigma) { m.sigma = sigma; redo = true; }
        if (redo) m.finalize();
        return m;
    }

    if (expr_f.empty())
        throw ValidationError(name.empty()
                                  ? "[model] needs a bundled name or an f expression"
                                  : "unknown model name '" + name + "' and no f expression");
    if (!have_K) throw ValidationError("[model] K is required for expression models");

    ReactionModel m;
    m.name = name.empty() ? "custom" : name;
    m.d = d;
    m.tau = tau;
    m.K = K;
    if (have_M) m.M = M;
    if (have_sigma) m.sigma = sigma;
    m.kernel = std::move(kernel);
    m.params = std::move(params);
    m.expr_f = expr_f;
    m.expr_fu = expr_fu;
    m.expr_fv = expr_fv;
    bind_expressions(m);
    m.finalize();
    return m;
}

ReactionModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model_text(buf.str(), std::filesystem::path(path).parent_path().string());
}

} // namespace latwave
