#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kernel.hpp"

namespace latwave {

// A lattice reaction model: coupling d, delay tau, upper equilibrium K, the
// nonlinearity f(u, v) on [0,K]^2 (v is the kernel-averaged delayed value)
// and the averaging kernel. Instances are immutable after finalize() and may
// be read concurrently without synchronization.
struct ReactionModel {
    std::string name = "custom";
    double d = 1.0;
    double tau = 0.0;
    double K = 0.0;

    // growth bound constants: 0 <= f_u(0,0)u + f_v(0,0)v - f(u,v)
    //                            <= M (u+v)^{1+sigma} on [0,K]^2
    double M = 0.0;        // 0 means unset; estimated in finalize()
    double sigma = 0.0;    // 0 means unset
    bool fitted_bound = false;

    KernelSpec kernel;

    std::function<double(double, double)> f;
    std::function<double(double, double)> fu_fn;  // optional analytic partials
    std::function<double(double, double)> fv_fn;

    // named scalar parameters (bundled-model coefficients or expression
    // bindings); retained so the model can be rebuilt at a different delay
    std::map<std::string, double> params;

    // expression sources when the model came from a definition file; kept so
    // a delay change can rebind any occurrence of tau in them
    std::string expr_f, expr_fu, expr_fv;

    // cached linearizations, filled by finalize()
    std::pair<double, double> df0{0.0, 0.0};  // (f_u, f_v) at (0,0)
    std::pair<double, double> dfK{0.0, 0.0};  // (f_u, f_v) at (K,K)

    // partial derivatives: analytic when supplied, otherwise second-order
    // finite differences with step 1e-6*K, one-sided at the domain edges
    double f_u(double u, double v) const;
    double f_v(double u, double v) const;

    // decay rates of admissible profiles must stay below this
    double lambda_plus() const;

    // validates structural fields, caches df0/dfK, and estimates (M, sigma)
    // when unset; must be called once before the model is used
    void finalize();
};

// One line of a hypothesis report. worst is a signed margin: the smallest
// slack observed over the sampling grid, negative when the check failed.
struct HypothesisCheck {
    std::string name;
    bool passed = false;
    double worst = 0.0;
    double at_u = 0.0, at_v = 0.0;  // sample attaining the worst margin
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool passed = false;
    bool fitted_bound = false;  // (M, sigma) were estimated, not supplied
    double M = 0.0;
    double sigma = 0.0;
};

// Samples f and its partials on an (samples x samples) grid over [0,K]^2 and
// reports every hypothesis with its worst margin. Failures are reported, not
// thrown; only samples < 16 is rejected.
ValidationReport check_hypotheses(const ReactionModel& m, int samples = 256);

// Bundled models. Each returns a finalized instance with analytic partials
// and exact growth-bound constants.
ReactionModel make_fisher(double d = 1.0, double tau = 0.0, KernelSpec kernel = {});
ReactionModel make_vector_disease(double a = 1.0, double b = 2.0, double d = 1.0,
                                  double tau = 0.0, KernelSpec kernel = {});
// monotone range requires 1 < p/a <= e
ReactionModel make_nicholson(double a = 1.0, double p = 2.0, double q = 1.0,
                             double d = 1.0, double tau = 0.0, KernelSpec kernel = {});
ReactionModel make_age_structured(double b = 1.0, double gamma = 0.25, double delta = 1.0,
                                  double d = 1.0, double tau = 0.0, KernelSpec kernel = {});

// Builds a bundled model by name, reading coefficients from params where
// present and factory defaults otherwise.
ReactionModel make_bundled(const std::string& name, const std::map<std::string, double>& params,
                           double d, double tau, KernelSpec kernel);

// Returns a copy of m with the delay replaced. Models whose nonlinearity
// depends on tau (age_structured, or expressions mentioning tau) are rebuilt
// so f, K and the cached linearizations stay consistent.
ReactionModel with_tau(const ReactionModel& m, double tau);

// Model definition files: key = value lines under [model] and [kernel]
// sections (see README for the key set). Table paths are resolved relative
// to the file's directory.
ReactionModel load_model_file(const std::string& path);
ReactionModel parse_model_text(const std::string& text, const std::string& base_dir);

} // namespace latwave
