#include "latwave/latwave.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <map>
#include <string>
#include <utility>

#include "analysis.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "kernel.hpp"
#include "lattice_sim.hpp"
#include "model.hpp"
#include "solver.hpp"
#include "textio.hpp"
#include "waveops.hpp"

struct lw_model {
    latwave::ReactionModel m;
};
struct lw_profile {
    latwave::WaveProfile p;
};
struct lw_track {
    latwave::SimResult r;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
int guarded(Fn&& fn) noexcept {
    try {
        fn();
        return LW_OK;
    } catch (const latwave::Error& e) {
        set_error(e.what());
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        set_error(e.what());
        return LW_ERR_INTERNAL;
    } catch (...) {
        set_error("unidentified failure");
        return LW_ERR_INTERNAL;
    }
}

int arg_error(const char* msg) {
    set_error(msg);
    return LW_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string model_info(const latwave::ReactionModel& m) {
    latwave::JsonObj o;
    o.str("name", m.name);
    o.num("d", m.d);
    o.num("tau", m.tau);
    o.num("K", m.K);
    o.num("M", m.M);
    o.num("sigma", m.sigma);
    o.boolean("fitted_bound", m.fitted_bound);
    o.str("kernel", latwave::kernel_kind_name(m.kernel.kind));
    if (m.kernel.kind == latwave::KernelKind::gaussian) o.num("variance", m.kernel.variance);
    if (m.kernel.kind == latwave::KernelKind::uniform) o.num("half_width", m.kernel.half_width);
    if (std::isfinite(m.kernel.lambda0)) o.num("lambda0", m.kernel.lambda0);
    return o.build();
}

latwave::SolveOptions to_solve_options(const lw_solve_options* opt) {
    latwave::SolveOptions s;
    if (!opt) return s;
    s.nodes_per_unit = opt->nodes_per_unit;
    s.half_length = opt->half_length;
    s.tol = opt->tol;
    s.max_iterations = opt->max_iterations;
    s.q_factor = opt->q_factor;
    s.eta = opt->eta;
    s.xi_plus = opt->xi_plus;
    s.xi_minus = opt->xi_minus;
    s.min_gap = opt->min_gap;
    s.continuation_levels = opt->continuation_levels;
    s.normalize = opt->normalize != 0;
    return s;
}

latwave::SimOptions to_sim_options(const lw_sim_options* opt) {
    latwave::SimOptions s;
    if (!opt) return s;
    s.sites = opt->sites;
    s.horizon = opt->horizon;
    s.record_dt = opt->record_dt;
    s.dt = opt->dt;
    s.x0 = opt->x0;
    return s;
}

std::string check_report_json(const latwave::ValidationReport& r) {
    latwave::JsonObj o;
    o.boolean("passed", r.passed);
    o.boolean("fitted_bound", r.fitted_bound);
    o.num("M", r.M);
    o.num("sigma", r.sigma);
    std::vector<std::string> rows;
    for (const latwave::HypothesisCheck& c : r.checks) {
        latwave::JsonObj e;
        e.str("name", c.name);
        e.boolean("passed", c.passed);
        e.num("worst", c.worst);
        e.num("at_u", c.at_u);
        e.num("at_v", c.at_v);
        rows.push_back(e.inline_build());
    }
    o.raw("checks", latwave::json_array(rows));
    return o.build();
}

} // namespace

extern "C" {

const char* lw_version(void) { return "0.1.0"; }

const char* lw_status_name(int status) {
    switch (status) {
        case LW_OK: return "ok";
        case LW_ERR_VALIDATION: return "validation";
        case LW_ERR_CONVERGENCE: return "convergence";
        case LW_ERR_VERIFICATION: return "verification";
        case LW_ERR_SIMULATION: return "simulation";
        case LW_ERR_DOMAIN: return "domain";
        case LW_ERR_ORDER: return "order";
        case LW_ERR_WINDOW: return "window";
        case LW_ERR_IO: return "io";
        case LW_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case LW_ERR_INTERNAL: return "internal";
        default: return "unknown";
    }
}

const char* lw_last_error(void) { return g_last_error.c_str(); }

void lw_free_string(char* s) { std::free(s); }

int lw_model_load(const char* path, lw_model** out) {
    if (!path || !out) return arg_error("lw_model_load: null argument");
    return guarded([&] {
        auto* h = new lw_model{latwave::load_model_file(path)};
        *out = h;
    });
}

int lw_model_parse(const char* text, lw_model** out) {
    if (!text || !out) return arg_error("lw_model_parse: null argument");
    return guarded([&] {
        auto* h = new lw_model{latwave::parse_model_text(text, ".")};
        *out = h;
    });
}

int lw_model_bundled(const char* name, const char* const* keys, const double* values,
                     size_t n_params, double d, double tau, lw_model** out) {
    if (!name || !out) return arg_error("lw_model_bundled: null argument");
    if (n_params > 0 && (!keys || !values))
        return arg_error("lw_model_bundled: parameter arrays are null");
    return guarded([&] {
        std::map<std::string, double> params;
        for (size_t i = 0; i < n_params; ++i) {
            if (!keys[i]) throw latwave::ValidationError("parameter name is null");
            params[keys[i]] = values[i];
        }
        auto* h = new lw_model{latwave::make_bundled(name, params, d, tau, latwave::KernelSpec{})};
        *out = h;
    });
}

int lw_model_with_tau(const lw_model* m, double tau, lw_model** out) {
    if (!m || !out) return arg_error("lw_model_with_tau: null argument");
    return guarded([&] {
        auto* h = new lw_model{latwave::with_tau(m->m, tau)};
        *out = h;
    });
}

void lw_model_free(lw_model* m) { delete m; }

int lw_model_info_json(const lw_model* m, char** out_json) {
    if (!m || !out_json) return arg_error("lw_model_info_json: null argument");
    return guarded([&] { *out_json = copy_string(model_info(m->m)); });
}

int lw_model_check_json(const lw_model* m, char** out_json, int* passed) {
    if (!m) return arg_error("lw_model_check_json: null model");
    return guarded([&] {
        latwave::ValidationReport r = latwave::check_hypotheses(m->m);
        if (out_json) *out_json = copy_string(check_report_json(r));
        if (passed) *passed = r.passed ? 1 : 0;
    });
}

int lw_kernel_mgf(const lw_model* m, double lambda, double* out) {
    if (!m || !out) return arg_error("lw_kernel_mgf: null argument");
    return guarded([&] { *out = latwave::kernel_mgf(m->m.kernel, lambda); });
}

int lw_dispersion_delta(const lw_model* m, double c, double lambda, double* out) {
    if (!m || !out) return arg_error("lw_dispersion_delta: null argument");
    return guarded([&] { *out = latwave::delta(m->m, c, lambda); });
}

int lw_dispersion_delta_tilde(const lw_model* m, double c, double lambda, double* out) {
    if (!m || !out) return arg_error("lw_dispersion_delta_tilde: null argument");
    return guarded([&] { *out = latwave::delta_tilde(m->m, c, lambda); });
}

int lw_minimal_speed(const lw_model* m, double* c_star, double* lambda_star,
                     double* delta_residual, double* dlambda_residual) {
    if (!m || !c_star) return arg_error("lw_minimal_speed: null argument");
    return guarded([&] {
        latwave::SpeedResult r = latwave::minimal_speed(m->m);
        *c_star = r.c_star;
        if (lambda_star) *lambda_star = r.lambda_star;
        if (delta_residual) *delta_residual = r.delta_residual;
        if (dlambda_residual) *dlambda_residual = r.dlambda_residual;
    });
}

int lw_lambda_roots(const lw_model* m, double c, double* lambda1, double* lambda2) {
    if (!m || !lambda1 || !lambda2) return arg_error("lw_lambda_roots: null argument");
    return guarded([&] {
        latwave::RootSet r = latwave::lambda_roots(m->m, c);
        *lambda1 = r.lambda1;
        *lambda2 = r.lambda2;
    });
}

int lw_upsilon(const lw_model* m, double c, double* out) {
    if (!m || !out) return arg_error("lw_upsilon: null argument");
    return guarded([&] { *out = latwave::upsilon(m->m, c); });
}

void lw_solve_options_init(lw_solve_options* opt) {
    if (!opt) return;
    latwave::SolveOptions d;
    opt->nodes_per_unit = d.nodes_per_unit;
    opt->half_length = d.half_length;
    opt->tol = d.tol;
    opt->max_iterations = d.max_iterations;
    opt->q_factor = d.q_factor;
    opt->eta = d.eta;
    opt->xi_plus = d.xi_plus;
    opt->xi_minus = d.xi_minus;
    opt->min_gap = d.min_gap;
    opt->continuation_levels = d.continuation_levels;
    opt->normalize = d.normalize ? 1 : 0;
}

int lw_solve_profile(const lw_model* m, double c, const lw_solve_options* opt,
                     lw_profile** out) {
    if (!m || !out) return arg_error("lw_solve_profile: null argument");
    return guarded([&] {
        auto* h = new lw_profile{latwave::solve_profile(m->m, c, to_solve_options(opt))};
        *out = h;
    });
}

int lw_solve_critical(const lw_model* m, const lw_solve_options* opt, lw_profile** out) {
    if (!m || !out) return arg_error("lw_solve_critical: null argument");
    return guarded([&] {
        auto* h = new lw_profile{latwave::solve_critical(m->m, to_solve_options(opt))};
        *out = h;
    });
}

void lw_profile_free(lw_profile* p) { delete p; }

int lw_profile_summary_json(const lw_profile* p, char** out_json) {
    if (!p || !out_json) return arg_error("lw_profile_summary_json: null argument");
    return guarded([&] { *out_json = copy_string(latwave::profile_summary_json(p->p)); });
}

int lw_profile_eval(const lw_profile* p, double xi, double* out) {
    if (!p || !out) return arg_error("lw_profile_eval: null argument");
    return guarded([&] { *out = p->p.phi.eval(xi); });
}

int lw_profile_write_csv(const lw_profile* p, const char* path) {
    if (!p || !path) return arg_error("lw_profile_write_csv: null argument");
    return guarded([&] { latwave::write_grid_csv(p->p.phi, std::string(path), p->p.c); });
}

int lw_profile_verify_json(const lw_profile* p, char** out_json, int* passed) {
    if (!p) return arg_error("lw_profile_verify_json: null profile");
    return guarded([&] {
        latwave::VerificationReport r = latwave::verify_profile(p->p);
        if (out_json) *out_json = copy_string(latwave::verification_report_json(r));
        if (passed) *passed = r.passed ? 1 : 0;
    });
}

int lw_profile_continuation(const lw_profile* p, double* buf, size_t cap, size_t* n) {
    if (!p || !n) return arg_error("lw_profile_continuation: null argument");
    if (cap > 0 && !buf) return arg_error("lw_profile_continuation: null buffer");
    return guarded([&] {
        const std::vector<double>& d = p->p.continuation_distances;
        *n = d.size();
        for (size_t i = 0; i < d.size() && i < cap; ++i) buf[i] = d[i];
    });
}

void lw_sim_options_init(lw_sim_options* opt) {
    if (!opt) return;
    latwave::SimOptions d;
    opt->sites = d.sites;
    opt->horizon = d.horizon;
    opt->record_dt = d.record_dt;
    opt->dt = d.dt;
    opt->x0 = d.x0;
}

int lw_simulate_step(const lw_model* m, const lw_sim_options* opt, lw_track** out) {
    if (!m || !out) return arg_error("lw_simulate_step: null argument");
    return guarded([&] {
        latwave::SimOptions so = to_sim_options(opt);
        std::vector<double> u0 = latwave::step_initial_data(m->m, so.sites, so.x0);
        auto* h = new lw_track{latwave::simulate_lattice(m->m, u0, so)};
        *out = h;
    });
}

int lw_simulate_profile(const lw_model* m, const lw_profile* p, const lw_sim_options* opt,
                        lw_track** out) {
    if (!m || !p || !out) return arg_error("lw_simulate_profile: null argument");
    return guarded([&] {
        latwave::SimOptions so = to_sim_options(opt);
        std::vector<double> u0 = latwave::profile_initial_data(p->p.phi, so.sites, so.x0);
        auto* h = new lw_track{latwave::simulate_lattice(m->m, u0, so)};
        *out = h;
    });
}

int lw_simulate_profile_csv(const lw_model* m, const char* csv_path,
                            const lw_sim_options* opt, lw_track** out) {
    if (!m || !csv_path || !out) return arg_error("lw_simulate_profile_csv: null argument");
    return guarded([&] {
        latwave::GridFunction phi = latwave::read_grid_csv(std::string(csv_path));
        if (std::abs(phi.K - m->m.K) > 1e-6 * std::max(1.0, m->m.K))
            throw latwave::ValidationError(
                "profile equilibrium disagrees with the model's K; wrong model or file");
        latwave::SimOptions so = to_sim_options(opt);
        std::vector<double> u0 = latwave::profile_initial_data(phi, so.sites, so.x0);
        auto* h = new lw_track{latwave::simulate_lattice(m->m, u0, so)};
        *out = h;
    });
}

void lw_track_free(lw_track* t) { delete t; }

int lw_track_size(const lw_track* t, size_t* out) {
    if (!t || !out) return arg_error("lw_track_size: null argument");
    *out = t->r.track.t.size();
    return LW_OK;
}

int lw_track_get(const lw_track* t, size_t i, double* time, double* x_front) {
    if (!t || !time || !x_front) return arg_error("lw_track_get: null argument");
    if (i >= t->r.track.t.size()) return arg_error("lw_track_get: index out of range");
    *time = t->r.track.t[i];
    *x_front = t->r.track.x[i];
    return LW_OK;
}

int lw_track_speed(const lw_track* t, double* speed, int* valid) {
    if (!t || !speed) return arg_error("lw_track_speed: null argument");
    *speed = t->r.track.speed;
    if (valid) *valid = t->r.track.speed_valid ? 1 : 0;
    return LW_OK;
}

int lw_track_summary_json(const lw_track* t, char** out_json) {
    if (!t || !out_json) return arg_error("lw_track_summary_json: null argument");
    return guarded([&] {
        const latwave::FrontTrack& tr = t->r.track;
        latwave::JsonObj o;
        o.num("speed", tr.speed);
        o.num("speed_r2", tr.speed_r2);
        o.boolean("speed_valid", tr.speed_valid);
        if (!tr.diagnostic.empty()) o.str("diagnostic", tr.diagnostic);
        o.integer("samples", static_cast<long long>(tr.t.size()));
        o.num("final_time", tr.t.empty() ? 0.0 : tr.t.back());
        o.num("dt", t->r.dt);
        o.integer("steps", t->r.steps);
        *out_json = copy_string(o.build());
    });
}

int lw_track_write_csv(const lw_track* t, const char* path) {
    if (!t || !path) return arg_error("lw_track_write_csv: null argument");
    return guarded([&] { latwave::write_front_csv(t->r.track, std::string(path)); });
}

} // extern "C"
