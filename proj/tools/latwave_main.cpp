#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "latwave/latwave.h"

namespace {

namespace fs = std::filesystem;

std::string fmt(double x, int sig = 17) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", sig, x);
    return buf;
}

// The library's status codes are collapsed onto the documented exit codes:
// inputs 2, convergence 3, verification 4, simulation 5.
int exit_code_for(int status) {
    switch (status) {
        case LW_OK: return 0;
        case LW_ERR_VALIDATION:
        case LW_ERR_DOMAIN:
        case LW_ERR_IO:
        case LW_ERR_INVALID_ARGUMENT: return 2;
        case LW_ERR_CONVERGENCE:
        case LW_ERR_ORDER: return 3;
        case LW_ERR_VERIFICATION:
        case LW_ERR_WINDOW: return 4;
        case LW_ERR_SIMULATION: return 5;
        default: return 1;
    }
}

int fail(int status, const std::string& stage) {
    std::cerr << stage << " failed (" << lw_status_name(status) << "): " << lw_last_error()
              << "\n";
    return exit_code_for(status);
}

using ModelPtr = std::unique_ptr<lw_model, void (*)(lw_model*)>;
using ProfilePtr = std::unique_ptr<lw_profile, void (*)(lw_profile*)>;
using TrackPtr = std::unique_ptr<lw_track, void (*)(lw_track*)>;

std::string take_string(char* s) {
    std::string out = s ? s : "";
    lw_free_string(s);
    return out;
}

struct GlobalOpts {
    std::string model;
    std::string out = ".";
    double grid_spacing = 0.1;
    double half_length = 0.0;
    double tol = 1e-10;
    unsigned long long seed = 0;  // reserved for stochastic extensions
};

const char* const kBundledNames[] = {"fisher", "vector_disease", "nicholson", "age_structured"};

// Loads the model file (or a bundled model named directly) and refuses to
// continue when the hypothesis audit fails.
int load_model(const GlobalOpts& g, ModelPtr& out) {
    lw_model* m = nullptr;
    int st;
    bool is_bundled = false;
    for (const char* n : kBundledNames) is_bundled = is_bundled || g.model == n;
    if (!fs::exists(g.model) && is_bundled)
        st = lw_model_bundled(g.model.c_str(), nullptr, nullptr, 0, 1.0, 0.0, &m);
    else
        st = lw_model_load(g.model.c_str(), &m);
    if (st != LW_OK) return st;
    out = ModelPtr(m, lw_model_free);

    int passed = 0;
    char* json = nullptr;
    st = lw_model_check_json(m, &json, &passed);
    std::string report = take_string(json);
    if (st != LW_OK) return st;
    if (!passed) {
        std::cerr << "model fails the standing hypotheses:\n" << report;
        return LW_ERR_VALIDATION;
    }
    return LW_OK;
}

int prepare_out_dir(const GlobalOpts& g) {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) {
        std::cerr << "cannot create output directory " << g.out << ": " << ec.message() << "\n";
        return 2;
    }
    return 0;
}

int write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) {
        std::cerr << "cannot open " << path.string() << " for writing\n";
        return 2;
    }
    os << text;
    return 0;
}

int solve_options_from(const GlobalOpts& g, lw_solve_options& opt) {
    lw_solve_options_init(&opt);
    double nodes = 1.0 / g.grid_spacing;
    double rounded = std::round(nodes);
    if (!(g.grid_spacing > 0.0) || rounded < 2.0 || std::abs(nodes - rounded) > 1e-9 * rounded) {
        std::cerr << "grid spacing must be the reciprocal of an integer >= 2\n";
        return 2;
    }
    opt.nodes_per_unit = static_cast<long>(rounded);
    opt.half_length = g.half_length;
    opt.tol = g.tol;
    return 0;
}

// Indents every line of a JSON fragment so it can be embedded in a larger
// document without breaking readability.
std::string indent_json(const std::string& s, const std::string& pad) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        out += s[i];
        if (s[i] == '\n' && i + 1 < s.size()) out += pad;
    }
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
    return out;
}

int run_speed(const GlobalOpts& g, const std::string& sweep) {
    ModelPtr model(nullptr, lw_model_free);
    int st = load_model(g, model);
    if (st != LW_OK) return fail(st, "model load");
    if (int rc = prepare_out_dir(g)) return rc;

    if (!sweep.empty()) {
        double a = 0.0, b = 0.0;
        long n = 0;
        if (std::sscanf(sweep.c_str(), "tau=%lf:%lf:%ld", &a, &b, &n) != 3 || n < 1 ||
            a < 0.0 || b < a) {
            std::cerr << "--sweep expects tau=a:b:n with 0 <= a <= b and n >= 1\n";
            return 2;
        }
        std::vector<double> taus;
        for (long i = 0; i < n; ++i)
            taus.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) /
                                                static_cast<double>(n - 1));
        struct Row {
            int status;
            double c_star, lambda_star;
        };
        std::vector<std::future<Row>> jobs;
        for (double tau : taus) {
            jobs.push_back(std::async(std::launch::async, [&model, tau]() -> Row {
                lw_model* mt = nullptr;
                int s = lw_model_with_tau(model.get(), tau, &mt);
                if (s != LW_OK) return {s, 0.0, 0.0};
                ModelPtr holder(mt, lw_model_free);
                Row r{LW_OK, 0.0, 0.0};
                r.status = lw_minimal_speed(mt, &r.c_star, &r.lambda_star, nullptr, nullptr);
                return r;
            }));
        }
        std::string csv = "tau,c_star,lambda_star\n";
        for (size_t i = 0; i < jobs.size(); ++i) {
            Row r = jobs[i].get();
            if (r.status != LW_OK) return fail(r.status, "sweep at tau = " + fmt(taus[i], 6));
            csv += fmt(taus[i], 12) + "," + fmt(r.c_star, 12) + "," + fmt(r.lambda_star, 12) + "\n";
            std::cout << "tau = " << fmt(taus[i], 6) << "  c_star = " << fmt(r.c_star, 12)
                      << "\n";
        }
        fs::path out = fs::path(g.out) / "speed_sweep.csv";
        if (int rc = write_text(out, csv)) return rc;
        std::cout << "wrote " << out.string() << "\n";
        return 0;
    }

    double c_star = 0.0, lambda_star = 0.0, dres = 0.0, ddres = 0.0;
    st = lw_minimal_speed(model.get(), &c_star, &lambda_star, &dres, &ddres);
    if (st != LW_OK) return fail(st, "minimal speed");
    double ups = 0.0;
    st = lw_upsilon(model.get(), c_star, &ups);
    if (st != LW_OK) return fail(st, "upsilon");
    char* info = nullptr;
    if ((st = lw_model_info_json(model.get(), &info)) != LW_OK) return fail(st, "model info");

    std::string json = "{\n  \"model\": " + indent_json(take_string(info), "  ") +
                       ",\n  \"c_star\": " + fmt(c_star) +
                       ",\n  \"lambda_star\": " + fmt(lambda_star) +
                       ",\n  \"delta_residual\": " + fmt(dres) +
                       ",\n  \"dlambda_residual\": " + fmt(ddres) +
                       ",\n  \"upsilon_at_c_star\": " + fmt(ups) + "\n}\n";
    fs::path out = fs::path(g.out) / "speed.json";
    if (int rc = write_text(out, json)) return rc;
    std::cout << json;
    return 0;
}

int run_roots(const GlobalOpts& g, double c) {
    ModelPtr model(nullptr, lw_model_free);
    int st = load_model(g, model);
    if (st != LW_OK) return fail(st, "model load");
    if (int rc = prepare_out_dir(g)) return rc;

    double c_star = 0.0, lambda_star = 0.0;
    st = lw_minimal_speed(model.get(), &c_star, &lambda_star, nullptr, nullptr);
    if (st != LW_OK) return fail(st, "minimal speed");
    double l1 = 0.0, l2 = 0.0, ups = 0.0;
    st = lw_lambda_roots(model.get(), c, &l1, &l2);
    if (st != LW_OK) return fail(st, "decay exponents at c = " + fmt(c, 12));
    if ((st = lw_upsilon(model.get(), c, &ups)) != LW_OK) return fail(st, "upsilon");
    double d1 = 0.0, d2 = 0.0, dt = 0.0;
    lw_dispersion_delta(model.get(), c, l1, &d1);
    lw_dispersion_delta(model.get(), c, l2, &d2);
    lw_dispersion_delta_tilde(model.get(), c, ups, &dt);

    std::string json = std::string("{\n") + "  \"c\": " + fmt(c) +
                       ",\n  \"c_star\": " + fmt(c_star) +
                       ",\n  \"lambda1\": " + fmt(l1) + ",\n  \"lambda2\": " + fmt(l2) +
                       ",\n  \"upsilon\": " + fmt(ups) +
                       ",\n  \"delta_at_lambda1\": " + fmt(d1) +
                       ",\n  \"delta_at_lambda2\": " + fmt(d2) +
                       ",\n  \"delta_tilde_at_upsilon\": " + fmt(dt) + "\n}\n";
    fs::path out = fs::path(g.out) / "roots.json";
    if (int rc = write_text(out, json)) return rc;
    std::cout << json;
    return 0;
}

int run_profile(const GlobalOpts& g, double c, bool c_given, bool critical, bool do_verify) {
    if (critical == c_given) {
        std::cerr << "pass exactly one of --c or --critical\n";
        return 2;
    }
    ModelPtr model(nullptr, lw_model_free);
    int st = load_model(g, model);
    if (st != LW_OK) return fail(st, "model load");
    if (int rc = prepare_out_dir(g)) return rc;
    lw_solve_options opt;
    if (int rc = solve_options_from(g, opt)) return rc;

    lw_profile* p = nullptr;
    st = critical ? lw_solve_critical(model.get(), &opt, &p)
                  : lw_solve_profile(model.get(), c, &opt, &p);
    if (st != LW_OK) return fail(st, critical ? "critical profile solve" : "profile solve");
    ProfilePtr prof(p, lw_profile_free);

    fs::path csv = fs::path(g.out) / "profile.csv";
    if ((st = lw_profile_write_csv(p, csv.string().c_str())) != LW_OK)
        return fail(st, "profile csv");
    char* sj = nullptr;
    if ((st = lw_profile_summary_json(p, &sj)) != LW_OK) return fail(st, "profile summary");
    std::string summary = take_string(sj);
    fs::path js = fs::path(g.out) / "profile.json";
    if (int rc = write_text(js, summary)) return rc;
    std::cout << summary;
    std::cerr << "wrote " << csv.string() << " and " << js.string() << "\n";
    if (critical)
        std::cerr << "note: the critical profile is the terminal member of the continuation"
                     " toward c_star\n";

    if (do_verify) {
        int passed = 0;
        char* vj = nullptr;
        if ((st = lw_profile_verify_json(p, &vj, &passed)) != LW_OK)
            return fail(st, "profile verification");
        std::string verdict = take_string(vj);
        fs::path vf = fs::path(g.out) / "profile_verify.json";
        if (int rc = write_text(vf, verdict)) return rc;
        std::cerr << "wrote " << vf.string() << "\n";
        if (!passed) {
            std::cerr << "profile verification failed:\n" << verdict;
            return 4;
        }
    }
    return 0;
}

int run_simulate(const GlobalOpts& g, const std::string& initial, const std::string& profile_csv,
                 double c, bool c_given, long sites, double horizon, double dt, long x0) {
    ModelPtr model(nullptr, lw_model_free);
    int st = load_model(g, model);
    if (st != LW_OK) return fail(st, "model load");
    if (int rc = prepare_out_dir(g)) return rc;

    lw_sim_options so;
    lw_sim_options_init(&so);
    so.sites = sites;
    so.horizon = horizon;
    so.dt = dt;
    so.x0 = x0;

    lw_track* t = nullptr;
    if (initial == "step") {
        st = lw_simulate_step(model.get(), &so, &t);
    } else if (initial == "profile") {
        if (!profile_csv.empty()) {
            st = lw_simulate_profile_csv(model.get(), profile_csv.c_str(), &so, &t);
        } else if (c_given) {
            lw_solve_options opt;
            if (int rc = solve_options_from(g, opt)) return rc;
            lw_profile* p = nullptr;
            st = lw_solve_profile(model.get(), c, &opt, &p);
            if (st != LW_OK) return fail(st, "profile solve for initial data");
            ProfilePtr prof(p, lw_profile_free);
            st = lw_simulate_profile(model.get(), p, &so, &t);
        } else {
            std::cerr << "--initial profile needs --profile FILE or --c SPEED\n";
            return 2;
        }
    } else {
        std::cerr << "--initial must be step or profile\n";
        return 2;
    }
    if (st != LW_OK) return fail(st, "simulation");
    TrackPtr track(t, lw_track_free);

    fs::path csv = fs::path(g.out) / "front_track.csv";
    if ((st = lw_track_write_csv(t, csv.string().c_str())) != LW_OK)
        return fail(st, "front track csv");
    char* sj = nullptr;
    if ((st = lw_track_summary_json(t, &sj)) != LW_OK) return fail(st, "track summary");
    std::string summary = take_string(sj);
    fs::path js = fs::path(g.out) / "simulate.json";
    if (int rc = write_text(js, summary)) return rc;
    std::cout << summary;
    std::cerr << "wrote " << csv.string() << " and " << js.string() << "\n";
    return 0;
}

int run_verify(const GlobalOpts& g) {
    ModelPtr model(nullptr, lw_model_free);
    int st = load_model(g, model);
    if (st != LW_OK) return fail(st, "model load");
    if (int rc = prepare_out_dir(g)) return rc;
    lw_solve_options opt;
    if (int rc = solve_options_from(g, opt)) return rc;

    double c_star = 0.0, lambda_star = 0.0;
    st = lw_minimal_speed(model.get(), &c_star, &lambda_star, nullptr, nullptr);
    if (st != LW_OK) return fail(st, "minimal speed");
    std::cerr << "c_star = " << fmt(c_star, 12) << "\n";

    const double speeds[2] = {1.1 * c_star, 1.5 * c_star};
    struct Solved {
        int status = LW_ERR_INTERNAL;
        lw_profile* p = nullptr;
    };
    std::vector<std::future<Solved>> jobs;
    for (double c : speeds) {
        jobs.push_back(std::async(std::launch::async, [&model, &opt, c]() -> Solved {
            Solved s;
            s.status = lw_solve_profile(model.get(), c, &opt, &s.p);
            return s;
        }));
    }

    bool all_passed = true;
    std::string profile_jsons, verify_jsons;
    ProfilePtr fast(nullptr, lw_profile_free);
    for (size_t i = 0; i < jobs.size(); ++i) {
        Solved s = jobs[i].get();
        if (s.status != LW_OK) return fail(s.status, "profile solve at c = " + fmt(speeds[i], 12));
        ProfilePtr prof(s.p, lw_profile_free);

        fs::path csv = fs::path(g.out) / ("profile_c" + std::to_string(i + 1) + ".csv");
        if ((st = lw_profile_write_csv(s.p, csv.string().c_str())) != LW_OK)
            return fail(st, "profile csv");
        char* sj = nullptr;
        if ((st = lw_profile_summary_json(s.p, &sj)) != LW_OK)
            return fail(st, "profile summary");
        int passed = 0;
        char* vj = nullptr;
        if ((st = lw_profile_verify_json(s.p, &vj, &passed)) != LW_OK)
            return fail(st, "profile verification");
        all_passed = all_passed && passed != 0;
        std::cerr << "profile at c = " << fmt(speeds[i], 12) << ": "
                  << (passed ? "verified" : "FAILED") << "\n";
        if (!profile_jsons.empty()) profile_jsons += ",\n    ";
        profile_jsons += indent_json(take_string(sj), "    ");
        if (!verify_jsons.empty()) verify_jsons += ",\n    ";
        verify_jsons += indent_json(take_string(vj), "    ");
        if (i == 1) fast = std::move(prof);
    }

    lw_sim_options so;
    lw_sim_options_init(&so);
    so.horizon = 150.0;
    lw_track* t = nullptr;
    st = lw_simulate_profile(model.get(), fast.get(), &so, &t);
    if (st != LW_OK) return fail(st, "simulation");
    TrackPtr track(t, lw_track_free);
    fs::path tcsv = fs::path(g.out) / "front_track.csv";
    if ((st = lw_track_write_csv(t, tcsv.string().c_str())) != LW_OK)
        return fail(st, "front track csv");
    double speed = 0.0;
    int speed_valid = 0;
    lw_track_speed(t, &speed, &speed_valid);
    double rel = speed_valid ? std::abs(speed - speeds[1]) / speeds[1] : 1.0;
    bool sim_ok = speed_valid != 0 && rel <= 0.02;
    all_passed = all_passed && sim_ok;
    std::cerr << "front speed " << fmt(speed, 12) << " vs target " << fmt(speeds[1], 12)
              << " (relative error " << fmt(rel, 3) << "): " << (sim_ok ? "ok" : "FAILED")
              << "\n";
    char* tj = nullptr;
    if ((st = lw_track_summary_json(t, &tj)) != LW_OK) return fail(st, "track summary");

    std::string dossier = std::string("{\n") + "  \"c_star\": " + fmt(c_star) +
                          ",\n  \"lambda_star\": " + fmt(lambda_star) +
                          ",\n  \"profiles\": [\n    " + profile_jsons +
                          "\n  ],\n  \"verifications\": [\n    " + verify_jsons +
                          "\n  ],\n  \"simulation\": " + indent_json(take_string(tj), "  ") +
                          ",\n  \"simulation_target_c\": " + fmt(speeds[1]) +
                          ",\n  \"simulation_relative_error\": " + fmt(rel) +
                          ",\n  \"passed\": " + (all_passed ? "true" : "false") + "\n}\n";
    fs::path out = fs::path(g.out) / "verify.json";
    if (int rc = write_text(out, dossier)) return rc;
    std::cout << dossier;
    std::cerr << "wrote " << out.string() << "\n";
    return all_passed ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"travelling wavefronts of lattice reaction equations with distributed delay"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--model", g.model, "model definition file or bundled model name")
        ->required();
    app.add_option("--out", g.out, "output directory for artifacts");
    app.add_option("--grid-spacing", g.grid_spacing, "profile grid spacing, a reciprocal integer");
    app.add_option("--half-length", g.half_length, "profile grid half length (0 = automatic)");
    app.add_option("--tol", g.tol, "solver step tolerance in units of K");
    app.add_option("--seed", g.seed, "reserved for stochastic extensions");

    auto* speed = app.add_subcommand("speed", "minimal wave speed");
    std::string sweep;
    speed->add_option("--sweep", sweep, "delay sweep tau=a:b:n, emits a CSV");

    auto* roots = app.add_subcommand("roots", "decay exponents at a supercritical speed");
    double roots_c = 0.0;
    roots->add_option("--c", roots_c, "wave speed")->required();

    auto* profile = app.add_subcommand("profile", "solve a travelling wavefront");
    double prof_c = 0.0;
    bool critical = false, do_verify = false;
    auto* prof_c_opt = profile->add_option("--c", prof_c, "wave speed");
    profile->add_flag("--critical", critical, "continue toward the minimal speed");
    profile->add_flag("--verify", do_verify, "audit the solved profile");

    auto* simulate = app.add_subcommand("simulate", "evolve the lattice equation");
    std::string initial = "step", profile_csv;
    double sim_c = 0.0;
    long sites = 1200, x0 = -1;
    double horizon = 200.0, sim_dt = 0.0;
    simulate->add_option("--initial", initial, "initial data: step or profile");
    simulate->add_option("--profile", profile_csv, "profile CSV for --initial profile");
    auto* sim_c_opt = simulate->add_option("--c", sim_c, "solve a profile at this speed first");
    simulate->add_option("--sites", sites, "lattice size");
    simulate->add_option("--horizon", horizon, "final time");
    simulate->add_option("--dt", sim_dt, "time step (0 = automatic)");
    simulate->add_option("--x0", x0, "front seat (-1 = sites/4)");

    app.add_subcommand("verify", "speed, profiles, and a confirming simulation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (speed->parsed()) return run_speed(g, sweep);
    if (roots->parsed()) return run_roots(g, roots_c);
    if (profile->parsed())
        return run_profile(g, prof_c, prof_c_opt->count() > 0, critical, do_verify);
    if (simulate->parsed())
        return run_simulate(g, initial, profile_csv, sim_c, sim_c_opt->count() > 0, sites,
                            horizon, sim_dt, x0);
    return run_verify(g);
}
