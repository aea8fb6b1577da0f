#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "latwave/latwave.h"

using doctest::Approx;

namespace {

std::string models_dir() { return LATWAVE_MODELS_DIR; }

struct ModelGuard {
    lw_model* m = nullptr;
    ~ModelGuard() { lw_model_free(m); }
};
struct ProfileGuard {
    lw_profile* p = nullptr;
    ~ProfileGuard() { lw_profile_free(p); }
};
struct TrackGuard {
    lw_track* t = nullptr;
    ~TrackGuard() { lw_track_free(t); }
};

std::string take(char* s) {
    std::string out = s ? s : "";
    lw_free_string(s);
    return out;
}

} // namespace

TEST_CASE("version and status names are exposed") {
    const char* v = lw_version();
    REQUIRE(v != nullptr);
    CHECK(std::strchr(v, '.') != nullptr);
    CHECK(std::string(lw_status_name(LW_OK)) == "ok");
    CHECK(std::string(lw_status_name(LW_ERR_VALIDATION)) != "ok");
    CHECK(lw_status_name(999) != nullptr);
}

TEST_CASE("bundled model construction and info round trip") {
    ModelGuard g;
    REQUIRE(lw_model_bundled("fisher", nullptr, nullptr, 0, 1.0, 0.0, &g.m) == LW_OK);
    char* info = nullptr;
    REQUIRE(lw_model_info_json(g.m, &info) == LW_OK);
    nlohmann::json j = nlohmann::json::parse(take(info));
    CHECK(j["name"] == "fisher");
    CHECK(j["K"].get<double>() == Approx(1.0));
    CHECK(j["kernel"] == "dirac");

    char* rep = nullptr;
    int passed = 0;
    REQUIRE(lw_model_check_json(g.m, &rep, &passed) == LW_OK);
    CHECK(passed == 1);
    nlohmann::json jr = nlohmann::json::parse(take(rep));
    CHECK(jr["passed"].get<bool>());
    CHECK(jr["checks"].is_array());
}

TEST_CASE("bundled model parameter overrides") {
    const char* keys[] = {"a", "b"};
    const double values[] = {1.0, 4.0};
    ModelGuard g;
    REQUIRE(lw_model_bundled("vector_disease", keys, values, 2, 1.0, 0.0, &g.m) == LW_OK);
    char* info = nullptr;
    REQUIRE(lw_model_info_json(g.m, &info) == LW_OK);
    nlohmann::json j = nlohmann::json::parse(take(info));
    CHECK(j["K"].get<double>() == Approx(0.75));  // (b - a) / b

    lw_model* bad = nullptr;
    CHECK(lw_model_bundled("nosuch", nullptr, nullptr, 0, 1.0, 0.0, &bad) ==
          LW_ERR_VALIDATION);
    CHECK(bad == nullptr);
    CHECK(std::string(lw_last_error()).find("nosuch") != std::string::npos);
}

TEST_CASE("model files and text parse through the C surface") {
    ModelGuard g;
    REQUIRE(lw_model_load((models_dir() + "/fisher.toml").c_str(), &g.m) == LW_OK);

    ModelGuard t;
    const char* text = "[model]\nf = v * (1 - u)\nK = 1\nM = 1\nsigma = 1\n";
    REQUIRE(lw_model_parse(text, &t.m) == LW_OK);

    lw_model* bad = nullptr;
    CHECK(lw_model_parse("not a model", &bad) == LW_ERR_VALIDATION);
    CHECK(std::string(lw_last_error()).size() > 0);
    CHECK(lw_model_load("nosuch_file.toml", &bad) == LW_ERR_IO);
}

TEST_CASE("null arguments are rejected uniformly") {
    CHECK(lw_model_load(nullptr, nullptr) == LW_ERR_INVALID_ARGUMENT);
    CHECK(lw_model_parse(nullptr, nullptr) == LW_ERR_INVALID_ARGUMENT);
    CHECK(lw_minimal_speed(nullptr, nullptr, nullptr, nullptr, nullptr) ==
          LW_ERR_INVALID_ARGUMENT);
    CHECK(lw_profile_summary_json(nullptr, nullptr) == LW_ERR_INVALID_ARGUMENT);
    CHECK(lw_track_size(nullptr, nullptr) == LW_ERR_INVALID_ARGUMENT);
    lw_model_free(nullptr);    // must be safe no-ops
    lw_profile_free(nullptr);
    lw_track_free(nullptr);
}

TEST_CASE("dispersion quantities through the C surface") {
    ModelGuard g;
    REQUIRE(lw_model_bundled("fisher", nullptr, nullptr, 0, 1.0, 0.0, &g.m) == LW_OK);

    double c_star = 0.0, lambda_star = 0.0, res1 = 0.0, res2 = 0.0;
    REQUIRE(lw_minimal_speed(g.m, &c_star, &lambda_star, &res1, &res2) == LW_OK);
    CHECK(c_star == Approx(2.07344468420534).epsilon(1e-10));
    CHECK(lambda_star == Approx(0.90710329357628993).epsilon(1e-8));
    CHECK(res1 <= 1e-10);
    CHECK(res2 <= 1e-10);

    double l1 = 0.0, l2 = 0.0, up = 0.0, mgf = 0.0, dv = 0.0;
    REQUIRE(lw_lambda_roots(g.m, 2.5, &l1, &l2) == LW_OK);
    CHECK(l1 == Approx(0.503612719289925).epsilon(1e-10));
    CHECK(l2 == Approx(1.52485903019062).epsilon(1e-10));
    REQUIRE(lw_upsilon(g.m, 2.5, &up) == LW_OK);
    CHECK(up == Approx(0.350387073959335).epsilon(1e-10));
    REQUIRE(lw_kernel_mgf(g.m, 1.7, &mgf) == LW_OK);
    CHECK(mgf == Approx(1.0));
    REQUIRE(lw_dispersion_delta(g.m, 2.0, 1.0, &dv) == LW_OK);
    CHECK(dv == Approx(3.0 - std::exp(1.0) - std::exp(-1.0)).epsilon(1e-13));

    CHECK(lw_lambda_roots(g.m, 1.5, &l1, &l2) == LW_ERR_DOMAIN);
    CHECK(std::string(lw_last_error()).size() > 0);
}

TEST_CASE("profile solve, verify and serialization through the C surface") {
    ModelGuard g;
    REQUIRE(lw_model_bundled("fisher", nullptr, nullptr, 0, 1.0, 0.0, &g.m) == LW_OK);

    lw_solve_options opt;
    lw_solve_options_init(&opt);
    CHECK(opt.tol == Approx(1e-10));
    CHECK(opt.nodes_per_unit == 10);
    CHECK(opt.normalize == 1);
    opt.half_length = 30.0;

    ProfileGuard p;
    REQUIRE(lw_solve_profile(g.m, 2.5, &opt, &p.p) == LW_OK);

    double mid = -1.0;
    REQUIRE(lw_profile_eval(p.p, 0.0, &mid) == LW_OK);
    CHECK(mid == Approx(0.5).epsilon(1e-9));

    char* summary = nullptr;
    REQUIRE(lw_profile_summary_json(p.p, &summary) == LW_OK);
    nlohmann::json j = nlohmann::json::parse(take(summary));
    CHECK(j["c"].get<double>() == Approx(2.5));
    CHECK(j["residual_norm"].get<double>() <= 1e-6);

    char* audit = nullptr;
    int passed = 0;
    REQUIRE(lw_profile_verify_json(p.p, &audit, &passed) == LW_OK);
    CHECK(passed == 1);
    nlohmann::json ja = nlohmann::json::parse(take(audit));
    CHECK(ja["passed"].get<bool>());

    const char* path = "capi_profile.csv";
    REQUIRE(lw_profile_write_csv(p.p, path) == LW_OK);
    std::FILE* f = std::fopen(path, "rb");
    REQUIRE(f != nullptr);
    std::fclose(f);

    size_t n = 7;
    REQUIRE(lw_profile_continuation(p.p, nullptr, 0, &n) == LW_OK);
    CHECK(n == 0);

    // below the admissible speed band the solve refuses with a domain error
    lw_profile* bad = nullptr;
    CHECK(lw_solve_profile(g.m, 2.074, &opt, &bad) == LW_ERR_DOMAIN);
    CHECK(bad == nullptr);
}

TEST_CASE("critical continuation through the C surface") {
    ModelGuard g;
    REQUIRE(lw_model_bundled("fisher", nullptr, nullptr, 0, 1.0, 0.0, &g.m) == LW_OK);
    lw_solve_options opt;
    lw_solve_options_init(&opt);
    opt.continuation_levels = 5;

    ProfileGuard p;
    REQUIRE(lw_solve_critical(g.m, &opt, &p.p) == LW_OK);

    char* summary = nullptr;
    REQUIRE(lw_profile_summary_json(p.p, &summary) == LW_OK);
    nlohmann::json j = nlohmann::json::parse(take(summary));
    CHECK(j["critical"].get<bool>());

    double buf[8] = {0};
    size_t n = 0;
    REQUIRE(lw_profile_continuation(p.p, buf, 8, &n) == LW_OK);
    CHECK(n == 2);
    CHECK(buf[1] < buf[0]);
}

TEST_CASE("lattice simulation through the C surface") {
    ModelGuard g;
    REQUIRE(lw_model_bundled("fisher", nullptr, nullptr, 0, 1.0, 0.0, &g.m) == LW_OK);

    lw_sim_options so;
    lw_sim_options_init(&so);
    CHECK(so.sites == 1200);
    so.sites = 400;
    so.horizon = 60.0;

    TrackGuard tr;
    REQUIRE(lw_simulate_step(g.m, &so, &tr.t) == LW_OK);
    size_t n = 0;
    REQUIRE(lw_track_size(tr.t, &n) == LW_OK);
    CHECK(n == 61);
    double t0 = -1.0, x0 = -1.0;
    REQUIRE(lw_track_get(tr.t, 0, &t0, &x0) == LW_OK);
    CHECK(t0 == 0.0);
    CHECK(x0 == Approx(99.5).epsilon(0.02));
    CHECK(lw_track_get(tr.t, n, &t0, &x0) == LW_ERR_INVALID_ARGUMENT);

    double speed = 0.0;
    int valid = 0;
    REQUIRE(lw_track_speed(tr.t, &speed, &valid) == LW_OK);
    CHECK(valid == 1);
    CHECK(speed == Approx(2.07344468420534).epsilon(0.08));

    char* summary = nullptr;
    REQUIRE(lw_track_summary_json(tr.t, &summary) == LW_OK);
    nlohmann::json j = nlohmann::json::parse(take(summary));
    CHECK(j.contains("speed"));

    const char* path = "capi_track.csv";
    REQUIRE(lw_track_write_csv(tr.t, path) == LW_OK);
    std::FILE* f = std::fopen(path, "rb");
    REQUIRE(f != nullptr);
    std::fclose(f);
}

TEST_CASE("profile seeded simulation travels at the profile speed") {
    ModelGuard g;
    REQUIRE(lw_model_bundled("fisher", nullptr, nullptr, 0, 1.0, 0.0, &g.m) == LW_OK);
    lw_solve_options opt;
    lw_solve_options_init(&opt);
    opt.half_length = 30.0;
    ProfileGuard p;
    REQUIRE(lw_solve_profile(g.m, 2.5, &opt, &p.p) == LW_OK);

    lw_sim_options so;
    lw_sim_options_init(&so);
    so.sites = 400;
    so.horizon = 50.0;
    TrackGuard tr;
    REQUIRE(lw_simulate_profile(g.m, p.p, &so, &tr.t) == LW_OK);
    double speed = 0.0;
    int valid = 0;
    REQUIRE(lw_track_speed(tr.t, &speed, &valid) == LW_OK);
    CHECK(valid == 1);
    CHECK(speed == Approx(2.5).epsilon(0.05));

    // seeding a simulation from a mismatched model is refused
    const char* path = "capi_seed.csv";
    REQUIRE(lw_profile_write_csv(p.p, path) == LW_OK);
    ModelGuard vd;
    REQUIRE(lw_model_bundled("vector_disease", nullptr, nullptr, 0, 1.0, 0.0, &vd.m) == LW_OK);
    lw_track* bad = nullptr;
    CHECK(lw_simulate_profile_csv(vd.m, path, &so, &bad) == LW_ERR_VALIDATION);
    CHECK(std::string(lw_last_error()).find("K") != std::string::npos);

    TrackGuard ok;
    CHECK(lw_simulate_profile_csv(g.m, path, &so, &ok.t) == LW_OK);
}
