#include <cmath>

#include "dispersion.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "model.hpp"
#include "oracles.hpp"

using namespace latwave;
using doctest::Approx;

namespace {

KernelSpec gaussian_kernel(double variance) {
    KernelSpec k;
    k.kind = KernelKind::gaussian;
    k.variance = variance;
    return k;
}

KernelSpec uniform_kernel(double half_width) {
    KernelSpec k;
    k.kind = KernelKind::uniform;
    k.half_width = half_width;
    return k;
}

KernelSpec triangle_kernel() {
    KernelSpec k;
    k.kind = KernelKind::tabulated;
    k.table_y = {-1.0, 0.0, 1.0};
    k.table_h = {0.0, 1.0, 0.0};
    return k;
}

} // namespace

TEST_CASE("kernel moments match direct quadrature of the density") {
    KernelSpec g = gaussian_kernel(1.0);
    CHECK(kernel_mgf(g, 0.7) == Approx(std::exp(0.49 / 2.0)).epsilon(1e-13));
    CHECK(kernel_mgf(g, -0.7) == Approx(kernel_mgf(g, 0.7)).epsilon(1e-14));
    CHECK(kernel_mgf(g, 0.0) == Approx(1.0).epsilon(1e-14));
    CHECK(kernel_mgf(g, 1.3) == Approx(oracle::mgf_gaussian(1.0, 1.3)).epsilon(1e-11));

    KernelSpec u = uniform_kernel(1.0);
    CHECK(kernel_mgf(u, 0.6) == Approx(std::sinh(0.6) / 0.6).epsilon(1e-13));
    CHECK(kernel_mgf(u, 0.6) == Approx(oracle::mgf_uniform(1.0, 0.6)).epsilon(1e-11));
    CHECK(kernel_mgf(u, 1e-7) == Approx(1.0).epsilon(1e-12));
    CHECK(kernel_mgf(u, 3.0) == Approx(oracle::mgf_uniform(1.0, 3.0)).epsilon(1e-11));

    KernelSpec d;  // point mass
    CHECK(kernel_mgf(d, 3.0) == 1.0);
    CHECK(kernel_mgf_d1(d, 3.0) == 0.0);

    KernelSpec t = triangle_kernel();
    auto density = [](double y) { return 1.0 - std::fabs(y); };
    for (double la : {0.3, 1.1, 2.5}) {
        double ref = oracle::integrate(
            [&](double y) { return density(y) * std::exp(-la * y); }, -1.0, 1.0, 1e-14);
        CHECK(kernel_mgf(t, la) == Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("kernel moment derivatives agree with finite differences") {
    for (const KernelSpec& k : {gaussian_kernel(0.7), uniform_kernel(1.3), triangle_kernel()}) {
        for (double la : {0.2, 0.9}) {
            double h = 1e-5;
            double fd1 = (kernel_mgf(k, la + h) - kernel_mgf(k, la - h)) / (2.0 * h);
            CHECK(kernel_mgf_d1(k, la) == Approx(fd1).epsilon(1e-7));
            double fd2 = (kernel_mgf_d1(k, la + h) - kernel_mgf_d1(k, la - h)) / (2.0 * h);
            CHECK(kernel_mgf_d2(k, la) == Approx(fd2).epsilon(1e-6));
        }
    }
}

TEST_CASE("characteristic function values match hand arithmetic") {
    ReactionModel m = make_fisher();
    double lap1 = std::exp(1.0) + std::exp(-1.0) - 2.0;
    CHECK(delta(m, 2.0, 1.0) == Approx(2.0 - lap1 - 1.0).epsilon(1e-14));
    CHECK(delta(m, 2.0, 0.0) == Approx(-1.0).epsilon(1e-14));
    CHECK(delta_tilde(m, 1.0, 1.0) == Approx(lap1).epsilon(1e-14));
    CHECK(delta_tilde(m, 1.0, 0.0) == Approx(-1.0).epsilon(1e-14));

    double h = 1e-6;
    for (double la : {0.4, 1.2}) {
        double fd = (delta(m, 2.5, la + h) - delta(m, 2.5, la - h)) / (2.0 * h);
        CHECK(delta_lambda(m, 2.5, la) == Approx(fd).epsilon(1e-7));
        double fd2 = (delta_lambda(m, 2.5, la + h) - delta_lambda(m, 2.5, la - h)) / (2.0 * h);
        CHECK(delta_lambda2(m, 2.5, la) == Approx(fd2).epsilon(1e-6));
        double fdt = (delta_tilde(m, 2.5, la + h) - delta_tilde(m, 2.5, la - h)) / (2.0 * h);
        CHECK(delta_tilde_lambda(m, 2.5, la) == Approx(fdt).epsilon(1e-7));
    }
}

TEST_CASE("delayed characteristic function includes the moment factor") {
    ReactionModel m = make_vector_disease(1.0, 2.0, 1.0, 0.5, gaussian_kernel(1.0));
    double c = 2.0, la = 0.8;
    double expected = c * la - (std::exp(la) + std::exp(-la) - 2.0) - (-1.0) -
                      2.0 * std::exp(-la * c * 0.5) * std::exp(la * la / 2.0);
    CHECK(delta(m, c, la) == Approx(expected).epsilon(1e-13));
}

TEST_CASE("minimal speed for the logistic lattice") {
    ReactionModel m = make_fisher();
    SpeedResult s = minimal_speed(m);
    CHECK(s.c_star == Approx(2.07344468420534).epsilon(1e-12));
    CHECK(s.lambda_star == Approx(0.90710329357628993).epsilon(1e-9));
    CHECK(s.delta_residual <= 1e-10);
    CHECK(s.dlambda_residual <= 1e-10);

    // independent check: minimize the explicit speed envelope over lambda
    auto env = [](double la) { return (std::exp(la) + std::exp(-la) - 2.0 + 1.0) / la; };
    double la_or = oracle::golden_min(env, 0.2, 3.0);
    CHECK(s.c_star == Approx(env(la_or)).epsilon(1e-10));
}

TEST_CASE("maximum of the characteristic function changes sign at c_star") {
    ReactionModel m = make_fisher();
    SpeedResult s = minimal_speed(m);
    CHECK(std::fabs(max_delta(m, s.c_star).value) <= 1e-10);
    CHECK(max_delta(m, 0.9 * s.c_star).value < 0.0);
    CHECK(max_delta(m, 1.2 * s.c_star).value > 0.0);
    CHECK(max_delta(m, s.c_star).lambda_hat == Approx(s.lambda_star).epsilon(1e-6));
}

TEST_CASE("decay exponents at a supercritical speed") {
    ReactionModel m = make_fisher();
    RootSet r = lambda_roots(m, 2.5);
    CHECK(r.lambda1 == Approx(0.503612719289925).epsilon(1e-12));
    CHECK(r.lambda2 == Approx(1.52485903019062).epsilon(1e-12));
    CHECK(r.upsilon == Approx(0.350387073959335).epsilon(1e-12));
    CHECK(std::fabs(delta(m, 2.5, r.lambda1)) <= 1e-11);
    CHECK(std::fabs(delta(m, 2.5, r.lambda2)) <= 1e-11);

    // strict interior positivity, strict exterior negativity
    CHECK(delta(m, 2.5, 0.5 * (r.lambda1 + r.lambda2)) > 0.0);
    CHECK(delta(m, 2.5, 0.9 * r.lambda1) < 0.0);
    CHECK(delta(m, 2.5, 1.1 * r.lambda2) < 0.0);

    SpeedResult s = minimal_speed(m);
    CHECK_THROWS_AS(lambda_roots(m, 2.0), DomainError);
    CHECK_THROWS_AS(lambda_roots(m, s.c_star * (1.0 + 1e-12)), DomainError);
}

TEST_CASE("companion root exists on both sides of c_star") {
    ReactionModel m = make_fisher();
    CHECK(upsilon(m, 1.0) == Approx(0.612703004771705).epsilon(1e-12));
    CHECK(upsilon(m, 2.5) == Approx(0.350387073959335).epsilon(1e-12));
    CHECK(std::fabs(delta_tilde(m, 2.5, upsilon(m, 2.5))) <= 1e-11);
    CHECK(delta_tilde(m, 2.5, 0.0) < 0.0);
}

TEST_CASE("minimal speed with a distributed delayed kernel") {
    ReactionModel m0 = make_vector_disease(1.0, 2.0, 1.0, 0.0, gaussian_kernel(1.0));
    SpeedResult s0 = minimal_speed(m0);
    CHECK(s0.c_star == Approx(2.9348908750402089).epsilon(1e-10));
    CHECK(s0.lambda_star == Approx(0.63911313056004677).epsilon(1e-8));

    ReactionModel m5 = with_tau(m0, 0.5);
    SpeedResult s5 = minimal_speed(m5);
    CHECK(s5.c_star == Approx(1.4771452895964150).epsilon(1e-10));
    CHECK(s5.c_star < s0.c_star);

    // cross-check against the envelope oracle with quadrature moments
    auto G = [](double la) { return oracle::mgf_gaussian(1.0, la, 1e-11); };
    double c_or = oracle::minimal_speed(1.0, 0.5, -1.0, 2.0, G, 1e-3, 4.0);
    CHECK(s5.c_star == Approx(c_or).epsilon(1e-8));
    CHECK(s5.delta_residual <= 1e-10);
}
