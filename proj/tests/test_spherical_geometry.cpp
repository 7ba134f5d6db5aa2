#include "bip/spherical_geometry.hpp"

#include "bip/errors.hpp"
#include "bip/philox.hpp"
#include "bip/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace bip;

TEST_CASE("cap volume closed-form anchors") {
    CHECK(cap_volume(0.5, 2).linear == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(cap_volume(0.391, 269).linear == doctest::Approx(1.35e-11).epsilon(0.01));
    CHECK(cap_volume(0.391, 512).linear == doctest::Approx(1.74e-20).epsilon(0.01));
    for (double tau = 0.1; tau < 0.95; tau += 0.1) {
        CHECK(cap_volume(tau, 3).linear == doctest::Approx((1.0 - tau) / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("cap volume linear and log representations agree") {
    for (double tau : {0.1, 0.319, 0.391, 0.448, 0.7, 0.9}) {
        for (int dim : {2, 3, 16, 64, 269, 512}) {
            const CapVolume v = cap_volume(tau, dim);
            if (v.linear >= 1e-300) {
                CHECK(std::exp(v.log_natural) == doctest::Approx(v.linear).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("cap volume is strictly decreasing in tau and non-increasing in dim") {
    for (int dim : {2, 3, 8, 64, 269, 512}) {
        double prev = 1.0;
        for (double tau = 0.05; tau <= 0.951; tau += 0.05) {
            const double mu = cap_volume(tau, dim).linear;
            CHECK(mu < prev);
            prev = mu;
        }
    }
    for (double tau : {0.2, 0.391, 0.7}) {
        double prev_log = 1.0;
        bool first = true;
        for (int dim : {2, 3, 4, 8, 16, 32, 64, 128, 269, 512}) {
            const double lg = cap_volume(tau, dim).log_natural;
            if (!first) CHECK(lg <= prev_log);
            prev_log = lg;
            first = false;
        }
    }
}

TEST_CASE("cap volume rejects out-of-domain arguments") {
    CHECK_THROWS_AS(cap_volume(0.0, 8), DomainError);
    CHECK_THROWS_AS(cap_volume(1.0, 8), DomainError);
    CHECK_THROWS_AS(cap_volume(0.5, 1), DomainError);
}

TEST_CASE("gaussian approximation and its overestimate factor") {
    CHECK(gaussian_cap_approx(0.391, 269) == doctest::Approx(7.2e-11).epsilon(0.02));
    CHECK(gaussian_cap_approx(0.0, 64) == doctest::Approx(0.5).epsilon(1e-12));
    const double ratio = gaussian_cap_approx(0.391, 269) / cap_volume(0.391, 269).linear;
    CHECK(ratio == doctest::Approx(5.3).epsilon(0.04));
}

TEST_CASE("gv bound reproduces the capacity table rows") {
    struct Row {
        double tau, mu, log2, gv, alpha;
    };
    const Row rows[] = {
        {0.319, 4.21e-8, 24.50, 2.38e7, 2.97},  {0.330, 1.40e-8, 26.09, 7.15e7, 2.86},
        {0.341, 4.45e-9, 27.74, 2.25e8, 2.76},  {0.360, 5.52e-10, 30.75, 1.81e9, 2.59},
        {0.391, 1.35e-11, 36.11, 7.41e10, 2.35}, {0.448, 4.92e-15, 47.53, 2.03e14, 2.00},
    };
    for (const auto& row : rows) {
        const CapacityReport r = gv_bound(row.tau, 269);
        CHECK(r.mu.linear == doctest::Approx(row.mu).epsilon(0.005));
        CHECK(r.gv_bound == doctest::Approx(row.gv).epsilon(0.005));
        CHECK(std::fabs(r.log2_gv - row.log2) < 0.05);
        CHECK(std::fabs(r.alpha_star_orthogonal - row.alpha) < 0.005);
        // report invariants
        CHECK(r.gv_bound * r.mu.linear == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.alpha_star_orthogonal ==
              doctest::Approx(std::sqrt(1.0 - row.tau * row.tau) / row.tau).epsilon(1e-12));
    }
    const CapacityReport full = gv_bound(0.391, 512);
    CHECK(full.gv_bound == doctest::Approx(5.75e19).epsilon(0.01));
    CHECK(std::fabs(full.log2_gv - 65.6) < 0.05);
}

TEST_CASE("displaced cosine") {
    CHECK(displaced_cosine(0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(displaced_cosine(0.4, 0.0) == 1.0);
    CHECK(displaced_cosine(-0.7, 0.0) == 1.0);

    // strictly decreasing in alpha
    for (double p : {-0.5, -0.1, 0.0, 0.3}) {
        double prev = 1.0;
        for (double alpha = 0.25; alpha < 8.0; alpha += 0.25) {
            const double c = displaced_cosine(p, alpha);
            CHECK(c < prev);
            prev = c;
        }
    }

    // explicit construction oracle in d=8: r = e1, z = p e1 + sqrt(1-p^2) e2
    const double p = -0.2, alpha = 2.0;
    VectorXd r = VectorXd::Zero(8), z = VectorXd::Zero(8);
    r[0] = 1.0;
    z[0] = p;
    z[1] = std::sqrt(1.0 - p * p);
    const VectorXd s = (r + alpha * z).normalized();
    CHECK(displaced_cosine(p, alpha) == doctest::Approx(s.dot(r)).epsilon(1e-12));

    CHECK_THROWS_AS(displaced_cosine(1.0, 1.0), DomainError);
}

TEST_CASE("alpha star closed form and root property") {
    CHECK(alpha_star(0.0, 0.391) == doctest::Approx(2.354).epsilon(0.0025));
    CHECK(alpha_star(0.3, 0.391) == doctest::Approx(9.5).epsilon(0.011));
    CHECK(alpha_star(0.0, 0.448) == doctest::Approx(2.00).epsilon(0.005));

    CHECK(alpha_star(-0.2, 0.391) ==
          doctest::Approx(bisection_alpha_star(-0.2, 0.391, 1e-10)).epsilon(1e-9));

    RandomStream rng(21, 0);
    for (int i = 0; i < 200; ++i) {
        const double tau = 0.1 + 0.8 * rng.next_double();
        const double p = (2.0 * rng.next_double() - 1.0) * 0.9 * tau;
        const double a = alpha_star(p, tau);
        CHECK(displaced_cosine(p, a) == doctest::Approx(tau).epsilon(1e-9));
    }

    CHECK_THROWS_AS(alpha_star(0.5, 0.391), DomainError);
    CHECK_THROWS_AS(alpha_star(0.391, 0.391), DomainError);
    CHECK_THROWS_AS(alpha_star(0.391 - 1e-12, 0.391), DomainError);  // near-singular denominator
}

TEST_CASE("orthogonal case dominates the repulsive range below 1/sqrt(2)") {
    for (double tau : {0.319, 0.391, 0.448, 0.6, 0.7}) {
        const double at_zero = alpha_star(0.0, tau);
        for (double f = 0.05; f < 1.0; f += 0.05) {
            CHECK(alpha_star(-f * tau, tau) <= at_zero + 1e-12);
        }
    }
}

TEST_CASE("alpha star derivative") {
    CHECK(alpha_star_derivative_wrt_tau(0.391) == doctest::Approx(-7.106).epsilon(1e-3));
    for (double tau = 0.05; tau < 1.0; tau += 0.05) {
        CHECK(alpha_star_derivative_wrt_tau(tau) < 0.0);
    }
    // central finite difference of alpha_star(0, .)
    const double h = 1e-6;
    for (double tau : {0.319, 0.341, 0.360, 0.391, 0.448}) {
        const double fd = (alpha_star(0.0, tau + h) - alpha_star(0.0, tau - h)) / (2.0 * h);
        CHECK(alpha_star_derivative_wrt_tau(tau) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("safety buffer analysis") {
    const BufferReport r = safety_buffer_analysis(0.391, 0.031, 269);
    CHECK(r.tau_safe == doctest::Approx(0.360).epsilon(1e-12));
    CHECK(r.capacity_at_tau_safe.alpha_star_orthogonal == doctest::Approx(2.59).epsilon(0.004));
    CHECK(r.capacity_at_tau_safe.gv_bound == doctest::Approx(1.81e9).epsilon(0.01));
    CHECK(r.capacity_at_tau.alpha_star_orthogonal == doctest::Approx(2.35).epsilon(0.005));
    // monotonicity invariants
    CHECK(r.capacity_at_tau_safe.gv_bound <= r.capacity_at_tau.gv_bound);
    CHECK(r.capacity_at_tau_safe.alpha_star_orthogonal >= r.capacity_at_tau.alpha_star_orthogonal);

    const BufferReport r2 = safety_buffer_analysis(0.391, 0.072, 269);
    CHECK(r2.capacity_at_tau_safe.gv_bound == doctest::Approx(2.38e7).epsilon(0.01));
    CHECK(r2.capacity_at_tau_safe.gv_bound / 1e6 == doctest::Approx(24.0).epsilon(0.02));

    // delta -> 0: the two reports converge
    const BufferReport r3 = safety_buffer_analysis(0.391, 1e-9, 269);
    CHECK(r3.capacity_at_tau_safe.gv_bound ==
          doctest::Approx(r3.capacity_at_tau.gv_bound).epsilon(1e-5));

    CHECK_THROWS_AS(safety_buffer_analysis(0.391, 0.5, 269), DomainError);
    CHECK_THROWS_AS(safety_buffer_analysis(0.391, 0.0, 269), DomainError);
}

TEST_CASE("repulsion derivative diagnostic") {
    VectorXd r = VectorXd::Zero(8), z = VectorXd::Zero(8), c = VectorXd::Zero(8);
    r[0] = 1.0;
    z[1] = 1.0;  // orthogonal to both r and c
    c[2] = 1.0;
    CHECK(repulsion_derivative_diagnostic(r, z, c) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(repulsion_derivative_diagnostic(r, z, r) == doctest::Approx(0.0).epsilon(1e-15));

    // finite-difference oracle on random unit triples
    RandomStream rng(22, 0);
    for (int i = 0; i < 50; ++i) {
        VectorXd rr(8), zz(8), cc(8);
        for (int k = 0; k < 8; ++k) {
            rr[k] = rng.next_gaussian();
            zz[k] = rng.next_gaussian();
            cc[k] = rng.next_gaussian();
        }
        rr.normalize();
        zz.normalize();
        cc.normalize();
        const double h = 1e-6;
        const double fd =
            ((rr + h * zz).normalized().dot(cc) - (rr - h * zz).normalized().dot(cc)) / (2.0 * h);
        CHECK(repulsion_derivative_diagnostic(rr, zz, cc) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("capacity reports serialize with linear and log fields") {
    const auto j = to_json(gv_bound(0.391, 269));
    CHECK(j.at("mu").contains("linear"));
    CHECK(j.at("mu").contains("ln"));
    CHECK(j.contains("log2_gv"));
    const auto bj = to_json(safety_buffer_analysis(0.391, 0.031, 269));
    CHECK(bj.at("capacity_at_tau_safe").at("tau") == doctest::Approx(0.36));
}
