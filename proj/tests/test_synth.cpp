#include "bip/synth.hpp"

#include "bip/capacity_stats.hpp"
#include "bip/errors.hpp"
#include "bip/spherical_geometry.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace bip;
using namespace bip::testing;

TEST_CASE("uniform sphere samples are unit and deterministic") {
    auto a = sample_uniform_sphere(8, 500, 71);
    auto b = sample_uniform_sphere(8, 500, 71);
    CHECK(std::memcmp(a.data().data(), b.data().data(), 500 * 8 * sizeof(float)) == 0);
    CHECK_NOTHROW(a.validate_unit_rows(1e-6));

    auto c = sample_uniform_sphere(8, 500, 72);
    CHECK(std::memcmp(a.data().data(), c.data().data(), 500 * 8 * sizeof(float)) != 0);
}

TEST_CASE("uniform sphere mean vector shrinks like the CLT") {
    auto m = sample_uniform_sphere(8, 1000000, 73);
    VectorXd mean = VectorXd::Zero(8);
    for (Index i = 0; i < m.count(); ++i) mean += m.row_as_double(i);
    mean /= static_cast<double>(m.count());
    CHECK(mean.norm() < 0.005);
}

TEST_CASE("vmf mixture reproducibility and unit rows") {
    const SynthGalleryConfig cfg{.dim = 16, .n_clusters = 4, .per_cluster = 50,
                                 .concentration = 24.0, .seed = 74};
    const Gallery a = sample_vmf_mixture(cfg);
    const Gallery b = sample_vmf_mixture(cfg);
    CHECK(std::memcmp(a.centroids.data().data(), b.centroids.data().data(),
                      200 * 16 * sizeof(float)) == 0);
    CHECK_NOTHROW(a.centroids.validate_unit_rows(1e-6));
    CHECK(a.labels.size() == 200);
    CHECK(a.labels.front() == "c0");
    CHECK(a.labels.back() == "c3");
}

TEST_CASE("vmf concentration limits") {
    // near-zero concentration approaches uniform: small mean resultant
    const SynthGalleryConfig loose{.dim = 16, .n_clusters = 1, .per_cluster = 100000,
                                   .concentration = 1e-6, .seed = 75};
    const Gallery g = sample_vmf_mixture(loose);
    VectorXd mean = VectorXd::Zero(16);
    for (Index i = 0; i < g.centroids.count(); ++i) mean += g.centroids.row_as_double(i);
    mean /= static_cast<double>(g.centroids.count());
    CHECK(mean.norm() < 0.01);

    // huge concentration collapses onto the mean direction
    const SynthGalleryConfig tight{.dim = 64, .n_clusters = 1, .per_cluster = 200,
                                   .concentration = 1e6, .seed = 76};
    const Gallery t = sample_vmf_mixture(tight);
    const VectorXd mu = compute_centroid(t.centroids.data());
    for (Index i = 0; i < t.centroids.count(); ++i) {
        CHECK(t.centroids.row_as_double(i).dot(mu) > 0.999);
    }
}

TEST_CASE("antipodal clusters give a bimodal cosine histogram") {
    VectorXd mu = VectorXd::Zero(16);
    mu[0] = 1.0;
    auto up = sample_vmf(mu, 200.0, 300, 77);
    auto down = sample_vmf(-mu, 200.0, 300, 78);
    int hi = 0, lo = 0, mid = 0;
    for (Index i = 0; i < 300; ++i) {
        const double c_up = up.row_as_double(i).dot(mu);
        const double c_down = down.row_as_double(i).dot(mu);
        for (double c : {c_up, c_down}) {
            if (c > 0.5) ++hi;
            else if (c < -0.5) ++lo;
            else ++mid;
        }
    }
    CHECK(hi == 300);
    CHECK(lo == 300);
    CHECK(mid == 0);
}

TEST_CASE("monte-carlo cap volume matches closed forms") {
    const auto d2 = mc_cap_volume(0.5, 2, 1000000, 80);
    CHECK(std::fabs(d2.estimate - 1.0 / 3.0) < 3.0 * d2.standard_error);
    const auto d3 = mc_cap_volume(0.5, 3, 1000000, 81);
    CHECK(std::fabs(d3.estimate - 0.25) < 3.0 * d3.standard_error);
    const auto tail = mc_cap_volume(0.99, 3, 1000000, 82);
    CHECK(std::fabs(tail.estimate - 0.005) < 3.0 * tail.standard_error);
}

TEST_CASE("monte-carlo standard error shrinks like one over sqrt n") {
    const auto e4 = mc_cap_volume(0.2, 8, 10000, 83);
    const auto e5 = mc_cap_volume(0.2, 8, 100000, 83);
    const auto e6 = mc_cap_volume(0.2, 8, 1000000, 83);
    CHECK(e4.standard_error / e5.standard_error == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
    CHECK(e5.standard_error / e6.standard_error == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
    // and the estimates agree with the exact value at 3 SE
    const double exact = cap_volume(0.2, 8).linear;
    CHECK(std::fabs(e6.estimate - exact) < 3.0 * e6.standard_error);
}

TEST_CASE("bisection alpha star") {
    CHECK(bisection_alpha_star(0.0, 0.391, 1e-10) == doctest::Approx(2.354).epsilon(0.0025));
    CHECK(bisection_alpha_star(0.3, 0.391, 1e-10) == doctest::Approx(9.5).epsilon(0.011));
    RandomStream rng(84, 0);
    for (int i = 0; i < 100; ++i) {
        const double tau = 0.15 + 0.7 * rng.next_double();
        const double p = (2.0 * rng.next_double() - 1.0) * 0.85 * tau;
        CHECK(std::fabs(bisection_alpha_star(p, tau, 1e-10) - alpha_star(p, tau)) <= 1e-9);
    }
    CHECK_THROWS_AS(bisection_alpha_star(0.5, 0.4, 1e-10), DomainError);
}

TEST_CASE("planted collisions hit exactly the planted rows") {
    VirtualSet vset = virtual_set_from_matrix(sample_uniform_sphere(128, 400, 85));

    std::vector<Index> planted;
    const Gallery none = plant_collisions(vset, 2000, 0.0, 0.391, 86, &planted);
    CHECK(planted.empty());
    CHECK(count_collisions(vset, none, 0.391) == 0);

    const Gallery all = plant_collisions(vset, 300, 1.0, 0.391, 87, &planted);
    CHECK(planted.size() == 300);
    CHECK(count_collisions(vset, all, 0.391) == 300);  // one collision per planted row

    const Gallery some = plant_collisions(vset, 10000, 0.01, 0.391, 88, &planted);
    const auto c = count_collisions(vset, some, 0.391);
    CHECK(c == planted.size());
    CHECK(std::fabs(static_cast<double>(c) - 100.0) < 3.0 * std::sqrt(10000 * 0.01));
}
