#include "bip/metrics.hpp"

#include "bip/errors.hpp"
#include "bip/philox.hpp"
#include "bip/synth.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bip;
using namespace bip::testing;

TEST_CASE("non-collision rate") {
    auto gallery = gallery_from_matrix(sample_uniform_sphere(64, 100, 40));

    // empty virtual set is vacuously clean
    VirtualSet empty = virtual_set_from_matrix(EmbeddingMatrix(RowMatrixXf(0, 64)));
    CHECK(non_collision_rate(empty, gallery, 0.391) == 100.0);

    // one gallery copy among ten
    RowMatrixXf rows(10, 64);
    auto clean = sample_uniform_sphere(64, 10, 41);
    rows = clean.data();
    rows.row(4) = gallery.centroids.data().row(7);
    VirtualSet tainted = virtual_set_from_matrix(EmbeddingMatrix(std::move(rows)));
    CHECK(non_collision_rate(tainted, gallery, 0.391) == doctest::Approx(90.0));
}

TEST_CASE("inter-sep rate") {
    // {e, e, f} with e orthogonal to f: one colliding pair out of three
    auto m = matrix_from_rows({{1, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}});
    VirtualSet v = virtual_set_from_matrix(std::move(m));
    CHECK(inter_sep_rate(v, 0.391) == doctest::Approx(200.0 / 3.0).epsilon(1e-12));

    VirtualSet single = virtual_set_from_matrix(matrix_from_rows({{1, 0, 0, 0}}));
    CHECK(inter_sep_rate(single, 0.391) == 100.0);

    // permutation invariance
    auto big = sample_uniform_sphere(32, 50, 42);
    VirtualSet a = virtual_set_from_matrix(big);
    RowMatrixXf shuffled = big.data();
    for (Index i = 0; i < 25; ++i) shuffled.row(i).swap(shuffled.row(49 - i));
    VirtualSet b = virtual_set_from_matrix(EmbeddingMatrix(std::move(shuffled)));
    CHECK(inter_sep_rate(a, 0.3) == inter_sep_rate(b, 0.3));

    // oracle cross-check on a small random set
    std::uint64_t collisions = 0;
    for (Index i = 0; i < 50; ++i) {
        for (Index j = i + 1; j < 50; ++j) {
            if (oracle_dot(big.data().data() + i * 32, big.data().data() + j * 32, 32) >= 0.3) {
                ++collisions;
            }
        }
    }
    const double expected = 100.0 * (1225.0 - static_cast<double>(collisions)) / 1225.0;
    CHECK(inter_sep_rate(a, 0.3) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("threshold calibration") {
    CHECK(calibrate_threshold(std::vector<double>(100, 0.9), 0.95) == 0.9);

    // scores 0.01 .. 1.00: TAR 0.95 keeps 96 scores, threshold = 5th smallest
    std::vector<double> ladder(100);
    for (int i = 0; i < 100; ++i) ladder[static_cast<std::size_t>(i)] = (i + 1) / 100.0;
    CHECK(calibrate_threshold(ladder, 0.95) == doctest::Approx(0.05));
    CHECK(calibrate_threshold(ladder, 1.0) == doctest::Approx(0.01));

    // order-statistics oracle on random scores
    RandomStream rng(43, 0);
    std::vector<double> scores(137);
    for (auto& s : scores) s = rng.next_double();
    for (double tar : {0.5, 0.9, 0.95, 0.99}) {
        const double theta = calibrate_threshold(scores, tar);
        std::vector<double> sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        const auto k = static_cast<std::size_t>(
            std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(
                                            std::ceil((1.0 - tar) * 137.0 - 1e-9))));
        CHECK(theta == sorted[k - 1]);
        // achieved TAR meets the target
        const double achieved =
            static_cast<double>(std::count_if(scores.begin(), scores.end(),
                                              [&](double s) { return s >= theta; })) /
            137.0;
        CHECK(achieved >= tar);
    }

    CHECK_THROWS_AS(calibrate_threshold({}, 0.95), EmptyScores);
    CHECK_THROWS_AS(calibrate_threshold({0.5}, 0.0), DomainError);
}

TEST_CASE("evaluate pairs at a fixed threshold") {
    auto pop = sample_uniform_sphere(32, 20, 44);

    // all-genuine identical-vector pairs: accuracy 100% at any threshold < 1
    PairList self;
    for (Index i = 0; i < 20; ++i) {
        self.pairs.push_back(VerificationPair{i, i, PairLabel::genuine, -1});
    }
    const auto report = evaluate_pairs(pop, pop, self, 0.9, Protocol::rr);
    REQUIRE(report.accuracy.has_value());
    CHECK(*report.accuracy == 1.0);
    CHECK(!report.far.has_value());  // no impostors in the list

    // threshold -1: everything genuine; accuracy = genuine fraction
    PairList mixed;
    for (Index i = 0; i + 1 < 20; i += 2) {
        mixed.pairs.push_back(VerificationPair{i, i, PairLabel::genuine, -1});
        mixed.pairs.push_back(VerificationPair{i, i + 1, PairLabel::impostor, -1});
    }
    const auto all_genuine = evaluate_pairs(pop, pop, mixed, -1.0, Protocol::rr);
    CHECK(*all_genuine.accuracy == doctest::Approx(0.5));
    CHECK(*all_genuine.far == 1.0);
    // self-dots of float-rounded unit rows land within ~1e-7 of 1, so the
    // "above everything" threshold needs an epsilon that dominates that
    const auto all_impostor = evaluate_pairs(pop, pop, mixed, 1.0 + 1e-6, Protocol::rr);
    CHECK(*all_impostor.accuracy == doctest::Approx(0.5));
    CHECK(*all_impostor.far == 0.0);

    // FAR is monotone non-increasing in the threshold
    double prev_far = 1.1;
    for (double theta : {-1.0, 0.0, 0.2, 0.5, 0.9, 1.01}) {
        const auto r = evaluate_pairs(pop, pop, mixed, theta, Protocol::rr);
        CHECK(*r.far <= prev_far);
        prev_far = *r.far;
    }

    // index validation
    PairList bad;
    bad.pairs.push_back(VerificationPair{0, 99, PairLabel::genuine, -1});
    CHECK_THROWS_AS(evaluate_pairs(pop, pop, bad, 0.5, Protocol::rr), IndexOutOfRange);
}

TEST_CASE("r-v style evaluation reports far only") {
    // two populations far apart: all cross pairs are impostors scoring low
    VectorXd mu = VectorXd::Unit(64, 0);
    auto real_pop = sample_vmf(mu, 300.0, 30, 45);
    auto virtual_pop = sample_vmf(-mu, 300.0, 30, 46);
    PairList rv;
    for (Index i = 0; i < 30; ++i) {
        rv.pairs.push_back(VerificationPair{i, i, PairLabel::impostor, -1});
    }
    const auto report = evaluate_pairs(real_pop, virtual_pop, rv, 0.391, Protocol::rv);
    CHECK(!report.accuracy.has_value());
    REQUIRE(report.far.has_value());
    CHECK(*report.far == 0.0);
}

TEST_CASE("two-cluster accuracy matches a confusion-matrix oracle") {
    VectorXd mu = VectorXd::Unit(32, 3);
    auto a = sample_vmf(mu, 18.0, 60, 47);
    auto b = sample_vmf(mu, 18.0, 60, 48);
    RandomStream rng(49, 0);
    PairList list;
    for (Index i = 0; i < 60; ++i) {
        const bool genuine = (i % 2) == 0;
        const Index other = genuine ? i : static_cast<Index>(rng.uniform_index(60));
        list.pairs.push_back(VerificationPair{
            i, other, genuine ? PairLabel::genuine : PairLabel::impostor, -1});
    }
    const double theta = 0.62;
    const auto report = evaluate_pairs(a, b, list, theta, Protocol::vv);

    std::uint64_t correct = 0, fa = 0, imp = 0;
    for (const auto& p : list.pairs) {
        const double score =
            oracle_dot(a.data().data() + p.a * 32, b.data().data() + p.b * 32, 32);
        const bool pred = score >= theta;
        const bool truth = p.label == PairLabel::genuine;
        if (pred == truth) ++correct;
        if (!truth) {
            ++imp;
            if (pred) ++fa;
        }
    }
    CHECK(*report.accuracy == doctest::Approx(correct / 60.0).epsilon(1e-12));
    CHECK(*report.far == doctest::Approx(static_cast<double>(fa) / imp).epsilon(1e-12));
}

TEST_CASE("folded evaluation calibrates on the other folds") {
    VectorXd mu = VectorXd::Unit(32, 0);
    auto a = sample_vmf(mu, 25.0, 200, 50);
    auto b = sample_vmf(mu, 25.0, 200, 51);
    RandomStream rng(52, 0);
    PairList list;
    for (Index i = 0; i < 200; ++i) {
        const bool genuine = (i % 2) == 0;
        const Index other = genuine ? i : static_cast<Index>(rng.uniform_index(200));
        list.pairs.push_back(VerificationPair{
            i, other, genuine ? PairLabel::genuine : PairLabel::impostor,
            static_cast<int>(i % 10)});
    }
    REQUIRE(list.has_folds());
    REQUIRE(list.fold_count() == 10);

    const auto report = evaluate_pairs_folded(a, b, list, 0.95, Protocol::rr);
    REQUIRE(report.per_fold.size() == 10);
    REQUIRE(report.accuracy.has_value());

    // oracle per fold: sort the other folds' genuine scores, take the
    // ceil((1-tar) n)-th smallest
    for (const auto& fr : report.per_fold) {
        std::vector<double> calib;
        for (const auto& p : list.pairs) {
            if (p.fold != fr.fold && p.label == PairLabel::genuine) {
                calib.push_back(
                    oracle_dot(a.data().data() + p.a * 32, b.data().data() + p.b * 32, 32));
            }
        }
        std::sort(calib.begin(), calib.end());
        const auto n = static_cast<double>(calib.size());
        auto k = static_cast<std::size_t>(
            std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(std::ceil(0.05 * n - 1e-9))));
        CHECK(fr.threshold == calib[k - 1]);
    }

    PairList no_folds = list;
    for (auto& p : no_folds.pairs) p.fold = -1;
    CHECK_THROWS_AS(evaluate_pairs_folded(a, b, no_folds, 0.95, Protocol::rr), MissingFolds);
}

TEST_CASE("pair list csv round-trip") {
    PairList list;
    list.pairs.push_back(VerificationPair{0, 1, PairLabel::genuine, 0});
    list.pairs.push_back(VerificationPair{2, 3, PairLabel::impostor, 1});
    const std::string path = temp_path("pairs.csv");
    list.save_csv(path);
    const PairList back = PairList::load_csv(path);
    REQUIRE(back.pairs.size() == 2);
    CHECK(back.pairs[0].a == 0);
    CHECK(back.pairs[0].label == PairLabel::genuine);
    CHECK(back.pairs[1].fold == 1);
    CHECK(back.has_folds());
}

TEST_CASE("bip metrics json") {
    auto gallery = gallery_from_matrix(sample_uniform_sphere(64, 10, 53));
    VirtualSet v = virtual_set_from_matrix(sample_uniform_sphere(64, 5, 54));
    const BipMetrics m = bip_metrics(v, gallery, 0.391);
    const auto j = to_json(m);
    CHECK(j.at("n_virtual") == 5);
    CHECK(j.at("n_gallery") == 10);
    CHECK(j.at("tau") == 0.391);
}
