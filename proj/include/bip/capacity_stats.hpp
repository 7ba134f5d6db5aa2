#pragma once

// Poisson effective-capacity estimation: exact collision counting, MLE,
// exact confidence intervals, zero-collision bounds, expected-collision
// audits, acceptance-probability modeling and the open-world stress test.

#include "bip/embedding_store.hpp"
#include "bip/types.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace bip {

struct CollisionStats {
    std::uint64_t n_virtual = 0;    // N
    std::uint64_t n_real_test = 0;  // L
    std::uint64_t collisions = 0;   // C
    double tau = 0.0;
    std::optional<double> mle;                    // NL/C, absent when C = 0
    double ci_low = 0.0;
    double ci_high = 0.0;                         // +inf when C = 0
    double ci_level = 0.95;
    std::optional<double> zero_collision_lower;   // present when C = 0
};

struct OpenWorldCurve {
    std::vector<double> fractions;
    std::vector<double> rates;      // C / (N * L_f)
    std::vector<std::uint64_t> l_values;
    std::vector<std::uint64_t> counts;
    double alpha = 0.0;
    double tau = 0.0;
    std::vector<CollisionStats> per_fraction;
};

// Exact count of (virtual, test) pairs with cosine >= tau.
std::uint64_t count_collisions(const VirtualSet& virtual_set, const Gallery& test_gallery,
                               double tau);

// NL / C; throws ZeroCollisions when C = 0 (use zero_collision_bound).
double poisson_mle(std::uint64_t n, std::uint64_t l, std::uint64_t c);

// Exact Poisson interval for the effective capacity via chi-squared
// quantiles; the upper limit is +inf when C = 0.
std::pair<double, double> exact_poisson_ci(std::uint64_t n, std::uint64_t l, std::uint64_t c,
                                           double ci_level = 0.95);

// One-sided lower bound NL / ln(1/(1-confidence)) for the zero-collision case.
double zero_collision_bound(std::uint64_t n, std::uint64_t l, double confidence = 0.95);

// lambda = N L mu.
double expected_collisions(double n, double l, double mu);

// e^-lambda lambda^c / c!, evaluated in log domain.
double poisson_pmf(double lambda, std::uint64_t c);

// 1 - (M + v) / A_GV under the disjoint-cap, uniform-density model.
double acceptance_probability_model(double m, double v_current, double gv_bound_value);

CollisionStats make_collision_stats(std::uint64_t n, std::uint64_t l, std::uint64_t c, double tau,
                                    double ci_level = 0.95);

// Collision rate of the full virtual set against growing prefixes of the
// held-out gallery: L_f = round(f * L) rows for each fraction f in (0, 1].
OpenWorldCurve open_world_stress(const VirtualSet& virtual_set, const Gallery& heldout, double tau,
                                 const std::vector<double>& fractions);

nlohmann::json to_json(const CollisionStats& s);
nlohmann::json to_json(const OpenWorldCurve& c);
std::string open_world_csv(const OpenWorldCurve& c);

}  // namespace bip
