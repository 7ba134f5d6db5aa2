#include "bip/capacity_stats.hpp"

#include "bip/errors.hpp"
#include "bip/special_functions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json num_or_inf(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

std::uint64_t count_prefix_collisions(const VirtualSet& vset, const CosineScanner& scanner,
                                      double tau, Index l) {
    std::uint64_t total = 0;
    for (Index j = 0; j < vset.embeddings.count(); ++j) {
        const VectorXd v = vset.embeddings.row_as_double(j);
        total += scanner.count_ge(v.data(), tau, 0, l);
    }
    return total;
}

}  // namespace

std::uint64_t count_collisions(const VirtualSet& virtual_set, const Gallery& test_gallery,
                               double tau) {
    if (virtual_set.embeddings.count() == 0 || test_gallery.centroids.count() == 0) return 0;
    if (virtual_set.embeddings.dim() != test_gallery.centroids.dim()) {
        throw DomainError("count_collisions: dim mismatch");
    }
    return count_prefix_collisions(virtual_set, test_gallery.centroids.scanner(), tau,
                                   test_gallery.centroids.count());
}

double poisson_mle(std::uint64_t n, std::uint64_t l, std::uint64_t c) {
    if (c == 0) {
        throw ZeroCollisions("poisson_mle: undefined at C = 0; use zero_collision_bound");
    }
    return static_cast<double>(n) * static_cast<double>(l) / static_cast<double>(c);
}

std::pair<double, double> exact_poisson_ci(std::uint64_t n, std::uint64_t l, std::uint64_t c,
                                           double ci_level) {
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw DomainError("exact_poisson_ci: ci_level outside (0,1)");
    }
    const double nl = static_cast<double>(n) * static_cast<double>(l);
    const double alpha = 1.0 - ci_level;
    const double low =
        nl / (0.5 * sf::chi2_quantile(2.0 * static_cast<double>(c + 1), 1.0 - alpha / 2.0));
    const double high =
        c == 0 ? kInf : nl / (0.5 * sf::chi2_quantile(2.0 * static_cast<double>(c), alpha / 2.0));
    return {low, high};
}

double zero_collision_bound(std::uint64_t n, std::uint64_t l, double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw DomainError("zero_collision_bound: confidence outside (0,1)");
    }
    return static_cast<double>(n) * static_cast<double>(l) / std::log(1.0 / (1.0 - confidence));
}

double expected_collisions(double n, double l, double mu) {
    if (n < 0.0 || l < 0.0 || mu < 0.0) {
        throw DomainError("expected_collisions: arguments must be non-negative");
    }
    return n * l * mu;
}

double poisson_pmf(double lambda, std::uint64_t c) {
    return std::exp(sf::log_poisson_pmf(lambda, c));
}

double acceptance_probability_model(double m, double v_current, double gv_bound_value) {
    if (m < 0.0 || v_current < 0.0 || !(gv_bound_value > 0.0)) {
        throw DomainError("acceptance_probability_model: invalid arguments");
    }
    if (m + v_current >= gv_bound_value) {
        throw CapacityExceeded("acceptance_probability_model: M + |V| reaches the GV bound");
    }
    return 1.0 - (m + v_current) / gv_bound_value;
}

CollisionStats make_collision_stats(std::uint64_t n, std::uint64_t l, std::uint64_t c, double tau,
                                    double ci_level) {
    CollisionStats s;
    s.n_virtual = n;
    s.n_real_test = l;
    s.collisions = c;
    s.tau = tau;
    s.ci_level = ci_level;
    if (c > 0) s.mle = poisson_mle(n, l, c);
    const auto [low, high] = exact_poisson_ci(n, l, c, ci_level);
    s.ci_low = low;
    s.ci_high = high;
    if (c == 0) s.zero_collision_lower = zero_collision_bound(n, l, ci_level);
    return s;
}

OpenWorldCurve open_world_stress(const VirtualSet& virtual_set, const Gallery& heldout, double tau,
                                 const std::vector<double>& fractions) {
    if (virtual_set.embeddings.count() == 0) throw EmptyMatrix("open_world_stress: empty virtual set");
    if (heldout.centroids.count() == 0) throw EmptyMatrix("open_world_stress: empty held-out gallery");
    if (virtual_set.embeddings.dim() != heldout.centroids.dim()) {
        throw DomainError("open_world_stress: dim mismatch");
    }
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw DomainError("open_world_stress: fraction outside (0,1]");
    }

    OpenWorldCurve curve;
    curve.tau = tau;
    const auto& cfg = virtual_set.config_snapshot;
    curve.alpha = 0.5 * (cfg.alpha_min + cfg.alpha_max);

    const Index l_total = heldout.centroids.count();
    const std::uint64_t n = static_cast<std::uint64_t>(virtual_set.embeddings.count());
    const CosineScanner& scanner = heldout.centroids.scanner();
    for (double f : fractions) {
        Index lf = static_cast<Index>(std::llround(f * static_cast<double>(l_total)));
        lf = std::min(std::max(lf, Index(1)), l_total);
        const std::uint64_t c = count_prefix_collisions(virtual_set, scanner, tau, lf);
        curve.fractions.push_back(f);
        curve.l_values.push_back(static_cast<std::uint64_t>(lf));
        curve.counts.push_back(c);
        curve.rates.push_back(static_cast<double>(c) /
                              (static_cast<double>(n) * static_cast<double>(lf)));
        curve.per_fraction.push_back(
            make_collision_stats(n, static_cast<std::uint64_t>(lf), c, tau));
    }
    return curve;
}

nlohmann::json to_json(const CollisionStats& s) {
    nlohmann::json j{
        {"n_virtual", s.n_virtual},
        {"n_real_test", s.n_real_test},
        {"collisions", s.collisions},
        {"tau", s.tau},
        {"ci_low", s.ci_low},
        {"ci_high", num_or_inf(s.ci_high)},
        {"ci_level", s.ci_level},
    };
    j["mle"] = s.mle.has_value() ? nlohmann::json(*s.mle) : nlohmann::json(nullptr);
    j["zero_collision_lower"] = s.zero_collision_lower.has_value()
                                    ? nlohmann::json(*s.zero_collision_lower)
                                    : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const OpenWorldCurve& c) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : c.per_fraction) per.push_back(to_json(s));
    return {
        {"fractions", c.fractions}, {"rates", c.rates},   {"l_values", c.l_values},
        {"counts", c.counts},       {"alpha", c.alpha},   {"tau", c.tau},
        {"per_fraction", per},
    };
}

std::string open_world_csv(const OpenWorldCurve& c) {
    std::ostringstream os;
    os << "fraction,l,collisions,rate\n";
    for (std::size_t i = 0; i < c.fractions.size(); ++i) {
        os << c.fractions[i] << "," << c.l_values[i] << "," << c.counts[i] << ","
           << c.rates[i] << "\n";
    }
    return os.str();
}

}  // namespace bip
