#pragma once

#include "bip/errors.hpp"

#include <json.hpp>

#include <cstdint>

namespace bip {

// Provisioning parameters. alpha is either fixed (alpha_min == alpha_max) or
// drawn uniformly from [alpha_min, alpha_max] per attempt.
struct AllocConfig {
    double tau = 0.391;
    double alpha_min = 4.0;
    double alpha_max = 4.0;
    int k_neighbors = 10;
    double temperature = 0.1;
    double kappa = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t max_attempts_per_candidate = 64;
    std::uint64_t max_total_attempts = 1'000'000;

    bool alpha_is_range() const { return alpha_min != alpha_max; }

    void validate() const {
        if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("config: tau outside (0,1)");
        if (!(alpha_min > 0.0)) throw ConfigError("config: alpha must be positive");
        if (alpha_min > alpha_max) throw ConfigError("config: alpha_min > alpha_max");
        if (k_neighbors < 1) throw ConfigError("config: k_neighbors must be >= 1");
        if (!(temperature > 0.0)) throw ConfigError("config: temperature must be positive");
        if (kappa < 0.0) throw ConfigError("config: kappa must be >= 0");
        if (max_attempts_per_candidate == 0) throw ConfigError("config: max_attempts_per_candidate must be >= 1");
        if (max_total_attempts == 0) throw ConfigError("config: max_total_attempts must be >= 1");
    }
};

inline nlohmann::json to_json(const AllocConfig& c) {
    nlohmann::json j{
        {"tau", c.tau},
        {"k_neighbors", c.k_neighbors},
        {"temperature", c.temperature},
        {"kappa", c.kappa},
        {"seed", c.seed},
        {"max_attempts_per_candidate", c.max_attempts_per_candidate},
        {"max_total_attempts", c.max_total_attempts},
    };
    if (c.alpha_is_range()) {
        j["alpha"] = {c.alpha_min, c.alpha_max};
    } else {
        j["alpha"] = c.alpha_min;
    }
    return j;
}

inline AllocConfig alloc_config_from_json(const nlohmann::json& j) {
    AllocConfig c;
    c.tau = j.at("tau").get<double>();
    const auto& a = j.at("alpha");
    if (a.is_array()) {
        if (a.size() != 2) throw ConfigError("config: alpha range must have two entries");
        c.alpha_min = a[0].get<double>();
        c.alpha_max = a[1].get<double>();
    } else {
        c.alpha_min = c.alpha_max = a.get<double>();
    }
    if (j.contains("k_neighbors")) c.k_neighbors = j.at("k_neighbors").get<int>();
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("kappa")) c.kappa = j.at("kappa").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("max_attempts_per_candidate")) {
        c.max_attempts_per_candidate = j.at("max_attempts_per_candidate").get<std::uint64_t>();
    }
    if (j.contains("max_total_attempts")) {
        c.max_total_attempts = j.at("max_total_attempts").get<std::uint64_t>();
    }
    c.validate();
    return c;
}

}  // namespace bip
