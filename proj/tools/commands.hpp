#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace bip::cli {

// Exit codes shared by every subcommand: 0 success, 1 constraint-violation
// findings, 2 input/format error, 3 internal error.
constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInternalError = 3;

constexpr const char* kToolVersion = "0.1.0";

struct ManifestWriter {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;

    // writes "<prefix>.run.json"
    void write(const std::string& prefix, double wall_time_seconds) const;
};

int cmd_synth(const std::string& config_path, const std::string& out_prefix);
int cmd_gallery_stats(const std::string& gallery_path, const std::string& out_prefix);
int cmd_pca(const std::string& gallery_path, const std::string& out_prefix, bool origin_centered);
int cmd_capacity(const std::vector<double>& taus, int dim, double delta,
                 const std::string& out_prefix);
int cmd_provision(const std::string& gallery_path, const std::string& config_path, long long n,
                  const std::string& out_prefix);
int cmd_verify(const std::string& virtual_path, const std::string& gallery_path, double tau,
               const std::string& out_prefix);
int cmd_stress(const std::string& virtual_path, const std::string& heldout_path, double tau,
               const std::vector<double>& fractions, const std::string& out_prefix);
int cmd_revoke_check(const std::string& virtual_path, const std::string& delta_path, double tau,
                     double tau_safe, const std::string& out_prefix);
int cmd_pairs(const std::string& a_path, const std::string& b_path, const std::string& pairs_path,
              const std::string& mode, double tar, double threshold,
              const std::string& out_prefix);

}  // namespace bip::cli
