#pragma once

// The provisioning engine: repulsion direction, direction-aware noise,
// candidate construction, exact hard checks, the provisioning loop, and
// revocation against gallery growth.

#include "bip/embedding_store.hpp"
#include "bip/manifold_pca.hpp"
#include "bip/philox.hpp"
#include "bip/types.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace bip {

struct ProvisionStats {
    std::uint64_t accepted = 0;
    std::uint64_t attempted = 0;
    double acceptance_rate = 0.0;
    std::uint64_t rejections_gallery = 0;
    std::uint64_t rejections_virtual = 0;
    double wall_time_seconds = 0.0;
};

enum class ProvisionStatus { complete, max_attempts_exceeded };

struct ProvisionResult {
    VirtualSet set;
    ProvisionStats stats;
    ProvisionStatus status = ProvisionStatus::complete;
};

struct CheckOutcome {
    enum class Kind { accept, gallery_collision, virtual_collision };
    Kind kind = Kind::accept;
    Index offending_index = -1;   // maximal offender of the violated constraint
    double offending_cos = 0.0;
    double max_gallery_cos = 0.0;  // always populated (gallery is checked first)
};

struct RevocationHit {
    Index virtual_index;
    Index gallery_index;
    double cos;
};

// K nearest neighbors of gallery row r_index by cosine distance 1 - cos,
// excluding r itself, with softmax(-d/t) weights summing to 1. Ties break
// toward the smaller row index.
std::vector<std::pair<Index, double>> neighbor_weights(Index r_index, const Gallery& gallery,
                                                       int k, double temperature);

// z* = -m/|m| with m the softmax-weighted neighbor centroid.
VectorXd repulsion_direction(Index r_index, const Gallery& gallery, int k, double temperature);

// z = normalize(z* + kappa * sum_k eta_k sigma_k u_k), eta iid standard
// normal from rng. kappa == 0 (or an all-zero spectrum) returns z* unchanged.
VectorXd perturb_direction(const VectorXd& z_star, const PcaModel& pca, double kappa,
                           RandomStream& rng);

// s = normalize(r + alpha z).
VectorXd make_candidate(const VectorXd& r, const VectorXd& z, double alpha);

// Strict "<" on both constraints; the gallery is checked first and an empty
// virtual set passes its half trivially.
CheckOutcome hard_check(const VectorXd& s, const Gallery& gallery, const VirtualSet& virtual_set,
                        double tau);

// Sequential accept loop; stats satisfy accepted + rejections = attempted.
// Identical inputs give bit-identical output regardless of worker count.
//
// Random stream layout (key = (config.seed, attempt_index)):
//   draw 0        reference selector, consumed only on slot start / redraw
//   draw 1        alpha, consumed only when alpha is a range
//   draws 2..     d gaussians for eta, consumed only when kappa > 0
ProvisionResult provision(const Gallery& gallery, const PcaModel& pca, const AllocConfig& config,
                          Index n_target);

// Virtual records whose max cosine against the new gallery rows reaches tau,
// with the maximal offender. Exact, O(|V| x |delta|).
std::vector<RevocationHit> revocation_check(const VirtualSet& virtual_set,
                                            const Gallery& delta_gallery, double tau);

// All (virtual, gallery) pairs with cosine in [tau_safe, tau): flagged for
// monitoring but not revoked.
std::vector<RevocationHit> monitoring_zone_check(const VirtualSet& virtual_set,
                                                 const Gallery& delta_gallery, double tau,
                                                 double tau_safe);

nlohmann::json to_json(const ProvisionStats& s);

}  // namespace bip
