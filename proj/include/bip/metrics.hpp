#pragma once

// Embedding-level BIP metrics (Non-Collision, Inter-Sep) and the pair
// verification protocols with threshold calibration.

#include "bip/embedding_store.hpp"
#include "bip/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace bip {

struct BipMetrics {
    double non_collision_pct = 100.0;
    double inter_sep_pct = 100.0;
    std::uint64_t n_virtual = 0;
    std::uint64_t n_gallery = 0;
    double tau = 0.0;
};

// Percentage of virtual rows with max cosine against the gallery strictly
// below tau. An empty virtual set is vacuously 100.
double non_collision_rate(const VirtualSet& virtual_set, const Gallery& gallery, double tau);

// Percentage of unordered virtual pairs with cosine strictly below tau,
// over exactly N(N-1)/2 pairs. Fewer than two rows is vacuously 100.
double inter_sep_rate(const VirtualSet& virtual_set, double tau);

BipMetrics bip_metrics(const VirtualSet& virtual_set, const Gallery& gallery, double tau);

// ---- pair protocols ----

enum class PairLabel { genuine, impostor };

struct VerificationPair {
    Index a = 0;
    Index b = 0;
    PairLabel label = PairLabel::genuine;
    int fold = -1;  // -1 when the list carries no fold structure
};

// CSV columns: a_index,b_index,label(G|I)[,fold]
struct PairList {
    std::vector<VerificationPair> pairs;
    bool has_folds() const;
    int fold_count() const;

    static PairList load_csv(const std::string& path);
    void save_csv(const std::string& path) const;
};

enum class Protocol { rr, vv, rv };

// Largest threshold retaining at least target_tar of the genuine scores:
// the empirical lower (1 - tar) quantile without interpolation.
double calibrate_threshold(std::vector<double> genuine_scores, double target_tar);

struct FoldResult {
    int fold = -1;
    double threshold = 0.0;
    double accuracy = 0.0;
    std::optional<double> far;
};

struct ProtocolReport {
    Protocol protocol = Protocol::rr;
    std::optional<double> accuracy;  // absent for R-V (non-mate only)
    std::optional<double> far;
    double threshold_used = 0.0;
    std::vector<FoldResult> per_fold;
};

// Fixed-threshold evaluation. Pair (a, b) scores cos(embeddings_a[a],
// embeddings_b[b]) in double precision.
ProtocolReport evaluate_pairs(const EmbeddingMatrix& embeddings_a,
                              const EmbeddingMatrix& embeddings_b, const PairList& pairs,
                              double threshold, Protocol protocol);

// Ten-fold style evaluation: each fold is scored at a threshold calibrated
// on the genuine scores of the other folds at target_tar.
ProtocolReport evaluate_pairs_folded(const EmbeddingMatrix& embeddings_a,
                                     const EmbeddingMatrix& embeddings_b, const PairList& pairs,
                                     double target_tar, Protocol protocol);

const char* protocol_name(Protocol p);
nlohmann::json to_json(const BipMetrics& m);
nlohmann::json to_json(const ProtocolReport& r);

}  // namespace bip
