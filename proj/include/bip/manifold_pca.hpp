#pragma once

// PCA of the gallery centroid cloud: eigen-spectrum, principal energy,
// effective dimensionality and effective rank. Feeds both the capacity
// analysis and the allocator's direction-aware noise.

#include "bip/embedding_store.hpp"
#include "bip/types.hpp"

#include <json.hpp>

namespace bip {

struct PcaModel {
    Index dim = 0;
    VectorXd mean;
    Eigen::MatrixXd eigvecs;  // orthonormal columns u_k, descending eigenvalue
    VectorXd eigvals;         // lambda_1 >= ... >= lambda_d >= 0
    VectorXd sigmas;          // sqrt(lambda_k)
};

// Whether the covariance is taken about the sample mean or the origin.
enum class Centering { mean, origin };

enum class RankKind { participation_ratio, exp_entropy };

// Covariance accumulated in double in one streaming pass, then a dense
// symmetric eigensolve. Requires at least two rows.
PcaModel fit_pca(const Gallery& gallery, Centering centering = Centering::mean);

// E(k) = sum of the top-k eigenvalues over the total. Non-decreasing, E(d)=1.
double principal_energy(const PcaModel& model, Index k);

// Smallest k with E(k) >= energy_threshold.
Index effective_dim(const PcaModel& model, double energy_threshold = 0.95);

// Participation ratio (sum lambda)^2 / sum lambda^2, or the exp-entropy
// variant exp(-sum p_k ln p_k).
double effective_rank(const PcaModel& model, RankKind kind = RankKind::participation_ratio);

// {eigvals, energy_knees at {0.5, 0.9, 0.95, 0.99}, effective_rank}
nlohmann::json spectrum_json(const PcaModel& model);

// mean and eigvecs as embedding files under "<prefix>.mean.bipe" /
// "<prefix>.eigvecs.bipe" (rows = u_k) plus "<prefix>.spectrum.json".
void save_pca(const PcaModel& model, const std::string& prefix);
PcaModel load_pca(const std::string& prefix);

}  // namespace bip
