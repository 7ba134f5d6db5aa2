#pragma once

// Synthetic galleries, sphere samplers and independent oracles (Monte-Carlo
// cap volume, bisection alpha*, planted collisions) backing the tests and
// acceptance checks.

#include "bip/embedding_store.hpp"
#include "bip/types.hpp"

#include <cstdint>

namespace bip {

struct SynthGalleryConfig {
    Index dim = 64;
    Index n_clusters = 16;
    Index per_cluster = 64;
    double concentration = 32.0;  // von Mises-Fisher kappa
    std::uint64_t seed = 0;
};

// iid uniform on the unit sphere: one substream per sample index, d
// gaussians each, normalized in double.
EmbeddingMatrix sample_uniform_sphere(Index dim, Index n, std::uint64_t seed);

// von Mises-Fisher mixture with uniform mean directions. Row layout is
// cluster-major: rows [c*per_cluster, (c+1)*per_cluster) belong to cluster c.
// Stream layout: means on streams 2^32 + c, samples on stream = row index.
Gallery sample_vmf_mixture(const SynthGalleryConfig& config);

// Single vMF component around an explicit mean direction.
EmbeddingMatrix sample_vmf(const VectorXd& mean, double kappa, Index n, std::uint64_t seed);

struct McEstimate {
    double estimate;
    double standard_error;
};

// Fraction of uniform samples with first coordinate >= tau (the cap center
// is fixed at e_1 by rotational symmetry), with the binomial standard error.
McEstimate mc_cap_volume(double tau, Index dim, std::uint64_t n_samples, std::uint64_t seed);

// Root of displaced_cosine(p, .) = tau on [0, 1e6] by bisection.
double bisection_alpha_star(double p, double tau, double tol);

// Test gallery of l_rows rows for collision counting: a seeded
// Bernoulli(rate) subset is planted to collide with exactly one virtual row
// (cos > tau), the rest stay below tau - 0.1 against the whole set. When
// planted_rows is given it receives the planted test-row indices.
Gallery plant_collisions(const VirtualSet& virtual_set, Index l_rows, double rate, double tau,
                         std::uint64_t seed, std::vector<Index>* planted_rows = nullptr);

}  // namespace bip
