#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here are deliberately plain loops: they must not share code with the
// library kernels they check.

#include "bip/embedding_store.hpp"
#include "bip/philox.hpp"
#include "bip/synth.hpp"
#include "bip/types.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace bip::testing {

// Plain double-precision dot of two float rows, ascending index.
inline double oracle_dot(const float* a, const float* b, Index dim) {
    double acc = 0.0;
    for (Index k = 0; k < dim; ++k) {
        acc += static_cast<double>(a[k]) * static_cast<double>(b[k]);
    }
    return acc;
}

inline double oracle_dot(const float* a, const double* b, Index dim) {
    double acc = 0.0;
    for (Index k = 0; k < dim; ++k) {
        acc += static_cast<double>(a[k]) * b[k];
    }
    return acc;
}

// Brute-force re-verification of the two provisioning constraints over the
// stored float rows; returns the number of violating pairs of each kind.
struct VerifyCounts {
    std::uint64_t gallery_violations = 0;
    std::uint64_t virtual_violations = 0;
};

inline VerifyCounts brute_force_verify(const VirtualSet& vset, const Gallery& gallery,
                                       double tau) {
    VerifyCounts counts;
    const Index n = vset.embeddings.count();
    const Index m = gallery.centroids.count();
    const Index d = vset.embeddings.dim();
    const float* v = vset.embeddings.data().data();
    const float* g = gallery.centroids.data().data();
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) {
            if (oracle_dot(v + j * d, g + i * d, d) >= tau) ++counts.gallery_violations;
        }
    }
    for (Index j = 0; j < n; ++j) {
        for (Index j2 = j + 1; j2 < n; ++j2) {
            if (oracle_dot(v + j * d, v + j2 * d, d) >= tau) ++counts.virtual_violations;
        }
    }
    return counts;
}

// Unit row matrix helper for hand-built fixtures.
inline EmbeddingMatrix matrix_from_rows(const std::vector<std::vector<float>>& rows) {
    RowMatrixXf m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index k = 0; k < m.cols(); ++k) {
            m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        }
    }
    return EmbeddingMatrix(std::move(m));
}

inline Gallery gallery_from_matrix(EmbeddingMatrix m) {
    Gallery g;
    g.centroids = std::move(m);
    return g;
}

inline VirtualSet virtual_set_from_matrix(EmbeddingMatrix m, double tau = 0.391) {
    VirtualSet v;
    v.embeddings = std::move(m);
    v.records.resize(static_cast<std::size_t>(v.embeddings.count()));
    v.config_snapshot.tau = tau;
    return v;
}

// Seeded Poisson draw via the product-of-uniforms method (lambda <= ~60).
inline std::uint64_t poisson_draw(RandomStream& rng, double lambda) {
    const double limit = std::exp(-lambda);
    double prod = 1.0;
    std::uint64_t count = 0;
    for (;;) {
        prod *= rng.next_double();
        if (prod <= limit) return count;
        ++count;
    }
}

inline std::string temp_path(const std::string& name) {
    return std::string("/tmp/bip_test_") + name;
}

}  // namespace bip::testing
