#pragma once

// Embedding matrices, the enrollment gallery, the virtual set, centroid
// computation and exact maximum-cosine queries.
//
// Storage is single-precision row-major; every norm and dot product
// accumulates in double precision.

#include "bip/alloc_config.hpp"
#include "bip/cosine_kernels.hpp"
#include "bip/types.hpp"

#include <json.hpp>

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace bip {

// Immutable after construction; shared freely across workers.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    explicit EmbeddingMatrix(RowMatrixXf rows);

    EmbeddingMatrix(const EmbeddingMatrix& o) : rows_(o.rows_) {}
    EmbeddingMatrix& operator=(const EmbeddingMatrix& o);
    EmbeddingMatrix(EmbeddingMatrix&& o) noexcept
        : rows_(std::move(o.rows_)), scanner_(std::move(o.scanner_)) {}
    EmbeddingMatrix& operator=(EmbeddingMatrix&& o) noexcept;

    Index dim() const { return rows_.cols(); }
    Index count() const { return rows_.rows(); }
    const RowMatrixXf& data() const { return rows_; }

    VectorXd row_as_double(Index i) const { return rows_.row(i).cast<double>().transpose(); }

    // Max |norm - 1| over rows must stay within tol; throws NonUnitRow.
    void validate_unit_rows(double tol = 1e-5) const;

    // Panel-mirrored view for the scan kernels, built once on first use.
    const CosineScanner& scanner() const;

private:
    RowMatrixXf rows_;
    mutable std::unique_ptr<CosineScanner> scanner_;
    mutable std::mutex scanner_mutex_;
};

struct GalleryManifest {
    std::string source;
    std::string encoder;
    std::string created_utc;
    std::string sha256_of_payload;
};

// The enrollment set: one centroid per real identity.
struct Gallery {
    EmbeddingMatrix centroids;
    std::vector<std::string> labels;  // empty or one per centroid
    GalleryManifest manifest;
};

struct VirtualRecord {
    Index reference_index = -1;        // r in the gallery this embedding grew from
    double alpha_used = 0.0;
    std::uint64_t attempts = 0;        // attempts spent on this slot (>= 1)
    double max_cos_to_gallery = 0.0;
};

struct VirtualSet {
    EmbeddingMatrix embeddings;
    std::vector<VirtualRecord> records;
    AllocConfig config_snapshot;
};

// normalize(sum of rows), accumulated in double. Throws EmptyMatrix on an
// empty slice and ZeroNormCentroid when the sum has norm below 1e-12.
VectorXd compute_centroid(const Eigen::Ref<const RowMatrixXf>& rows);

// Exact max dot product over all rows and the first index attaining it.
MaxCosResult max_cosine_against(const VectorXd& query, const EmbeddingMatrix& matrix);

// ---- binary embedding file ("BIPE", little-endian) ----
//   magic "BIPE" | version u32 (=1) | dim u32 | count u64 | dtype u8 (0=f32)
//   | 7 reserved zero bytes | count*dim float32 row-major
// A JSON manifest sidecar "<path>.manifest.json" carries
// {source, encoder, dim, count, created_utc, sha256_of_payload}.

void save_embeddings(const EmbeddingMatrix& matrix, const std::string& path,
                     const std::string& source = "", const std::string& encoder = "");
EmbeddingMatrix load_embeddings(const std::string& path, bool validate = true);

void save_gallery(const Gallery& gallery, const std::string& path);
Gallery load_gallery(const std::string& path, bool validate = true);

// Virtual sets persist as an embedding file plus "<path>.records.json"
// holding the per-row provenance and the config snapshot.
void save_virtual_set(const VirtualSet& vset, const std::string& path);
VirtualSet load_virtual_set(const std::string& path, bool validate = true);

nlohmann::json to_json(const VirtualRecord& r);

}  // namespace bip
