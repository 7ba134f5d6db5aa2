#pragma once

// Exact cosine scan kernels. Rows are mirrored into fixed-width panels laid
// out dimension-major so that one query coefficient at a time can be applied
// to a contiguous run of rows. Every row's dot product accumulates over
// k = 0..dim-1 in ascending order via fma, in double precision -- bit-for-bit
// identical to a naive scalar loop over the same row, independent of panel
// boundaries and worker count.

#include "bip/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace bip {

struct MaxCosResult {
    double value;
    Index index;  // first row attaining the max
};

class CosineScanner {
public:
    static constexpr Index kPanel = 2048;

    CosineScanner() = default;
    explicit CosineScanner(Index dim) : dim_(dim) {}

    Index dim() const { return dim_; }
    Index rows() const { return rows_; }

    // Appends one row of dim() floats.
    void append(const float* row);
    void append_all(const Eigen::Ref<const RowMatrixXf>& rows);

    // Exact max dot product over rows [begin, end) with first-index ties.
    MaxCosResult max_cosine(const double* query, Index begin, Index end) const;
    MaxCosResult max_cosine(const VectorXd& query) const {
        return max_cosine(query.data(), 0, rows_);
    }

    // Number of rows in [begin, end) whose dot product is >= threshold.
    std::uint64_t count_ge(const double* query, double threshold, Index begin, Index end) const;
    std::uint64_t count_ge(const VectorXd& query, double threshold) const {
        return count_ge(query.data(), threshold, 0, rows_);
    }

    // Collects (row, dot) for rows in [begin, end) with dot >= threshold,
    // in ascending row order.
    void collect_ge(const double* query, double threshold, Index begin, Index end,
                    std::vector<std::pair<Index, double>>& out) const;

    // Dot product of one stored row with the query (same accumulation order
    // as the panel scans).
    double dot(Index row, const double* query) const;

    // Dot products of every row with the query, written to out[0..rows).
    void dots(const double* query, double* out) const;

private:
    Index dim_ = 0;
    Index rows_ = 0;
    // panel p stores rows [p*kPanel, ...) as dim_ runs of kPanel floats
    std::vector<std::vector<float>> panels_;
};

// Reference implementation: plain ascending-k fma loop in double precision.
double naive_dot(const float* row, const double* query, Index dim);

}  // namespace bip
