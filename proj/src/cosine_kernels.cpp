#include "bip/cosine_kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include <omp.h>

namespace bip {

namespace {
int g_num_threads = 0;  // 0 = library default
}

void set_num_threads(int n) {
    g_num_threads = n > 0 ? n : 0;
    if (g_num_threads > 0) omp_set_num_threads(g_num_threads);
}

int num_threads() {
    return g_num_threads > 0 ? g_num_threads : omp_get_max_threads();
}

double naive_dot(const float* row, const double* query, Index dim) {
    double acc = 0.0;
    for (Index k = 0; k < dim; ++k) {
        acc = std::fma(static_cast<double>(row[k]), query[k], acc);
    }
    return acc;
}

void CosineScanner::append(const float* row) {
    const Index p = rows_ / kPanel;
    const Index c = rows_ % kPanel;
    if (p == static_cast<Index>(panels_.size())) {
        panels_.emplace_back(static_cast<std::size_t>(dim_) * kPanel);
    }
    float* panel = panels_[p].data();
    for (Index k = 0; k < dim_; ++k) {
        panel[k * kPanel + c] = row[k];
    }
    ++rows_;
}

void CosineScanner::append_all(const Eigen::Ref<const RowMatrixXf>& rows) {
    for (Index i = 0; i < rows.rows(); ++i) {
        append(rows.data() + i * rows.cols());
    }
}

double CosineScanner::dot(Index row, const double* query) const {
    const float* panel = panels_[row / kPanel].data();
    const Index c = row % kPanel;
    double acc = 0.0;
    for (Index k = 0; k < dim_; ++k) {
        acc = std::fma(static_cast<double>(panel[k * kPanel + c]), query[k], acc);
    }
    return acc;
}

namespace {

// Accumulates dot products for columns [c0, c1) of one panel into acc.
// Each lane's sum runs over k in ascending order, matching naive_dot.
inline void panel_accumulate(const float* panel, Index dim, Index c0, Index c1,
                             const double* query, double* acc) {
    std::fill(acc + c0, acc + c1, 0.0);
    for (Index k = 0; k < dim; ++k) {
        const float* col = panel + k * CosineScanner::kPanel;
        const double qk = query[k];
        for (Index c = c0; c < c1; ++c) {
            acc[c] = std::fma(static_cast<double>(col[c]), qk, acc[c]);
        }
    }
}

}  // namespace

void CosineScanner::dots(const double* query, double* out) const {
    const Index n_panels = (rows_ + kPanel - 1) / kPanel;
#pragma omp parallel for schedule(static)
    for (Index p = 0; p < n_panels; ++p) {
        const Index c1 = std::min(rows_ - p * kPanel, kPanel);
        alignas(64) double acc[kPanel];
        panel_accumulate(panels_[p].data(), dim_, 0, c1, query, acc);
        std::copy(acc, acc + c1, out + p * kPanel);
    }
}

MaxCosResult CosineScanner::max_cosine(const double* query, Index begin, Index end) const {
    const Index p0 = begin / kPanel;
    const Index p1 = (end + kPanel - 1) / kPanel;
    const Index n_panels = p1 - p0;
    std::vector<MaxCosResult> partial(n_panels,
                                      {-std::numeric_limits<double>::infinity(), -1});
#pragma omp parallel for schedule(static)
    for (Index pi = 0; pi < n_panels; ++pi) {
        const Index p = p0 + pi;
        const Index c0 = std::max(begin - p * kPanel, Index(0));
        const Index c1 = std::min(end - p * kPanel, kPanel);
        alignas(64) double acc[kPanel];
        panel_accumulate(panels_[p].data(), dim_, c0, c1, query, acc);
        MaxCosResult best{-std::numeric_limits<double>::infinity(), -1};
        for (Index c = c0; c < c1; ++c) {
            if (acc[c] > best.value) {
                best.value = acc[c];
                best.index = p * kPanel + c;
            }
        }
        partial[pi] = best;
    }
    MaxCosResult best{-std::numeric_limits<double>::infinity(), -1};
    for (const auto& r : partial) {  // ordered: first index wins ties
        if (r.index >= 0 && r.value > best.value) best = r;
    }
    return best;
}

std::uint64_t CosineScanner::count_ge(const double* query, double threshold,
                                      Index begin, Index end) const {
    const Index p0 = begin / kPanel;
    const Index p1 = (end + kPanel - 1) / kPanel;
    const Index n_panels = p1 - p0;
    std::uint64_t total = 0;
#pragma omp parallel for schedule(static) reduction(+ : total)
    for (Index pi = 0; pi < n_panels; ++pi) {
        const Index p = p0 + pi;
        const Index c0 = std::max(begin - p * kPanel, Index(0));
        const Index c1 = std::min(end - p * kPanel, kPanel);
        alignas(64) double acc[kPanel];
        panel_accumulate(panels_[p].data(), dim_, c0, c1, query, acc);
        std::uint64_t n = 0;
        for (Index c = c0; c < c1; ++c) {
            n += acc[c] >= threshold ? 1 : 0;
        }
        total += n;
    }
    return total;
}

void CosineScanner::collect_ge(const double* query, double threshold, Index begin, Index end,
                               std::vector<std::pair<Index, double>>& out) const {
    const Index p0 = begin / kPanel;
    const Index p1 = (end + kPanel - 1) / kPanel;
    const Index n_panels = p1 - p0;
    std::vector<std::vector<std::pair<Index, double>>> partial(n_panels);
#pragma omp parallel for schedule(static)
    for (Index pi = 0; pi < n_panels; ++pi) {
        const Index p = p0 + pi;
        const Index c0 = std::max(begin - p * kPanel, Index(0));
        const Index c1 = std::min(end - p * kPanel, kPanel);
        alignas(64) double acc[kPanel];
        panel_accumulate(panels_[p].data(), dim_, c0, c1, query, acc);
        for (Index c = c0; c < c1; ++c) {
            if (acc[c] >= threshold) partial[pi].emplace_back(p * kPanel + c, acc[c]);
        }
    }
    for (auto& v : partial) {
        out.insert(out.end(), v.begin(), v.end());
    }
}

}  // namespace bip
