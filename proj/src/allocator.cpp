#include "bip/allocator.hpp"

#include "bip/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace bip {

namespace {

// cosines of gallery row r against every gallery row, exact double
void all_cosines(const CosineScanner& scanner, const VectorXd& query, std::vector<double>& out) {
    out.resize(scanner.rows());
    scanner.dots(query.data(), out.data());
}

struct HardCheckInputs {
    const CosineScanner* gallery;
    const CosineScanner* accepted;  // may be null or empty
    double tau;
};

CheckOutcome hard_check_impl(const VectorXd& s, const HardCheckInputs& in) {
    CheckOutcome out;
    const MaxCosResult g = in.gallery->max_cosine(s);
    out.max_gallery_cos = g.value;
    if (g.value >= in.tau) {
        out.kind = CheckOutcome::Kind::gallery_collision;
        out.offending_index = g.index;
        out.offending_cos = g.value;
        return out;
    }
    if (in.accepted != nullptr && in.accepted->rows() > 0) {
        const MaxCosResult v = in.accepted->max_cosine(s);
        if (v.value >= in.tau) {
            out.kind = CheckOutcome::Kind::virtual_collision;
            out.offending_index = v.index;
            out.offending_cos = v.value;
            return out;
        }
    }
    out.kind = CheckOutcome::Kind::accept;
    return out;
}

}  // namespace

std::vector<std::pair<Index, double>> neighbor_weights(Index r_index, const Gallery& gallery,
                                                       int k, double temperature) {
    const Index m = gallery.centroids.count();
    if (r_index < 0 || r_index >= m) throw IndexOutOfRange("neighbor_weights: bad r_index");
    if (m <= k) throw GalleryTooSmall("neighbor_weights: gallery count must exceed K");
    if (!(temperature > 0.0)) throw DomainError("neighbor_weights: temperature must be positive");

    const VectorXd r = gallery.centroids.row_as_double(r_index);
    std::vector<double> cos;
    all_cosines(gallery.centroids.scanner(), r, cos);

    std::vector<Index> order(m);
    for (Index i = 0; i < m; ++i) order[i] = i;
    order.erase(order.begin() + r_index);
    // nearest = largest cosine; ties toward the smaller index
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
        if (cos[a] != cos[b]) return cos[a] > cos[b];
        return a < b;
    });
    order.resize(k);

    // softmax(-d/t) with d = 1 - cos, shifted by the smallest distance
    double d_min = 1.0 - cos[order[0]];
    for (Index i : order) d_min = std::min(d_min, 1.0 - cos[i]);
    double sum = 0.0;
    std::vector<std::pair<Index, double>> result;
    result.reserve(k);
    for (Index i : order) {
        const double w = std::exp(-((1.0 - cos[i]) - d_min) / temperature);
        result.emplace_back(i, w);
        sum += w;
    }
    for (auto& [idx, w] : result) w /= sum;
    return result;
}

VectorXd repulsion_direction(Index r_index, const Gallery& gallery, int k, double temperature) {
    const auto weights = neighbor_weights(r_index, gallery, k, temperature);
    VectorXd m = VectorXd::Zero(gallery.centroids.dim());
    for (const auto& [idx, w] : weights) {
        m += w * gallery.centroids.row_as_double(idx);
    }
    const double norm = m.norm();
    if (norm < 1e-12) {
        throw DegenerateNeighborhood("repulsion_direction: weighted centroid norm " +
                                     std::to_string(norm));
    }
    return -m / norm;
}

VectorXd perturb_direction(const VectorXd& z_star, const PcaModel& pca, double kappa,
                           RandomStream& rng) {
    if (pca.dim != z_star.size()) throw DomainError("perturb_direction: dim mismatch");
    if (kappa < 0.0) throw DomainError("perturb_direction: kappa must be >= 0");
    if (kappa == 0.0) return z_star;

    VectorXd scaled(pca.dim);
    for (Index k = 0; k < pca.dim; ++k) {
        scaled[k] = rng.next_gaussian() * pca.sigmas[k];
    }
    if (scaled.isZero(0.0)) return z_star;  // degenerate spectrum
    const VectorXd noisy = z_star + kappa * (pca.eigvecs * scaled);
    const double norm = noisy.norm();
    if (norm < 1e-12) throw ZeroNormDirection("perturb_direction: norm below 1e-12");
    return noisy / norm;
}

VectorXd make_candidate(const VectorXd& r, const VectorXd& z, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("make_candidate: alpha must be positive");
    const VectorXd s = r + alpha * z;
    const double norm = s.norm();
    if (norm < 1e-12) throw ZeroNormCandidate("make_candidate: norm below 1e-12");
    return s / norm;
}

CheckOutcome hard_check(const VectorXd& s, const Gallery& gallery, const VirtualSet& virtual_set,
                        double tau) {
    HardCheckInputs in{&gallery.centroids.scanner(),
                       virtual_set.embeddings.count() > 0 ? &virtual_set.embeddings.scanner()
                                                          : nullptr,
                       tau};
    return hard_check_impl(s, in);
}

ProvisionResult provision(const Gallery& gallery, const PcaModel& pca, const AllocConfig& config,
                          Index n_target) {
    config.validate();
    if (n_target < 1) throw DomainError("provision: n_target must be >= 1");
    const Index m = gallery.centroids.count();
    const Index d = gallery.centroids.dim();
    if (pca.dim != d) throw DomainError("provision: pca dim does not match gallery");
    if (m <= config.k_neighbors) throw GalleryTooSmall("provision: gallery count must exceed K");

    const auto t_start = std::chrono::steady_clock::now();
    const CosineScanner& gallery_scanner = gallery.centroids.scanner();
    CosineScanner accepted_scanner(d);
    RowMatrixXf accepted_rows(n_target, d);
    std::vector<VirtualRecord> records;
    records.reserve(n_target);

    std::unordered_map<Index, VectorXd> zstar_cache;
    auto z_star_for = [&](Index r_index) -> const VectorXd& {
        auto it = zstar_cache.find(r_index);
        if (it == zstar_cache.end()) {
            it = zstar_cache
                     .emplace(r_index, repulsion_direction(r_index, gallery, config.k_neighbors,
                                                           config.temperature))
                     .first;
        }
        return it->second;
    };

    ProvisionStats stats;
    HardCheckInputs check{&gallery_scanner, &accepted_scanner, config.tau};

    Index accepted = 0;
    std::uint64_t attempt = 0;
    Index current_r = -1;
    std::uint64_t failures_with_r = 0;  // consecutive failures on current_r
    std::uint64_t slot_attempts = 0;    // attempts since the last accept
    VectorXd candidate_f64(d);

    while (accepted < n_target && attempt < config.max_total_attempts) {
        RandomStream rng(config.seed, attempt);
        if (current_r < 0 || failures_with_r >= config.max_attempts_per_candidate) {
            current_r = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(m)));
            failures_with_r = 0;
        }
        double alpha = config.alpha_min;
        if (config.alpha_is_range()) {
            alpha += rng.next_double() * (config.alpha_max - config.alpha_min);
        }
        const VectorXd& z_star = z_star_for(current_r);
        const VectorXd z = perturb_direction(z_star, pca, config.kappa, rng);
        const VectorXd r_vec = gallery.centroids.row_as_double(current_r);
        const VectorXd s = make_candidate(r_vec, z, alpha);

        // Check the float-quantized vector: it is what gets stored, and what
        // any re-verification will see.
        VectorXf s_f32 = s.cast<float>();
        for (Index k = 0; k < d; ++k) candidate_f64[k] = static_cast<double>(s_f32[k]);

        ++attempt;
        ++slot_attempts;
        const CheckOutcome outcome = hard_check_impl(candidate_f64, check);
        if (outcome.kind == CheckOutcome::Kind::accept) {
            accepted_rows.row(accepted) = s_f32.transpose();
            accepted_scanner.append(s_f32.data());
            records.push_back(VirtualRecord{current_r, alpha, slot_attempts,
                                            outcome.max_gallery_cos});
            ++accepted;
            current_r = -1;
            failures_with_r = 0;
            slot_attempts = 0;
        } else {
            ++failures_with_r;
            if (outcome.kind == CheckOutcome::Kind::gallery_collision) {
                ++stats.rejections_gallery;
            } else {
                ++stats.rejections_virtual;
            }
        }
    }

    stats.accepted = static_cast<std::uint64_t>(accepted);
    stats.attempted = attempt;
    stats.acceptance_rate =
        attempt > 0 ? static_cast<double>(accepted) / static_cast<double>(attempt) : 0.0;
    stats.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    ProvisionResult result;
    result.status = accepted == n_target ? ProvisionStatus::complete
                                         : ProvisionStatus::max_attempts_exceeded;
    accepted_rows.conservativeResize(accepted, d);
    result.set.embeddings = EmbeddingMatrix(std::move(accepted_rows));
    result.set.records = std::move(records);
    result.set.config_snapshot = config;
    result.stats = stats;
    return result;
}

std::vector<RevocationHit> revocation_check(const VirtualSet& virtual_set,
                                            const Gallery& delta_gallery, double tau) {
    if (virtual_set.embeddings.count() > 0 &&
        virtual_set.embeddings.dim() != delta_gallery.centroids.dim()) {
        throw DomainError("revocation_check: dim mismatch");
    }
    std::vector<RevocationHit> hits;
    if (delta_gallery.centroids.count() == 0) return hits;
    const CosineScanner& scanner = delta_gallery.centroids.scanner();
    for (Index j = 0; j < virtual_set.embeddings.count(); ++j) {
        const VectorXd v = virtual_set.embeddings.row_as_double(j);
        const MaxCosResult r = scanner.max_cosine(v);
        if (r.value >= tau) hits.push_back(RevocationHit{j, r.index, r.value});
    }
    return hits;
}

std::vector<RevocationHit> monitoring_zone_check(const VirtualSet& virtual_set,
                                                 const Gallery& delta_gallery, double tau,
                                                 double tau_safe) {
    if (tau_safe >= tau) throw ConfigError("monitoring_zone_check: tau_safe must be below tau");
    std::vector<RevocationHit> hits;
    if (delta_gallery.centroids.count() == 0) return hits;
    const CosineScanner& scanner = delta_gallery.centroids.scanner();
    std::vector<std::pair<Index, double>> in_zone;
    for (Index j = 0; j < virtual_set.embeddings.count(); ++j) {
        const VectorXd v = virtual_set.embeddings.row_as_double(j);
        in_zone.clear();
        scanner.collect_ge(v.data(), tau_safe, 0, scanner.rows(), in_zone);
        for (const auto& [g, c] : in_zone) {
            if (c < tau) hits.push_back(RevocationHit{j, g, c});
        }
    }
    return hits;
}

nlohmann::json to_json(const ProvisionStats& s) {
    return {
        {"accepted", s.accepted},
        {"attempted", s.attempted},
        {"acceptance_rate", s.acceptance_rate},
        {"rejections_by_cause",
         {{"gallery_collision", s.rejections_gallery}, {"virtual_collision", s.rejections_virtual}}},
        {"wall_time_seconds", s.wall_time_seconds},
    };
}

}  // namespace bip
