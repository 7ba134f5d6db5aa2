#include "bip/synth.hpp"

#include "bip/errors.hpp"
#include "bip/philox.hpp"
#include "bip/spherical_geometry.hpp"

#include <cmath>
#include <string>

#include <omp.h>

namespace bip {

namespace {

constexpr std::uint64_t kMeanStreamBase = 1ULL << 32;

// gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1
double gamma_draw(RandomStream& rng, double shape) {
    if (shape < 1.0) {
        const double u = rng.next_double();
        return gamma_draw(rng, shape + 1.0) * std::pow(u > 0.0 ? u : 1e-300, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.next_gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_double();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double beta_symmetric_draw(RandomStream& rng, double a) {
    const double x = gamma_draw(rng, a);
    const double y = gamma_draw(rng, a);
    return x / (x + y);
}

void gaussian_vector(RandomStream& rng, Index dim, VectorXd& out) {
    out.resize(dim);
    for (Index k = 0; k < dim; ++k) out[k] = rng.next_gaussian();
}

// Wood's rejection sampler for the vMF cosine marginal w = cos(x, mu).
double vmf_cosine_draw(RandomStream& rng, Index dim, double kappa) {
    const double dm1 = static_cast<double>(dim - 1);
    const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1)) / dm1;
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
    for (;;) {
        const double z = beta_symmetric_draw(rng, 0.5 * dm1);
        const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        const double u = rng.next_double();
        if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u > 0.0 ? u : 1e-300)) {
            return w;
        }
    }
}

// unit tangent orthogonal to mu
VectorXd tangent_draw(RandomStream& rng, const VectorXd& mu) {
    VectorXd g(mu.size());
    for (;;) {
        gaussian_vector(rng, mu.size(), g);
        g -= g.dot(mu) * mu;
        const double norm = g.norm();
        if (norm > 1e-12) return g / norm;
    }
}

void store_unit_row(RowMatrixXf& rows, Index i, const VectorXd& v) {
    rows.row(i) = (v / v.norm()).cast<float>().transpose();
}

}  // namespace

EmbeddingMatrix sample_uniform_sphere(Index dim, Index n, std::uint64_t seed) {
    if (dim < 1 || n < 1) throw DomainError("sample_uniform_sphere: dim and n must be positive");
    RowMatrixXf rows(n, dim);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        VectorXd g(dim);
        gaussian_vector(rng, dim, g);
        store_unit_row(rows, i, g);
    }
    return EmbeddingMatrix(std::move(rows));
}

Gallery sample_vmf_mixture(const SynthGalleryConfig& config) {
    if (config.dim < 2) throw DomainError("sample_vmf_mixture: dim must be >= 2");
    if (config.n_clusters < 1 || config.per_cluster < 1) {
        throw DomainError("sample_vmf_mixture: counts must be positive");
    }
    if (!(config.concentration > 0.0) || !std::isfinite(config.concentration)) {
        throw DomainError("sample_vmf_mixture: concentration must be positive and finite");
    }
    const Index n = config.n_clusters * config.per_cluster;

    RowMatrixXd means(config.n_clusters, config.dim);
    for (Index c = 0; c < config.n_clusters; ++c) {
        RandomStream rng(config.seed, kMeanStreamBase + static_cast<std::uint64_t>(c));
        VectorXd g(config.dim);
        gaussian_vector(rng, config.dim, g);
        means.row(c) = (g / g.norm()).transpose();
    }

    RowMatrixXf rows(n, config.dim);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        RandomStream rng(config.seed, static_cast<std::uint64_t>(i));
        const VectorXd mu = means.row(i / config.per_cluster).transpose();
        const double w = vmf_cosine_draw(rng, config.dim, config.concentration);
        const VectorXd xi = tangent_draw(rng, mu);
        const VectorXd v = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * xi;
        store_unit_row(rows, i, v);
    }

    Gallery g;
    g.centroids = EmbeddingMatrix(std::move(rows));
    g.labels.reserve(n);
    for (Index i = 0; i < n; ++i) {
        g.labels.push_back("c" + std::to_string(i / config.per_cluster));
    }
    g.manifest.source = "synth:vmf";
    g.manifest.encoder = "none";
    return g;
}

EmbeddingMatrix sample_vmf(const VectorXd& mean, double kappa, Index n, std::uint64_t seed) {
    const Index d = mean.size();
    if (d < 2) throw DomainError("sample_vmf: dim must be >= 2");
    if (n < 1) throw DomainError("sample_vmf: n must be positive");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw DomainError("sample_vmf: kappa must be positive and finite");
    }
    const VectorXd mu = mean / mean.norm();
    RowMatrixXf rows(n, d);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        const double w = vmf_cosine_draw(rng, d, kappa);
        const VectorXd xi = tangent_draw(rng, mu);
        const VectorXd v = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * xi;
        store_unit_row(rows, i, v);
    }
    return EmbeddingMatrix(std::move(rows));
}

McEstimate mc_cap_volume(double tau, Index dim, std::uint64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1000) throw DomainError("mc_cap_volume: need at least 1000 samples");
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("mc_cap_volume: tau outside (0,1)");
    if (dim < 2) throw DomainError("mc_cap_volume: dim must be >= 2");

    const std::int64_t n = static_cast<std::int64_t>(n_samples);
    std::uint64_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (std::int64_t i = 0; i < n; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        double first = 0.0;
        double sq = 0.0;
        for (Index k = 0; k < dim; ++k) {
            const double g = rng.next_gaussian();
            if (k == 0) first = g;
            sq += g * g;
        }
        if (first >= tau * std::sqrt(sq)) ++hits;  // cos = g_1 / |g| >= tau
    }
    McEstimate e;
    e.estimate = static_cast<double>(hits) / static_cast<double>(n_samples);
    e.standard_error =
        std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(n_samples));
    return e;
}

double bisection_alpha_star(double p, double tau, double tol) {
    if (!(tau > 0.0 && tau < 1.0) || !(std::fabs(p) < tau)) {
        throw DomainError("bisection_alpha_star: need |p| < tau < 1");
    }
    if (!(tol > 0.0)) throw DomainError("bisection_alpha_star: tol must be positive");
    double lo = 0.0, hi = 1e6;
    double f_lo = displaced_cosine(p, lo) - tau;
    double f_hi = displaced_cosine(p, hi) - tau;
    if (f_lo <= 0.0 || f_hi >= 0.0) {
        throw BracketFailure("bisection_alpha_star: root not bracketed on [0, 1e6]");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at double resolution
        if (displaced_cosine(p, mid) - tau > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Gallery plant_collisions(const VirtualSet& virtual_set, Index l_rows, double rate, double tau,
                         std::uint64_t seed, std::vector<Index>* planted_rows) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw DomainError("plant_collisions: rate outside [0,1]");
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("plant_collisions: tau outside (0,1)");
    const Index n = virtual_set.embeddings.count();
    if (n == 0) throw EmptyMatrix("plant_collisions: empty virtual set");
    if (l_rows < 1) throw DomainError("plant_collisions: l_rows must be positive");
    const Index d = virtual_set.embeddings.dim();
    const Index l = l_rows;
    const CosineScanner& scanner = virtual_set.embeddings.scanner();
    constexpr int kMaxTries = 256;

    RowMatrixXf rows(l, d);
    std::vector<char> planted(static_cast<std::size_t>(l), 0);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < l; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        const bool collide = rng.next_double() < rate;
        planted[static_cast<std::size_t>(i)] = collide ? 1 : 0;
        bool done = false;
        if (collide) {
            const Index j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
            const VectorXd target = virtual_set.embeddings.row_as_double(j);
            for (int attempt = 0; attempt < kMaxTries && !done; ++attempt) {
                const double c = tau + 0.02 + 0.08 * rng.next_double();
                if (c >= 1.0) continue;
                const VectorXd xi = tangent_draw(rng, target);
                const VectorXd x = c * target + std::sqrt(1.0 - c * c) * xi;
                // must hit only the chosen row
                VectorXf xf = (x / x.norm()).cast<float>();
                VectorXd x64 = xf.cast<double>();
                std::vector<std::pair<Index, double>> hits;
                scanner.collect_ge(x64.data(), tau, 0, n, hits);
                if (hits.size() == 1 && hits.front().first == j) {
                    rows.row(i) = xf.transpose();
                    done = true;
                }
            }
        } else {
            for (int attempt = 0; attempt < kMaxTries && !done; ++attempt) {
                VectorXd g(d);
                gaussian_vector(rng, d, g);
                VectorXf xf = (g / g.norm()).cast<float>();
                VectorXd x64 = xf.cast<double>();
                if (scanner.max_cosine(x64).value < tau - 0.1) {
                    rows.row(i) = xf.transpose();
                    done = true;
                }
            }
        }
        if (!done) {
            planted[static_cast<std::size_t>(i)] = 2;  // flag failure; thrown below
        }
    }
    for (Index i = 0; i < l; ++i) {
        if (planted[static_cast<std::size_t>(i)] == 2) {
            throw GeometricInfeasible("plant_collisions: could not place row " +
                                      std::to_string(i) + " within " +
                                      std::to_string(kMaxTries) + " tries");
        }
    }
    if (planted_rows != nullptr) {
        planted_rows->clear();
        for (Index i = 0; i < l; ++i) {
            if (planted[static_cast<std::size_t>(i)] == 1) planted_rows->push_back(i);
        }
    }

    Gallery g;
    g.centroids = EmbeddingMatrix(std::move(rows));
    g.manifest.source = "synth:planted";
    g.manifest.encoder = "none";
    return g;
}

}  // namespace bip
