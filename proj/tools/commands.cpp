#include "commands.hpp"

#include "bip/allocator.hpp"
#include "bip/capacity_stats.hpp"
#include "bip/embedding_store.hpp"
#include "bip/errors.hpp"
#include "bip/manifold_pca.hpp"
#include "bip/metrics.hpp"
#include "bip/philox.hpp"
#include "bip/sha256_hex.hpp"
#include "bip/spherical_geometry.hpp"
#include "bip/synth.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace bip::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return nlohmann::json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

double scored_pair(const EmbeddingMatrix& a, const EmbeddingMatrix& b,
                   const VerificationPair& p) {
    const float* ra = a.data().data() + p.a * a.dim();
    const float* rb = b.data().data() + p.b * b.dim();
    double acc = 0.0;
    for (Index k = 0; k < a.dim(); ++k) {
        acc = std::fma(static_cast<double>(ra[k]), static_cast<double>(rb[k]), acc);
    }
    return acc;
}

}  // namespace

void ManifestWriter::write(const std::string& prefix, double wall_time_seconds) const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    nlohmann::json in = nlohmann::json::object();
    for (const auto& path : inputs) in[path] = sha256_file_hex(path);
    j["inputs"] = in;
    j["outputs"] = outputs;
    j["seed"] = seed;
    j["tool_version"] = kToolVersion;
    j["wall_time_seconds"] = wall_time_seconds;
    write_json(prefix + ".run.json", j);
}

int cmd_synth(const std::string& config_path, const std::string& out_prefix) {
    const auto t0 = Clock::now();
    const auto j = load_json(config_path);
    SynthGalleryConfig cfg;
    cfg.dim = j.at("dim").get<Index>();
    cfg.n_clusters = j.at("n_clusters").get<Index>();
    cfg.per_cluster = j.at("per_cluster").get<Index>();
    cfg.concentration = j.at("concentration").get<double>();
    cfg.seed = j.value("seed", std::uint64_t{0});

    const Gallery gallery = sample_vmf_mixture(cfg);
    const std::string out = out_prefix + ".bipe";
    save_gallery(gallery, out);

    ManifestWriter mw{"synth", j, {config_path}, {out, out + ".manifest.json"}, cfg.seed};
    mw.write(out_prefix, seconds_since(t0));
    std::cout << "wrote " << out << " (" << gallery.centroids.count() << " x "
              << gallery.centroids.dim() << ")\n";
    return kExitOk;
}

int cmd_gallery_stats(const std::string& gallery_path, const std::string& out_prefix) {
    const auto t0 = Clock::now();
    const Gallery g = load_gallery(gallery_path);  // validation on
    const Index m = g.centroids.count();
    const Index d = g.centroids.dim();

    Index norm_violations = 0;
    double worst = 0.0;
    for (Index i = 0; i < m; ++i) {
        const double err = std::fabs(g.centroids.row_as_double(i).norm() - 1.0);
        worst = std::max(worst, err);
        if (err > 1e-5) ++norm_violations;
    }

    // seeded sample of off-diagonal cosines
    RandomStream rng(0xB1B5EEDULL, 0);
    const int samples = m >= 2 ? 1000 : 0;
    double max_cos = -1.0;
    for (int s = 0; s < samples; ++s) {
        const Index i = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(m)));
        Index k = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(m - 1)));
        if (k >= i) ++k;
        max_cos = std::max(max_cos, g.centroids.row_as_double(i).dot(g.centroids.row_as_double(k)));
    }

    nlohmann::json stats{
        {"count", m},
        {"dim", d},
        {"norm_violations", norm_violations},
        {"max_norm_error", worst},
        {"max_sampled_cos", max_cos},
        {"sampled_pairs", samples},
        {"source", g.manifest.source},
        {"encoder", g.manifest.encoder},
    };
    std::cout << stats.dump(2) << "\n";
    if (!out_prefix.empty()) {
        write_json(out_prefix + ".stats.json", stats);
        ManifestWriter mw{"gallery-stats", {{"gallery", gallery_path}}, {gallery_path},
                          {out_prefix + ".stats.json"}, 0};
        mw.write(out_prefix, seconds_since(t0));
    }
    return kExitOk;
}

int cmd_pca(const std::string& gallery_path, const std::string& out_prefix, bool origin_centered) {
    const auto t0 = Clock::now();
    const Gallery g = load_gallery(gallery_path);
    const PcaModel model = fit_pca(g, origin_centered ? Centering::origin : Centering::mean);
    save_pca(model, out_prefix);
    const auto spectrum = spectrum_json(model);
    std::cout << "energy knees: " << spectrum.at("energy_knees").dump()
              << "  effective_rank: " << spectrum.at("effective_rank").dump() << "\n";
    ManifestWriter mw{"pca",
                      {{"gallery", gallery_path}, {"origin_centered", origin_centered}},
                      {gallery_path},
                      {out_prefix + ".mean.bipe", out_prefix + ".eigvecs.bipe",
                       out_prefix + ".spectrum.json"},
                      0};
    mw.write(out_prefix, seconds_since(t0));
    return kExitOk;
}

int cmd_capacity(const std::vector<double>& taus, int dim, double delta,
                 const std::string& out_prefix) {
    const auto t0 = Clock::now();
    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream csv;
    csv << "tau,mu,log2_gv,gv_bound,alpha_star,gaussian_approx\n";
    std::printf("%8s %14s %10s %14s %12s\n", "tau", "mu", "log2_gv", "gv_bound", "alpha_star");
    for (double tau : taus) {
        const CapacityReport r = gv_bound(tau, dim);
        rows.push_back(to_json(r));
        csv << r.tau << "," << r.mu.linear << "," << r.log2_gv << "," << r.gv_bound << ","
            << r.alpha_star_orthogonal << "," << r.gaussian_approx << "\n";
        std::printf("%8.3f %14.4e %10.2f %14.4e %12.3f\n", r.tau, r.mu.linear, r.log2_gv,
                    r.gv_bound, r.alpha_star_orthogonal);
    }
    nlohmann::json out{{"dim", dim}, {"rows", rows}};
    if (delta > 0.0) {
        nlohmann::json buffers = nlohmann::json::array();
        for (double tau : taus) {
            buffers.push_back(to_json(safety_buffer_analysis(tau, delta, dim)));
        }
        out["delta"] = delta;
        out["buffers"] = buffers;
    }
    write_json(out_prefix + ".capacity.json", out);
    write_text(out_prefix + ".capacity.csv", csv.str());
    ManifestWriter mw{"capacity",
                      {{"taus", taus}, {"dim", dim}, {"delta", delta}},
                      {},
                      {out_prefix + ".capacity.json", out_prefix + ".capacity.csv"},
                      0};
    mw.write(out_prefix, seconds_since(t0));
    return kExitOk;
}

int cmd_provision(const std::string& gallery_path, const std::string& config_path, long long n,
                  const std::string& out_prefix) {
    const auto t0 = Clock::now();
    if (n < 1) throw ConfigError("provision: n must be >= 1");
    const Gallery gallery = load_gallery(gallery_path);
    const AllocConfig config = alloc_config_from_json(load_json(config_path));
    const PcaModel pca = fit_pca(gallery);

    const ProvisionResult result = provision(gallery, pca, config, static_cast<Index>(n));

    // independent re-verification before any success status
    const BipMetrics metrics = bip_metrics(result.set, gallery, config.tau);
    const bool verified = metrics.non_collision_pct == 100.0 && metrics.inter_sep_pct == 100.0;
    const bool complete = result.status == ProvisionStatus::complete;

    const std::string vpath = out_prefix + ".bipe";
    save_virtual_set(result.set, vpath);
    nlohmann::json stats = to_json(result.stats);
    stats["status"] = complete ? "complete" : "max_attempts_exceeded";
    stats["re_verification"] = to_json(metrics);
    stats["re_verification_passed"] = verified;
    write_json(out_prefix + ".stats.json", stats);

    ManifestWriter mw{"provision",
                      {{"gallery", gallery_path}, {"config", to_json(config)}, {"n", n}},
                      {gallery_path, config_path},
                      {vpath, vpath + ".records.json", out_prefix + ".stats.json"},
                      config.seed};
    mw.write(out_prefix, seconds_since(t0));

    std::cout << "accepted " << result.stats.accepted << "/" << n << " in "
              << result.stats.attempted << " attempts; re-verification "
              << metrics.non_collision_pct << "/" << metrics.inter_sep_pct
              << (verified ? " ok" : " FAILED") << "\n";
    if (!complete) {
        std::cerr << "provision: attempt budget exhausted with partial results\n";
        return kExitInternalError;
    }
    return verified ? kExitOk : kExitFindings;
}

int cmd_verify(const std::string& virtual_path, const std::string& gallery_path, double tau,
               const std::string& out_prefix) {
    const auto t0 = Clock::now();
    const VirtualSet vset = load_virtual_set(virtual_path);
    const Gallery gallery = load_gallery(gallery_path);
    const BipMetrics m = bip_metrics(vset, gallery, tau);

    std::printf("non-collision: %.4f%%  inter-sep: %.4f%%  (N=%llu, M=%llu, tau=%.4f)\n",
                m.non_collision_pct, m.inter_sep_pct,
                static_cast<unsigned long long>(m.n_virtual),
                static_cast<unsigned long long>(m.n_gallery), m.tau);
    const bool clean = m.non_collision_pct == 100.0 && m.inter_sep_pct == 100.0;
    if (!clean) {
        const auto hits = revocation_check(vset, gallery, tau);
        for (std::size_t i = 0; i < hits.size() && i < 10; ++i) {
            std::printf("  offender: virtual %lld vs gallery %lld cos %.6f\n",
                        static_cast<long long>(hits[i].virtual_index),
                        static_cast<long long>(hits[i].gallery_index), hits[i].cos);
        }
    }
    if (!out_prefix.empty()) {
        write_json(out_prefix + ".metrics.json", to_json(m));
        ManifestWriter mw{"verify",
                          {{"virtual", virtual_path}, {"gallery", gallery_path}, {"tau", tau}},
                          {virtual_path, gallery_path},
                          {out_prefix + ".metrics.json"},
                          0};
        mw.write(out_prefix, seconds_since(t0));
    }
    return clean ? kExitOk : kExitFindings;
}

int cmd_stress(const std::string& virtual_path, const std::string& heldout_path, double tau,
               const std::vector<double>& fractions, const std::string& out_prefix) {
    const auto t0 = Clock::now();
    const VirtualSet vset = load_virtual_set(virtual_path);
    const Gallery heldout = load_gallery(heldout_path);
    const OpenWorldCurve curve = open_world_stress(vset, heldout, tau, fractions);
    write_json(out_prefix + ".stress.json", to_json(curve));
    write_text(out_prefix + ".stress.csv", open_world_csv(curve));
    std::cout << open_world_csv(curve);
    ManifestWriter mw{"stress-test",
                      {{"virtual", virtual_path},
                       {"heldout", heldout_path},
                       {"tau", tau},
                       {"fractions", fractions}},
                      {virtual_path, heldout_path},
                      {out_prefix + ".stress.json", out_prefix + ".stress.csv"},
                      0};
    mw.write(out_prefix, seconds_since(t0));
    return kExitOk;
}

int cmd_revoke_check(const std::string& virtual_path, const std::string& delta_path, double tau,
                     double tau_safe, const std::string& out_prefix) {
    const auto t0 = Clock::now();
    const VirtualSet vset = load_virtual_set(virtual_path);
    const Gallery delta = load_gallery(delta_path);

    const auto revoked = revocation_check(vset, delta, tau);
    nlohmann::json out;
    out["tau"] = tau;
    nlohmann::json rj = nlohmann::json::array();
    for (const auto& h : revoked) {
        rj.push_back({{"virtual_index", h.virtual_index},
                      {"gallery_index", h.gallery_index},
                      {"cos", h.cos}});
    }
    out["revocations"] = rj;
    if (tau_safe > 0.0) {
        const auto monitored = monitoring_zone_check(vset, delta, tau, tau_safe);
        nlohmann::json mj = nlohmann::json::array();
        for (const auto& h : monitored) {
            mj.push_back({{"virtual_index", h.virtual_index},
                          {"gallery_index", h.gallery_index},
                          {"cos", h.cos}});
        }
        out["tau_safe"] = tau_safe;
        out["monitoring"] = mj;
    }
    write_json(out_prefix + ".revoke.json", out);
    std::cout << "revocations: " << revoked.size() << "\n";
    ManifestWriter mw{"revoke-check",
                      {{"virtual", virtual_path},
                       {"delta", delta_path},
                       {"tau", tau},
                       {"tau_safe", tau_safe}},
                      {virtual_path, delta_path},
                      {out_prefix + ".revoke.json"},
                      0};
    mw.write(out_prefix, seconds_since(t0));
    return revoked.empty() ? kExitOk : kExitFindings;
}

int cmd_pairs(const std::string& a_path, const std::string& b_path, const std::string& pairs_path,
              const std::string& mode, double tar, double threshold,
              const std::string& out_prefix) {
    const auto t0 = Clock::now();
    const EmbeddingMatrix a = load_embeddings(a_path);
    const EmbeddingMatrix b = load_embeddings(b_path);
    const PairList list = PairList::load_csv(pairs_path);

    Protocol protocol;
    if (mode == "rr" || mode == "R-R") {
        protocol = Protocol::rr;
    } else if (mode == "vv" || mode == "V-V") {
        protocol = Protocol::vv;
    } else if (mode == "rv" || mode == "R-V") {
        protocol = Protocol::rv;
    } else {
        throw ConfigError("pairs: mode must be one of rr, vv, rv");
    }

    ProtocolReport report;
    if (threshold > -2.0) {
        report = evaluate_pairs(a, b, list, threshold, protocol);
    } else if (list.has_folds()) {
        report = evaluate_pairs_folded(a, b, list, tar, protocol);
    } else {
        std::vector<double> genuine;
        for (const auto& p : list.pairs) {
            if (p.label == PairLabel::genuine) genuine.push_back(scored_pair(a, b, p));
        }
        report = evaluate_pairs(a, b, list, calibrate_threshold(std::move(genuine), tar), protocol);
    }

    std::cout << to_json(report).dump(2) << "\n";
    write_json(out_prefix + ".report.json", to_json(report));
    ManifestWriter mw{"pairs",
                      {{"a", a_path},
                       {"b", b_path},
                       {"pairs", pairs_path},
                       {"mode", mode},
                       {"tar", tar},
                       {"threshold", threshold}},
                      {a_path, b_path, pairs_path},
                      {out_prefix + ".report.json"},
                      0};
    mw.write(out_prefix, seconds_since(t0));
    return kExitOk;
}

}  // namespace bip::cli
