#include "bip/metrics.hpp"

#include "bip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bip {

double non_collision_rate(const VirtualSet& virtual_set, const Gallery& gallery, double tau) {
    const Index n = virtual_set.embeddings.count();
    if (n == 0) return 100.0;
    if (virtual_set.embeddings.dim() != gallery.centroids.dim()) {
        throw DomainError("non_collision_rate: dim mismatch");
    }
    const CosineScanner& scanner = gallery.centroids.scanner();
    std::uint64_t good = 0;
    for (Index j = 0; j < n; ++j) {
        const VectorXd v = virtual_set.embeddings.row_as_double(j);
        good += scanner.count_ge(v.data(), tau, 0, scanner.rows()) == 0 ? 1 : 0;
    }
    return 100.0 * static_cast<double>(good) / static_cast<double>(n);
}

double inter_sep_rate(const VirtualSet& virtual_set, double tau) {
    const Index n = virtual_set.embeddings.count();
    if (n < 2) return 100.0;
    const CosineScanner& scanner = virtual_set.embeddings.scanner();
    std::uint64_t violations = 0;
    for (Index j = 0; j + 1 < n; ++j) {
        const VectorXd v = virtual_set.embeddings.row_as_double(j);
        violations += scanner.count_ge(v.data(), tau, j + 1, n);
    }
    const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return 100.0 * (total - static_cast<double>(violations)) / total;
}

BipMetrics bip_metrics(const VirtualSet& virtual_set, const Gallery& gallery, double tau) {
    BipMetrics m;
    m.non_collision_pct = non_collision_rate(virtual_set, gallery, tau);
    m.inter_sep_pct = inter_sep_rate(virtual_set, tau);
    m.n_virtual = static_cast<std::uint64_t>(virtual_set.embeddings.count());
    m.n_gallery = static_cast<std::uint64_t>(gallery.centroids.count());
    m.tau = tau;
    return m;
}

bool PairList::has_folds() const {
    return !pairs.empty() && pairs.front().fold >= 0;
}

int PairList::fold_count() const {
    int max_fold = -1;
    for (const auto& p : pairs) max_fold = std::max(max_fold, p.fold);
    return max_fold + 1;
}

PairList PairList::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("pair list: cannot open " + path);
    PairList list;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.rfind("a_index", 0) == 0) {  // optional header
            first = false;
            continue;
        }
        first = false;
        std::istringstream ls(line);
        std::string field;
        VerificationPair p;
        if (!std::getline(ls, field, ',')) throw FormatError("pair list: bad line: " + line);
        p.a = std::stoll(field);
        if (!std::getline(ls, field, ',')) throw FormatError("pair list: bad line: " + line);
        p.b = std::stoll(field);
        if (!std::getline(ls, field, ',')) throw FormatError("pair list: bad line: " + line);
        if (field == "G") {
            p.label = PairLabel::genuine;
        } else if (field == "I") {
            p.label = PairLabel::impostor;
        } else {
            throw FormatError("pair list: label must be G or I, got: " + field);
        }
        if (std::getline(ls, field, ',')) p.fold = std::stoi(field);
        list.pairs.push_back(p);
    }
    return list;
}

void PairList::save_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    out << "a_index,b_index,label" << (has_folds() ? ",fold" : "") << "\n";
    for (const auto& p : pairs) {
        out << p.a << "," << p.b << "," << (p.label == PairLabel::genuine ? "G" : "I");
        if (has_folds()) out << "," << p.fold;
        out << "\n";
    }
}

double calibrate_threshold(std::vector<double> genuine_scores, double target_tar) {
    if (genuine_scores.empty()) throw EmptyScores("calibrate_threshold: no genuine scores");
    if (!(target_tar > 0.0 && target_tar <= 1.0)) {
        throw DomainError("calibrate_threshold: target_tar outside (0,1]");
    }
    std::sort(genuine_scores.begin(), genuine_scores.end());
    const double n = static_cast<double>(genuine_scores.size());
    // Lower (1 - tar) empirical quantile; the nudge absorbs binary rounding
    // of (1 - tar) so exact multiples land on the intended order statistic.
    auto k = static_cast<std::ptrdiff_t>(std::ceil((1.0 - target_tar) * n - 1e-9));
    k = std::max<std::ptrdiff_t>(k, 1);
    return genuine_scores[static_cast<std::size_t>(k - 1)];
}

namespace {

double pair_score(const EmbeddingMatrix& ea, const EmbeddingMatrix& eb,
                  const VerificationPair& p) {
    if (p.a < 0 || p.a >= ea.count() || p.b < 0 || p.b >= eb.count()) {
        throw IndexOutOfRange("evaluate_pairs: pair index out of range");
    }
    const float* ra = ea.data().data() + p.a * ea.dim();
    const float* rb = eb.data().data() + p.b * eb.dim();
    double acc = 0.0;
    for (Index k = 0; k < ea.dim(); ++k) {
        acc = std::fma(static_cast<double>(ra[k]), static_cast<double>(rb[k]), acc);
    }
    return acc;
}

struct Tally {
    std::uint64_t correct = 0;
    std::uint64_t total = 0;
    std::uint64_t impostors = 0;
    std::uint64_t false_accepts = 0;
};

void tally_pair(Tally& t, double score, PairLabel label, double threshold) {
    const bool predicted_genuine = score >= threshold;
    const bool is_genuine = label == PairLabel::genuine;
    t.total += 1;
    if (predicted_genuine == is_genuine) t.correct += 1;
    if (!is_genuine) {
        t.impostors += 1;
        if (predicted_genuine) t.false_accepts += 1;
    }
}

ProtocolReport finalize(Protocol protocol, double threshold, const Tally& t,
                        std::vector<FoldResult> per_fold) {
    ProtocolReport r;
    r.protocol = protocol;
    r.threshold_used = threshold;
    r.per_fold = std::move(per_fold);
    if (protocol != Protocol::rv && t.total > 0) {
        r.accuracy = static_cast<double>(t.correct) / static_cast<double>(t.total);
    }
    if (t.impostors > 0) {
        r.far = static_cast<double>(t.false_accepts) / static_cast<double>(t.impostors);
    }
    return r;
}

}  // namespace

ProtocolReport evaluate_pairs(const EmbeddingMatrix& embeddings_a,
                              const EmbeddingMatrix& embeddings_b, const PairList& pairs,
                              double threshold, Protocol protocol) {
    if (embeddings_a.dim() != embeddings_b.dim()) throw DomainError("evaluate_pairs: dim mismatch");
    Tally t;
    for (const auto& p : pairs.pairs) {
        tally_pair(t, pair_score(embeddings_a, embeddings_b, p), p.label, threshold);
    }
    return finalize(protocol, threshold, t, {});
}

ProtocolReport evaluate_pairs_folded(const EmbeddingMatrix& embeddings_a,
                                     const EmbeddingMatrix& embeddings_b, const PairList& pairs,
                                     double target_tar, Protocol protocol) {
    if (embeddings_a.dim() != embeddings_b.dim()) throw DomainError("evaluate_pairs: dim mismatch");
    if (!pairs.has_folds()) throw MissingFolds("evaluate_pairs_folded: pair list has no folds");
    const int n_folds = pairs.fold_count();

    std::vector<double> scores(pairs.pairs.size());
    for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
        scores[i] = pair_score(embeddings_a, embeddings_b, pairs.pairs[i]);
    }

    std::vector<FoldResult> fold_results;
    Tally overall;
    double threshold_sum = 0.0;
    for (int f = 0; f < n_folds; ++f) {
        std::vector<double> calib;
        for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
            const auto& p = pairs.pairs[i];
            if (p.fold != f && p.label == PairLabel::genuine) calib.push_back(scores[i]);
        }
        const double theta = calibrate_threshold(std::move(calib), target_tar);
        Tally t;
        for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
            if (pairs.pairs[i].fold == f) {
                tally_pair(t, scores[i], pairs.pairs[i].label, theta);
            }
        }
        FoldResult fr;
        fr.fold = f;
        fr.threshold = theta;
        fr.accuracy = t.total > 0 ? static_cast<double>(t.correct) / static_cast<double>(t.total)
                                  : 1.0;
        if (t.impostors > 0) {
            fr.far = static_cast<double>(t.false_accepts) / static_cast<double>(t.impostors);
        }
        fold_results.push_back(fr);
        overall.correct += t.correct;
        overall.total += t.total;
        overall.impostors += t.impostors;
        overall.false_accepts += t.false_accepts;
        threshold_sum += theta;
    }
    return finalize(protocol, threshold_sum / n_folds, overall, std::move(fold_results));
}

const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::rr: return "R-R";
        case Protocol::vv: return "V-V";
        case Protocol::rv: return "R-V";
    }
    return "?";
}

nlohmann::json to_json(const BipMetrics& m) {
    return {
        {"non_collision_pct", m.non_collision_pct},
        {"inter_sep_pct", m.inter_sep_pct},
        {"n_virtual", m.n_virtual},
        {"n_gallery", m.n_gallery},
        {"tau", m.tau},
    };
}

nlohmann::json to_json(const ProtocolReport& r) {
    nlohmann::json j;
    j["protocol"] = protocol_name(r.protocol);
    j["accuracy"] = r.accuracy.has_value() ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr);
    j["far"] = r.far.has_value() ? nlohmann::json(*r.far) : nlohmann::json(nullptr);
    j["threshold_used"] = r.threshold_used;
    if (!r.per_fold.empty()) {
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& f : r.per_fold) {
            nlohmann::json fj{{"fold", f.fold}, {"threshold", f.threshold}, {"accuracy", f.accuracy}};
            fj["far"] = f.far.has_value() ? nlohmann::json(*f.far) : nlohmann::json(nullptr);
            folds.push_back(fj);
        }
        j["per_fold"] = folds;
    }
    return j;
}

}  // namespace bip
