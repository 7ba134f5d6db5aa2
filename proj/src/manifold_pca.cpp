#include "bip/manifold_pca.hpp"

#include "bip/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <string>

namespace bip {

PcaModel fit_pca(const Gallery& gallery, Centering centering) {
    const auto& rows = gallery.centroids.data();
    const Index n = rows.rows();
    const Index d = rows.cols();
    if (n < 2) throw InsufficientData("fit_pca: need at least 2 centroids");

    // One pass: row sum and X^T X in double, blocked for the gemm path.
    VectorXd sum = VectorXd::Zero(d);
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
    constexpr Index kBlock = 4096;
    for (Index start = 0; start < n; start += kBlock) {
        const Index len = std::min(kBlock, n - start);
        const Eigen::MatrixXd block = rows.middleRows(start, len).cast<double>();
        sum += block.colwise().sum().transpose();
        xtx.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    }
    xtx = xtx.selfadjointView<Eigen::Lower>();

    PcaModel model;
    model.dim = d;
    Eigen::MatrixXd cov(d, d);
    if (centering == Centering::mean) {
        model.mean = sum / static_cast<double>(n);
        cov = (xtx - static_cast<double>(n) * model.mean * model.mean.transpose()) /
              static_cast<double>(n - 1);
    } else {
        model.mean = VectorXd::Zero(d);
        cov = xtx / static_cast<double>(n - 1);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("fit_pca: eigensolve failed");

    // Eigen returns ascending order; flip to descending and clamp noise.
    model.eigvals = solver.eigenvalues().reverse();
    model.eigvecs = solver.eigenvectors().rowwise().reverse();
    for (Index k = 0; k < d; ++k) {
        if (model.eigvals[k] < 0.0) model.eigvals[k] = 0.0;
    }
    model.sigmas = model.eigvals.cwiseSqrt();
    return model;
}

double principal_energy(const PcaModel& model, Index k) {
    if (k < 1 || k > model.dim) throw DomainError("principal_energy: k outside [1, dim]");
    const double total = model.eigvals.sum();
    if (total <= 0.0) throw ZeroVariance("principal_energy: zero total variance");
    return model.eigvals.head(k).sum() / total;
}

Index effective_dim(const PcaModel& model, double energy_threshold) {
    if (!(energy_threshold > 0.0 && energy_threshold <= 1.0)) {
        throw DomainError("effective_dim: threshold outside (0,1]");
    }
    const double total = model.eigvals.sum();
    if (total <= 0.0) throw ZeroVariance("effective_dim: zero total variance");
    double acc = 0.0;
    for (Index k = 0; k < model.dim; ++k) {
        acc += model.eigvals[k];
        if (acc / total >= energy_threshold) return k + 1;
    }
    return model.dim;  // floating-point slack: E(d) == 1 by construction
}

double effective_rank(const PcaModel& model, RankKind kind) {
    const double total = model.eigvals.sum();
    if (total <= 0.0) throw ZeroVariance("effective_rank: zero total variance");
    if (kind == RankKind::participation_ratio) {
        return total * total / model.eigvals.squaredNorm();
    }
    double entropy = 0.0;
    for (Index k = 0; k < model.dim; ++k) {
        const double p = model.eigvals[k] / total;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

nlohmann::json spectrum_json(const PcaModel& model) {
    nlohmann::json j;
    j["eigvals"] = std::vector<double>(model.eigvals.data(), model.eigvals.data() + model.dim);
    nlohmann::json knees;
    for (const double t : {0.5, 0.9, 0.95, 0.99}) {
        char key[8];
        std::snprintf(key, sizeof(key), "%.2f", t);
        knees[key] = effective_dim(model, t);
    }
    j["energy_knees"] = knees;
    j["effective_rank"] = effective_rank(model);
    return j;
}

void save_pca(const PcaModel& model, const std::string& prefix) {
    {
        RowMatrixXf mean(1, model.dim);
        mean.row(0) = model.mean.cast<float>().transpose();
        save_embeddings(EmbeddingMatrix(std::move(mean)), prefix + ".mean.bipe", "bip:pca", "");
    }
    {
        RowMatrixXf vecs(model.dim, model.dim);
        vecs = model.eigvecs.transpose().cast<float>();  // row k = u_k
        save_embeddings(EmbeddingMatrix(std::move(vecs)), prefix + ".eigvecs.bipe", "bip:pca", "");
    }
    std::ofstream out(prefix + ".spectrum.json", std::ios::trunc);
    out << spectrum_json(model).dump(2) << "\n";
}

PcaModel load_pca(const std::string& prefix) {
    PcaModel model;
    // The mean is not unit-norm; eigvec rows are but float rounding is fine.
    const auto mean = load_embeddings(prefix + ".mean.bipe", /*validate=*/false);
    const auto vecs = load_embeddings(prefix + ".eigvecs.bipe", /*validate=*/false);
    model.dim = mean.dim();
    model.mean = mean.data().row(0).cast<double>().transpose();
    model.eigvecs = vecs.data().cast<double>().transpose();
    std::ifstream in(prefix + ".spectrum.json");
    if (!in) throw Error("load_pca: missing spectrum file for " + prefix);
    const auto j = nlohmann::json::parse(in);
    const auto vals = j.at("eigvals").get<std::vector<double>>();
    model.eigvals = Eigen::Map<const VectorXd>(vals.data(), static_cast<Index>(vals.size()));
    model.sigmas = model.eigvals.cwiseSqrt();
    return model;
}

}  // namespace bip
