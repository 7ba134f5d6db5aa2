#include "bip/embedding_store.hpp"

#include "bip/errors.hpp"
#include "bip/sha256_hex.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace bip {

namespace {

constexpr char kMagic[4] = {'B', 'I', 'P', 'E'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

std::string utc_now_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

template <class T>
void write_le(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));  // little-endian host
}

template <class T>
bool read_le(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return in.gcount() == sizeof(T);
}

std::string manifest_path(const std::string& path) { return path + ".manifest.json"; }
std::string records_path(const std::string& path) { return path + ".records.json"; }

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(RowMatrixXf rows) : rows_(std::move(rows)) {}

EmbeddingMatrix& EmbeddingMatrix::operator=(const EmbeddingMatrix& o) {
    if (this != &o) {
        rows_ = o.rows_;
        scanner_.reset();
    }
    return *this;
}

EmbeddingMatrix& EmbeddingMatrix::operator=(EmbeddingMatrix&& o) noexcept {
    if (this != &o) {
        rows_ = std::move(o.rows_);
        scanner_ = std::move(o.scanner_);
    }
    return *this;
}

void EmbeddingMatrix::validate_unit_rows(double tol) const {
    for (Index i = 0; i < count(); ++i) {
        double sq = 0.0;
        const float* r = rows_.data() + i * dim();
        for (Index k = 0; k < dim(); ++k) {
            sq = std::fma(static_cast<double>(r[k]), static_cast<double>(r[k]), sq);
        }
        const double norm = std::sqrt(sq);
        if (std::fabs(norm - 1.0) > tol) {
            throw NonUnitRow("row " + std::to_string(i) + " has norm " + std::to_string(norm));
        }
    }
}

const CosineScanner& EmbeddingMatrix::scanner() const {
    std::scoped_lock lock(scanner_mutex_);
    if (!scanner_) {
        auto s = std::make_unique<CosineScanner>(dim());
        s->append_all(rows_);
        scanner_ = std::move(s);
    }
    return *scanner_;
}

VectorXd compute_centroid(const Eigen::Ref<const RowMatrixXf>& rows) {
    if (rows.rows() == 0) throw EmptyMatrix("compute_centroid: empty slice");
    VectorXd sum = VectorXd::Zero(rows.cols());
    for (Index i = 0; i < rows.rows(); ++i) {
        sum += rows.row(i).cast<double>().transpose();
    }
    const double norm = sum.norm();
    if (norm < 1e-12) {
        throw ZeroNormCentroid("compute_centroid: summed vector has norm " + std::to_string(norm));
    }
    return sum / norm;
}

MaxCosResult max_cosine_against(const VectorXd& query, const EmbeddingMatrix& matrix) {
    if (matrix.count() == 0) throw EmptyMatrix("max_cosine_against: empty matrix");
    return matrix.scanner().max_cosine(query);
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::string& path,
                     const std::string& source, const std::string& encoder) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("save_embeddings: cannot open " + path);
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.count()));
    write_le<std::uint8_t>(out, kDtypeF32);
    const char zeros[7] = {};
    out.write(zeros, 7);
    const std::size_t payload_bytes =
        static_cast<std::size_t>(matrix.count()) * matrix.dim() * sizeof(float);
    out.write(reinterpret_cast<const char*>(matrix.data().data()),
              static_cast<std::streamsize>(payload_bytes));
    if (!out) throw Error("save_embeddings: write failed for " + path);
    out.close();

    nlohmann::json manifest{
        {"source", source},
        {"encoder", encoder},
        {"dim", matrix.dim()},
        {"count", matrix.count()},
        {"created_utc", utc_now_iso()},
        {"sha256_of_payload", sha256_hex(matrix.data().data(), payload_bytes)},
    };
    std::ofstream m(manifest_path(path), std::ios::trunc);
    m << manifest.dump(2) << "\n";
}

EmbeddingMatrix load_embeddings(const std::string& path, bool validate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("load_embeddings: cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() < 4) {
        throw TruncatedData("load_embeddings: file shorter than the magic in " + path);
    }
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw BadMagic("load_embeddings: bad magic in " + path);
    }
    std::uint32_t version = 0, dim = 0;
    std::uint64_t count = 0;
    std::uint8_t dtype = 0;
    char reserved[7] = {};
    if (!read_le(in, version) || !read_le(in, dim) || !read_le(in, count) || !read_le(in, dtype) ||
        (in.read(reserved, 7), in.gcount() != 7)) {
        throw TruncatedData("load_embeddings: truncated header in " + path);
    }
    if (version != kVersion) {
        throw VersionMismatch("load_embeddings: version " + std::to_string(version) +
                              ", expected " + std::to_string(kVersion));
    }
    if (dtype != kDtypeF32) {
        throw FormatError("load_embeddings: unsupported dtype " + std::to_string(dtype));
    }
    if (dim == 0) throw FormatError("load_embeddings: dim must be positive");

    RowMatrixXf rows(static_cast<Index>(count), static_cast<Index>(dim));
    const std::size_t payload_bytes = static_cast<std::size_t>(count) * dim * sizeof(float);
    in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(payload_bytes));
    if (static_cast<std::size_t>(in.gcount()) != payload_bytes) {
        throw TruncatedData("load_embeddings: declared count exceeds payload in " + path);
    }
    EmbeddingMatrix m(std::move(rows));
    if (validate) m.validate_unit_rows();
    return m;
}

void save_gallery(const Gallery& gallery, const std::string& path) {
    save_embeddings(gallery.centroids, path, gallery.manifest.source, gallery.manifest.encoder);
    if (!gallery.labels.empty()) {
        // labels ride along in the manifest sidecar
        std::ifstream in(manifest_path(path));
        nlohmann::json manifest = nlohmann::json::parse(in);
        manifest["labels"] = gallery.labels;
        std::ofstream out(manifest_path(path), std::ios::trunc);
        out << manifest.dump(2) << "\n";
    }
}

Gallery load_gallery(const std::string& path, bool validate) {
    Gallery g;
    g.centroids = load_embeddings(path, validate);
    std::ifstream in(manifest_path(path));
    if (in) {
        const auto manifest = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
        if (!manifest.is_discarded()) {
            g.manifest.source = manifest.value("source", "");
            g.manifest.encoder = manifest.value("encoder", "");
            g.manifest.created_utc = manifest.value("created_utc", "");
            g.manifest.sha256_of_payload = manifest.value("sha256_of_payload", "");
            if (manifest.contains("labels")) {
                g.labels = manifest.at("labels").get<std::vector<std::string>>();
            }
        }
    }
    if (!g.labels.empty() && static_cast<Index>(g.labels.size()) != g.centroids.count()) {
        throw FormatError("load_gallery: label count does not match centroid count");
    }
    return g;
}

nlohmann::json to_json(const VirtualRecord& r) {
    return {
        {"reference_index", r.reference_index},
        {"alpha_used", r.alpha_used},
        {"attempts", r.attempts},
        {"max_cos_to_gallery", r.max_cos_to_gallery},
    };
}

void save_virtual_set(const VirtualSet& vset, const std::string& path) {
    save_embeddings(vset.embeddings, path, "bip:provision", "");
    nlohmann::json j;
    j["config"] = to_json(vset.config_snapshot);
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : vset.records) recs.push_back(to_json(r));
    j["records"] = std::move(recs);
    std::ofstream out(records_path(path), std::ios::trunc);
    out << j.dump() << "\n";
}

VirtualSet load_virtual_set(const std::string& path, bool validate) {
    VirtualSet v;
    v.embeddings = load_embeddings(path, validate);
    std::ifstream in(records_path(path));
    if (!in) throw FormatError("load_virtual_set: missing records sidecar for " + path);
    const auto j = nlohmann::json::parse(in);
    v.config_snapshot = alloc_config_from_json(j.at("config"));
    for (const auto& rj : j.at("records")) {
        VirtualRecord r;
        r.reference_index = rj.at("reference_index").get<Index>();
        r.alpha_used = rj.at("alpha_used").get<double>();
        r.attempts = rj.at("attempts").get<std::uint64_t>();
        r.max_cos_to_gallery = rj.at("max_cos_to_gallery").get<double>();
        v.records.push_back(r);
    }
    if (static_cast<Index>(v.records.size()) != v.embeddings.count()) {
        throw FormatError("load_virtual_set: record count does not match embedding count");
    }
    return v;
}

}  // namespace bip
