#pragma once

#include <stdexcept>
#include <string>

namespace bip {

// Root of all library errors. Subclasses are grouped by the exit code the
// CLI maps them to: format errors -> 2, everything else -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mathematical argument outside the documented domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// ---- embedding_store ----

class ZeroNormCentroid : public Error {
public:
    explicit ZeroNormCentroid(const std::string& msg) : Error(msg) {}
};

class EmptyMatrix : public Error {
public:
    explicit EmptyMatrix(const std::string& msg) : Error(msg) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

class BadMagic : public FormatError {
public:
    explicit BadMagic(const std::string& msg) : FormatError(msg) {}
};

class VersionMismatch : public FormatError {
public:
    explicit VersionMismatch(const std::string& msg) : FormatError(msg) {}
};

class TruncatedData : public FormatError {
public:
    explicit TruncatedData(const std::string& msg) : FormatError(msg) {}
};

class NonUnitRow : public FormatError {
public:
    explicit NonUnitRow(const std::string& msg) : FormatError(msg) {}
};

// ---- manifold_pca ----

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

class ZeroVariance : public Error {
public:
    explicit ZeroVariance(const std::string& msg) : Error(msg) {}
};

// ---- allocator ----

class GalleryTooSmall : public Error {
public:
    explicit GalleryTooSmall(const std::string& msg) : Error(msg) {}
};

class DegenerateNeighborhood : public Error {
public:
    explicit DegenerateNeighborhood(const std::string& msg) : Error(msg) {}
};

class ZeroNormDirection : public Error {
public:
    explicit ZeroNormDirection(const std::string& msg) : Error(msg) {}
};

class ZeroNormCandidate : public Error {
public:
    explicit ZeroNormCandidate(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// ---- capacity_stats ----

class ZeroCollisions : public Error {
public:
    explicit ZeroCollisions(const std::string& msg) : Error(msg) {}
};

class CapacityExceeded : public Error {
public:
    explicit CapacityExceeded(const std::string& msg) : Error(msg) {}
};

// ---- metrics_protocols ----

class EmptyScores : public Error {
public:
    explicit EmptyScores(const std::string& msg) : Error(msg) {}
};

class IndexOutOfRange : public Error {
public:
    explicit IndexOutOfRange(const std::string& msg) : Error(msg) {}
};

class MissingFolds : public Error {
public:
    explicit MissingFolds(const std::string& msg) : Error(msg) {}
};

// ---- synth_harness ----

class BracketFailure : public Error {
public:
    explicit BracketFailure(const std::string& msg) : Error(msg) {}
};

class GeometricInfeasible : public Error {
public:
    explicit GeometricInfeasible(const std::string& msg) : Error(msg) {}
};

}  // namespace bip
