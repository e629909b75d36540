#ifndef MALEX_ERRORS_HPP
#define MALEX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace malex {

// Coarse category used by the CLI to pick an exit code.
enum class ErrorKind { config, data, compute };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class UnknownPrefixError : public Error {
public:
    explicit UnknownPrefixError(const std::string& feature)
        : Error(ErrorKind::data, "feature string has no known set prefix: " + feature) {}
};

class EmptyVocabularyError : public Error {
public:
    EmptyVocabularyError() : Error(ErrorKind::data, "corpus yields an empty vocabulary") {}
};

class UnknownFeatureError : public Error {
public:
    explicit UnknownFeatureError(const std::string& feature)
        : Error(ErrorKind::data, "feature string not in vocabulary: " + feature) {}
};

class EmptyClassError : public Error {
public:
    explicit EmptyClassError(const std::string& detail)
        : Error(ErrorKind::data, "dataset is missing a class: " + detail) {}
};

class EmptyGroupError : public Error {
public:
    explicit EmptyGroupError(const std::string& group)
        : Error(ErrorKind::data, "group has no usable samples: " + group) {}
};

class DegenerateRelabelingError : public Error {
public:
    DegenerateRelabelingError()
        : Error(ErrorKind::data, "target predicts a single class on the distillation inputs") {}
};

class DimensionMismatchError : public Error {
public:
    DimensionMismatchError(std::size_t expected, std::size_t got)
        : Error(ErrorKind::compute, "dimension mismatch: expected " + std::to_string(expected) +
                                        ", got " + std::to_string(got)) {}
};

class InvalidGammaError : public Error {
public:
    explicit InvalidGammaError(double gamma)
        : Error(ErrorKind::compute, "gamma must be positive, got " + std::to_string(gamma)) {}
};

class NonDifferentiableError : public Error {
public:
    NonDifferentiableError()
        : Error(ErrorKind::compute,
                "model has no gradient; distill a differentiable surrogate first") {}
};

class NoDifferentiableRouteError : public Error {
public:
    explicit NoDifferentiableRouteError(const std::string& detail)
        : Error(ErrorKind::compute, "no differentiable route: " + detail) {}
};

class DegenerateRelevanceError : public Error {
public:
    DegenerateRelevanceError()
        : Error(ErrorKind::compute, "relevance vector is degenerate (all zero)") {}
};

class GroupMismatchError : public Error {
public:
    explicit GroupMismatchError(const std::string& detail)
        : Error(ErrorKind::compute, "global relevance matrices disagree: " + detail) {}
};

class VocabularyMismatchError : public Error {
public:
    VocabularyMismatchError()
        : Error(ErrorKind::compute, "model was trained on a different vocabulary") {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::compute, what) {}
};

}  // namespace malex

#endif  // MALEX_ERRORS_HPP
