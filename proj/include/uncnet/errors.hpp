#pragma once

#include <stdexcept>
#include <string>

namespace uncnet {

// Base class for all library errors. `category()` is a stable machine-readable
// tag; the CLI maps it to exit diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}
    const std::string& category() const { return category_; }

private:
    std::string category_;
};

struct SelfEdgeError : Error {
    explicit SelfEdgeError(std::size_t i)
        : Error("SelfEdge", "self-pair at node " + std::to_string(i)), node(i) {}
    std::size_t node;
};

struct DuplicatePairError : Error {
    DuplicatePairError(std::size_t i, std::size_t j)
        : Error("DuplicatePair",
                "duplicate pair (" + std::to_string(i) + "," + std::to_string(j) + ")"),
          i(i), j(j) {}
    std::size_t i, j;
};

struct ProbabilityOutOfRangeError : Error {
    ProbabilityOutOfRangeError(std::size_t i, std::size_t j, double q)
        : Error("ProbabilityOutOfRange",
                "pair (" + std::to_string(i) + "," + std::to_string(j) + ") has q=" +
                    std::to_string(q) + ", expected 0 < q <= 1"),
          i(i), j(j), q(q) {}
    std::size_t i, j;
    double q;
};

struct NodeIdOutOfRangeError : Error {
    NodeIdOutOfRangeError(std::size_t id, std::size_t n)
        : Error("NodeIdOutOfRange",
                "node id " + std::to_string(id) + " out of range for n=" + std::to_string(n)) {}
};

struct TooFewNodesError : Error {
    explicit TooFewNodesError(std::size_t n)
        : Error("TooFewNodes", "need at least 2 nodes, got " + std::to_string(n)) {}
};

struct InvalidSimplexError : Error {
    explicit InvalidSimplexError(const std::string& what) : Error("InvalidSimplex", what) {}
};

struct InvalidBlockParamsError : Error {
    explicit InvalidBlockParamsError(const std::string& what) : Error("InvalidBlockParams", what) {}
};

struct InvalidShapeError : Error {
    explicit InvalidShapeError(const std::string& what) : Error("InvalidShape", what) {}
};

struct InfeasibleNoiseError : Error {
    explicit InfeasibleNoiseError(double c_implied)
        : Error("InfeasibleNoise",
                "implied beta-noise coefficient c=" + std::to_string(c_implied) +
                    " falls outside (0,1]"),
          c_implied(c_implied) {}
    double c_implied;
};

struct NumericalUnderflowError : Error {
    explicit NumericalUnderflowError(const std::string& what) : Error("NumericalUnderflow", what) {}
};

struct DegenerateRhoError : Error {
    explicit DegenerateRhoError(double rho)
        : Error("DegenerateRho", "density rho=" + std::to_string(rho) + " must lie in (0,1)") {}
};

struct InstanceTooLargeError : Error {
    explicit InstanceTooLargeError(const std::string& what) : Error("InstanceTooLarge", what) {}
};

struct AllRestartsDegenerateError : Error {
    explicit AllRestartsDegenerateError(const std::string& what)
        : Error("AllRestartsDegenerate", what) {}
};

struct MismatchedFitError : Error {
    explicit MismatchedFitError(const std::string& what) : Error("MismatchedFit", what) {}
};

struct EmptyTruthError : Error {
    explicit EmptyTruthError() : Error("EmptyTruth", "truth edge set is empty; ROC undefined") {}
};

struct FullTruthError : Error {
    explicit FullTruthError() : Error("FullTruth", "every pair is a truth edge; ROC undefined") {}
};

struct SizeMismatchError : Error {
    explicit SizeMismatchError(const std::string& what) : Error("SizeMismatch", what) {}
};

struct TooManyGroupsError : Error {
    explicit TooManyGroupsError(const std::string& what) : Error("TooManyGroups", what) {}
};

struct ParseError : Error {
    ParseError(std::size_t line, const std::string& reason)
        : Error("ParseError", "line " + std::to_string(line) + ": " + reason), line(line) {}
    std::size_t line;
};

} // namespace uncnet
