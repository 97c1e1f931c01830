#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfunc {

// Failure categories shared by all modules. The CLI maps them onto exit codes.
enum class ErrorKind {
    domain,                // argument outside the operation's domain
    incomplete_data,       // a table does not cover what was asked for
    data_corruption,       // loaded or computed data violates a hard invariant
    singularity,           // principal-branch logarithm undefined
    accuracy,              // quadrature did not reach its tolerance
    cutoff_too_small,      // truncated product misses too much tail
    inversion_quality,     // density does not integrate to one
    coverage,              // rectangle not covered by a grid
    grid_too_small,        // too many samples outside the histogram grid
    internal_consistency,  // two independent routes disagree
    resource,              // memory budget exceeded
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Quadrature failure; carries the last difference between successive refinements.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double achieved)
        : Error(ErrorKind::accuracy, what), achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

// Truncated product misses too much; suggests a prime count that would pass.
class CutoffError : public Error {
public:
    CutoffError(const std::string& what, std::size_t suggested)
        : Error(ErrorKind::cutoff_too_small, what), suggested_(suggested) {}

    std::size_t suggested_cutoff() const noexcept { return suggested_; }

private:
    std::size_t suggested_;
};

// Rectangle extends past a grid; reports the uncovered fraction of its area.
class CoverageError : public Error {
public:
    CoverageError(const std::string& what, double uncovered)
        : Error(ErrorKind::coverage, what), uncovered_(uncovered) {}

    double uncovered_fraction() const noexcept { return uncovered_; }

private:
    double uncovered_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace mfunc
