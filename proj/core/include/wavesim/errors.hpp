#pragma once

#include <stdexcept>
#include <string>

namespace wavesim {

// Base for all library failures so callers can catch one type at the boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input outside the mathematical domain of the routine (e.g. gamma at x <= 0).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

// An adaptive routine hit its work cap before meeting its tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double best_error)
        : Error(what), best_error_(best_error) {}
    double best_error() const { return best_error_; }

private:
    double best_error_;
};

// Requested budget cannot be met within the configured size caps.
class BudgetTooTight : public Error {
public:
    explicit BudgetTooTight(const std::string& what) : Error(what) {}
};

// A sup-norm scan peaked at the edge of its window; widen the scan radius.
class ScanTooNarrow : public Error {
public:
    explicit ScanTooNarrow(const std::string& what) : Error(what) {}
};

// Coefficient lookup outside the range the cache was built to cover.
class CacheMiss : public Error {
public:
    explicit CacheMiss(const std::string& what) : Error(what) {}
};

// A computed coefficient broke one of the decay inequalities it must satisfy;
// points at a quadrature or constants bug, never at user input.
class BoundViolation : public Error {
public:
    explicit BoundViolation(const std::string& what) : Error(what) {}
};

// Included coefficient energy exceeded R(0) by more than numerical slack,
// contradicting Bessel's inequality.
class NegativeDeficit : public Error {
public:
    explicit NegativeDeficit(const std::string& what) : Error(what) {}
};

// Two paths that must share a time grid do not.
class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& what) : Error(what) {}
};

// Config or data file does not match the schema or hash it claims.
class ProvenanceMismatch : public Error {
public:
    explicit ProvenanceMismatch(const std::string& what) : Error(what) {}
};

}  // namespace wavesim
