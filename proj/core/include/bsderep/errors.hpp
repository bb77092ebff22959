#pragma once

#include <stdexcept>
#include <string>

namespace bsderep {

/// Base class for all library errors.
class BsdeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range or inconsistent parameters (ε outside its admissible range,
/// empty batches, bad basis degree, ...).
class ParameterError : public BsdeError {
public:
    using BsdeError::BsdeError;
};

/// A generator or process returned a non-finite value.
class EvaluationError : public BsdeError {
public:
    using BsdeError::BsdeError;
};

/// Least-squares design matrix is numerically singular.
class SingularRegressionError : public BsdeError {
public:
    SingularRegressionError(const std::string& what, double condition_number)
        : BsdeError(what), condition_number_(condition_number) {}
    double condition_number() const noexcept { return condition_number_; }

private:
    double condition_number_;
};

/// Nested Monte Carlo request exceeds the evaluation budget.
class BudgetError : public BsdeError {
public:
    BudgetError(const std::string& what, double estimated_cost)
        : BsdeError(what), estimated_cost_(estimated_cost) {}
    double estimated_cost() const noexcept { return estimated_cost_; }

private:
    double estimated_cost_;
};

/// Explicit finite-difference step violates the stability restriction.
class CflError : public BsdeError {
public:
    CflError(const std::string& what, long required_steps)
        : BsdeError(what), required_steps_(required_steps) {}
    long required_steps() const noexcept { return required_steps_; }

private:
    long required_steps_;
};

}  // namespace bsderep
