#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <span>
#include <stdexcept>
#include <string>

#include "yieldopt/design.hpp"

namespace yieldopt {

/// Base of every failure raised while evaluating a blackbox model.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model failure tagged with the Monte Carlo sample that triggered it.
class SampleEvaluationError : public ModelError {
public:
    SampleEvaluationError(std::size_t index, const std::string& what, std::exception_ptr cause)
        : ModelError("sample " + std::to_string(index) + ": " + what), index_(index), cause_(std::move(cause)) {}

    std::size_t index() const { return index_; }
    /// The original error, e.g. a TimeoutError.
    std::exception_ptr cause() const { return cause_; }

private:
    std::size_t index_;
    std::exception_ptr cause_;
};

/// Blackbox quantity of interest Q(x, p).
///
/// Implementations must be deterministic and safe to call from several
/// threads at once.
class QoiModel {
public:
    virtual ~QoiModel() = default;

    double evaluate(const DesignVector& x, std::span<const double> p) {
        evaluations_.fetch_add(1, std::memory_order_relaxed);
        return do_evaluate(x, p);
    }

    /// Number of evaluate() calls so far.
    std::uint64_t evaluation_count() const { return evaluations_.load(std::memory_order_relaxed); }

    virtual std::size_t parameter_dim() const = 0;
    virtual std::string name() const = 0;

protected:
    virtual double do_evaluate(const DesignVector& x, std::span<const double> p) = 0;

private:
    std::atomic<std::uint64_t> evaluations_{0};
};

}  // namespace yieldopt
