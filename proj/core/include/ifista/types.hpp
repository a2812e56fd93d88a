#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace ifista {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Iterates blew up: NaN/Inf, or the objective gap stayed far above its
/// starting value for too long.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t iteration)
        : std::runtime_error(what), iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// An inner (dual) prox solve ran out of iterations before certifying the
/// requested accuracy.
class InnerSolverCapError : public std::runtime_error {
public:
    InnerSolverCapError(const std::string& what, double best_gap, std::size_t iterations)
        : std::runtime_error(what), best_gap_(best_gap), iterations_(iterations) {}
    double best_gap() const noexcept { return best_gap_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double best_gap_;
    std::size_t iterations_;
};

/// The high-precision reference run did not settle within its budget.
class ReferenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ifista
