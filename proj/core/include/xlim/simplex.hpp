#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace xlim {

struct SimplexOptions {
    /// Converged when the spread of objective values across the simplex is below this.
    double ftol = 1e-9;
    std::size_t max_evaluations = 50000;
    /// Restarts from the best point after each convergence; stops early when a
    /// restart improves the objective by less than ftol.
    std::size_t max_restarts = 6;
    std::uint64_t seed = 0;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    std::vector<std::string> trace;
};

using Objective = std::function<double(std::span<const double>)>;

/// Box-constrained Nelder-Mead. Trial points are projected onto
/// [lower, upper]; non-finite objective values are treated as +inf.
/// Deterministic for a given seed. Throws ConvergenceError (with the
/// per-restart trace) when `max_evaluations` is exhausted.
SimplexResult minimize_simplex(const Objective& objective, std::span<const double> start,
                               std::span<const double> steps, std::span<const double> lower,
                               std::span<const double> upper, const SimplexOptions& options = {});

}  // namespace xlim
