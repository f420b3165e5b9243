#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xlim/fit.hpp"

namespace xlim {

struct ScanPoint {
    double value = 0.0;
    /// Profiled deviance (χ² or 2·NLL) at `value`.
    double statistic = 0.0;
};

struct LimitResult {
    std::string parameter;
    std::string method;
    double confidence_level = 0.0;
    double upper_bound = 0.0;
    double best_fit = 0.0;
    double statistic_min = 0.0;
    std::vector<ScanPoint> scan;
};

struct LimitOptions {
    /// Grid doubling stops once the bound moves by less than this fraction.
    double relative_tolerance = 1e-3;
    std::size_t initial_intervals = 64;
    std::size_t max_intervals = 1u << 14;
    /// The scan extends until the profiled deviance is this far above its minimum.
    double tail_delta = 40.0;
    FitOptions fit{};
};

/// Upper limit on the signal parameter with a flat prior on signal >= 0 and
/// posterior ∝ exp(−Δ/2), Δ the profiled deviance (nuisances minimized at each
/// scan point). Integrated on a uniform grid refined until the bound is stable.
/// Throws RangeError when the posterior cannot be normalized inside the
/// parameter range.
LimitResult bayesian_upper_limit(const FitProblem& problem, double cl, const LimitOptions& options = {});

/// Maps a limit through a positive linear map (e.g. continuum amplitude → λ).
LimitResult scale_limit(const LimitResult& limit, double factor, std::string parameter);

/// Inverse CDF of the limit posterior at `cl`, from an already computed scan.
double posterior_quantile(const std::vector<ScanPoint>& scan, double cl);

struct PseudoExperimentSpec {
    /// Model the data are drawn from.
    SpectralModel truth;
    /// True value of the signal parameter, for coverage.
    double true_signal = 0.0;
    /// Fit template; its data values are replaced each cycle (grid is kept).
    FitProblem fit;
};

struct EnsembleOptions {
    unsigned threads = 0;
    LimitOptions limit{};
};

struct EnsembleResult {
    std::vector<LimitResult> limits;
    /// Cycle index of each entry of `limits`.
    std::vector<std::size_t> cycles;
    std::vector<std::pair<std::size_t, std::string>> failures;
    std::size_t requested = 0;
    double coverage = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

/// n independent simulate → fit → limit cycles, cycle i seeded from
/// derive_seed(seed, i). Coverage is the fraction of successful cycles with
/// bound >= true signal; failed cycles are excluded and listed.
EnsembleResult run_pseudo_experiments(const PseudoExperimentSpec& spec, std::size_t n, double cl,
                                      std::uint64_t seed, const EnsembleOptions& options = {});

}  // namespace xlim
