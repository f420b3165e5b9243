#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlim/model.hpp"
#include "xlim/simplex.hpp"
#include "xlim/spectrum.hpp"

namespace xlim {

enum class Statistic { chi2, poisson_nll };

std::string_view to_string(Statistic statistic);
Statistic statistic_from_string(std::string_view text);

/// Binned data to be fitted. Counting data leaves `sigma` empty; derived data
/// (e.g. an on/off residual) carries an explicit 1σ per bin.
struct Observations {
    EnergyGrid grid;
    std::vector<double> values;
    std::vector<double> sigma;

    static Observations from_spectrum(const BinnedSpectrum& spectrum);
    static Observations from_residual(const ResidualSpectrum& residual);

    bool is_counting() const { return sigma.empty(); }
    Observations slice(std::size_t first, std::size_t last) const;
    void validate() const;
};

/// Σ (n_i − μ_i)² / σ_i². Counting data uses σ_i² = max(n_i, 1).
double binned_chi2(const Observations& data, std::span<const double> expected);
double binned_chi2(const BinnedSpectrum& spectrum, const SpectralModel& model);

/// −Σ (n_i ln μ_i − μ_i − ln n_i!). Throws DomainError when μ_i = 0 with
/// n_i > 0 (infinite NLL) and ModelError for μ_i < 0.
double binned_poisson_nll(const Observations& data, std::span<const double> expected);
double binned_poisson_nll(const BinnedSpectrum& spectrum, const SpectralModel& model);

enum class ParameterField { line_amplitude, line_centroid, continuum_alpha, polynomial_coefficient };

std::string_view to_string(ParameterField field);

/// A free parameter bound to one field of one component of the model template.
struct FitParameter {
    std::string name;
    std::size_t component = 0;
    ParameterField field = ParameterField::line_amplitude;
    std::size_t coefficient = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    /// Initial simplex step; 0 picks 10% of the starting value (or 1).
    double step = 0.0;
};

struct FitProblem {
    Observations data;
    /// Template; holds the starting value of every free parameter and the
    /// fixed values of everything else.
    SpectralModel model;
    std::vector<FitParameter> parameters;
    /// Index into `parameters` of the signal amplitude (lower bound must be >= 0).
    std::size_t signal = 0;
    Statistic statistic = Statistic::chi2;
    std::uint64_t seed = 0;

    void validate() const;
    std::vector<double> initial_values() const;
    std::vector<double> steps() const;
    SpectralModel apply(std::span<const double> values) const;
    /// Statistic on the χ² scale: χ² itself, or 2·NLL in Poisson mode.
    /// Returns +inf instead of throwing for impossible expectations.
    double deviance(std::span<const double> values) const;
};

struct FitOptions {
    SimplexOptions simplex{};
    bool compute_errors = true;
};

struct FitResult {
    std::vector<double> values;
    /// 1σ from the inverse Hessian of the deviance; NaN when unavailable.
    std::vector<double> errors;
    /// Deviance (χ² or 2·NLL) at the minimum.
    double statistic = 0.0;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    bool signal_at_boundary = false;
    std::vector<std::string> trace;
};

/// Minimizes the problem's deviance over all free parameters.
FitResult fit_minimize(const FitProblem& problem, const FitOptions& options = {});

/// Minimizes over the nuisance parameters with the signal held at `signal`.
/// `start` (optional) supplies a warm start for all parameters.
FitResult fit_with_fixed_signal(const FitProblem& problem, double signal, std::span<const double> start = {},
                                const FitOptions& options = {});

/// Free-parameter helpers.
FitParameter signal_parameter(std::string name, std::size_t component, ParameterField field,
                              std::size_t coefficient = 0);
FitParameter nuisance_parameter(std::string name, std::size_t component, ParameterField field,
                                std::size_t coefficient = 0);

/// Canonical text of a fit problem (excluding data) for configuration hashes.
std::string describe(const FitProblem& problem);

}  // namespace xlim
