#include "xlim/pep.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "xlim/error.hpp"
#include "xlim/hash.hpp"
#include "xlim/parallel.hpp"
#include "xlim/random.hpp"

namespace xlim {

namespace {

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(fmt::format("{} must be in [0, 1], got {}", name, p));
    }
}

}  // namespace

void PepTransition::validate() const {
    if (!(shift > 0.0)) throw DomainError("forbidden-line shift must be positive");
    if (!(forbidden_energy() > 0.0)) throw DomainError("forbidden-line energy must be positive");
}

double PepRunConfig::new_electron_count() const {
    return current * duration / constants().elementary_charge;
}

double PepRunConfig::yield() const {
    validate();
    return new_electron_count() * interactions_per_electron * capture_cascade_factor * geometric_acceptance *
           detection_efficiency;
}

void PepRunConfig::validate() const {
    if (!(current >= 0.0) || !std::isfinite(current)) throw DomainError("current must be non-negative");
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw DomainError("duration must be non-negative");
    if (!(interactions_per_electron >= 0.0) || !std::isfinite(interactions_per_electron)) {
        throw DomainError("interactions per electron must be non-negative");
    }
    check_probability(capture_cascade_factor, "capture/cascade factor");
    check_probability(geometric_acceptance, "geometric acceptance");
    check_probability(detection_efficiency, "detection efficiency");
}

double interactions_from_length(double target_length_m, double mean_free_path_m) {
    if (!(target_length_m >= 0.0) || !(mean_free_path_m > 0.0)) {
        throw DomainError("target length must be non-negative and mean free path positive");
    }
    return target_length_m / mean_free_path_m;
}

double pep_expected_counts(const PepRunConfig& config, double beta2_over_2) {
    check_probability(beta2_over_2, "beta^2/2");
    return beta2_over_2 * config.yield();
}

std::pair<std::size_t, std::size_t> pep_window(const EnergyGrid& grid, const PepTransition& transition,
                                               const DetectorResponse& response, double half_width_fwhm) {
    transition.validate();
    response.validate();
    if (!(half_width_fwhm > 0.0)) throw DomainError("window half width must be positive");
    const double centre = transition.forbidden_energy();
    const double half = half_width_fwhm * response.fwhm_at(centre);
    const double lo = centre - half;
    const double hi = centre + half;
    if (lo < grid.min() || hi > grid.max()) {
        throw DomainError(fmt::format("forbidden-line window [{:.4f}, {:.4f}] keV is outside the grid [{}, {}]", lo,
                                      hi, grid.min(), grid.max()));
    }
    std::size_t first = grid.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double c = grid.center(i);
        if (c >= lo && c <= hi) {
            first = std::min(first, i);
            last = i + 1;
        }
    }
    if (first >= last || last - first < 2) {
        throw DomainError("forbidden-line window holds fewer than two bins; use a finer grid");
    }
    return {first, last};
}

LimitResult pep_counts_limit(const ResidualSpectrum& residual, const PepTransition& transition,
                             const DetectorResponse& response, double cl, const PepLimitOptions& options) {
    const auto [first, last] = pep_window(residual.grid, transition, response, options.window_half_width_fwhm);

    Observations window = Observations::from_residual(residual).slice(first, last);
    const bool have_counts =
        residual.on_counts.size() == residual.grid.size() && residual.off_counts.size() == residual.grid.size();
    if (have_counts) {
        const double r2 = residual.time_ratio * residual.time_ratio;
        for (std::size_t i = first; i < last; ++i) {
            const double on = std::max(static_cast<double>(residual.on_counts[i]), 1.0);
            const double off = std::max(static_cast<double>(residual.off_counts[i]), 1.0);
            window.sigma[i - first] = std::sqrt(on + r2 * off);
        }
    }

    double variance = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < window.values.size(); ++i) {
        variance += window.sigma[i] * window.sigma[i];
        sum += window.values[i];
    }
    const double width = window.grid.max() - window.grid.min();

    // Efficiency is part of the yield chain, so the line is fitted in detected counts.
    DetectorResponse fit_response = response;
    fit_response.efficiency = {1.0};

    FitProblem problem{window,
                       SpectralModel{{GaussianLine{transition.forbidden_energy(), 0.0},
                                      PolynomialBackground{{sum / width}}},
                                     fit_response},
                       {signal_parameter("forbidden_line_counts", 0, ParameterField::line_amplitude),
                        nuisance_parameter("offset", 1, ParameterField::polynomial_coefficient, 0)},
                       0,
                       Statistic::chi2,
                       0};
    problem.parameters[0].step = std::max(1.0, std::sqrt(variance));
    problem.parameters[1].step = std::max(1e-6, std::sqrt(variance / static_cast<double>(window.values.size())) /
                                                    (width / static_cast<double>(window.values.size())));

    auto limit = bayesian_upper_limit(problem, cl, options.limit);
    limit.method += "/forbidden-window";
    return limit;
}

LimitResult pep_upper_limit(const ResidualSpectrum& residual, const PepTransition& transition,
                            const DetectorResponse& response, const PepRunConfig& config, double cl,
                            const PepLimitOptions& options) {
    const double yield = config.yield();
    if (!(yield > 0.0)) {
        throw DegenerateError("PEP yield chain is zero (no current, duration, acceptance or efficiency)");
    }
    const auto counts = pep_counts_limit(residual, transition, response, cl, options);
    return scale_limit(counts, 1.0 / yield, "beta2_over_2");
}

EnsembleResult run_pep_pseudo_experiments(const PepEnsembleSpec& spec, std::size_t n, double cl,
                                          std::uint64_t seed, const EnsembleOptions& options) {
    if (n == 0) throw DomainError("pseudo-experiment count must be at least 1");
    const double yield = spec.run.yield();
    if (!(yield > 0.0)) throw DegenerateError("PEP yield chain is zero");
    const auto on_expected = predict_counts(spec.on_truth, spec.grid);
    const auto off_expected = predict_counts(spec.off_truth, spec.grid);
    PepLimitOptions pep_options;
    pep_options.limit = options.limit;

    std::vector<std::optional<LimitResult>> slots(n);
    std::vector<std::string> errors(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
        const std::uint64_t s = derive_seed(seed, i);
        BinnedSpectrum on{spec.grid, sample_poisson(on_expected, derive_seed(s, 0)), {}, SpectrumTag::current_on,
                          spec.on_days};
        BinnedSpectrum off{spec.grid, sample_poisson(off_expected, derive_seed(s, 1)), {}, SpectrumTag::current_off,
                           spec.off_days};
        try {
            slots[i] = pep_upper_limit(subtract_spectra(on, off), spec.transition, spec.response, spec.run, cl,
                                       pep_options);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    EnsembleResult out;
    out.requested = n;
    out.seed = seed;
    out.config_hash = content_hash(fmt::format(
        "pep;on={{{}}};off={{{}}};days={:.17g},{:.17g};yield={:.17g};injected={:.17g};n={};cl={:.17g}",
        describe(spec.on_truth), describe(spec.off_truth), spec.on_days, spec.off_days, yield,
        spec.injected_counts, n, cl));
    const double truth = spec.injected_counts / yield;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) {
            if (slots[i]->upper_bound >= truth) ++covered;
            out.limits.push_back(std::move(*slots[i]));
            out.cycles.push_back(i);
        } else {
            out.failures.emplace_back(i, errors[i]);
        }
    }
    out.coverage = out.limits.empty() ? 0.0
                                      : static_cast<double>(covered) / static_cast<double>(out.limits.size());
    return out;
}

}  // namespace xlim
