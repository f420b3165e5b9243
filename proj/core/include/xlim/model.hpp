#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xlim/spectrum.hpp"

namespace xlim {

enum class ResolutionModel { constant, sqrt_scaling };

/// Gaussian energy resolution plus detection efficiency.
///
/// The resolution is quoted as a FWHM at `reference_energy` (8 keV by default).
/// With `sqrt_scaling` the width of a line at energy E is fwhm_ref·sqrt(E/E_ref).
/// Efficiency is either one scalar or one value per bin of the grid it is
/// applied to.
struct DetectorResponse {
    double fwhm_ref = 0.170;
    double reference_energy = 8.0;
    ResolutionModel resolution_model = ResolutionModel::constant;
    std::vector<double> efficiency{1.0};

    void validate() const;
    double fwhm_at(double energy_keV) const;
    double efficiency_in_bin(std::size_t bin) const;
};

/// Detector-broadened monochromatic line; `amplitude` is the total count.
struct GaussianLine {
    double centroid = 0.0;
    double amplitude = 0.0;
};

/// dN/dE = alpha / E, alpha in counts·keV.
struct OneOverEContinuum {
    double alpha = 0.0;
};

/// dN/dE = Σ_k c_k E^k in counts/keV, E in keV.
struct PolynomialBackground {
    std::vector<double> coefficients;
};

using SpectralComponent = std::variant<GaussianLine, OneOverEContinuum, PolynomialBackground>;

struct SpectralModel {
    std::vector<SpectralComponent> components;
    DetectorResponse response;
};

/// Gaussian density in counts/keV at `energy_keV`.
double gaussian_line_density(double energy_keV, double centroid, double fwhm, double amplitude);

/// Expected counts per bin (real-valued): closed-form bin integrals of every
/// component times the bin efficiency. Lines are broadened by the response;
/// continua are not.
std::vector<double> predict_counts(const SpectralModel& model, const EnergyGrid& grid);

/// Allocation-free variant for inner loops; `out.size()` must equal `grid.size()`.
void predict_counts_into(const SpectralModel& model, const EnergyGrid& grid, std::span<double> out);

struct SimulationMeta {
    Exposure exposure;
    double acquisition_days = 0.0;
};

/// Independent Poisson draws around `predict_counts`, tagged `simulated`.
BinnedSpectrum simulate_spectrum(const SpectralModel& model, const EnergyGrid& grid, std::uint64_t seed,
                                 const SimulationMeta& meta = {});

/// Poisson draws around precomputed expectations.
std::vector<std::int64_t> sample_poisson(std::span<const double> expected, std::uint64_t seed);

/// Canonical one-line text form used for configuration hashes.
std::string describe(const SpectralModel& model);

}  // namespace xlim
