#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "xlim/model.hpp"
#include "xlim/spectrum.hpp"

namespace xlim {

/// Plain-text spectrum file, format version 1:
///
///     # xlim-spectrum v1
///     # energy_unit: keV
///     # counts_unit: counts
///     # tag: simulated
///     # exposure_mass_kg: 80
///     # live_time_day: 1
///     # acquisition_days: 1
///     # response_fwhm_ref_keV: 0.17            (optional block)
///     # response_reference_energy_keV: 8
///     # response_resolution_model: constant
///     # response_efficiency: 1
///     # config_hash: 0123456789abcdef          (optional)
///     # columns: low_keV high_keV counts
///     4.5 5.5 12
///     ...
///
/// Bins must be contiguous and non-overlapping; counts are non-negative integers.
struct SpectrumFile {
    BinnedSpectrum spectrum;
    std::optional<DetectorResponse> response;
    std::string config_hash;
};

void write_spectrum(std::ostream& out, const SpectrumFile& file);
SpectrumFile read_spectrum(std::istream& in);

void save_spectrum(const std::filesystem::path& path, const SpectrumFile& file);
SpectrumFile load_spectrum_file(const std::filesystem::path& path);
BinnedSpectrum load_spectrum(const std::filesystem::path& path);

/// Residual table (plot data): low_keV high_keV residual sigma on off.
void write_residual(std::ostream& out, const ResidualSpectrum& residual, const std::string& config_hash);

}  // namespace xlim
