#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "xlim/units.hpp"

namespace xlim {

/// Contiguous energy bins in keV, defined by n+1 strictly increasing edges.
class EnergyGrid {
public:
    /// Empty grid (no bins), a placeholder until real edges are assigned.
    EnergyGrid() : edges_{0.0} {}
    explicit EnergyGrid(std::vector<double> edges);

    static EnergyGrid uniform(double low_keV, double high_keV, std::size_t bins);

    std::size_t size() const { return edges_.size() - 1; }
    double low(std::size_t bin) const { return edges_[bin]; }
    double high(std::size_t bin) const { return edges_[bin + 1]; }
    double width(std::size_t bin) const { return edges_[bin + 1] - edges_[bin]; }
    double center(std::size_t bin) const { return 0.5 * (edges_[bin] + edges_[bin + 1]); }
    double min() const { return edges_.front(); }
    double max() const { return edges_.back(); }
    std::span<const double> edges() const { return edges_; }

    /// Bins [first, last) as a new grid.
    EnergyGrid slice(std::size_t first, std::size_t last) const;

    friend bool operator==(const EnergyGrid&, const EnergyGrid&) = default;

private:
    std::vector<double> edges_;
};

enum class SpectrumTag { current_on, current_off, simulated, measured };

std::string_view to_string(SpectrumTag tag);
SpectrumTag spectrum_tag_from_string(std::string_view text);

struct BinnedSpectrum {
    EnergyGrid grid;
    std::vector<std::int64_t> counts;
    Exposure exposure;
    SpectrumTag tag = SpectrumTag::measured;
    double acquisition_days = 0.0;

    /// Throws ShapeError / DomainError if counts do not match the grid or are negative.
    void validate() const;
    std::int64_t total() const;
};

/// Time-normalized on − off difference with per-bin 1σ uncertainty.
struct ResidualSpectrum {
    EnergyGrid grid;
    std::vector<double> values;
    std::vector<double> sigma;
    /// on.acquisition_days / off.acquisition_days
    double time_ratio = 1.0;
    std::vector<std::int64_t> on_counts;
    std::vector<std::int64_t> off_counts;
};

/// residual_i = on_i − r·off_i, sigma_i = sqrt(on_i + r²·off_i) with r the ratio
/// of acquisition times.
ResidualSpectrum subtract_spectra(const BinnedSpectrum& on, const BinnedSpectrum& off);

}  // namespace xlim
