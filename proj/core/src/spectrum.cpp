#include "xlim/spectrum.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "xlim/error.hpp"

namespace xlim {

EnergyGrid::EnergyGrid(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) {
        throw ShapeError("energy grid needs at least one bin (two edges)");
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        if (!std::isfinite(edges_[i])) {
            throw DomainError(fmt::format("energy grid edge {} is not finite", i));
        }
        if (i > 0 && !(edges_[i] > edges_[i - 1])) {
            throw DomainError(fmt::format("energy grid edges must be strictly increasing (edge {}: {} <= {})",
                                          i, edges_[i], edges_[i - 1]));
        }
    }
}

EnergyGrid EnergyGrid::uniform(double low_keV, double high_keV, std::size_t bins) {
    if (bins == 0) {
        throw ShapeError("uniform grid needs at least one bin");
    }
    if (!(high_keV > low_keV)) {
        throw DomainError(fmt::format("uniform grid needs high > low, got [{}, {}]", low_keV, high_keV));
    }
    std::vector<double> edges(bins + 1);
    const double step = (high_keV - low_keV) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = low_keV + step * static_cast<double>(i);
    }
    edges.back() = high_keV;
    return EnergyGrid(std::move(edges));
}

EnergyGrid EnergyGrid::slice(std::size_t first, std::size_t last) const {
    if (first >= last || last > size()) {
        throw ShapeError(fmt::format("invalid bin slice [{}, {}) of {} bins", first, last, size()));
    }
    return EnergyGrid(std::vector<double>(edges_.begin() + static_cast<std::ptrdiff_t>(first),
                                          edges_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
}

std::string_view to_string(SpectrumTag tag) {
    switch (tag) {
        case SpectrumTag::current_on: return "current_on";
        case SpectrumTag::current_off: return "current_off";
        case SpectrumTag::simulated: return "simulated";
        case SpectrumTag::measured: return "measured";
    }
    return "measured";
}

SpectrumTag spectrum_tag_from_string(std::string_view text) {
    if (text == "current_on") return SpectrumTag::current_on;
    if (text == "current_off") return SpectrumTag::current_off;
    if (text == "simulated") return SpectrumTag::simulated;
    if (text == "measured") return SpectrumTag::measured;
    throw DomainError(fmt::format("unknown spectrum tag '{}'", text));
}

void BinnedSpectrum::validate() const {
    if (counts.size() != grid.size()) {
        throw ShapeError(fmt::format("spectrum has {} counts for {} bins", counts.size(), grid.size()));
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) {
            throw DomainError(fmt::format("negative count {} in bin {}", counts[i], i));
        }
    }
    if (!(acquisition_days >= 0.0)) {
        throw DomainError("acquisition days must be non-negative");
    }
}

std::int64_t BinnedSpectrum::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ResidualSpectrum subtract_spectra(const BinnedSpectrum& on, const BinnedSpectrum& off) {
    on.validate();
    off.validate();
    if (!(on.grid == off.grid)) {
        throw ShapeError("on and off spectra have different energy grids");
    }
    if (!(off.acquisition_days > 0.0)) {
        throw DomainError("current-off spectrum has zero acquisition time");
    }
    if (!(on.acquisition_days > 0.0)) {
        throw DomainError("current-on spectrum has zero acquisition time");
    }

    ResidualSpectrum out{on.grid, {}, {}, on.acquisition_days / off.acquisition_days, on.counts, off.counts};
    const double r = out.time_ratio;
    out.values.resize(on.counts.size());
    out.sigma.resize(on.counts.size());
    for (std::size_t i = 0; i < on.counts.size(); ++i) {
        const auto n_on = static_cast<double>(on.counts[i]);
        const auto n_off = static_cast<double>(off.counts[i]);
        out.values[i] = n_on - r * n_off;
        out.sigma[i] = std::sqrt(n_on + r * r * n_off);
    }
    return out;
}

}  // namespace xlim
