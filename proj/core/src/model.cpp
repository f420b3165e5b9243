#include "xlim/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "xlim/error.hpp"

namespace xlim {

namespace {

// Integral of a unit-area Gaussian over [lo, hi]. Uses erfc on the tail side
// to avoid cancellation far from the centroid.
double gaussian_fraction(double lo, double hi, double centroid, double sigma) {
    const double scale = 1.0 / (sigma * std::numbers::sqrt2);
    const double zl = (lo - centroid) * scale;
    const double zh = (hi - centroid) * scale;
    if (zl >= 0.0) {
        return 0.5 * (std::erfc(zl) - std::erfc(zh));
    }
    if (zh <= 0.0) {
        return 0.5 * (std::erfc(-zh) - std::erfc(-zl));
    }
    return 0.5 * (std::erf(zh) - std::erf(zl));
}

double polynomial_integral(const std::vector<double>& c, double lo, double hi) {
    // Horner on the antiderivative Σ c_k E^{k+1}/(k+1).
    auto antiderivative = [&c](double e) {
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) {
            acc = acc * e + c[k] / static_cast<double>(k + 1);
        }
        return acc * e;
    };
    return antiderivative(hi) - antiderivative(lo);
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void DetectorResponse::validate() const {
    if (!(fwhm_ref > 0.0) || !std::isfinite(fwhm_ref)) {
        throw DomainError(fmt::format("detector FWHM must be positive, got {}", fwhm_ref));
    }
    if (!(reference_energy > 0.0)) {
        throw DomainError("detector reference energy must be positive");
    }
    if (efficiency.empty()) {
        throw ShapeError("detector efficiency needs at least one value");
    }
    for (double e : efficiency) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw DomainError(fmt::format("efficiency {} outside [0, 1]", e));
        }
    }
}

double DetectorResponse::fwhm_at(double energy_keV) const {
    if (resolution_model == ResolutionModel::constant) {
        return fwhm_ref;
    }
    if (!(energy_keV > 0.0)) {
        throw DomainError("sqrt-scaling resolution needs a positive energy");
    }
    return fwhm_ref * std::sqrt(energy_keV / reference_energy);
}

double DetectorResponse::efficiency_in_bin(std::size_t bin) const {
    return efficiency.size() == 1 ? efficiency.front() : efficiency[bin];
}

double gaussian_line_density(double energy_keV, double centroid, double fwhm, double amplitude) {
    const double sigma = fwhm_to_sigma(fwhm);
    if (!(amplitude >= 0.0)) {
        throw DomainError(fmt::format("line amplitude must be non-negative, got {}", amplitude));
    }
    const double z = (energy_keV - centroid) / sigma;
    return amplitude * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

void predict_counts_into(const SpectralModel& model, const EnergyGrid& grid, std::span<double> out) {
    if (out.size() != grid.size()) {
        throw ShapeError("output span does not match grid");
    }
    const auto& response = model.response;
    if (response.efficiency.size() != 1 && response.efficiency.size() != grid.size()) {
        throw ShapeError(fmt::format("efficiency has {} values for {} bins", response.efficiency.size(),
                                     grid.size()));
    }
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = grid.size();

    for (const auto& component : model.components) {
        std::visit(Overloaded{
                       [&](const GaussianLine& line) {
                           if (!(line.centroid > 0.0)) {
                               throw DomainError(fmt::format("line centroid must be positive, got {}",
                                                             line.centroid));
                           }
                           const double sigma = fwhm_to_sigma(response.fwhm_at(line.centroid));
                           for (std::size_t i = 0; i < n; ++i) {
                               out[i] += line.amplitude *
                                         gaussian_fraction(grid.low(i), grid.high(i), line.centroid, sigma);
                           }
                       },
                       [&](const OneOverEContinuum& cont) {
                           if (!(grid.min() > 0.0)) {
                               throw DomainError(fmt::format(
                                   "1/E continuum undefined on a grid starting at {} keV", grid.min()));
                           }
                           for (std::size_t i = 0; i < n; ++i) {
                               out[i] += cont.alpha * std::log(grid.high(i) / grid.low(i));
                           }
                       },
                       [&](const PolynomialBackground& poly) {
                           for (std::size_t i = 0; i < n; ++i) {
                               out[i] += polynomial_integral(poly.coefficients, grid.low(i), grid.high(i));
                           }
                       },
                   },
                   component);
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] *= response.efficiency_in_bin(i);
    }
}

std::vector<double> predict_counts(const SpectralModel& model, const EnergyGrid& grid) {
    std::vector<double> out(grid.size());
    predict_counts_into(model, grid, out);
    return out;
}

std::vector<std::int64_t> sample_poisson(std::span<const double> expected, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> counts(expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const double mu = expected[i];
        if (!std::isfinite(mu) || mu < 0.0) {
            throw ModelError(fmt::format("expected count {} in bin {} is negative or not finite", mu, i));
        }
        if (mu == 0.0) {
            counts[i] = 0;
            continue;
        }
        std::poisson_distribution<std::int64_t> draw(mu);
        counts[i] = draw(rng);
    }
    return counts;
}

BinnedSpectrum simulate_spectrum(const SpectralModel& model, const EnergyGrid& grid, std::uint64_t seed,
                                 const SimulationMeta& meta) {
    const auto expected = predict_counts(model, grid);
    return BinnedSpectrum{grid, sample_poisson(expected, seed), meta.exposure, SpectrumTag::simulated,
                          meta.acquisition_days};
}

std::string describe(const SpectralModel& model) {
    std::string out = fmt::format("response(fwhm={:.17g},eref={:.17g},model={},eff=[", model.response.fwhm_ref,
                                  model.response.reference_energy,
                                  model.response.resolution_model == ResolutionModel::constant ? "constant"
                                                                                               : "sqrt");
    for (double e : model.response.efficiency) {
        out += fmt::format("{:.17g},", e);
    }
    out += "])";
    for (const auto& component : model.components) {
        std::visit(Overloaded{
                       [&](const GaussianLine& l) {
                           out += fmt::format(";line({:.17g},{:.17g})", l.centroid, l.amplitude);
                       },
                       [&](const OneOverEContinuum& c) { out += fmt::format(";inv_e({:.17g})", c.alpha); },
                       [&](const PolynomialBackground& p) {
                           out += ";poly(";
                           for (double c : p.coefficients) out += fmt::format("{:.17g},", c);
                           out += ")";
                       },
                   },
                   component);
    }
    return out;
}

}  // namespace xlim
