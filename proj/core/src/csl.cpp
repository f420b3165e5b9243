#include "xlim/csl.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "xlim/error.hpp"

namespace xlim {

namespace {

// Rate coefficient K such that dΓ/dE = K·λ/E.
double rate_coefficient(double correlation_length, bool mass_proportional) {
    const auto& c = constants();
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double me = c.electron_mass;
    double k = c.electron_charge_squared() * c.hbar_c /
               (4.0 * pi2 * correlation_length * correlation_length * me * me);
    if (mass_proportional) {
        k *= mass_ratio_squared();
    }
    return k;
}

void check_length(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw DomainError(fmt::format("correlation length must be positive, got {}", a));
    }
}

}  // namespace

void CslParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError(fmt::format("collapse rate must be non-negative, got {}", lambda));
    }
    check_length(correlation_length);
}

double TargetMaterial::atoms_per_kg() const {
    return constants().avogadro / (molar_mass * 1e-3);
}

void TargetMaterial::validate() const {
    if (!(molar_mass > 0.0)) {
        throw DomainError(fmt::format("material '{}' needs a positive molar mass", element));
    }
    if (!(quasi_free_electrons_per_atom >= 0.0)) {
        throw DomainError(fmt::format("material '{}' has a negative quasi-free electron count", element));
    }
}

double csl_rate_density(double energy_keV, const CslParams& params) {
    params.validate();
    if (!(energy_keV > 0.0)) {
        throw DomainError(fmt::format("emission energy must be positive, got {} keV", energy_keV));
    }
    if (energy_keV >= kCslValidityLimit) {
        throw ValidityError(fmt::format(
            "emission energy {} keV is outside the non-relativistic range of the free-electron rate "
            "(requires E << m_e c^2; guard at {} keV)",
            energy_keV, kCslValidityLimit));
    }
    return rate_coefficient(params.correlation_length, params.mass_proportional) * params.lambda / energy_keV;
}

double electron_seconds(const TargetMaterial& target, const Exposure& exposure) {
    target.validate();
    return target.quasi_free_electrons_per_atom * target.atoms_per_kg() * exposure.product() * kSecondsPerDay;
}

std::vector<double> expected_csl_counts(const CslParams& params, const TargetMaterial& target,
                                        const Exposure& exposure, const EnergyGrid& grid) {
    params.validate();
    if (!(grid.min() > 0.0)) {
        throw DomainError(fmt::format("emission spectrum undefined on a bin starting at {} keV", grid.min()));
    }
    if (grid.max() > kCslValidityLimit) {
        throw ValidityError(fmt::format("grid extends to {} keV, above the {} keV validity guard", grid.max(),
                                        kCslValidityLimit));
    }
    const double alpha = rate_coefficient(params.correlation_length, params.mass_proportional) * params.lambda *
                         electron_seconds(target, exposure);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = alpha * std::log(grid.high(i) / grid.low(i));
    }
    return out;
}

double alpha_from_lambda(double lambda, const TargetMaterial& target, const Exposure& exposure,
                         double correlation_length, bool mass_proportional) {
    check_length(correlation_length);
    return rate_coefficient(correlation_length, mass_proportional) * electron_seconds(target, exposure) * lambda;
}

double lambda_from_alpha(double alpha, const TargetMaterial& target, const Exposure& exposure,
                         double correlation_length, bool mass_proportional) {
    if (!(alpha >= 0.0)) {
        throw DomainError(fmt::format("continuum amplitude must be non-negative, got {}", alpha));
    }
    check_length(correlation_length);
    const double slope = rate_coefficient(correlation_length, mass_proportional) * electron_seconds(target, exposure);
    if (!(slope > 0.0)) {
        throw DegenerateError("alpha(lambda) map is degenerate: zero exposure or no quasi-free electrons");
    }
    return alpha / slope;
}

const MaterialTable& MaterialTable::builtin() {
    static const MaterialTable table = [] {
        MaterialTable t;
        t.materials_ = {
            {"Ge", 72.630, 4.0},
            {"Si", 28.085, 4.0},
            {"Cu", 63.546, 1.0},
        };
        return t;
    }();
    return table;
}

MaterialTable MaterialTable::parse(std::istream& in) {
    MaterialTable t;
    std::string line;
    std::size_t line_no = 0;
    bool saw_version = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line.rfind("# xlim-materials v1", 0) == 0) saw_version = true;
            continue;
        }
        std::istringstream row(line);
        TargetMaterial m;
        if (!(row >> m.element >> m.molar_mass >> m.quasi_free_electrons_per_atom)) {
            throw ParseError("expected: element molar_mass_g_per_mol quasi_free_electrons", line_no);
        }
        try {
            m.validate();
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no);
        }
        t.materials_.push_back(std::move(m));
    }
    if (!saw_version) {
        throw ParseError("missing '# xlim-materials v1' version header", 0);
    }
    return t;
}

MaterialTable MaterialTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(fmt::format("cannot open material table '{}'", path.string()), 0);
    }
    return parse(in);
}

const TargetMaterial& MaterialTable::find(std::string_view element) const {
    for (const auto& m : materials_) {
        if (m.element == element) return m;
    }
    throw ConfigError(fmt::format("unknown material '{}'", element));
}

}  // namespace xlim
