#include "xlim/units.hpp"

#include <cmath>

#include <fmt/format.h>

#include "xlim/error.hpp"

namespace xlim {

namespace {

// 2·sqrt(2·ln 2)
const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::log(2.0));

const PhysicalConstants kCodata2018{
    .version = "CODATA-2018/v1",
    .electron_mass = 510.99895000,
    .nucleon_mass = 938272.08816,
    .fine_structure = 7.2973525693e-3,
    .hbar = 6.582119569e-19,
    .hbar_c = 1.973269804e-10,
    .elementary_charge = 1.602176634e-19,
    .avogadro = 6.02214076e23,
    .correlation_length_default = 1e-7,
    .lambda_qmsl_reference = 1e-16,
    .lambda_fu_corrected = 2e-16,
    .lambda_adler_reference = 1e-8,
};

std::string fmt_value(double v, std::string_view unit) {
    return fmt::format("{:.12g} {}", v, unit);
}

}  // namespace

const PhysicalConstants& constants() { return kCodata2018; }

double fwhm_to_sigma(double fwhm) {
    if (!(fwhm > 0.0) || !std::isfinite(fwhm)) {
        throw DomainError(fmt::format("fwhm must be positive, got {}", fwhm));
    }
    return fwhm / kFwhmPerSigma;
}

double sigma_to_fwhm(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError(fmt::format("sigma must be positive, got {}", sigma));
    }
    return sigma * kFwhmPerSigma;
}

double mass_ratio_squared() {
    const auto& c = constants();
    const double r = c.electron_mass / c.nucleon_mass;
    return r * r;
}

Exposure::Exposure(double mass_kg, double live_time_day)
    : mass_kg_(mass_kg), live_time_day_(live_time_day) {
    if (!(mass_kg >= 0.0) || !(live_time_day >= 0.0) || !std::isfinite(mass_kg) ||
        !std::isfinite(live_time_day)) {
        throw DomainError(fmt::format("exposure needs non-negative mass and live time, got {} kg, {} d",
                                      mass_kg, live_time_day));
    }
}

std::vector<std::pair<std::string, std::string>> constants_table() {
    const auto& c = constants();
    return {
        {"version", std::string(c.version)},
        {"electron_mass", fmt_value(c.electron_mass, "keV")},
        {"nucleon_mass", fmt_value(c.nucleon_mass, "keV")},
        {"nucleon_to_electron_mass_ratio", fmt_value(c.nucleon_mass / c.electron_mass, "1")},
        {"mass_ratio_squared", fmt_value(mass_ratio_squared(), "1")},
        {"fine_structure", fmt_value(c.fine_structure, "1")},
        {"hbar", fmt_value(c.hbar, "keV*s")},
        {"hbar_c", fmt_value(c.hbar_c, "keV*m")},
        {"electron_charge_squared_gaussian", fmt_value(c.electron_charge_squared(), "keV*m")},
        {"elementary_charge", fmt_value(c.elementary_charge, "C")},
        {"avogadro", fmt_value(c.avogadro, "mol^-1")},
        {"correlation_length_default", fmt_value(c.correlation_length_default, "m")},
        {"lambda_qmsl_reference", fmt_value(c.lambda_qmsl_reference, "s^-1")},
        {"lambda_fu_corrected", fmt_value(c.lambda_fu_corrected, "s^-1")},
        {"lambda_adler_reference", fmt_value(c.lambda_adler_reference, "s^-1")},
        {"seconds_per_day", fmt_value(kSecondsPerDay, "s/d")},
    };
}

}  // namespace xlim
