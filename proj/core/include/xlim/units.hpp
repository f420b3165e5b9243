#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xlim {

/// Frozen physical constants. Energies are rest energies in keV, time in s,
/// length in m.
///
/// Charge convention: the emission-rate formula is written in Gaussian units,
/// so e² = α_em·ħc carries units keV·m. `electron_charge_squared()` returns that
/// product and is the only route by which e² enters the toolkit.
struct PhysicalConstants {
    std::string_view version;
    double electron_mass;             // keV
    double nucleon_mass;              // keV (proton)
    double fine_structure;            // α_em, dimensionless
    double hbar;                      // keV·s
    double hbar_c;                    // keV·m
    double elementary_charge;         // C
    double avogadro;                  // 1/mol
    double correlation_length_default;  // m
    double lambda_qmsl_reference;     // s⁻¹
    double lambda_fu_corrected;       // s⁻¹, reference only
    double lambda_adler_reference;    // s⁻¹, comparison line only

    /// e² in Gaussian units, keV·m.
    double electron_charge_squared() const { return fine_structure * hbar_c; }
};

/// CODATA 2018 values.
const PhysicalConstants& constants();

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kEvPerKev = 1000.0;

double fwhm_to_sigma(double fwhm);
double sigma_to_fwhm(double sigma);

inline double kev_to_ev(double kev) { return kev * kEvPerKev; }
inline double ev_to_kev(double ev) { return ev / kEvPerKev; }
inline double days_to_seconds(double days) { return days * kSecondsPerDay; }
inline double seconds_to_days(double seconds) { return seconds / kSecondsPerDay; }

/// (m_e / m_N)², the suppression applied to electron emission in the
/// mass-proportional collapse model.
double mass_ratio_squared();

/// Detector mass times live time.
class Exposure {
public:
    Exposure() = default;
    Exposure(double mass_kg, double live_time_day);

    double mass_kg() const { return mass_kg_; }
    double live_time_day() const { return live_time_day_; }
    /// kg·day
    double product() const { return mass_kg_ * live_time_day_; }

    friend bool operator==(const Exposure&, const Exposure&) = default;

private:
    double mass_kg_ = 0.0;
    double live_time_day_ = 0.0;
};

/// Ordered (key, "value unit") rows for the constants audit dump.
std::vector<std::pair<std::string, std::string>> constants_table();

}  // namespace xlim
