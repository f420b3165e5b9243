#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "xlim/spectrum.hpp"
#include "xlim/units.hpp"

namespace xlim {

/// Collapse-model parameters: rate λ (s⁻¹) and correlation length a (m).
struct CslParams {
    double lambda = 0.0;
    double correlation_length = 1e-7;
    bool mass_proportional = false;

    void validate() const;
};

struct TargetMaterial {
    std::string element;
    double molar_mass = 0.0;  // g/mol
    double quasi_free_electrons_per_atom = 0.0;

    double atoms_per_kg() const;
    void validate() const;
};

/// Upper energy bound of the non-relativistic emission formula.
inline constexpr double kCslValidityLimit = 100.0;  // keV

/// Spontaneous photon emission rate of one free electron, photons/(s·keV):
///
///   dΓ/dE = e²·ħc·λ / (4π² a² (m_e c²)² E)
///
/// with e² = α_em·ħc (Gaussian units), times (m_e/m_N)² in the
/// mass-proportional variant. Throws DomainError for E <= 0 and ValidityError
/// for E >= 100 keV.
double csl_rate_density(double energy_keV, const CslParams& params);

/// Number of electron-seconds contributing for a target and exposure.
double electron_seconds(const TargetMaterial& target, const Exposure& exposure);

/// Expected counts per bin: ∫ dΓ/dE dE over each bin times the quasi-free
/// electron count and live time.
std::vector<double> expected_csl_counts(const CslParams& params, const TargetMaterial& target,
                                        const Exposure& exposure, const EnergyGrid& grid);

/// Continuum amplitude α (counts·keV) of the 1/E spectrum produced by λ.
double alpha_from_lambda(double lambda, const TargetMaterial& target, const Exposure& exposure,
                         double correlation_length = 1e-7, bool mass_proportional = false);

/// Inverse of alpha_from_lambda. Throws DegenerateError when the exposure or the
/// electron count is zero.
double lambda_from_alpha(double alpha, const TargetMaterial& target, const Exposure& exposure,
                         double correlation_length = 1e-7, bool mass_proportional = false);

/// Element → (molar mass, quasi-free electron default) table.
class MaterialTable {
public:
    static const MaterialTable& builtin();
    static MaterialTable load(const std::filesystem::path& path);
    static MaterialTable parse(std::istream& in);

    const TargetMaterial& find(std::string_view element) const;
    const std::vector<TargetMaterial>& materials() const { return materials_; }

private:
    std::vector<TargetMaterial> materials_;
};

}  // namespace xlim
