#pragma once

#include <cstddef>
#include <cstdint>

#include "xlim/limits.hpp"
#include "xlim/model.hpp"
#include "xlim/spectrum.hpp"

namespace xlim {

/// Allowed Kα and the Pauli-forbidden 2p→1s line below it, keV.
struct PepTransition {
    double normal_energy = 8.0;
    double shift = 0.30;

    double forbidden_energy() const { return normal_energy - shift; }
    void validate() const;
};

/// Yield chain of a current-on run.
///
/// Expected forbidden-line counts are
///
///   β²/2 · N_new · N_int · f_cascade · acceptance · efficiency
///
/// where N_new = I·t/e is the number of electrons injected by the current and
/// N_int the number of atomic interactions each electron undergoes while
/// crossing the target (target length over mean free path; 1 leaves it out).
struct PepRunConfig {
    double current = 0.0;   // A
    double duration = 0.0;  // s, current-on live time
    double interactions_per_electron = 1.0;
    double capture_cascade_factor = 0.1;
    double geometric_acceptance = 1.0;
    double detection_efficiency = 1.0;

    double new_electron_count() const;
    /// Expected counts at β²/2 = 1.
    double yield() const;
    void validate() const;
};

/// Target length over electron mean free path.
double interactions_from_length(double target_length_m, double mean_free_path_m);

double pep_expected_counts(const PepRunConfig& config, double beta2_over_2);

struct PepLimitOptions {
    /// Half width of the fit window around the forbidden line, in units of the
    /// FWHM at that energy.
    double window_half_width_fwhm = 1.5;
    LimitOptions limit{};
};

/// Bins whose centres lie inside the forbidden-line window, [first, last).
std::pair<std::size_t, std::size_t> pep_window(const EnergyGrid& grid, const PepTransition& transition,
                                               const DetectorResponse& response, double half_width_fwhm);

/// Counts limit on a Gaussian line at the forbidden energy fitted to the
/// residual inside the window (free constant offset as nuisance).
LimitResult pep_counts_limit(const ResidualSpectrum& residual, const PepTransition& transition,
                             const DetectorResponse& response, double cl, const PepLimitOptions& options = {});

/// Bound on β²/2: the counts limit divided by the yield chain.
LimitResult pep_upper_limit(const ResidualSpectrum& residual, const PepTransition& transition,
                            const DetectorResponse& response, const PepRunConfig& config, double cl,
                            const PepLimitOptions& options = {});

struct PepEnsembleSpec {
    EnergyGrid grid;
    /// Expected current-on / current-off spectra (off already scaled to its own duration).
    SpectralModel on_truth;
    SpectralModel off_truth;
    double on_days = 1.0;
    double off_days = 1.0;
    PepTransition transition;
    DetectorResponse response;
    PepRunConfig run;
    /// Forbidden-line counts injected into `on_truth`, for coverage.
    double injected_counts = 0.0;
};

/// Simulate on/off → subtract → β²/2 limit, n times. Coverage counts bounds
/// at or above injected_counts / yield.
EnsembleResult run_pep_pseudo_experiments(const PepEnsembleSpec& spec, std::size_t n, double cl,
                                          std::uint64_t seed, const EnsembleOptions& options = {});

}  // namespace xlim
