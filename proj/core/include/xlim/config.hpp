#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xlim/fit.hpp"
#include "xlim/model.hpp"
#include "xlim/pep.hpp"
#include "xlim/projection.hpp"
#include "xlim/spectrum.hpp"

namespace xlim {

/// A resolved run configuration: the JSON document after command-line
/// overrides, plus the directory relative paths are resolved against.
struct RunConfig {
    /// pep | csl | signal | project | simulate
    std::string kind;
    nlohmann::json document;
    std::filesystem::path base_dir;
    std::uint64_t seed = 0;
    double cl = 0.95;
    Statistic statistic = Statistic::chi2;

    /// Content hash of the canonical (key-sorted) resolved document.
    std::string hash() const;
    std::filesystem::path path(const std::string& key) const;
};

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> cl;
    std::optional<std::string> kind;
};

RunConfig resolve_config(nlohmann::json document, std::filesystem::path base_dir, const ConfigOverrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

EnergyGrid parse_grid(const nlohmann::json& j);
DetectorResponse parse_response(const nlohmann::json& j);
Exposure parse_exposure(const nlohmann::json& j);
PepTransition parse_transition(const nlohmann::json& j);
PepRunConfig parse_pep_run(const nlohmann::json& j);
ImprovementBudget parse_budget(const nlohmann::json& j);

/// Components plus the free parameters they declare:
///
///     {"type": "gaussian_line", "centroid_keV": 7.7, "amplitude": 100,
///      "free": ["amplitude", "centroid"], "signal": "amplitude"}
///     {"type": "one_over_e", "alpha": 10, "free": ["alpha"]}
///     {"type": "polynomial", "coefficients": [5, 0], "free": ["c0", "c1"]}
///
/// Amplitudes and α default to a lower bound of 0; centroids and polynomial
/// coefficients are unbounded.
struct ParsedComponents {
    std::vector<SpectralComponent> components;
    std::vector<FitParameter> parameters;
    std::optional<std::size_t> signal;
};

ParsedComponents parse_components(const nlohmann::json& array, std::size_t component_offset = 0,
                                  std::size_t parameter_offset = 0);

}  // namespace xlim
