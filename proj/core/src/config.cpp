#include "xlim/config.hpp"

#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "xlim/error.hpp"
#include "xlim/hash.hpp"

namespace xlim {

using nlohmann::json;

namespace {

double number(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(fmt::format("missing key '{}'", key));
    if (!j.at(key).is_number()) throw ConfigError(fmt::format("key '{}' must be a number", key));
    return j.at(key).get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? number(j, key) : fallback;
}

std::vector<std::string> free_list(const json& c) {
    if (!c.contains("free")) return {};
    const auto& f = c.at("free");
    if (f.is_string()) return {f.get<std::string>()};
    if (!f.is_array()) throw ConfigError("'free' must be a string or an array of strings");
    return f.get<std::vector<std::string>>();
}

FactorRange parse_factor(const json& f) {
    if (f.contains("factor")) return FactorRange::scalar(number(f, "factor"));
    return {number(f, "low"), number(f, "high")};
}

std::vector<NamedFactor> parse_factors(const json& arr, const char* what) {
    if (!arr.is_array()) throw ConfigError(fmt::format("budget '{}' must be an array", what));
    std::vector<NamedFactor> out;
    for (const auto& f : arr) {
        out.push_back({f.value("name", std::string(what)), parse_factor(f)});
    }
    return out;
}

}  // namespace

std::string RunConfig::hash() const { return content_hash(document.dump()); }

std::filesystem::path RunConfig::path(const std::string& key) const {
    if (!document.contains(key) || !document.at(key).is_string()) {
        throw ConfigError(fmt::format("missing path '{}'", key));
    }
    std::filesystem::path p = document.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
}

RunConfig resolve_config(json document, std::filesystem::path base_dir, const ConfigOverrides& overrides) {
    if (!document.is_object()) throw ConfigError("configuration must be a JSON object");
    if (overrides.seed) document["seed"] = *overrides.seed;
    if (overrides.cl) document["cl"] = *overrides.cl;
    if (overrides.kind) document["kind"] = *overrides.kind;

    RunConfig cfg;
    cfg.base_dir = std::move(base_dir);
    cfg.kind = document.value("kind", std::string{});
    if (document.contains("seed")) {
        if (!document.at("seed").is_number_unsigned() && !document.at("seed").is_number_integer()) {
            throw ConfigError("'seed' must be a non-negative integer");
        }
        cfg.seed = document.at("seed").get<std::uint64_t>();
    } else {
        document["seed"] = 0;
    }
    cfg.cl = number_or(document, "cl", 0.95);
    if (!(cfg.cl > 0.0 && cfg.cl < 1.0)) throw ConfigError(fmt::format("'cl' must be in (0, 1), got {}", cfg.cl));
    document["cl"] = cfg.cl;
    cfg.statistic = statistic_from_string(document.value("statistic", std::string("chi2")));
    cfg.document = std::move(document);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return resolve_config(std::move(doc), path.parent_path(), overrides);
}

EnergyGrid parse_grid(const json& j) {
    if (j.contains("edges_keV")) return EnergyGrid(j.at("edges_keV").get<std::vector<double>>());
    const double bins = number(j, "bins");
    if (!(bins >= 1.0) || bins != static_cast<double>(static_cast<std::size_t>(bins))) {
        throw ConfigError("'bins' must be a positive integer");
    }
    return EnergyGrid::uniform(number(j, "low_keV"), number(j, "high_keV"), static_cast<std::size_t>(bins));
}

DetectorResponse parse_response(const json& j) {
    DetectorResponse r;
    r.fwhm_ref = number(j, "fwhm_ref_keV");
    r.reference_energy = number_or(j, "reference_energy_keV", 8.0);
    const auto model = j.value("resolution_model", std::string("constant"));
    if (model == "constant") {
        r.resolution_model = ResolutionModel::constant;
    } else if (model == "sqrt") {
        r.resolution_model = ResolutionModel::sqrt_scaling;
    } else {
        throw ConfigError(fmt::format("unknown resolution_model '{}'", model));
    }
    if (j.contains("efficiency")) {
        const auto& e = j.at("efficiency");
        r.efficiency = e.is_array() ? e.get<std::vector<double>>() : std::vector<double>{e.get<double>()};
    }
    r.validate();
    return r;
}

Exposure parse_exposure(const json& j) { return Exposure(number(j, "mass_kg"), number(j, "live_time_day")); }

PepTransition parse_transition(const json& j) {
    PepTransition t;
    t.normal_energy = number_or(j, "normal_energy_keV", t.normal_energy);
    t.shift = number_or(j, "shift_keV", t.shift);
    t.validate();
    return t;
}

PepRunConfig parse_pep_run(const json& j) {
    PepRunConfig c;
    c.current = number(j, "current_A");
    c.duration = number(j, "duration_s");
    if (j.contains("target_length_m")) {
        c.interactions_per_electron = interactions_from_length(number(j, "target_length_m"),
                                                               number(j, "mean_free_path_m"));
    } else {
        c.interactions_per_electron = number_or(j, "interactions_per_electron", 1.0);
    }
    c.capture_cascade_factor = number_or(j, "capture_cascade_factor", c.capture_cascade_factor);
    c.geometric_acceptance = number_or(j, "geometric_acceptance", c.geometric_acceptance);
    c.detection_efficiency = number_or(j, "detection_efficiency", c.detection_efficiency);
    c.validate();
    return c;
}

ImprovementBudget parse_budget(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "vip2") return vip2_budget();
        throw ConfigError(fmt::format("unknown built-in budget '{}'", j.get<std::string>()));
    }
    ImprovementBudget b{parse_factors(j.at("linear"), "linear"), parse_factors(j.at("background"), "background")};
    b.validate();
    return b;
}

ParsedComponents parse_components(const json& array, std::size_t component_offset, std::size_t parameter_offset) {
    if (!array.is_array()) throw ConfigError("'components' must be an array");
    ParsedComponents out;
    for (std::size_t idx = 0; idx < array.size(); ++idx) {
        const auto& c = array[idx];
        const std::size_t comp = component_offset + idx;
        const auto type = c.value("type", std::string{});
        const auto frees = free_list(c);
        const auto signal = c.value("signal", std::string{});
        bool signal_bound = false;
        auto add = [&](const std::string& key, ParameterField field, std::size_t coefficient, double lower) {
            FitParameter p{fmt::format("{}.{}", c.value("name", fmt::format("c{}", comp)), key), comp, field,
                           coefficient};
            p.lower = lower;
            if (c.contains("steps") && c.at("steps").contains(key)) p.step = c.at("steps").at(key).get<double>();
            if (!signal.empty() && signal == key) {
                if (out.signal) throw ConfigError("more than one signal parameter declared");
                out.signal = parameter_offset + out.parameters.size();
                signal_bound = true;
                p.lower = std::max(p.lower, 0.0);
            }
            out.parameters.push_back(std::move(p));
        };

        if (type == "gaussian_line") {
            out.components.emplace_back(GaussianLine{number(c, "centroid_keV"), number_or(c, "amplitude", 0.0)});
            for (const auto& f : frees) {
                if (f == "amplitude") {
                    add(f, ParameterField::line_amplitude, 0, 0.0);
                } else if (f == "centroid") {
                    add(f, ParameterField::line_centroid, 0, -std::numeric_limits<double>::infinity());
                } else {
                    throw ConfigError(fmt::format("gaussian_line has no free field '{}'", f));
                }
            }
        } else if (type == "one_over_e") {
            out.components.emplace_back(OneOverEContinuum{number_or(c, "alpha", 0.0)});
            for (const auto& f : frees) {
                if (f != "alpha") throw ConfigError(fmt::format("one_over_e has no free field '{}'", f));
                add(f, ParameterField::continuum_alpha, 0, 0.0);
            }
        } else if (type == "polynomial") {
            PolynomialBackground poly{c.at("coefficients").get<std::vector<double>>()};
            const std::size_t nc = poly.coefficients.size();
            out.components.emplace_back(std::move(poly));
            for (const auto& f : frees) {
                if (f.size() < 2 || f[0] != 'c') throw ConfigError(fmt::format("polynomial free field '{}' must be cN", f));
                const auto k = static_cast<std::size_t>(std::stoul(f.substr(1)));
                if (k >= nc) throw ConfigError(fmt::format("polynomial has no coefficient {}", f));
                add(f, ParameterField::polynomial_coefficient, k, -std::numeric_limits<double>::infinity());
            }
        } else {
            throw ConfigError(fmt::format("unknown component type '{}'", type));
        }
        if (!signal.empty() && !signal_bound) {
            throw ConfigError(fmt::format("signal '{}' must also be listed as free", signal));
        }
    }
    return out;
}

}  // namespace xlim
