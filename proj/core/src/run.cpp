#include "xlim/run.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "xlim/csl.hpp"
#include "xlim/limits.hpp"
#include "xlim/pep.hpp"
#include "xlim/projection.hpp"
#include "xlim/spectrum_file.hpp"
#include "xlim/units.hpp"

namespace xlim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json quantity(double value, std::string_view unit) {
    ordered_json q;
    q["value"] = value;
    q["unit"] = unit;
    return q;
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

ordered_json header(std::string_view command, const RunConfig& cfg) {
    ordered_json r;
    r["format"] = "xlim-report v1";
    r["command"] = command;
    r["kind"] = cfg.kind;
    r["config_hash"] = cfg.hash();
    r["seed"] = cfg.seed;
    r["constants_version"] = constants().version;
    return r;
}

ordered_json exposure_json(const Exposure& e) {
    ordered_json j;
    j["mass"] = quantity(e.mass_kg(), "kg");
    j["live_time"] = quantity(e.live_time_day(), "d");
    j["exposure"] = quantity(e.product(), "kg*d");
    return j;
}

ordered_json limit_json(const LimitResult& l, std::string_view unit) {
    ordered_json j;
    j["parameter"] = l.parameter;
    j["method"] = l.method;
    j["confidence_level"] = l.confidence_level;
    j["upper_bound"] = quantity(l.upper_bound, unit);
    j["best_fit"] = quantity(l.best_fit, unit);
    j["statistic_min"] = l.statistic_min;
    j["scan_points"] = l.scan.size();
    return j;
}

std::string scan_table(const LimitResult& l, std::string_view header_line) {
    std::string out = fmt::format("# {}\n", header_line);
    for (const auto& p : l.scan) out += fmt::format("{} {}\n", p.value, p.statistic);
    return out;
}

DetectorResponse response_for(const RunConfig& cfg, const std::optional<DetectorResponse>& from_file) {
    if (cfg.document.contains("response")) return parse_response(cfg.document.at("response"));
    if (from_file) return *from_file;
    return DetectorResponse{};
}

// ---------------------------------------------------------------------------

RunOutput simulate(const RunConfig& cfg) {
    const auto& doc = cfg.document;
    auto [grid, model, meta, tag] = stage("config", [&] {
        const auto g = parse_grid(doc.at("grid"));
        const auto response = doc.contains("response") ? parse_response(doc.at("response")) : DetectorResponse{};
        auto parsed = parse_components(doc.value("components", json::array()));
        SimulationMeta m{doc.contains("exposure") ? parse_exposure(doc.at("exposure")) : Exposure{},
                         doc.value("acquisition_days", 0.0)};
        const auto t = spectrum_tag_from_string(doc.value("tag", std::string("simulated")));
        return std::tuple{g, SpectralModel{parsed.components, response}, m, t};
    });
    auto spectrum = stage("simulate", [&] { return simulate_spectrum(model, grid, cfg.seed, meta); });
    spectrum.tag = tag;
    const auto expected = stage("simulate", [&] { return predict_counts(model, grid); });

    RunOutput out;
    out.report = header("simulate", cfg);
    const auto name = doc.value("output", std::string("spectrum.txt"));
    std::ostringstream file;
    write_spectrum(file, SpectrumFile{spectrum, model.response, cfg.hash()});
    out.artifacts.push_back({name, file.str()});

    std::string table = "# columns: low_keV high_keV expected_counts observed_counts\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        table += fmt::format("{} {} {} {}\n", grid.low(i), grid.high(i), expected[i], spectrum.counts[i]);
    }
    out.artifacts.push_back({"expected.tsv", table});

    auto& r = out.report;
    r["spectrum_file"] = name;
    r["tag"] = to_string(spectrum.tag);
    r["bins"] = grid.size();
    r["energy_range"] = {quantity(grid.min(), "keV"), quantity(grid.max(), "keV")};
    r["exposure"] = exposure_json(spectrum.exposure);
    r["acquisition_time"] = quantity(spectrum.acquisition_days, "d");
    r["expected_total"] = quantity(std::accumulate(expected.begin(), expected.end(), 0.0), "counts");
    r["observed_total"] = quantity(static_cast<double>(spectrum.total()), "counts");
    return out;
}

RunOutput subtract(const RunConfig& cfg) {
    const auto on = stage("load", [&] { return load_spectrum_file(cfg.path("on")); });
    const auto off = stage("load", [&] { return load_spectrum_file(cfg.path("off")); });
    const auto residual = stage("subtract", [&] { return subtract_spectra(on.spectrum, off.spectrum); });

    RunOutput out;
    out.report = header("subtract", cfg);
    std::ostringstream table;
    write_residual(table, residual, cfg.hash());
    out.artifacts.push_back({"residual.tsv", table.str()});

    double net = 0.0, var = 0.0;
    for (std::size_t i = 0; i < residual.values.size(); ++i) {
        net += residual.values[i];
        var += residual.sigma[i] * residual.sigma[i];
    }
    auto& r = out.report;
    r["on_time"] = quantity(on.spectrum.acquisition_days, "d");
    r["off_time"] = quantity(off.spectrum.acquisition_days, "d");
    r["time_ratio"] = residual.time_ratio;
    r["bins"] = residual.grid.size();
    r["net_counts"] = quantity(net, "counts");
    r["net_counts_sigma"] = quantity(std::sqrt(var), "counts");
    return out;
}

FitProblem problem_from(const RunConfig& cfg, const SpectrumFile& file) {
    const auto& doc = cfg.document;
    auto parsed = parse_components(doc.at("components"));
    FitProblem problem{Observations::from_spectrum(file.spectrum),
                       SpectralModel{parsed.components, response_for(cfg, file.response)},
                       parsed.parameters,
                       0,
                       cfg.statistic,
                       cfg.seed};
    if (parsed.signal) {
        problem.signal = *parsed.signal;
    } else {
        const auto it = std::find_if(problem.parameters.begin(), problem.parameters.end(),
                                     [](const FitParameter& p) { return p.lower >= 0.0; });
        if (it == problem.parameters.end()) {
            throw ConfigError("no signal parameter declared and no non-negative amplitude to default to");
        }
        problem.signal = static_cast<std::size_t>(it - problem.parameters.begin());
    }
    return problem;
}

RunOutput fit(const RunConfig& cfg) {
    const auto file = stage("load", [&] { return load_spectrum_file(cfg.path("spectrum")); });
    const auto problem = stage("config", [&] { return problem_from(cfg, file); });
    const auto result = stage("fit", [&] { return fit_minimize(problem); });

    RunOutput out;
    out.report = header("fit", cfg);
    auto& r = out.report;
    r["statistic"] = to_string(problem.statistic);
    r["statistic_min"] = result.statistic;
    r["bins"] = problem.data.grid.size();
    r["ndf"] = static_cast<long long>(problem.data.grid.size()) - static_cast<long long>(problem.parameters.size());
    ordered_json params = ordered_json::array();
    for (std::size_t i = 0; i < problem.parameters.size(); ++i) {
        const auto& p = problem.parameters[i];
        std::string unit = "counts";
        if (p.field == ParameterField::line_centroid) unit = "keV";
        if (p.field == ParameterField::continuum_alpha) unit = "counts*keV";
        if (p.field == ParameterField::polynomial_coefficient) unit = fmt::format("counts/keV^{}", p.coefficient + 1);
        ordered_json j;
        j["name"] = p.name;
        j["value"] = result.values[i];
        j["error"] = std::isfinite(result.errors[i]) ? ordered_json(result.errors[i]) : ordered_json(nullptr);
        j["unit"] = unit;
        params.push_back(j);
    }
    r["parameters"] = params;
    r["signal_at_boundary"] = result.signal_at_boundary;

    const auto expected = predict_counts(problem.apply(result.values), problem.data.grid);
    std::string table = "# columns: low_keV high_keV observed_counts fitted_counts\n";
    for (std::size_t i = 0; i < expected.size(); ++i) {
        table += fmt::format("{} {} {} {}\n", problem.data.grid.low(i), problem.data.grid.high(i),
                             problem.data.values[i], expected[i]);
    }
    out.artifacts.push_back({"fit.tsv", table});
    return out;
}

RunOutput limit_csl(const RunConfig& cfg) {
    const auto& doc = cfg.document;
    const auto file = stage("load", [&] { return load_spectrum_file(cfg.path("spectrum")); });
    const auto& spectrum = file.spectrum;

    const auto [target, a] = stage("config", [&] {
        const auto csl = doc.value("csl", json::object());
        const auto element = csl.value("material", std::string("Ge"));
        TargetMaterial t = csl.contains("materials_file")
                               ? MaterialTable::load(cfg.base_dir / csl.at("materials_file").get<std::string>()).find(element)
                               : MaterialTable::builtin().find(element);
        if (csl.contains("quasi_free_electrons")) t.quasi_free_electrons_per_atom = csl.at("quasi_free_electrons").get<double>();
        t.validate();
        return std::pair{t, csl.value("correlation_length_m", constants().correlation_length_default)};
    });

    FitProblem problem = stage("config", [&] {
        const auto& grid = spectrum.grid;
        const double total = static_cast<double>(spectrum.total());
        const double span = grid.max() - grid.min();
        json background = doc.contains("background")
                              ? doc.at("background")
                              : json::array({{{"type", "polynomial"},
                                              {"name", "background"},
                                              {"coefficients", {total / span, 0.0}},
                                              {"free", {"c0", "c1"}}}});
        auto parsed = parse_components(background, 1, 1);
        FitProblem p{Observations::from_spectrum(spectrum),
                     SpectralModel{{OneOverEContinuum{0.0}}, response_for(cfg, file.response)},
                     {signal_parameter("alpha", 0, ParameterField::continuum_alpha)},
                     0,
                     cfg.statistic,
                     cfg.seed};
        p.parameters[0].step = std::max(1.0, std::sqrt(std::max(total, 1.0)) / std::log(grid.max() / grid.min()));
        for (auto& c : parsed.components) p.model.components.push_back(std::move(c));
        for (auto& q : parsed.parameters) p.parameters.push_back(std::move(q));
        return p;
    });

    const auto alpha = stage("limit", [&] { return bayesian_upper_limit(problem, cfg.cl); });
    const auto [lam, lam_mp] = stage("csl", [&] {
        const auto& e = spectrum.exposure;
        const double per_alpha = lambda_from_alpha(1.0, target, e, a, false);
        const double per_alpha_mp = lambda_from_alpha(1.0, target, e, a, true);
        return std::pair{scale_limit(alpha, per_alpha, "lambda"),
                         scale_limit(alpha, per_alpha_mp, "lambda_mass_proportional")};
    });

    RunOutput out;
    out.report = header("limit", cfg);
    auto& r = out.report;
    r["spectrum_file"] = doc.at("spectrum");
    r["spectrum_config_hash"] = file.config_hash;
    r["energy_range"] = {quantity(spectrum.grid.min(), "keV"), quantity(spectrum.grid.max(), "keV")};
    r["exposure"] = exposure_json(spectrum.exposure);
    ordered_json mat;
    mat["element"] = target.element;
    mat["molar_mass"] = quantity(target.molar_mass, "g/mol");
    mat["quasi_free_electrons_per_atom"] = target.quasi_free_electrons_per_atom;
    mat["electron_seconds"] = quantity(electron_seconds(target, spectrum.exposure), "electron*s");
    r["target"] = mat;
    r["correlation_length"] = quantity(a, "m");
    r["prior"] = "flat on alpha >= 0; background profiled";
    r["alpha_limit"] = limit_json(alpha, "counts*keV");
    r["lambda_limit"] = limit_json(lam, "s^-1");
    r["lambda_limit_mass_proportional"] = limit_json(lam_mp, "s^-1");
    r["mass_mode_ratio"] = lam_mp.upper_bound / lam.upper_bound;
    ordered_json refs;
    refs["lambda_qmsl"] = quantity(constants().lambda_qmsl_reference, "s^-1");
    refs["lambda_fu_corrected"] = quantity(constants().lambda_fu_corrected, "s^-1");
    refs["lambda_adler"] = quantity(constants().lambda_adler_reference, "s^-1");
    r["reference_lines"] = refs;

    std::string table = "# columns: alpha_counts_keV lambda_per_s lambda_mass_proportional_per_s deviance\n";
    for (std::size_t i = 0; i < alpha.scan.size(); ++i) {
        table += fmt::format("{} {} {} {}\n", alpha.scan[i].value, lam.scan[i].value, lam_mp.scan[i].value,
                             alpha.scan[i].statistic);
    }
    out.artifacts.push_back({"scan.tsv", table});
    return out;
}

RunOutput limit_pep(const RunConfig& cfg) {
    const auto& doc = cfg.document;
    const auto on = stage("load", [&] { return load_spectrum_file(cfg.path("on")); });
    const auto off = stage("load", [&] { return load_spectrum_file(cfg.path("off")); });
    const auto residual = stage("subtract", [&] { return subtract_spectra(on.spectrum, off.spectrum); });
    const auto [transition, response, run, options] = stage("config", [&] {
        PepLimitOptions o;
        o.window_half_width_fwhm = doc.value("window_half_width_fwhm", o.window_half_width_fwhm);
        return std::tuple{parse_transition(doc.value("transition", json::object())), response_for(cfg, on.response),
                          parse_pep_run(doc.at("run")), o};
    });
    const auto counts = stage("limit", [&] { return pep_counts_limit(residual, transition, response, cfg.cl, options); });
    const auto beta = stage("pep", [&] {
        const double yield = run.yield();
        if (!(yield > 0.0)) throw DegenerateError("PEP yield chain is zero");
        return scale_limit(counts, 1.0 / yield, "beta2_over_2");
    });
    const auto [first, last] = pep_window(residual.grid, transition, response, options.window_half_width_fwhm);

    RunOutput out;
    out.report = header("limit", cfg);
    auto& r = out.report;
    r["on_time"] = quantity(on.spectrum.acquisition_days, "d");
    r["off_time"] = quantity(off.spectrum.acquisition_days, "d");
    r["time_ratio"] = residual.time_ratio;
    r["normal_energy"] = quantity(transition.normal_energy, "keV");
    r["forbidden_energy"] = quantity(transition.forbidden_energy(), "keV");
    r["fwhm_at_forbidden"] = quantity(response.fwhm_at(transition.forbidden_energy()), "keV");
    r["window"] = {quantity(residual.grid.low(first), "keV"), quantity(residual.grid.high(last - 1), "keV")};
    ordered_json chain;
    chain["current"] = quantity(run.current, "A");
    chain["duration"] = quantity(run.duration, "s");
    chain["new_electrons"] = quantity(run.new_electron_count(), "electrons");
    chain["interactions_per_electron"] = run.interactions_per_electron;
    chain["capture_cascade_factor"] = run.capture_cascade_factor;
    chain["geometric_acceptance"] = run.geometric_acceptance;
    chain["detection_efficiency"] = run.detection_efficiency;
    chain["yield"] = quantity(run.yield(), "counts");
    r["yield_chain"] = chain;
    r["counts_limit"] = limit_json(counts, "counts");
    r["beta2_over_2_limit"] = limit_json(beta, "1");

    std::string table = "# columns: forbidden_line_counts beta2_over_2 deviance\n";
    for (std::size_t i = 0; i < counts.scan.size(); ++i) {
        table += fmt::format("{} {} {}\n", counts.scan[i].value, beta.scan[i].value, counts.scan[i].statistic);
    }
    out.artifacts.push_back({"scan.tsv", table});
    return out;
}

RunOutput limit_signal(const RunConfig& cfg) {
    const auto file = stage("load", [&] { return load_spectrum_file(cfg.path("spectrum")); });
    const auto problem = stage("config", [&] { return problem_from(cfg, file); });
    const auto limit = stage("limit", [&] { return bayesian_upper_limit(problem, cfg.cl); });
    RunOutput out;
    out.report = header("limit", cfg);
    const auto& p = problem.parameters[problem.signal];
    const std::string unit = p.field == ParameterField::continuum_alpha ? "counts*keV" : "counts";
    out.report["signal_limit"] = limit_json(limit, unit);
    out.artifacts.push_back({"scan.tsv", scan_table(limit, fmt::format("columns: {} deviance", p.name))});
    return out;
}

std::string format_factor(const FactorRange& f) {
    if (f.is_scalar()) return fmt::format("{:.4g}", f.low);
    return fmt::format("{:.4g} - {:.4g}", f.low, f.high);
}

ordered_json range_json(const FactorRange& f) {
    ordered_json j;
    j["low"] = f.low;
    j["high"] = f.high;
    j["unit"] = "1";
    return j;
}

RunOutput project(const RunConfig& cfg) {
    const auto budget = stage("config", [&] { return parse_budget(cfg.document.value("budget", json("vip2"))); });
    const auto [linear, bg, overall] = stage("project", [&] {
        return std::tuple{total_linear_factor(budget), background_reduction(budget), overall_improvement(budget)};
    });
    RunOutput out;
    out.report = header("project", cfg);
    auto& r = out.report;
    r["combination_rule"] = "linear * sqrt(background reduction)";
    r["total_linear_factor"] = range_json(linear);
    r["background_reduction"] = range_json(bg);
    r["overall_improvement"] = range_json(overall);
    r["rows"] = {
        fmt::format("total linear factor {}", format_factor(linear)),
        fmt::format("background reduction {}", format_factor(bg)),
        fmt::format("overall improvement {}", format_factor(overall)),
    };
    std::string table;
    for (const auto& f : budget.linear) table += fmt::format("linear\t{}\t{}\n", f.name, format_factor(f.factor));
    for (const auto& f : budget.background) {
        table += fmt::format("background\t{}\t{}\n", f.name, format_factor(f.factor));
    }
    table += fmt::format("total linear factor\t{}\n", format_factor(linear));
    table += fmt::format("background reduction\t{}\n", format_factor(bg));
    table += fmt::format("overall improvement\t{}\n", format_factor(overall));
    out.artifacts.push_back({"budget.tsv", table});
    return out;
}

RunOutput constants_dump(const RunConfig& cfg) {
    RunOutput out;
    out.report = header("constants", cfg);
    ordered_json table;
    std::string text;
    for (const auto& [k, v] : constants_table()) {
        table[k] = v;
        text += fmt::format("{:<34} {}\n", k, v);
    }
    out.report["constants"] = table;
    out.artifacts.push_back({"constants.txt", text});
    return out;
}

}  // namespace

std::string RunOutput::report_text() const { return report.dump(2) + "\n"; }

RunOutput run_command(std::string_view command, const RunConfig& config) {
    if (command == "simulate") return simulate(config);
    if (command == "subtract") return subtract(config);
    if (command == "fit") return fit(config);
    if (command == "project") return project(config);
    if (command == "constants") return constants_dump(config);
    if (command == "limit") {
        if (config.kind == "csl") return limit_csl(config);
        if (config.kind == "pep") return limit_pep(config);
        if (config.kind == "signal" || config.kind.empty()) return limit_signal(config);
        throw StageError("config", fmt::format("unknown limit kind '{}' (expected csl, pep or signal)", config.kind));
    }
    throw StageError("cli", fmt::format("unknown command '{}'", command));
}

void write_outputs(const std::filesystem::path& out_dir, const RunOutput& output) {
    stage("write", [&] {
        std::filesystem::create_directories(out_dir);
        auto write = [&](const std::string& name, const std::string& content) {
            std::ofstream f(out_dir / name, std::ios::binary);
            if (!f) throw ConfigError(fmt::format("cannot write '{}'", (out_dir / name).string()));
            f << content;
        };
        write("report.json", output.report_text());
        for (const auto& a : output.artifacts) write(a.name, a.content);
        return 0;
    });
}

}  // namespace xlim
