#include "xlim/spectrum_file.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "xlim/error.hpp"

namespace xlim {

namespace {

constexpr std::string_view kVersionLine = "# xlim-spectrum v1";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view text, std::size_t line, std::string_view what) {
    double v = 0.0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ParseError(fmt::format("cannot parse {} from '{}'", what, t), line);
    }
    return v;
}

std::int64_t parse_count(std::string_view text, std::size_t line, std::size_t row) {
    const auto t = trim(text);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ParseError(fmt::format("row {}: counts must be a non-negative integer, got '{}'", row, t), line);
    }
    if (v < 0) {
        throw ParseError(fmt::format("row {}: negative counts {}", row, v), line);
    }
    return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

void write_spectrum(std::ostream& out, const SpectrumFile& file) {
    const auto& s = file.spectrum;
    s.validate();
    out << kVersionLine << '\n';
    out << "# energy_unit: keV\n";
    out << "# counts_unit: counts\n";
    out << "# tag: " << to_string(s.tag) << '\n';
    out << fmt::format("# exposure_mass_kg: {}\n", s.exposure.mass_kg());
    out << fmt::format("# live_time_day: {}\n", s.exposure.live_time_day());
    out << fmt::format("# acquisition_days: {}\n", s.acquisition_days);
    if (file.response) {
        const auto& r = *file.response;
        out << fmt::format("# response_fwhm_ref_keV: {}\n", r.fwhm_ref);
        out << fmt::format("# response_reference_energy_keV: {}\n", r.reference_energy);
        out << "# response_resolution_model: "
            << (r.resolution_model == ResolutionModel::constant ? "constant" : "sqrt") << '\n';
        if (r.efficiency.size() == 1) {
            out << fmt::format("# response_efficiency: {}\n", r.efficiency.front());
        } else {
            out << "# response_efficiency: per-bin\n";
        }
    }
    if (!file.config_hash.empty()) out << "# config_hash: " << file.config_hash << '\n';
    const bool per_bin_eff = file.response && file.response->efficiency.size() > 1;
    out << (per_bin_eff ? "# columns: low_keV high_keV counts efficiency\n" : "# columns: low_keV high_keV counts\n");
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        out << fmt::format("{} {} {}", s.grid.low(i), s.grid.high(i), s.counts[i]);
        if (per_bin_eff) out << fmt::format(" {}", file.response->efficiency[i]);
        out << '\n';
    }
}

SpectrumFile read_spectrum(std::istream& in) {
    std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> header;
    std::vector<double> edges;
    std::vector<std::int64_t> counts;
    std::vector<double> efficiency;
    std::string line;
    std::size_t line_no = 0;
    std::size_t row = 0;
    bool saw_version = false;
    double energy_scale = 1.0;
    bool units_checked = false;

    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            if (view == kVersionLine) {
                saw_version = true;
                continue;
            }
            const auto body = trim(view.substr(1));
            const auto colon = body.find(':');
            if (colon == std::string_view::npos) continue;
            header[std::string(trim(body.substr(0, colon)))] = {std::string(trim(body.substr(colon + 1))), line_no};
            continue;
        }
        if (!saw_version) throw ParseError("missing '# xlim-spectrum v1' header before data", line_no);
        if (!units_checked) {
            const auto it = header.find("energy_unit");
            if (it == header.end()) throw ParseError("missing 'energy_unit' header", line_no);
            if (it->second.first == "keV") {
                energy_scale = 1.0;
            } else if (it->second.first == "eV") {
                energy_scale = 1.0 / kEvPerKev;
            } else {
                throw ParseError(fmt::format("unsupported energy unit '{}'", it->second.first), it->second.second);
            }
            if (header.find("counts_unit") == header.end()) throw ParseError("missing 'counts_unit' header", line_no);
            units_checked = true;
        }

        ++row;
        const auto fields = split_ws(view);
        if (fields.size() != 3 && fields.size() != 4) {
            throw ParseError(fmt::format("row {}: expected 'low high counts', got {} fields", row, fields.size()),
                             line_no);
        }
        const double lo = parse_double(fields[0], line_no, "bin low edge") * energy_scale;
        const double hi = parse_double(fields[1], line_no, "bin high edge") * energy_scale;
        if (!(hi > lo)) throw ParseError(fmt::format("row {}: bin high edge must exceed low edge", row), line_no);
        if (!edges.empty()) {
            if (lo < edges.back()) {
                throw ParseError(fmt::format("row {}: bin [{}, {}) overlaps the previous bin ending at {}", row, lo,
                                             hi, edges.back()),
                                 line_no);
            }
            if (lo > edges.back()) {
                throw ParseError(fmt::format("row {}: gap between {} and {}; bins must be contiguous", row,
                                             edges.back(), lo),
                                 line_no);
            }
        } else {
            edges.push_back(lo);
        }
        edges.push_back(hi);
        counts.push_back(parse_count(fields[2], line_no, row));
        if (fields.size() == 4) efficiency.push_back(parse_double(fields[3], line_no, "efficiency"));
    }
    if (!saw_version) throw ParseError("missing '# xlim-spectrum v1' header", 0);
    if (counts.empty()) throw ParseError("spectrum has no bins", line_no);
    if (!efficiency.empty() && efficiency.size() != counts.size()) {
        throw ParseError("efficiency column present on some rows only", 0);
    }

    auto get = [&](std::string_view key) -> const std::pair<std::string, std::size_t>* {
        const auto it = header.find(key);
        return it == header.end() ? nullptr : &it->second;
    };
    auto number = [&](std::string_view key, double fallback) {
        const auto* v = get(key);
        return v ? parse_double(v->first, v->second, key) : fallback;
    };

    SpectrumFile out{BinnedSpectrum{EnergyGrid(std::move(edges)), std::move(counts), {}, SpectrumTag::measured, 0.0},
                     std::nullopt, ""};
    try {
        out.spectrum.exposure = Exposure(number("exposure_mass_kg", 0.0), number("live_time_day", 0.0));
        out.spectrum.acquisition_days = number("acquisition_days", 0.0);
        if (const auto* tag = get("tag")) out.spectrum.tag = spectrum_tag_from_string(tag->first);
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what(), 0);
    }
    if (const auto* hash = get("config_hash")) out.config_hash = hash->first;

    if (const auto* fwhm = get("response_fwhm_ref_keV")) {
        DetectorResponse r;
        r.fwhm_ref = parse_double(fwhm->first, fwhm->second, "response FWHM");
        r.reference_energy = number("response_reference_energy_keV", 8.0);
        if (const auto* m = get("response_resolution_model")) {
            if (m->first == "constant") {
                r.resolution_model = ResolutionModel::constant;
            } else if (m->first == "sqrt") {
                r.resolution_model = ResolutionModel::sqrt_scaling;
            } else {
                throw ParseError(fmt::format("unknown resolution model '{}'", m->first), m->second);
            }
        }
        if (!efficiency.empty()) {
            r.efficiency = efficiency;
        } else {
            r.efficiency = {number("response_efficiency", 1.0)};
        }
        try {
            r.validate();
        } catch (const Error& e) {
            throw ParseError(e.what(), fwhm->second);
        }
        out.response = std::move(r);
    }
    return out;
}

void save_spectrum(const std::filesystem::path& path, const SpectrumFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(fmt::format("cannot write spectrum '{}'", path.string()), 0);
    write_spectrum(out, file);
}

SpectrumFile load_spectrum_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(fmt::format("cannot open spectrum '{}'", path.string()), 0);
    try {
        return read_spectrum(in);
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()), 0);
    }
}

BinnedSpectrum load_spectrum(const std::filesystem::path& path) { return load_spectrum_file(path).spectrum; }

void write_residual(std::ostream& out, const ResidualSpectrum& residual, const std::string& config_hash) {
    out << "# xlim-residual v1\n";
    out << "# energy_unit: keV\n";
    out << "# counts_unit: counts\n";
    out << fmt::format("# time_ratio: {}\n", residual.time_ratio);
    if (!config_hash.empty()) out << "# config_hash: " << config_hash << '\n';
    out << "# columns: low_keV high_keV residual_counts sigma_counts on_counts off_counts\n";
    for (std::size_t i = 0; i < residual.grid.size(); ++i) {
        out << fmt::format("{} {} {} {} {} {}\n", residual.grid.low(i), residual.grid.high(i), residual.values[i],
                           residual.sigma[i], i < residual.on_counts.size() ? residual.on_counts[i] : 0,
                           i < residual.off_counts.size() ? residual.off_counts[i] : 0);
    }
}

}  // namespace xlim
