#include "xlim/spectrum_file.hpp"

#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "xlim/error.hpp"

namespace xlim {
namespace {

SpectrumFile random_file(std::mt19937_64& rng, bool with_response, bool per_bin) {
    std::uniform_real_distribution<double> u(0.001, 3.0);
    std::uniform_int_distribution<std::int64_t> c(0, 1000000);
    std::uniform_int_distribution<std::size_t> nb(1, 40);
    const std::size_t n = nb(rng);
    std::vector<double> edges{u(rng)};
    for (std::size_t i = 0; i < n; ++i) edges.push_back(edges.back() + u(rng));
    std::vector<std::int64_t> counts(n);
    for (auto& v : counts) v = c(rng);
    SpectrumFile f{BinnedSpectrum{EnergyGrid(edges), counts, Exposure(u(rng) * 30.0, u(rng)), SpectrumTag::current_on,
                                  u(rng)},
                   std::nullopt, "0123456789abcdef"};
    if (with_response) {
        DetectorResponse r;
        r.fwhm_ref = u(rng) * 0.1;
        r.resolution_model = ResolutionModel::sqrt_scaling;
        if (per_bin) {
            r.efficiency.clear();
            for (std::size_t i = 0; i < n; ++i) r.efficiency.push_back(u(rng) / 3.0);
        } else {
            r.efficiency = {0.75};
        }
        f.response = r;
    }
    return f;
}

TEST(SpectrumFile, RoundTripPreservesEverything) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto f = random_file(rng, trial % 3 != 0, trial % 3 == 2);
        std::stringstream ss;
        write_spectrum(ss, f);
        const auto back = read_spectrum(ss);
        EXPECT_EQ(back.spectrum.grid, f.spectrum.grid);
        EXPECT_EQ(back.spectrum.counts, f.spectrum.counts);
        EXPECT_EQ(back.spectrum.exposure, f.spectrum.exposure);
        EXPECT_EQ(back.spectrum.tag, f.spectrum.tag);
        EXPECT_EQ(back.spectrum.acquisition_days, f.spectrum.acquisition_days);
        EXPECT_EQ(back.config_hash, f.config_hash);
        ASSERT_EQ(back.response.has_value(), f.response.has_value());
        if (f.response) {
            EXPECT_EQ(back.response->fwhm_ref, f.response->fwhm_ref);
            EXPECT_EQ(back.response->resolution_model, f.response->resolution_model);
            EXPECT_EQ(back.response->efficiency, f.response->efficiency);
        }
        // Writing again is byte-identical.
        std::stringstream again;
        write_spectrum(again, back);
        EXPECT_EQ(again.str(), ss.str());
    }
}

TEST(SpectrumFile, ExposureHeader) {
    std::istringstream in(
        "# xlim-spectrum v1\n# energy_unit: keV\n# counts_unit: counts\n# tag: measured\n"
        "# exposure_mass_kg: 8\n# live_time_day: 10\n# acquisition_days: 10\n"
        "4.5 5.5 12\n5.5 6.5 9\n");
    const auto s = read_spectrum(in).spectrum;
    EXPECT_DOUBLE_EQ(s.exposure.product(), 80.0);
    EXPECT_EQ(s.tag, SpectrumTag::measured);
    EXPECT_EQ(s.total(), 21);
}

TEST(SpectrumFile, ElectronVoltEdgesAreConverted) {
    std::istringstream in("# xlim-spectrum v1\n# energy_unit: eV\n# counts_unit: counts\n7000 7010 3\n7010 7020 4\n");
    const auto s = read_spectrum(in).spectrum;
    EXPECT_DOUBLE_EQ(s.grid.min(), 7.0);
    EXPECT_DOUBLE_EQ(s.grid.max(), 7.02);
}

void expect_parse_error(const std::string& body, const std::string& fragment) {
    std::istringstream in(body);
    try {
        read_spectrum(in);
        FAIL() << "expected ParseError containing '" << fragment << "'";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

const std::string kHead = "# xlim-spectrum v1\n# energy_unit: keV\n# counts_unit: counts\n";

TEST(SpectrumFile, RejectsMalformedInput) {
    expect_parse_error(kHead + "1 2 5\n1.5 3 4\n", "row 2");
    expect_parse_error(kHead + "1 2 5\n1.5 3 4\n", "overlaps");
    expect_parse_error(kHead + "1 2 5\n2.5 3 4\n", "gap");
    expect_parse_error(kHead + "1 2 -5\n", "negative");
    expect_parse_error(kHead + "1 2 2.5\n", "integer");
    expect_parse_error(kHead + "2 1 5\n", "row 1");
    expect_parse_error(kHead + "1 2\n", "fields");
    expect_parse_error("# energy_unit: keV\n# counts_unit: counts\n1 2 5\n", "xlim-spectrum v1");
    expect_parse_error("# xlim-spectrum v1\n# counts_unit: counts\n1 2 5\n", "energy_unit");
    expect_parse_error("# xlim-spectrum v1\n# energy_unit: keV\n1 2 5\n", "counts_unit");
    expect_parse_error("# xlim-spectrum v1\n# energy_unit: MeV\n# counts_unit: counts\n1 2 5\n", "MeV");
    expect_parse_error(kHead, "no bins");
}

TEST(SpectrumFile, ErrorReportsLineNumber) {
    std::istringstream in(kHead + "1 2 5\n2 3 x\n");
    try {
        read_spectrum(in);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 5u);
    }
}

TEST(SpectrumFile, SaveAndLoad) {
    std::mt19937_64 rng(2);
    const auto f = random_file(rng, true, false);
    const auto dir = std::filesystem::temp_directory_path() / "xlim_spectrum_file_test";
    std::filesystem::create_directories(dir);
    save_spectrum(dir / "s.txt", f);
    EXPECT_EQ(load_spectrum(dir / "s.txt").counts, f.spectrum.counts);
    EXPECT_THROW(load_spectrum(dir / "missing.txt"), ParseError);
    std::filesystem::remove_all(dir);
}

TEST(ResidualFile, HasOneRowPerBin) {
    const EnergyGrid grid({1.0, 2.0, 3.0});
    const BinnedSpectrum on{grid, {10, 20}, {}, SpectrumTag::current_on, 2.0};
    const BinnedSpectrum off{grid, {4, 6}, {}, SpectrumTag::current_off, 1.0};
    std::ostringstream out;
    write_residual(out, subtract_spectra(on, off), "abc");
    std::size_t rows = 0;
    std::istringstream in(out.str());
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] != '#') ++rows;
    }
    EXPECT_EQ(rows, 2u);
    EXPECT_NE(out.str().find("abc"), std::string::npos);
}

}  // namespace
}  // namespace xlim
