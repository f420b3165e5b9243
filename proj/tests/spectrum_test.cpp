#include "xlim/spectrum.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "xlim/error.hpp"

namespace xlim {
namespace {

BinnedSpectrum flat(std::int64_t count, double days, std::size_t bins = 10) {
    return BinnedSpectrum{EnergyGrid::uniform(7.0, 8.5, bins), std::vector<std::int64_t>(bins, count), {},
                          SpectrumTag::measured, days};
}

TEST(EnergyGrid, RejectsBadEdges) {
    EXPECT_THROW(EnergyGrid({1.0}), ShapeError);
    EXPECT_THROW(EnergyGrid({1.0, 1.0}), DomainError);
    EXPECT_THROW(EnergyGrid({1.0, 2.0, 1.5}), DomainError);
    EXPECT_THROW(EnergyGrid::uniform(2.0, 1.0, 3), DomainError);
    EXPECT_THROW(EnergyGrid::uniform(1.0, 2.0, 0), ShapeError);
}

TEST(EnergyGrid, UniformWindow) {
    const auto g = EnergyGrid::uniform(4.5, 48.5, 44);
    EXPECT_EQ(g.size(), 44u);
    EXPECT_DOUBLE_EQ(g.min(), 4.5);
    EXPECT_DOUBLE_EQ(g.max(), 48.5);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g.width(i), 1.0, 1e-12);
    const auto s = g.slice(2, 5);
    EXPECT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s.min(), g.low(2));
    EXPECT_THROW(g.slice(5, 5), ShapeError);
}

TEST(BinnedSpectrum, Validate) {
    auto s = flat(3, 1.0);
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.total(), 30);
    s.counts[2] = -1;
    EXPECT_THROW(s.validate(), DomainError);
    s.counts.pop_back();
    EXPECT_THROW(s.validate(), ShapeError);
}

TEST(SubtractSpectra, IdenticalRunsCancel) {
    const auto on = flat(50, 10.0);
    const auto r = subtract_spectra(on, on);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        EXPECT_DOUBLE_EQ(r.values[i], 0.0);
        EXPECT_DOUBLE_EQ(r.sigma[i], std::sqrt(100.0));
    }
}

TEST(SubtractSpectra, TimeRatioFromAcquisitionDays) {
    const auto r = subtract_spectra(flat(10, 34.0), flat(10, 28.0));
    EXPECT_NEAR(r.time_ratio, 1.2143, 1e-4);
    EXPECT_DOUBLE_EQ(r.time_ratio, 34.0 / 28.0);
}

TEST(SubtractSpectra, ResidualAndUncertainty) {
    auto on = flat(150, 5.0, 1);
    auto off = flat(100, 5.0, 1);
    const auto r = subtract_spectra(on, off);
    EXPECT_DOUBLE_EQ(r.values[0], 50.0);
    EXPECT_NEAR(r.sigma[0], 15.81, 5e-3);
}

TEST(SubtractSpectra, Errors) {
    EXPECT_THROW(subtract_spectra(flat(1, 1.0, 10), flat(1, 1.0, 11)), ShapeError);
    EXPECT_THROW(subtract_spectra(flat(1, 1.0), flat(1, 0.0)), DomainError);
}

TEST(SpectrumTag, RoundTrip) {
    for (auto t : {SpectrumTag::current_on, SpectrumTag::current_off, SpectrumTag::simulated, SpectrumTag::measured}) {
        EXPECT_EQ(spectrum_tag_from_string(to_string(t)), t);
    }
    EXPECT_THROW(spectrum_tag_from_string("bogus"), DomainError);
}

}  // namespace
}  // namespace xlim
