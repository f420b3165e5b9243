#include "xlim/model.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xlim/error.hpp"

namespace xlim {
namespace {

TEST(GaussianLineDensity, PeakOfUnitGaussian) {
    EXPECT_NEAR(gaussian_line_density(7.7, 7.7, 2.3548, 1.0), 0.39894, 1e-5);
}

TEST(GaussianLineDensity, ZeroAmplitude) {
    for (double e : {1.0, 7.7, 8.0, 20.0}) EXPECT_EQ(gaussian_line_density(e, 7.7, 0.17, 0.0), 0.0);
}

TEST(GaussianLineDensity, IntegratesToAmplitude) {
    const double fwhm = 0.17;
    const double sigma = fwhm / test::fwhm_per_sigma();
    const double area = test::integrate([&](double e) { return gaussian_line_density(e, 8.0, fwhm, 100.0); },
                                        8.0 - 6.0 * sigma, 8.0 + 6.0 * sigma, 1e-12);
    EXPECT_NEAR(area, 100.0, 1e-6 * 100.0);
}

TEST(GaussianLineDensity, SymmetricAndMatchesOracle) {
    for (double d : {0.01, 0.05, 0.1, 0.3}) {
        EXPECT_NEAR(gaussian_line_density(8.0 + d, 8.0, 0.17, 5.0) / gaussian_line_density(8.0 - d, 8.0, 0.17, 5.0),
                    1.0, 1e-12);
        EXPECT_NEAR(gaussian_line_density(8.0 + d, 8.0, 0.17, 5.0),
                    5.0 * test::normal_pdf(8.0 + d, 8.0, 0.17 / test::fwhm_per_sigma()), 1e-12);
    }
}

TEST(GaussianLineDensity, Errors) {
    EXPECT_THROW(gaussian_line_density(1.0, 1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(gaussian_line_density(1.0, 1.0, -0.1, 1.0), DomainError);
    EXPECT_THROW(gaussian_line_density(1.0, 1.0, 0.1, -1.0), DomainError);
}

TEST(PredictCounts, EmptyModelIsZero) {
    const auto counts = predict_counts(SpectralModel{}, EnergyGrid::uniform(1.0, 10.0, 9));
    for (double c : counts) EXPECT_EQ(c, 0.0);
}

TEST(PredictCounts, InverseEnergyOnOneBin) {
    const auto counts = predict_counts(SpectralModel{{OneOverEContinuum{1.0}}, {}}, EnergyGrid({1.0, 2.0}));
    EXPECT_NEAR(counts[0], std::log(2.0), 1e-15);
    EXPECT_NEAR(counts[0], 0.6931, 1e-4);
}

TEST(PredictCounts, InverseEnergyBinsMatchQuadrature) {
    const double alpha = 37.5;
    const auto grid = EnergyGrid::uniform(4.5, 48.5, 44);
    const auto counts = predict_counts(SpectralModel{{OneOverEContinuum{alpha}}, {}}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ref = test::integrate([&](double e) { return alpha / e; }, grid.low(i), grid.high(i), 1e-13);
        EXPECT_NEAR(counts[i], ref, 1e-9);
        // count density × E is the same in every bin
        EXPECT_NEAR(counts[i] / std::log(grid.high(i) / grid.low(i)), alpha, 1e-12 * alpha);
    }
}

TEST(PredictCounts, UndefinedContinuum) {
    EXPECT_THROW(predict_counts(SpectralModel{{OneOverEContinuum{1.0}}, {}}, EnergyGrid({-1.0, 2.0})), DomainError);
    EXPECT_THROW(predict_counts(SpectralModel{{OneOverEContinuum{1.0}}, {}}, EnergyGrid({0.0, 2.0})), DomainError);
}

TEST(PredictCounts, PolynomialMatchesQuadrature) {
    const SpectralModel m{{PolynomialBackground{{3.0, -0.2, 0.01}}}, {}};
    const auto grid = EnergyGrid::uniform(1.0, 20.0, 19);
    const auto counts = predict_counts(m, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ref =
            test::integrate([](double e) { return 3.0 - 0.2 * e + 0.01 * e * e; }, grid.low(i), grid.high(i));
        EXPECT_NEAR(counts[i], ref, 1e-9);
    }
}

TEST(PredictCounts, LineBinsMatchQuadrature) {
    DetectorResponse r;
    r.fwhm_ref = 0.17;
    const SpectralModel m{{GaussianLine{7.7, 1000.0}}, r};
    const auto grid = EnergyGrid::uniform(7.0, 8.5, 75);
    const auto counts = predict_counts(m, grid);
    const double sigma = 0.17 / test::fwhm_per_sigma();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ref = test::integrate([&](double e) { return 1000.0 * test::normal_pdf(e, 7.7, sigma); },
                                           grid.low(i), grid.high(i), 1e-13);
        EXPECT_NEAR(counts[i], ref, 1e-9);
    }
}

TEST(PredictCounts, LineConservesProbability) {
    DetectorResponse r;
    r.fwhm_ref = 0.17;
    r.efficiency = {0.8};
    const auto grid = EnergyGrid::uniform(6.0, 10.0, 200);
    const auto counts = predict_counts(SpectralModel{{GaussianLine{7.7, 12345.0}}, r}, grid);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    EXPECT_NEAR(total / (12345.0 * 0.8), 1.0, 1e-6);
}

TEST(PredictCounts, SuperpositionAndLinearity) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto grid = EnergyGrid::uniform(5.0, 12.0, 70);
    DetectorResponse r;
    r.fwhm_ref = 0.19;
    r.resolution_model = ResolutionModel::sqrt_scaling;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SpectralComponent> comps;
        comps.emplace_back(GaussianLine{5.5 + 6.0 * u(rng), 1000.0 * u(rng)});
        comps.emplace_back(OneOverEContinuum{50.0 * u(rng)});
        comps.emplace_back(PolynomialBackground{{10.0 * u(rng), u(rng)}});
        const auto all = predict_counts(SpectralModel{comps, r}, grid);

        std::vector<double> sum(grid.size(), 0.0);
        for (const auto& c : comps) {
            const auto part = predict_counts(SpectralModel{{c}, r}, grid);
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += part[i];
        }
        auto doubled = comps;
        std::get<GaussianLine>(doubled[0]).amplitude *= 2.0;
        std::get<OneOverEContinuum>(doubled[1]).alpha *= 2.0;
        for (auto& c : std::get<PolynomialBackground>(doubled[2]).coefficients) c *= 2.0;
        const auto twice = predict_counts(SpectralModel{doubled, r}, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_NEAR(all[i], sum[i], 1e-10 * (1.0 + std::abs(sum[i])));
            EXPECT_NEAR(twice[i], 2.0 * all[i], 1e-10 * (1.0 + std::abs(all[i])));
        }
    }
}

TEST(PredictCounts, PerBinEfficiency) {
    DetectorResponse r;
    r.efficiency = {0.5, 1.0};
    const auto counts = predict_counts(SpectralModel{{PolynomialBackground{{2.0}}}, r}, EnergyGrid({1.0, 2.0, 3.0}));
    EXPECT_DOUBLE_EQ(counts[0], 1.0);
    EXPECT_DOUBLE_EQ(counts[1], 2.0);
    r.efficiency = {0.5, 1.0, 1.0};
    EXPECT_THROW(predict_counts(SpectralModel{{}, r}, EnergyGrid({1.0, 2.0, 3.0})), ShapeError);
}

TEST(DetectorResponse, SqrtScaling) {
    DetectorResponse r;
    r.fwhm_ref = 0.17;
    EXPECT_DOUBLE_EQ(r.fwhm_at(2.0), 0.17);
    r.resolution_model = ResolutionModel::sqrt_scaling;
    EXPECT_DOUBLE_EQ(r.fwhm_at(8.0), 0.17);
    EXPECT_NEAR(r.fwhm_at(2.0), 0.085, 1e-12);
    r.efficiency = {1.2};
    EXPECT_THROW(r.validate(), DomainError);
}

TEST(Resolvability, ForbiddenAndAllowedLinesAreSeparated) {
    // 7.7 vs 8.0 keV at 170 eV FWHM.
    const double separation = (8.0 - 7.7) / fwhm_to_sigma(0.170);
    EXPECT_NEAR(separation / 4.15, 1.0, 0.01);
}

TEST(SimulateSpectrum, ZeroModelGivesZeroCounts) {
    const SpectralModel m{{GaussianLine{7.7, 0.0}, OneOverEContinuum{0.0}}, {}};
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
        const auto s = simulate_spectrum(m, EnergyGrid::uniform(5.0, 10.0, 50), seed);
        EXPECT_EQ(s.total(), 0);
        EXPECT_EQ(s.tag, SpectrumTag::simulated);
    }
}

TEST(SimulateSpectrum, Deterministic) {
    const SpectralModel m{{GaussianLine{7.7, 500.0}, PolynomialBackground{{20.0}}}, {}};
    const auto grid = EnergyGrid::uniform(7.0, 8.5, 30);
    const auto a = simulate_spectrum(m, grid, 42);
    const auto b = simulate_spectrum(m, grid, 42);
    const auto c = simulate_spectrum(m, grid, 43);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_NE(a.counts, c.counts);
}

TEST(SimulateSpectrum, PoissonMean) {
    // One bin with expectation 100; the mean of 10000 draws has standard error 0.1.
    const SpectralModel m{{PolynomialBackground{{100.0}}}, {}};
    const EnergyGrid grid({1.0, 2.0});
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) sum += static_cast<double>(simulate_spectrum(m, grid, seed).counts[0]);
    EXPECT_NEAR(sum / 10000.0, 100.0, 0.3);
}

TEST(SimulateSpectrum, NegativeExpectationIsModelError) {
    const SpectralModel m{{PolynomialBackground{{-1.0}}}, {}};
    EXPECT_THROW(simulate_spectrum(m, EnergyGrid({1.0, 2.0}), 1), ModelError);
}

TEST(Describe, DistinguishesModels) {
    const SpectralModel a{{GaussianLine{7.7, 1.0}}, {}};
    const SpectralModel b{{GaussianLine{7.7, 2.0}}, {}};
    EXPECT_NE(describe(a), describe(b));
    EXPECT_EQ(describe(a), describe(a));
}

}  // namespace
}  // namespace xlim
