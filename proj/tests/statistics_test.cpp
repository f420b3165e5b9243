#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "xlim/error.hpp"
#include "xlim/fit.hpp"
#include "xlim/model.hpp"

namespace xlim {
namespace {

Observations counting(std::vector<double> values) {
    const auto grid = EnergyGrid::uniform(1.0, 1.0 + static_cast<double>(values.size()), values.size());
    return Observations{grid, std::move(values), {}};
}

TEST(Chi2, ZeroWhenModelMatches) {
    const auto d = counting({3, 10, 0, 7});
    const std::vector<double> mu{3, 10, 0, 7};
    EXPECT_EQ(binned_chi2(d, mu), 0.0);
}

TEST(Chi2, SingleBinKnownValue) {
    const auto d = counting({100});
    const std::vector<double> mu{130};
    EXPECT_DOUBLE_EQ(binned_chi2(d, mu), 9.0);
}

TEST(Chi2, ExplicitSigmaAndFloor) {
    Observations d{EnergyGrid({0, 1, 2}), {1.0, -2.0}, {0.5, 2.0}};
    EXPECT_DOUBLE_EQ(binned_chi2(d, std::vector<double>{0.0, 0.0}), 4.0 + 1.0);
    // Empty bins use a unit variance.
    const auto zero = counting({0});
    EXPECT_DOUBLE_EQ(binned_chi2(zero, std::vector<double>{2.0}), 4.0);
}

TEST(Chi2, ShapeMismatch) {
    EXPECT_THROW(binned_chi2(counting({1, 2}), std::vector<double>{1.0}), ShapeError);
}

TEST(Chi2, MeanOverPseudoDataMatchesBinCount) {
    // 40 bins at 1000 expected counts: E[χ²] ≈ 40; mean of 2000 draws has s.e. ≈ 0.2.
    const SpectralModel m{{PolynomialBackground{{1000.0}}}, {}};
    const auto grid = EnergyGrid::uniform(0.0, 40.0, 40);
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) sum += binned_chi2(simulate_spectrum(m, grid, seed), m);
    EXPECT_NEAR(sum / 2000.0, 40.0, 2.0);
}

TEST(PoissonNll, KnownValue) {
    // −(n ln μ − μ − ln n!) for n = 2, μ = 3.
    const double ref = -(2.0 * std::log(3.0) - 3.0 - std::log(2.0));
    EXPECT_NEAR(binned_poisson_nll(counting({2}), std::vector<double>{3.0}), ref, 1e-14);
}

TEST(PoissonNll, MinimizedAtObservedCounts) {
    const auto d = counting({5, 12, 40});
    const std::vector<double> at{5, 12, 40};
    const double best = binned_poisson_nll(d, at);
    for (double f : {0.9, 0.99, 1.01, 1.1}) {
        const std::vector<double> mu{5 * f, 12 * f, 40 * f};
        EXPECT_GT(binned_poisson_nll(d, mu), best);
    }
}

TEST(PoissonNll, EmptyBinsAndErrors) {
    EXPECT_DOUBLE_EQ(binned_poisson_nll(counting({0}), std::vector<double>{0.0}), 0.0);
    EXPECT_DOUBLE_EQ(binned_poisson_nll(counting({0}), std::vector<double>{2.5}), 2.5);
    EXPECT_THROW(binned_poisson_nll(counting({1}), std::vector<double>{0.0}), DomainError);
    EXPECT_THROW(binned_poisson_nll(counting({1}), std::vector<double>{-1.0}), ModelError);
}

TEST(PoissonNll, MatchesChi2InLargeCountLimit) {
    // Observed counts equal to expectations between 1000 and 10000; compare
    // both statistics for a one-sigma shift of every bin.
    std::vector<double> n, shifted;
    for (int i = 0; i < 40; ++i) {
        const double mu = 1000.0 + 9000.0 * i / 39.0;
        n.push_back(std::round(mu));
        shifted.push_back(std::round(mu) + (i % 2 == 0 ? 1.0 : -1.0) * std::sqrt(std::round(mu)));
    }
    const auto d = counting(n);
    const double dchi2 = binned_chi2(d, shifted) - binned_chi2(d, n);
    const double dnll2 = 2.0 * (binned_poisson_nll(d, shifted) - binned_poisson_nll(d, n));
    EXPECT_NEAR(dchi2, 40.0, 1e-9);
    EXPECT_NEAR(dnll2 / dchi2, 1.0, 0.02);
}

TEST(Statistic, Names) {
    EXPECT_EQ(statistic_from_string(to_string(Statistic::chi2)), Statistic::chi2);
    EXPECT_EQ(statistic_from_string(to_string(Statistic::poisson_nll)), Statistic::poisson_nll);
    EXPECT_THROW(statistic_from_string("likelihood"), ConfigError);
}

}  // namespace
}  // namespace xlim
