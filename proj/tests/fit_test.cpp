#include "xlim/fit.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "xlim/error.hpp"

namespace xlim {
namespace {

FitProblem line_plus_flat(const std::vector<double>& data, const EnergyGrid& grid, double amp0, double c0) {
    DetectorResponse r;
    r.fwhm_ref = 0.17;
    FitProblem p;
    p.data = Observations{grid, data, {}};
    p.model = SpectralModel{{GaussianLine{7.7, amp0}, PolynomialBackground{{c0}}}, r};
    p.parameters = {signal_parameter("amplitude", 0, ParameterField::line_amplitude),
                    nuisance_parameter("c0", 1, ParameterField::polynomial_coefficient, 0)};
    p.signal = 0;
    return p;
}

std::vector<double> noiseless(const SpectralModel& m, const EnergyGrid& grid) { return predict_counts(m, grid); }

TEST(Fit, RecoversNoiselessParameters) {
    const auto grid = EnergyGrid::uniform(7.2, 8.2, 50);
    DetectorResponse r;
    r.fwhm_ref = 0.17;
    const SpectralModel truth{{GaussianLine{7.7, 1e5}, PolynomialBackground{{2e4}}}, r};
    auto problem = line_plus_flat(noiseless(truth, grid), grid, 7e4, 1.5e4);
    FitOptions opt;
    opt.simplex.ftol = 1e-12;
    for (Statistic st : {Statistic::chi2, Statistic::poisson_nll}) {
        problem.statistic = st;
        const auto fit = fit_minimize(problem, opt);
        EXPECT_NEAR(fit.values[0] / 1e5, 1.0, 1e-6) << to_string(st);
        EXPECT_NEAR(fit.values[1] / 2e4, 1.0, 1e-6) << to_string(st);
        EXPECT_FALSE(fit.signal_at_boundary);
        EXPECT_TRUE(std::isfinite(fit.errors[0]));
    }
}

TEST(Fit, RecoversUnitContinuumAmplitude) {
    const auto grid = EnergyGrid::uniform(4.5, 48.5, 44);
    const SpectralModel truth{{OneOverEContinuum{1.0}}, {}};
    FitProblem p;
    p.data = Observations{grid, predict_counts(truth, grid), std::vector<double>(grid.size(), 1e-3)};
    p.model = SpectralModel{{OneOverEContinuum{3.0}}, {}};
    p.parameters = {signal_parameter("alpha", 0, ParameterField::continuum_alpha)};
    const auto fit = fit_minimize(p);
    EXPECT_NEAR(fit.values[0], 1.0, 1e-6);
}

TEST(Fit, SignalStopsAtZero) {
    const auto grid = EnergyGrid::uniform(7.2, 8.2, 50);
    const SpectralModel bg{{PolynomialBackground{{2e4}}}, {}};
    auto data = noiseless(bg, grid);
    // Dip at the line position pulls the unconstrained amplitude negative.
    for (std::size_t i = 23; i < 27; ++i) data[i] -= 30.0;
    const auto problem = line_plus_flat(data, grid, 500.0, 2e4);
    const auto fit = fit_minimize(problem);
    EXPECT_EQ(fit.values[0], 0.0);
    EXPECT_TRUE(fit.signal_at_boundary);
}

TEST(Fit, ErrorMatchesCountingStatistics) {
    // One flat parameter over one bin with 1e4 counts: σ = 100.
    const EnergyGrid grid({0.0, 1.0});
    FitProblem p;
    p.data = Observations{grid, {1e4}, {}};
    p.model = SpectralModel{{PolynomialBackground{{9000.0}}}, {}};
    p.parameters = {signal_parameter("c0", 0, ParameterField::polynomial_coefficient)};
    for (Statistic st : {Statistic::chi2, Statistic::poisson_nll}) {
        p.statistic = st;
        const auto fit = fit_minimize(p);
        EXPECT_NEAR(fit.values[0], 1e4, 1e-2);
        EXPECT_NEAR(fit.errors[0] / 100.0, 1.0, 0.01);
    }
}

TEST(Fit, FixedSignalProfilesNuisance) {
    const auto grid = EnergyGrid::uniform(7.2, 8.2, 50);
    DetectorResponse r;
    r.fwhm_ref = 0.17;
    const SpectralModel truth{{GaussianLine{7.7, 1e4}, PolynomialBackground{{5e3}}}, r};
    const auto problem = line_plus_flat(noiseless(truth, grid), grid, 1e4, 4e3);
    const auto at_truth = fit_with_fixed_signal(problem, 1e4);
    EXPECT_NEAR(at_truth.values[1], 5e3, 1e-2);
    EXPECT_EQ(at_truth.values[0], 1e4);
    const auto off = fit_with_fixed_signal(problem, 2e4);
    EXPECT_GT(off.statistic, at_truth.statistic + 1.0);
}

TEST(Fit, Deterministic) {
    const auto grid = EnergyGrid::uniform(7.2, 8.2, 50);
    DetectorResponse r;
    r.fwhm_ref = 0.17;
    const SpectralModel truth{{GaussianLine{7.7, 300}, PolynomialBackground{{500}}}, r};
    const auto s = simulate_spectrum(truth, grid, 8);
    std::vector<double> data(s.counts.begin(), s.counts.end());
    auto problem = line_plus_flat(data, grid, 100, 400);
    problem.seed = 99;
    const auto a = fit_minimize(problem);
    const auto b = fit_minimize(problem);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.statistic, b.statistic);
}

TEST(FitProblem, Validation) {
    const auto grid = EnergyGrid::uniform(7.2, 8.2, 10);
    auto p = line_plus_flat(std::vector<double>(10, 1.0), grid, 1.0, 1.0);
    p.parameters[0].lower = -1.0;
    EXPECT_THROW(p.validate(), ConfigError);

    p = line_plus_flat(std::vector<double>(10, 1.0), grid, 1.0, 1.0);
    p.data.sigma.assign(10, 1.0);
    p.statistic = Statistic::poisson_nll;
    EXPECT_THROW(p.validate(), ConfigError);

    p = line_plus_flat(std::vector<double>(10, 1.0), grid, 1.0, 1.0);
    p.parameters[1].component = 0;
    EXPECT_THROW(p.validate(), ConfigError);

    p = line_plus_flat(std::vector<double>(9, 1.0), grid, 1.0, 1.0);
    EXPECT_THROW(p.validate(), ShapeError);
}

TEST(FitProblem, DescribeIgnoresData) {
    const auto grid = EnergyGrid::uniform(7.2, 8.2, 10);
    const auto a = line_plus_flat(std::vector<double>(10, 1.0), grid, 1.0, 1.0);
    const auto b = line_plus_flat(std::vector<double>(10, 2.0), grid, 1.0, 1.0);
    const auto c = line_plus_flat(std::vector<double>(10, 1.0), grid, 2.0, 1.0);
    EXPECT_EQ(describe(a), describe(b));
    EXPECT_NE(describe(a), describe(c));
}

}  // namespace
}  // namespace xlim
