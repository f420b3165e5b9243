#include "xlim/projection.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "xlim/error.hpp"

namespace xlim {
namespace {

TEST(Projection, UpgradeBudgetArithmetic) {
    const auto b = vip2_budget();
    EXPECT_EQ(total_linear_factor(b), FactorRange::scalar(8.0));
    EXPECT_EQ(background_reduction(b), (FactorRange{200.0, 400.0}));
    const auto overall = overall_improvement(b);
    EXPECT_NEAR(overall.low, 8.0 * std::sqrt(200.0), 1e-12);
    EXPECT_NEAR(overall.low, 113.137, 1e-3);
    EXPECT_DOUBLE_EQ(overall.high, 160.0);
    EXPECT_LT(overall.low, 120.0);
    EXPECT_GT(overall.high, 120.0);
}

TEST(Projection, ScalarsAndIntervals) {
    EXPECT_TRUE(FactorRange::scalar(3.0).is_scalar());
    EXPECT_FALSE((FactorRange{1.0, 2.0}).is_scalar());
    EXPECT_EQ((FactorRange::scalar(3.0) * FactorRange{2.0, 5.0}), (FactorRange{6.0, 15.0}));
}

TEST(Projection, SingleFactorBudget) {
    const ImprovementBudget b{{{"x", FactorRange::scalar(2.0)}}, {{"y", FactorRange::scalar(16.0)}}};
    EXPECT_EQ(overall_improvement(b), FactorRange::scalar(8.0));
}

TEST(Projection, InvalidFactors) {
    ImprovementBudget b = vip2_budget();
    b.linear[0].factor = FactorRange::scalar(0.0);
    EXPECT_THROW(total_linear_factor(b), DomainError);
    b = vip2_budget();
    b.background[2].factor = {10.0, 5.0};
    EXPECT_THROW(background_reduction(b), DomainError);
    b = vip2_budget();
    b.background.clear();
    EXPECT_THROW(b.validate(), DomainError);
}

}  // namespace
}  // namespace xlim
