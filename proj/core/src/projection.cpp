#include "xlim/projection.hpp"

#include <cmath>

#include <fmt/format.h>

#include "xlim/error.hpp"

namespace xlim {

namespace {

void check_factors(const std::vector<NamedFactor>& factors, const char* kind) {
    if (factors.empty()) {
        throw DomainError(fmt::format("improvement budget has no {} factors", kind));
    }
    for (const auto& f : factors) {
        if (!(f.factor.low > 0.0) || !std::isfinite(f.factor.high)) {
            throw DomainError(fmt::format("factor '{}' must be positive and finite", f.name));
        }
        if (!(f.factor.low <= f.factor.high)) {
            throw DomainError(fmt::format("factor '{}' has low > high", f.name));
        }
    }
}

FactorRange product(const std::vector<NamedFactor>& factors) {
    FactorRange acc{1.0, 1.0};
    for (const auto& f : factors) acc = acc * f.factor;
    return acc;
}

}  // namespace

FactorRange operator*(const FactorRange& a, const FactorRange& b) {
    // All factors are positive, so the interval product is endpoint-wise.
    return {a.low * b.low, a.high * b.high};
}

void ImprovementBudget::validate() const {
    check_factors(linear, "linear");
    check_factors(background, "background");
}

FactorRange total_linear_factor(const ImprovementBudget& budget) {
    check_factors(budget.linear, "linear");
    return product(budget.linear);
}

FactorRange background_reduction(const ImprovementBudget& budget) {
    check_factors(budget.background, "background");
    return product(budget.background);
}

FactorRange overall_improvement(const ImprovementBudget& budget) {
    const auto linear = total_linear_factor(budget);
    const auto bg = background_reduction(budget);
    return {linear.low * std::sqrt(bg.low), linear.high * std::sqrt(bg.high)};
}

ImprovementBudget vip2_budget() {
    return {
        {
            {"acceptance", FactorRange::scalar(12.0)},
            {"increase current", FactorRange::scalar(2.0)},
            {"reduced length", FactorRange::scalar(1.0 / 3.0)},
        },
        {
            {"energy resolution", FactorRange::scalar(4.0)},
            {"reduced active area", FactorRange::scalar(20.0)},
            {"better shielding and veto", {5.0, 10.0}},
            {"higher SDD efficiency", FactorRange::scalar(0.5)},
        },
    };
}

}  // namespace xlim
