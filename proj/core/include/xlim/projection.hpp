#pragma once

#include <string>
#include <vector>

namespace xlim {

/// Closed interval [low, high]; a scalar factor has low == high.
struct FactorRange {
    double low = 1.0;
    double high = 1.0;

    static FactorRange scalar(double v) { return {v, v}; }
    bool is_scalar() const { return low == high; }
    friend bool operator==(const FactorRange&, const FactorRange&) = default;
};

FactorRange operator*(const FactorRange& a, const FactorRange& b);

struct NamedFactor {
    std::string name;
    FactorRange factor;
};

/// Improvement factors of an upgraded setup relative to its predecessor:
/// signal-side (linear) factors and background-reduction factors.
struct ImprovementBudget {
    std::vector<NamedFactor> linear;
    std::vector<NamedFactor> background;

    void validate() const;
};

/// Product of the linear factors.
FactorRange total_linear_factor(const ImprovementBudget& budget);

/// Interval product of the background factors.
FactorRange background_reduction(const ImprovementBudget& budget);

/// Sensitivity gain = linear × sqrt(background reduction), the
/// counting-statistics figure of merit for a background-dominated search.
FactorRange overall_improvement(const ImprovementBudget& budget);

/// The VIP → VIP2 budget.
ImprovementBudget vip2_budget();

}  // namespace xlim
