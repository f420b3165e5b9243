#include "xlim/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "xlim/error.hpp"

namespace xlim {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

class Runner {
public:
    Runner(const Objective& f, std::span<const double> lower, std::span<const double> upper,
           const SimplexOptions& options)
        : f_(f), lower_(lower), upper_(upper), options_(options) {}

    double eval(std::vector<double>& x) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = std::clamp(x[i], lower_[i], upper_[i]);
        }
        if (evaluations_ >= options_.max_evaluations) {
            auto trace = trace_;
            trace.push_back(fmt::format("descent {}: budget exhausted after {} evals", trace_.size(), evaluations_));
            throw ConvergenceError(
                fmt::format("simplex did not converge within {} evaluations", options_.max_evaluations),
                std::move(trace));
        }
        ++evaluations_;
        const double v = f_(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    }

    // One Nelder-Mead descent from a simplex built around `start`.
    std::pair<std::vector<double>, double> descend(const std::vector<double>& start,
                                                   const std::vector<double>& steps) {
        const std::size_t n = start.size();
        std::vector<std::vector<double>> pts(n + 1, start);
        std::vector<double> vals(n + 1);
        vals[0] = eval(pts[0]);
        for (std::size_t i = 0; i < n; ++i) {
            auto& p = pts[i + 1];
            double step = steps[i];
            if (p[i] + step > upper_[i]) step = -step;
            p[i] += step;
            vals[i + 1] = eval(p);
            if (p[i] == start[i]) {
                // Collapsed against both bounds: step the other way.
                p[i] = start[i] - step;
                vals[i + 1] = eval(p);
            }
        }

        std::vector<std::size_t> order(n + 1);
        std::vector<double> centroid(n), trial(n), trial2(n);
        for (;;) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
            const std::size_t best = order.front();
            const std::size_t worst = order.back();
            const std::size_t second = order[n >= 1 ? n - 1 : 0];

            if (vals[worst] - vals[best] <= options_.ftol || degenerate(pts, best)) {
                return {pts[best], vals[best]};
            }

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == worst) continue;
                for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
            }
            for (auto& c : centroid) c /= static_cast<double>(n);

            for (std::size_t i = 0; i < n; ++i) trial[i] = centroid[i] + kReflect * (centroid[i] - pts[worst][i]);
            const double fr = eval(trial);

            if (fr < vals[best]) {
                for (std::size_t i = 0; i < n; ++i) trial2[i] = centroid[i] + kExpand * (trial[i] - centroid[i]);
                const double fe = eval(trial2);
                if (fe < fr) {
                    pts[worst] = trial2;
                    vals[worst] = fe;
                } else {
                    pts[worst] = trial;
                    vals[worst] = fr;
                }
                continue;
            }
            if (fr < vals[second]) {
                pts[worst] = trial;
                vals[worst] = fr;
                continue;
            }
            // Contraction, outside if the reflection helped at all.
            const bool outside = fr < vals[worst];
            const auto& ref = outside ? trial : pts[worst];
            for (std::size_t i = 0; i < n; ++i) trial2[i] = centroid[i] + kContract * (ref[i] - centroid[i]);
            const double fc = eval(trial2);
            if (fc < (outside ? fr : vals[worst])) {
                pts[worst] = trial2;
                vals[worst] = fc;
                continue;
            }
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == best) continue;
                for (std::size_t i = 0; i < n; ++i) {
                    pts[k][i] = pts[best][i] + kShrink * (pts[k][i] - pts[best][i]);
                }
                vals[k] = eval(pts[k]);
            }
        }
    }

    std::size_t evaluations() const { return evaluations_; }
    std::vector<std::string>& trace() { return trace_; }

private:
    bool degenerate(const std::vector<std::vector<double>>& pts, std::size_t best) const {
        for (const auto& p : pts) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double scale = std::max(std::abs(pts[best][i]), 1e-300);
                if (std::abs(p[i] - pts[best][i]) > 1e-15 * scale) return false;
            }
        }
        return true;
    }

    const Objective& f_;
    std::span<const double> lower_;
    std::span<const double> upper_;
    const SimplexOptions& options_;
    std::size_t evaluations_ = 0;
    std::vector<std::string> trace_;
};

}  // namespace

SimplexResult minimize_simplex(const Objective& objective, std::span<const double> start,
                               std::span<const double> steps, std::span<const double> lower,
                               std::span<const double> upper, const SimplexOptions& options) {
    const std::size_t n = start.size();
    if (steps.size() != n || lower.size() != n || upper.size() != n) {
        throw ShapeError("simplex: start, steps and bounds must have equal length");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lower[i] <= upper[i])) {
            throw DomainError(fmt::format("simplex: empty bound interval for coordinate {}", i));
        }
        if (!(steps[i] > 0.0) || !std::isfinite(steps[i])) {
            throw DomainError(fmt::format("simplex: step for coordinate {} must be positive", i));
        }
    }

    Runner runner(objective, lower, upper, options);
    std::vector<double> x0(start.begin(), start.end());
    if (n == 0) {
        const double v = runner.eval(x0);
        return {x0, v, runner.evaluations(), 0, {}};
    }

    std::vector<double> base_steps(steps.begin(), steps.end());
    auto [best, value] = runner.descend(x0, base_steps);
    runner.trace().push_back(fmt::format("descent 0: f={:.12g} evals={}", value, runner.evaluations()));

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> scale(0.5, 1.5);
    std::size_t restarts = 0;
    for (; restarts < options.max_restarts; ++restarts) {
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = base_steps[i] * scale(rng) * std::pow(0.1, static_cast<double>(restarts));
            s[i] = std::max(s[i], 1e-12 * (std::abs(best[i]) + base_steps[i]));
        }
        auto [x, v] = runner.descend(best, s);
        runner.trace().push_back(
            fmt::format("restart {}: f={:.12g} evals={}", restarts + 1, v, runner.evaluations()));
        const double gain = value - v;
        if (v < value) {
            best = std::move(x);
            value = v;
        }
        if (!(gain > options.ftol)) {
            ++restarts;
            break;
        }
    }
    return {best, value, runner.evaluations(), restarts, std::move(runner.trace())};
}

}  // namespace xlim
