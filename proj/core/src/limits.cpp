#include "xlim/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "xlim/error.hpp"
#include "xlim/hash.hpp"
#include "xlim/parallel.hpp"
#include "xlim/random.hpp"

namespace xlim {

std::string content_hash(std::string_view text) { return fmt::format("{:016x}", fnv1a64(text)); }

namespace {

void check_cl(double cl) {
    if (!(cl > 0.0 && cl < 1.0)) {
        throw DomainError(fmt::format("confidence level must be in (0, 1), got {}", cl));
    }
}

// Profiled deviance on a uniform grid over [lo, hi], refined by doubling.
class ProfileScan {
public:
    ProfileScan(const FitProblem& problem, const FitOptions& fit) : problem_(problem), fit_(fit) {}

    double profile(double s, std::span<const double> warm) {
        if (problem_.parameters.size() == 1) {
            std::vector<double> x{s};
            return problem_.deviance(x);
        }
        auto r = fit_with_fixed_signal(problem_, s, warm, fit_);
        last_ = std::move(r.values);
        return r.statistic;
    }

    const std::vector<double>& last() const { return last_; }

private:
    const FitProblem& problem_;
    const FitOptions& fit_;
    std::vector<double> last_;
};

}  // namespace

double posterior_quantile(const std::vector<ScanPoint>& scan, double cl) {
    check_cl(cl);
    if (scan.size() < 2) throw RangeError("posterior scan needs at least two points");
    double ref = std::numeric_limits<double>::infinity();
    for (const auto& p : scan) ref = std::min(ref, p.statistic);
    std::vector<double> w(scan.size());
    for (std::size_t i = 0; i < scan.size(); ++i) w[i] = std::exp(-0.5 * (scan[i].statistic - ref));

    std::vector<double> cdf(scan.size(), 0.0);
    for (std::size_t i = 1; i < scan.size(); ++i) {
        cdf[i] = cdf[i - 1] + 0.5 * (w[i] + w[i - 1]) * (scan[i].value - scan[i - 1].value);
    }
    const double total = cdf.back();
    if (!(total > 0.0) || !std::isfinite(total)) throw RangeError("posterior has zero or infinite mass on the scan");
    const double target = cl * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const std::size_t i = std::min<std::size_t>(
        static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cdf.begin(), 1)) - 1, scan.size() - 2);
    // Exact inversion of the trapezoid (linear density) on [s_i, s_i+1].
    const double h = scan[i + 1].value - scan[i].value;
    const double a = 0.5 * (w[i + 1] - w[i]) / h;
    const double b = w[i];
    const double need = target - cdf[i];
    double t;
    const double disc = b * b + 4.0 * a * need;
    if (disc <= 0.0) {
        t = h;
    } else {
        const double root = std::sqrt(disc);
        t = (b + root) > 0.0 ? 2.0 * need / (b + root) : h;
    }
    return scan[i].value + std::clamp(t, 0.0, h);
}

LimitResult bayesian_upper_limit(const FitProblem& problem, double cl, const LimitOptions& options) {
    check_cl(cl);
    problem.validate();
    const auto& sp = problem.parameters[problem.signal];
    const FitResult global = fit_minimize(problem, options.fit);
    const double s_hat = global.values[problem.signal];
    const double s_lo = sp.lower;

    ProfileScan prof(problem, options.fit);
    double ref = global.statistic;

    // Extend the scan until the posterior tail is negligible.
    double width = global.errors[problem.signal];
    if (!(width > 0.0) || !std::isfinite(width)) width = problem.steps()[problem.signal];
    double s_hi = std::max(s_hat, s_lo) + 5.0 * width;
    std::vector<double> warm = global.values;
    for (int iter = 0;; ++iter) {
        if (s_hi > sp.upper) {
            throw RangeError(fmt::format("posterior for '{}' not normalizable below its upper bound {} (widen scan)",
                                         sp.name, sp.upper));
        }
        const double d = prof.profile(s_hi, warm);
        if (problem.parameters.size() > 1) warm = prof.last();
        if (d - ref >= options.tail_delta) break;
        if (iter >= 60 || !std::isfinite(s_hi)) {
            throw RangeError(fmt::format("posterior for '{}' not normalizable (widen scan)", sp.name));
        }
        s_hi = s_lo + 2.0 * (s_hi - s_lo);
    }

    std::size_t intervals = std::max<std::size_t>(options.initial_intervals, 4);
    std::vector<ScanPoint> scan(intervals + 1);
    std::vector<std::vector<double>> nuis(intervals + 1);
    warm = global.values;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double s = s_lo + (s_hi - s_lo) * static_cast<double>(i) / static_cast<double>(intervals);
        scan[i] = {s, prof.profile(s, warm)};
        if (problem.parameters.size() > 1) {
            warm = prof.last();
            nuis[i] = warm;
        }
    }

    std::optional<double> previous;
    double bound = posterior_quantile(scan, cl);
    while (!previous || std::abs(bound - *previous) > options.relative_tolerance * std::abs(bound)) {
        if (2 * intervals > options.max_intervals) {
            throw ConvergenceError(fmt::format("posterior bound did not stabilize within {} grid intervals",
                                               options.max_intervals),
                                   {});
        }
        std::vector<ScanPoint> finer(2 * intervals + 1);
        std::vector<std::vector<double>> finer_nuis(2 * intervals + 1);
        for (std::size_t i = 0; i <= intervals; ++i) {
            finer[2 * i] = scan[i];
            finer_nuis[2 * i] = std::move(nuis[i]);
        }
        for (std::size_t i = 0; i < intervals; ++i) {
            const double s = 0.5 * (scan[i].value + scan[i + 1].value);
            finer[2 * i + 1] = {s, prof.profile(s, finer_nuis[2 * i])};
            if (problem.parameters.size() > 1) finer_nuis[2 * i + 1] = prof.last();
        }
        scan = std::move(finer);
        nuis = std::move(finer_nuis);
        intervals *= 2;
        previous = bound;
        bound = posterior_quantile(scan, cl);
    }

    for (const auto& p : scan) ref = std::min(ref, p.statistic);
    LimitResult out;
    out.parameter = sp.name;
    out.method = fmt::format("bayesian-flat-prior/{}", to_string(problem.statistic));
    out.confidence_level = cl;
    out.upper_bound = bound;
    out.best_fit = s_hat;
    out.statistic_min = ref;
    out.scan = std::move(scan);
    return out;
}

LimitResult scale_limit(const LimitResult& limit, double factor, std::string parameter) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw DegenerateError(fmt::format("limit scale factor must be positive, got {}", factor));
    }
    LimitResult out = limit;
    out.parameter = std::move(parameter);
    out.upper_bound *= factor;
    out.best_fit *= factor;
    for (auto& p : out.scan) p.value *= factor;
    return out;
}

EnsembleResult run_pseudo_experiments(const PseudoExperimentSpec& spec, std::size_t n, double cl,
                                      std::uint64_t seed, const EnsembleOptions& options) {
    if (n == 0) throw DomainError("pseudo-experiment count must be at least 1");
    check_cl(cl);
    spec.fit.validate();
    const auto& grid = spec.fit.data.grid;
    const auto expected = predict_counts(spec.truth, grid);

    std::vector<std::optional<LimitResult>> slots(n);
    std::vector<std::string> errors(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
        const std::uint64_t cycle_seed = derive_seed(seed, i);
        FitProblem problem = spec.fit;
        const auto counts = sample_poisson(expected, cycle_seed);
        problem.data.values.assign(counts.begin(), counts.end());
        problem.data.sigma.clear();
        problem.seed = cycle_seed;
        try {
            slots[i] = bayesian_upper_limit(problem, cl, options.limit);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    EnsembleResult out;
    out.requested = n;
    out.seed = seed;
    out.config_hash = content_hash(fmt::format("truth={{{}}};true_signal={:.17g};fit={{{}}};n={};cl={:.17g}",
                                               describe(spec.truth), spec.true_signal, describe(spec.fit), n, cl));
    std::size_t covered = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) {
            if (slots[i]->upper_bound >= spec.true_signal) ++covered;
            out.limits.push_back(std::move(*slots[i]));
            out.cycles.push_back(i);
        } else {
            out.failures.emplace_back(i, errors[i]);
        }
    }
    out.coverage = out.limits.empty() ? 0.0
                                      : static_cast<double>(covered) / static_cast<double>(out.limits.size());
    return out;
}

}  // namespace xlim
