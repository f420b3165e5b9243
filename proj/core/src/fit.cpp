#include "xlim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "xlim/error.hpp"

namespace xlim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double& bound_field(SpectralModel& model, const FitParameter& p) {
    auto& component = model.components.at(p.component);
    switch (p.field) {
        case ParameterField::line_amplitude:
            if (auto* l = std::get_if<GaussianLine>(&component)) return l->amplitude;
            break;
        case ParameterField::line_centroid:
            if (auto* l = std::get_if<GaussianLine>(&component)) return l->centroid;
            break;
        case ParameterField::continuum_alpha:
            if (auto* c = std::get_if<OneOverEContinuum>(&component)) return c->alpha;
            break;
        case ParameterField::polynomial_coefficient:
            if (auto* b = std::get_if<PolynomialBackground>(&component)) {
                if (p.coefficient < b->coefficients.size()) return b->coefficients[p.coefficient];
            }
            break;
    }
    throw ConfigError(fmt::format("parameter '{}' does not match component {} ({})", p.name, p.component,
                                  to_string(p.field)));
}

double field_value(const SpectralModel& model, const FitParameter& p) {
    return bound_field(const_cast<SpectralModel&>(model), p);
}

// Deviance evaluation with a reusable model copy and expectation buffer.
class Evaluator {
public:
    explicit Evaluator(const FitProblem& problem)
        : problem_(problem), model_(problem.model), expected_(problem.data.grid.size()) {}

    double operator()(std::span<const double> values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            bound_field(model_, problem_.parameters[i]) = values[i];
        }
        try {
            predict_counts_into(model_, problem_.data.grid, expected_);
        } catch (const DomainError&) {
            return kInf;
        }
        return problem_.statistic == Statistic::chi2 ? chi2() : 2.0 * nll();
    }

private:
    double chi2() const {
        const auto& d = problem_.data;
        double sum = 0.0;
        for (std::size_t i = 0; i < expected_.size(); ++i) {
            const double var = d.is_counting() ? std::max(d.values[i], 1.0) : d.sigma[i] * d.sigma[i];
            const double r = d.values[i] - expected_[i];
            sum += r * r / var;
        }
        return sum;
    }

    double nll() const {
        const auto& d = problem_.data;
        double sum = 0.0;
        for (std::size_t i = 0; i < expected_.size(); ++i) {
            const double mu = expected_[i];
            const double n = d.values[i];
            if (mu < 0.0 || (mu == 0.0 && n > 0.0) || !std::isfinite(mu)) return kInf;
            sum += mu - (n > 0.0 ? n * std::log(mu) : 0.0) + std::lgamma(n + 1.0);
        }
        return sum;
    }

    const FitProblem& problem_;
    SpectralModel model_;
    std::vector<double> expected_;
};

void check_same_size(const Observations& data, std::span<const double> expected) {
    if (expected.size() != data.values.size()) {
        throw ShapeError(fmt::format("{} expected values for {} observed bins", expected.size(),
                                     data.values.size()));
    }
}

// Per-coordinate second-difference step chosen so the deviance rises by ~1.
double curvature_step(Evaluator& f, std::vector<double> x, std::size_t j, double f0, double h) {
    const double xj = x[j];
    for (int iter = 0; iter < 30; ++iter) {
        x[j] = xj + h;
        const double fp = f(x);
        x[j] = xj - h;
        const double fm = f(x);
        const double d = fp + fm - 2.0 * f0;
        if (!std::isfinite(d) || d <= 0.0) {
            h *= 0.25;
            continue;
        }
        if (d > 0.5 && d < 4.0) break;
        h *= std::clamp(std::sqrt(1.0 / d), 0.05, 20.0);
    }
    return h;
}

std::vector<double> parameter_errors(Evaluator& f, const std::vector<double>& x, const std::vector<double>& steps,
                                     double f0) {
    const std::size_t n = x.size();
    std::vector<double> errors(n, std::numeric_limits<double>::quiet_NaN());
    if (n == 0) return errors;
    std::vector<double> h(n);
    for (std::size_t j = 0; j < n; ++j) h[j] = curvature_step(f, x, j, f0, steps[j]);

    Eigen::MatrixXd hess(n, n);
    std::vector<double> p = x;
    for (std::size_t j = 0; j < n; ++j) {
        p[j] = x[j] + h[j];
        const double fp = f(p);
        p[j] = x[j] - h[j];
        const double fm = f(p);
        p[j] = x[j];
        hess(j, j) = (fp + fm - 2.0 * f0) / (h[j] * h[j]);
        for (std::size_t k = 0; k < j; ++k) {
            auto at = [&](double sj, double sk) {
                p[j] = x[j] + sj * h[j];
                p[k] = x[k] + sk * h[k];
                const double v = f(p);
                p[j] = x[j];
                p[k] = x[k];
                return v;
            };
            const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h[j] * h[k]);
            hess(j, k) = v;
            hess(k, j) = v;
        }
    }
    if (!hess.allFinite()) return errors;
    // Deviance = −2 ln L, so the covariance is 2·H⁻¹.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return errors;
    const Eigen::MatrixXd cov = 2.0 * ldlt.solve(Eigen::MatrixXd::Identity(n, n));
    for (std::size_t j = 0; j < n; ++j) {
        if (cov(j, j) > 0.0) errors[j] = std::sqrt(cov(j, j));
    }
    return errors;
}

}  // namespace

std::string_view to_string(Statistic statistic) {
    return statistic == Statistic::chi2 ? "chi2" : "poisson_nll";
}

Statistic statistic_from_string(std::string_view text) {
    if (text == "chi2") return Statistic::chi2;
    if (text == "poisson_nll" || text == "poisson") return Statistic::poisson_nll;
    throw ConfigError(fmt::format("unknown statistic '{}' (expected chi2 or poisson_nll)", text));
}

std::string_view to_string(ParameterField field) {
    switch (field) {
        case ParameterField::line_amplitude: return "amplitude";
        case ParameterField::line_centroid: return "centroid";
        case ParameterField::continuum_alpha: return "alpha";
        case ParameterField::polynomial_coefficient: return "coefficient";
    }
    return "amplitude";
}

Observations Observations::from_spectrum(const BinnedSpectrum& spectrum) {
    spectrum.validate();
    Observations out{spectrum.grid, {}, {}};
    out.values.assign(spectrum.counts.begin(), spectrum.counts.end());
    return out;
}

Observations Observations::from_residual(const ResidualSpectrum& residual) {
    return Observations{residual.grid, residual.values, residual.sigma};
}

Observations Observations::slice(std::size_t first, std::size_t last) const {
    Observations out{grid.slice(first, last), {}, {}};
    out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(first),
                      values.begin() + static_cast<std::ptrdiff_t>(last));
    if (!sigma.empty()) {
        out.sigma.assign(sigma.begin() + static_cast<std::ptrdiff_t>(first),
                         sigma.begin() + static_cast<std::ptrdiff_t>(last));
    }
    return out;
}

void Observations::validate() const {
    if (values.size() != grid.size()) {
        throw ShapeError(fmt::format("{} observed values for {} bins", values.size(), grid.size()));
    }
    if (!sigma.empty()) {
        if (sigma.size() != grid.size()) {
            throw ShapeError(fmt::format("{} uncertainties for {} bins", sigma.size(), grid.size()));
        }
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            if (!(sigma[i] > 0.0)) {
                throw DomainError(fmt::format("uncertainty in bin {} must be positive", i));
            }
        }
    }
}

double binned_chi2(const Observations& data, std::span<const double> expected) {
    data.validate();
    check_same_size(data, expected);
    double sum = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const double var = data.is_counting() ? std::max(data.values[i], 1.0) : data.sigma[i] * data.sigma[i];
        const double r = data.values[i] - expected[i];
        sum += r * r / var;
    }
    return sum;
}

double binned_chi2(const BinnedSpectrum& spectrum, const SpectralModel& model) {
    const auto data = Observations::from_spectrum(spectrum);
    return binned_chi2(data, predict_counts(model, spectrum.grid));
}

double binned_poisson_nll(const Observations& data, std::span<const double> expected) {
    data.validate();
    check_same_size(data, expected);
    double sum = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const double mu = expected[i];
        const double n = data.values[i];
        if (mu < 0.0 || !std::isfinite(mu)) {
            throw ModelError(fmt::format("expectation {} in bin {} is negative or not finite", mu, i));
        }
        if (mu == 0.0 && n > 0.0) {
            throw DomainError(fmt::format("infinite NLL: zero expectation with {} observed in bin {}", n, i));
        }
        sum += mu - (n > 0.0 ? n * std::log(mu) : 0.0) + std::lgamma(n + 1.0);
    }
    return sum;
}

double binned_poisson_nll(const BinnedSpectrum& spectrum, const SpectralModel& model) {
    const auto data = Observations::from_spectrum(spectrum);
    return binned_poisson_nll(data, predict_counts(model, spectrum.grid));
}

void FitProblem::validate() const {
    data.validate();
    model.response.validate();
    if (parameters.empty()) {
        throw ConfigError("fit problem has no free parameters");
    }
    if (signal >= parameters.size()) {
        throw ConfigError("signal index out of range");
    }
    if (!(parameters[signal].lower >= 0.0)) {
        throw ConfigError(fmt::format("signal parameter '{}' must be bounded below by 0", parameters[signal].name));
    }
    if (statistic == Statistic::poisson_nll && !data.is_counting()) {
        throw ConfigError("Poisson likelihood needs counting data (no explicit uncertainties)");
    }
    for (const auto& p : parameters) {
        const double v = field_value(model, p);
        if (!(p.lower <= p.upper)) {
            throw ConfigError(fmt::format("parameter '{}' has an empty range", p.name));
        }
        if (v < p.lower || v > p.upper) {
            throw ConfigError(fmt::format("parameter '{}' starts at {} outside [{}, {}]", p.name, v, p.lower,
                                          p.upper));
        }
    }
}

std::vector<double> FitProblem::initial_values() const {
    std::vector<double> out;
    out.reserve(parameters.size());
    for (const auto& p : parameters) out.push_back(field_value(model, p));
    return out;
}

std::vector<double> FitProblem::steps() const {
    std::vector<double> out;
    out.reserve(parameters.size());
    for (const auto& p : parameters) {
        if (p.step > 0.0) {
            out.push_back(p.step);
            continue;
        }
        const double v = std::abs(field_value(model, p));
        out.push_back(v > 0.0 ? 0.1 * v : 1.0);
    }
    return out;
}

SpectralModel FitProblem::apply(std::span<const double> values) const {
    if (values.size() != parameters.size()) {
        throw ShapeError("parameter vector length does not match the fit problem");
    }
    SpectralModel out = model;
    for (std::size_t i = 0; i < values.size(); ++i) bound_field(out, parameters[i]) = values[i];
    return out;
}

double FitProblem::deviance(std::span<const double> values) const {
    Evaluator f(*this);
    return f(values);
}

FitResult fit_minimize(const FitProblem& problem, const FitOptions& options) {
    problem.validate();
    Evaluator f(problem);
    const auto start = problem.initial_values();
    const auto steps = problem.steps();
    std::vector<double> lower, upper;
    for (const auto& p : problem.parameters) {
        lower.push_back(p.lower);
        upper.push_back(p.upper);
    }
    SimplexOptions simplex = options.simplex;
    simplex.seed = problem.seed ^ options.simplex.seed;
    auto res = minimize_simplex([&f](std::span<const double> x) { return f(x); }, start, steps, lower, upper,
                                simplex);
    if (!std::isfinite(res.value)) {
        throw ConvergenceError("fit found no point with a finite statistic", res.trace);
    }

    FitResult out;
    out.values = res.x;
    out.statistic = res.value;
    out.evaluations = res.evaluations;
    out.restarts = res.restarts;
    out.trace = std::move(res.trace);
    out.signal_at_boundary = out.values[problem.signal] <= problem.parameters[problem.signal].lower;
    if (options.compute_errors) {
        out.errors = parameter_errors(f, out.values, steps, out.statistic);
    } else {
        out.errors.assign(out.values.size(), std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

FitResult fit_with_fixed_signal(const FitProblem& problem, double signal, std::span<const double> start,
                                const FitOptions& options) {
    const std::size_t n = problem.parameters.size();
    std::vector<double> full = start.empty() ? problem.initial_values()
                                             : std::vector<double>(start.begin(), start.end());
    if (full.size() != n) throw ShapeError("warm start has the wrong number of parameters");
    full[problem.signal] = signal;

    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != problem.signal) free.push_back(i);
    }
    Evaluator f(problem);
    const auto all_steps = problem.steps();
    std::vector<double> x0, steps, lower, upper;
    for (std::size_t i : free) {
        const auto& p = problem.parameters[i];
        x0.push_back(std::clamp(full[i], p.lower, p.upper));
        steps.push_back(all_steps[i]);
        lower.push_back(p.lower);
        upper.push_back(p.upper);
    }
    std::vector<double> work = full;
    auto objective = [&](std::span<const double> x) {
        for (std::size_t k = 0; k < free.size(); ++k) work[free[k]] = x[k];
        return f(work);
    };
    SimplexOptions simplex = options.simplex;
    simplex.seed = problem.seed ^ options.simplex.seed;
    auto res = minimize_simplex(objective, x0, steps, lower, upper, simplex);

    FitResult out;
    out.values = full;
    for (std::size_t k = 0; k < free.size(); ++k) out.values[free[k]] = res.x[k];
    out.statistic = res.value;
    out.evaluations = res.evaluations;
    out.restarts = res.restarts;
    out.errors.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.trace = std::move(res.trace);
    out.signal_at_boundary = signal <= problem.parameters[problem.signal].lower;
    return out;
}

FitParameter signal_parameter(std::string name, std::size_t component, ParameterField field,
                              std::size_t coefficient) {
    FitParameter p{std::move(name), component, field, coefficient};
    p.lower = 0.0;
    return p;
}

FitParameter nuisance_parameter(std::string name, std::size_t component, ParameterField field,
                                std::size_t coefficient) {
    return FitParameter{std::move(name), component, field, coefficient};
}

std::string describe(const FitProblem& problem) {
    std::string out = fmt::format("statistic={};signal={};model={{{}}};grid=[", to_string(problem.statistic),
                                  problem.signal, describe(problem.model));
    for (double e : problem.data.grid.edges()) out += fmt::format("{:.17g},", e);
    out += "];params=";
    for (const auto& p : problem.parameters) {
        out += fmt::format("{}:{}:{}:{}:{:.17g}:{:.17g}:{:.17g},", p.name, p.component, to_string(p.field),
                           p.coefficient, p.lower, p.upper, p.step);
    }
    return out;
}

}  // namespace xlim
