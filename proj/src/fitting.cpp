#include "nearprobe/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nearprobe/errors.hpp"

namespace nearprobe {

namespace {

// Solve the symmetric positive (semi)definite p x p system in place via
// Gaussian elimination with partial pivoting; p <= 4 here.
bool solve_small(std::vector<double>& A, std::vector<double>& b, int p, double* min_pivot) {
    *min_pivot = HUGE_VAL;
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int r = col + 1; r < p; ++r) {
            if (std::abs(A[r * p + col]) > std::abs(A[pivot * p + col])) pivot = r;
        }
        if (pivot != col) {
            for (int c = 0; c < p; ++c) std::swap(A[col * p + c], A[pivot * p + c]);
            std::swap(b[col], b[pivot]);
        }
        const double diag = A[col * p + col];
        *min_pivot = std::min(*min_pivot, std::abs(diag));
        if (std::abs(diag) < 1e-300) return false;
        for (int r = col + 1; r < p; ++r) {
            const double f = A[r * p + col] / diag;
            for (int c = col; c < p; ++c) A[r * p + c] -= f * A[col * p + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = p - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < p; ++c) acc -= A[r * p + c] * b[c];
        b[r] = acc / A[r * p + r];
    }
    return true;
}

double cost_of(const FitModel& model, const std::vector<double>& params,
               const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = model.eval(params, x[i]) - y[i];
        acc += r * r;
    }
    return acc;
}

std::vector<double> clamp_to_box(const FitModel& model, std::vector<double> p) {
    for (size_t j = 0; j < p.size(); ++j) p[j] = std::clamp(p[j], model.lower[j], model.upper[j]);
    return p;
}

}  // namespace

FitResult fit(const FitModel& model, const std::vector<double>& x, const std::vector<double>& y,
              const std::optional<std::vector<double>>& init) {
    const int p = static_cast<int>(model.param_names.size());
    const size_t n = x.size();
    if (y.size() != n) throw std::invalid_argument("fit: x/y length mismatch");
    if (n < static_cast<size_t>(p)) {
        throw std::invalid_argument("fit: need at least as many points as parameters");
    }
    for (size_t i = 1; i < n; ++i) {
        if (!(x[i] > x[i - 1])) {
            throw std::invalid_argument("fit: abscissae must be strictly increasing");
        }
    }

    std::vector<double> params = clamp_to_box(model, init ? *init : model.initial_guess(x, y));
    double cost = cost_of(model, params, x, y);

    double damping = 1e-3;
    FitResult res;
    res.converged = false;
    int it = 0;
    const int max_iter = 400;

    std::vector<double> jac(n * p);
    for (; it < max_iter; ++it) {
        // Numeric Jacobian, central differences.
        for (int j = 0; j < p; ++j) {
            const double h = 1e-7 * std::max(1e-4, std::abs(params[j]));
            std::vector<double> lo = params, hi = params;
            hi[j] += h;
            lo[j] -= h;
            for (size_t i = 0; i < n; ++i) {
                jac[i * p + j] = (model.eval(hi, x[i]) - model.eval(lo, x[i])) / (2.0 * h);
            }
        }
        std::vector<double> jtj(p * p, 0.0), jtr(p, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double r = y[i] - model.eval(params, x[i]);
            for (int a = 0; a < p; ++a) {
                jtr[a] += jac[i * p + a] * r;
                for (int b = 0; b <= a; ++b) jtj[a * p + b] += jac[i * p + a] * jac[i * p + b];
            }
        }
        for (int a = 0; a < p; ++a) {
            for (int b = a + 1; b < p; ++b) jtj[a * p + b] = jtj[b * p + a];
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 40 && !stepped; ++attempt) {
            std::vector<double> A = jtj;
            std::vector<double> rhs = jtr;
            for (int a = 0; a < p; ++a) A[a * p + a] += damping * std::max(jtj[a * p + a], 1e-30);
            double min_pivot = 0.0;
            if (!solve_small(A, rhs, p, &min_pivot)) {
                std::ostringstream msg;
                msg << "singular local model (pivot " << min_pivot << ")";
                res.diagnostic = msg.str();
                damping *= 10.0;
                continue;
            }
            std::vector<double> trial(params);
            for (int a = 0; a < p; ++a) trial[a] += rhs[a];
            trial = clamp_to_box(model, trial);
            const double trial_cost = cost_of(model, trial, x, y);
            if (trial_cost <= cost * (1.0 + 1e-14)) {
                double step_rel = 0.0;
                for (int a = 0; a < p; ++a) {
                    step_rel = std::max(step_rel, std::abs(trial[a] - params[a]) /
                                                      std::max(1e-12, std::abs(params[a])));
                }
                const double cost_rel = std::abs(cost - trial_cost) / std::max(cost, 1e-300);
                params = trial;
                cost = trial_cost;
                damping = std::max(1e-12, damping * 0.3);
                stepped = true;
                if (step_rel < 1e-10 && cost_rel < 1e-10) {
                    res.converged = true;
                }
            } else {
                damping *= 10.0;
            }
        }
        if (res.converged) break;
        if (!stepped) {
            // No downhill step found at any damping: treat the current point
            // as the (possibly boundary) optimum.
            res.converged = true;
            break;
        }
    }

    res.params = params;
    res.iterations = it + 1;
    res.residual_norm = std::sqrt(cost);
    res.at_bound.resize(p);
    for (int j = 0; j < p; ++j) {
        const double span = model.upper[j] - model.lower[j];
        res.at_bound[j] = std::abs(params[j] - model.lower[j]) < 1e-12 * std::max(1.0, span) ||
                          std::abs(params[j] - model.upper[j]) < 1e-12 * std::max(1.0, span);
        if (res.at_bound[j] && res.diagnostic.empty()) {
            res.diagnostic = "parameter '" + model.param_names[j] + "' at bound";
        }
    }
    if (!res.converged && res.diagnostic.empty()) {
        res.diagnostic = "no convergence after " + std::to_string(max_iter) + " iterations";
    }

    // One-sigma uncertainties from the local quadratic model scaled by the
    // residual variance.
    res.uncertainties.assign(p, 0.0);
    if (n > static_cast<size_t>(p)) {
        std::vector<double> jtj(p * p, 0.0);
        for (int j = 0; j < p; ++j) {
            const double h = 1e-7 * std::max(1e-4, std::abs(params[j]));
            std::vector<double> lo = params, hi = params;
            hi[j] += h;
            lo[j] -= h;
            for (size_t i = 0; i < n; ++i) {
                jac[i * p + j] = (model.eval(hi, x[i]) - model.eval(lo, x[i])) / (2.0 * h);
            }
        }
        for (size_t i = 0; i < n; ++i) {
            for (int a = 0; a < p; ++a) {
                for (int b = 0; b <= a; ++b) jtj[a * p + b] += jac[i * p + a] * jac[i * p + b];
            }
        }
        for (int a = 0; a < p; ++a) {
            for (int b = a + 1; b < p; ++b) jtj[a * p + b] = jtj[b * p + a];
        }
        const double sigma2 = cost / static_cast<double>(n - p);
        // Invert by solving against unit vectors.
        for (int j = 0; j < p; ++j) {
            std::vector<double> A = jtj;
            std::vector<double> e(p, 0.0);
            e[j] = 1.0;
            double min_pivot = 0.0;
            if (solve_small(A, e, p, &min_pivot) && e[j] > 0.0) {
                res.uncertainties[j] = std::sqrt(sigma2 * e[j]);
            }
        }
    }
    return res;
}

FitModel model_double_exp() {
    FitModel m;
    m.id = "double_exp";
    m.param_names = {"od0", "gamma"};
    m.lower = {0.0, 0.0};
    m.upper = {50.0, 1e9};
    m.eval = [](const std::vector<double>& p, double t) {
        return std::exp(-p[0] * std::exp(-p[1] * t));
    };
    m.initial_guess = [](const std::vector<double>& x, const std::vector<double>& y) {
        const double y0 = std::clamp(y.front(), 1e-12, 1.0 - 1e-12);
        const double y1 = std::clamp(y.back(), 1e-12, 1.0 - 1e-12);
        const double od_first = -std::log(y0);
        const double od_last = std::max(-std::log(y1), 1e-9 * od_first);
        double gamma = 0.0;
        if (x.back() > x.front() && od_last < od_first) {
            gamma = std::log(od_first / od_last) / (x.back() - x.front());
        }
        return std::vector<double>{od_first, gamma};
    };
    return m;
}

FitModel model_exp_lifetime() {
    FitModel m;
    m.id = "exp_lifetime";
    m.param_names = {"amplitude", "tau"};
    m.lower = {0.0, 1e-12};
    m.upper = {1e6, 1e6};
    m.eval = [](const std::vector<double>& p, double t) { return p[0] * std::exp(-t / p[1]); };
    m.initial_guess = [](const std::vector<double>& x, const std::vector<double>& y) {
        const double a = std::max(y.front(), 1e-12);
        const double b = std::max(y.back(), 1e-12 * a);
        double tau = x.back() - x.front();
        if (b < a) tau = (x.back() - x.front()) / std::log(a / b);
        return std::vector<double>{a, tau};
    };
    return m;
}

FitModel model_saturation_absorption() {
    FitModel m;
    m.id = "saturation_absorption";
    m.param_names = {"p_max", "p_c"};
    m.lower = {0.0, 1e-30};
    m.upper = {1.0, 1.0};  // watts; generous for pW-scale data
    m.eval = [](const std::vector<double>& p, double x) {
        return p[0] * (1.0 - std::exp(-x / p[1]));
    };
    m.initial_guess = [](const std::vector<double>& x, const std::vector<double>& y) {
        const double p_max = *std::max_element(y.begin(), y.end()) * 1.05 + 1e-30;
        double p_c = x.back() / 3.0;
        for (size_t i = 0; i < x.size(); ++i) {
            if (y[i] > 0.63 * p_max) {
                p_c = std::max(x[i], 1e-30);
                break;
            }
        }
        return std::vector<double>{p_max, p_c};
    };
    return m;
}

FitModel model_od_spectrum(double linewidth) {
    FitModel m;
    m.id = "od_spectrum";
    m.param_names = {"od0", "s"};
    m.lower = {0.0, 0.0};
    m.upper = {50.0, 1e4};
    m.eval = [linewidth](const std::vector<double>& p, double delta) {
        const double q = 2.0 * delta / linewidth;
        return std::exp(-p[0] / (1.0 + p[1] + q * q));
    };
    m.initial_guess = [](const std::vector<double>& x, const std::vector<double>& y) {
        (void)x;
        const double y_min = std::clamp(*std::min_element(y.begin(), y.end()), 1e-12, 1.0 - 1e-12);
        return std::vector<double>{-std::log(y_min), 0.1};
    };
    return m;
}

FitModel model_by_id(const std::string& id, double linewidth) {
    if (id == "double_exp") return model_double_exp();
    if (id == "exp_lifetime") return model_exp_lifetime();
    if (id == "saturation_absorption") return model_saturation_absorption();
    if (id == "od_spectrum") return model_od_spectrum(linewidth);
    throw ConfigError("unknown fit model '" + id +
                      "' (expected double_exp, exp_lifetime, saturation_absorption, od_spectrum)");
}

void filter_strictly_increasing(std::vector<double>& x, std::vector<double>& y) {
    std::vector<double> fx, fy;
    fx.reserve(x.size());
    fy.reserve(y.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (fx.empty() || x[i] > fx.back()) {
            fx.push_back(x[i]);
            fy.push_back(y[i]);
        }
    }
    x.swap(fx);
    y.swap(fy);
}

FlankMetrics extract_flank_metrics(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.empty()) {
        throw std::invalid_argument("extract_flank_metrics: bad trace");
    }
    if (t.back() - t.front() < 500e-6) {
        throw std::invalid_argument(
            "extract_flank_metrics: trace must cover at least 500 us of probe time");
    }
    const double t0 = t.front();
    std::vector<double> early_t, early_y, late_t, late_y;
    for (size_t i = 0; i < t.size(); ++i) {
        const double rel = t[i] - t0;
        if (rel <= 10e-6 + 1e-12) {
            early_t.push_back(rel);
            early_y.push_back(y[i]);
        }
        if (rel >= 10e-6 - 1e-12 && rel <= 500e-6 + 1e-12) {
            late_t.push_back(rel);
            late_y.push_back(y[i]);
        }
    }
    filter_strictly_increasing(early_t, early_y);
    filter_strictly_increasing(late_t, late_y);
    if (early_t.size() < 3 || late_t.size() < 3) {
        throw std::invalid_argument("extract_flank_metrics: insufficient window coverage");
    }
    const FitModel m = model_double_exp();
    const FitResult late = fit(m, late_t, late_y);
    const FitResult early = fit(m, early_t, early_y);
    FlankMetrics out;
    out.gamma = late.params[1];
    out.gamma_ini = early.params[1];
    out.od0_long = late.params[0];
    out.delta_od_ini = -std::log(std::max(y.front(), 1e-300)) - late.params[0];
    return out;
}

}  // namespace nearprobe
