#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nearprobe {

// Nonlinear least-squares model: y = eval(params, x) on a bounded parameter
// box, with a closed-form initial guess so fits are reproducible.
struct FitModel {
    std::string id;
    std::vector<std::string> param_names;
    std::vector<double> lower, upper;
    std::function<double(const std::vector<double>&, double)> eval;
    std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)>
        initial_guess;
};

struct FitResult {
    std::vector<double> params;
    std::vector<double> uncertainties;  // one standard deviation
    std::vector<bool> at_bound;
    double residual_norm = 0.0;  // sqrt(sum of squared residuals)
    bool converged = false;
    int iterations = 0;
    std::string diagnostic;  // set when converged is false or a bound is active
};

// Damped (Levenberg-Marquardt) least squares. Data abscissae must be strictly
// increasing; data count must be >= parameter count. Deterministic.
FitResult fit(const FitModel& model, const std::vector<double>& x, const std::vector<double>& y,
              const std::optional<std::vector<double>>& init = std::nullopt);

// transmission(t) = exp(-OD0 exp(-gamma t))
FitModel model_double_exp();
// y(t) = A exp(-t / tau)
FitModel model_exp_lifetime();
// P_abs(P_in) = P_max (1 - exp(-P_in / P_c))
FitModel model_saturation_absorption();
// transmission(delta) = exp(-OD0 / (1 + s + (2 delta / Gamma)^2))
FitModel model_od_spectrum(double linewidth);

FitModel model_by_id(const std::string& id, double linewidth);

// Keep only samples with strictly increasing abscissa (drops duplicate-time
// points that stitching produces at segment boundaries).
void filter_strictly_increasing(std::vector<double>& x, std::vector<double>& y);

// Early-flank versus long-time decay metrics of a transmission trace:
// gamma from a double-exponential fit on [10, 500] us, gamma_ini on [0, 10] us,
// delta_od_ini = -ln(y(0+)) - OD0_long (positive for a steeper early flank).
struct FlankMetrics {
    double gamma = 0.0;       // 1/s
    double gamma_ini = 0.0;   // 1/s
    double od0_long = 0.0;
    double delta_od_ini = 0.0;
};

FlankMetrics extract_flank_metrics(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace nearprobe
