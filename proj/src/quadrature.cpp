#include "nearprobe/quadrature.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "nearprobe/errors.hpp"

namespace nearprobe {

namespace {

double composite_simpson(const std::function<double(double)>& f, double a, double b,
                         int panels) {
    const double h = (b - a) / panels;
    double odd = 0.0, even = 0.0;
    for (int i = 1; i < panels; i += 2) odd += f(a + i * h);
    for (int i = 2; i < panels; i += 2) even += f(a + i * h);
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

}  // namespace

double refined_simpson(const std::function<double(double)>& f, double a, double b,
                       double rel_tol, int initial_panels, int max_halvings) {
    int panels = initial_panels;
    if (panels < 2) panels = 2;
    if (panels % 2) ++panels;

    double prev = composite_simpson(f, a, b, panels);
    double achieved = HUGE_VAL;
    for (int k = 0; k < max_halvings; ++k) {
        panels *= 2;
        const double cur = composite_simpson(f, a, b, panels);
        const double scale = std::max(std::abs(cur), 1e-300);
        achieved = std::abs(cur - prev) / scale;
        if (achieved <= rel_tol || std::abs(cur - prev) < 1e-14 * (1.0 + std::abs(cur))) {
            return cur;
        }
        prev = cur;
    }
    std::ostringstream msg;
    msg << "refined_simpson: no convergence after " << max_halvings
        << " halvings (achieved relative tolerance " << achieved << ", requested " << rel_tol
        << ")";
    throw NumericalError(msg.str());
}

}  // namespace nearprobe
