#pragma once

#include <functional>

namespace nearprobe {

// Composite Simpson rule on [a, b], refined by successive interval halvings
// until two consecutive results agree to rel_tol (relative to the magnitude
// of the integral, with a small absolute floor for near-zero integrals).
// Starts from initial_panels panels (rounded up to an even count).
// Throws NumericalError with the achieved tolerance if max_halvings is hit.
double refined_simpson(const std::function<double(double)>& f, double a, double b,
                       double rel_tol = 1e-8, int initial_panels = 64,
                       int max_halvings = 16);

}  // namespace nearprobe
