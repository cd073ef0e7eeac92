#include "nearprobe/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nearprobe {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
        throw std::invalid_argument("MonotoneCubic: need >= 2 matching nodes");
    }
    for (size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw std::invalid_argument("MonotoneCubic: abscissae must increase strictly");
        }
    }
    std::vector<double> slope(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) slope[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    m_.resize(n);
    m_[0] = slope[0];
    m_[n - 1] = slope[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) {
        if (slope[i - 1] * slope[i] <= 0.0) {
            m_[i] = 0.0;
        } else {
            m_[i] = 0.5 * (slope[i - 1] + slope[i]);
        }
    }
    // Fritsch-Carlson limiter
    for (size_t i = 0; i + 1 < n; ++i) {
        if (slope[i] == 0.0) {
            m_[i] = 0.0;
            m_[i + 1] = 0.0;
            continue;
        }
        const double alpha = m_[i] / slope[i];
        const double beta = m_[i + 1] / slope[i];
        const double r = alpha * alpha + beta * beta;
        if (r > 9.0) {
            const double t = 3.0 / std::sqrt(r);
            m_[i] = t * alpha * slope[i];
            m_[i + 1] = t * beta * slope[i];
        }
    }
}

double MonotoneCubic::operator()(double x) const {
    if (x_.empty()) throw std::logic_error("MonotoneCubic: empty interpolant");
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const size_t i = static_cast<size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

}  // namespace nearprobe
