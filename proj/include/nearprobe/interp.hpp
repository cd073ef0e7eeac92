#pragma once

#include <vector>

namespace nearprobe {

// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes). Monotone data
// stay monotone after interpolation; evaluation clamps outside the grid.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_, y_, m_;
};

}  // namespace nearprobe
