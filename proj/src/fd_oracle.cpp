#include "nearprobe/fd_oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <lapacke.h>

#include "nearprobe/constants.hpp"
#include "nearprobe/errors.hpp"

namespace nearprobe {

namespace {

struct Tridiagonal {
    std::vector<double> diag, off, grid;
    double spacing;
};

Tridiagonal assemble(const std::function<double(double)>& potential, double mass,
                     const OracleGrid& grid) {
    if (grid.points < 2000) {
        throw std::invalid_argument("diagonalize_oracle: need at least 2000 grid points, got " +
                                    std::to_string(grid.points));
    }
    if (grid.d_max <= grid.d_min) {
        throw std::invalid_argument("diagonalize_oracle: empty grid interval");
    }
    const int n = grid.points;
    const double h = (grid.d_max - grid.d_min) / (n + 1);
    if (grid.max_spacing > 0.0 && h > grid.max_spacing) {
        throw std::invalid_argument("diagonalize_oracle: grid spacing " + std::to_string(h) +
                                    " m coarser than required " + std::to_string(grid.max_spacing) +
                                    " m");
    }
    Tridiagonal t;
    t.spacing = h;
    t.diag.resize(n);
    t.off.resize(n - 1);
    t.grid.resize(n);
    const double kinetic = si.hbar * si.hbar / (2.0 * mass * h * h);
    for (int i = 0; i < n; ++i) {
        t.grid[i] = grid.d_min + (i + 1) * h;
        t.diag[i] = 2.0 * kinetic + potential(t.grid[i]);
    }
    for (int i = 0; i + 1 < n; ++i) t.off[i] = -kinetic;
    return t;
}

OracleResult solve(const Tridiagonal& t, char range, double vu, int iu) {
    const int n = static_cast<int>(t.diag.size());

    // Pass 1: eigenvalue count and values.
    std::vector<double> d1 = t.diag, e1 = t.off;
    lapack_int m = 0;
    std::vector<double> w(n);
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', range, n, d1.data(), e1.data(),
                                     -1e300, vu, 1, iu, 0.0, &m, w.data(), nullptr, n,
                                     isuppz.data());
    if (info != 0) throw NumericalError("dstevr (values) failed, info = " + std::to_string(info));
    if (m == 0) {
        OracleResult r;
        r.grid = t.grid;
        return r;
    }

    // Pass 2: eigenvectors for the selected range.
    std::vector<double> d2 = t.diag, e2 = t.off;
    std::vector<double> z(static_cast<size_t>(n) * m);
    lapack_int m2 = 0;
    info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', range, n, d2.data(), e2.data(), -1e300, vu, 1,
                          iu, 0.0, &m2, w.data(), z.data(), n, isuppz.data());
    if (info != 0) throw NumericalError("dstevr (vectors) failed, info = " + std::to_string(info));

    OracleResult r;
    r.grid = t.grid;
    r.energies.assign(w.begin(), w.begin() + m2);
    r.vectors.resize(m2);
    const double norm = 1.0 / std::sqrt(t.spacing);  // unit 2-norm -> unit integral
    for (int j = 0; j < m2; ++j) {
        r.vectors[j].resize(n);
        for (int i = 0; i < n; ++i) r.vectors[j][i] = z[static_cast<size_t>(j) * n + i] * norm;
    }
    for (double e : r.energies) {
        if (e < 0.0) ++r.bound_count;
    }
    return r;
}

}  // namespace

OracleResult diagonalize_oracle(const std::function<double(double)>& potential, double mass,
                                const OracleGrid& grid, double max_energy) {
    return solve(assemble(potential, mass, grid), 'V', max_energy, 0);
}

OracleResult diagonalize_oracle_lowest(const std::function<double(double)>& potential,
                                       double mass, const OracleGrid& grid, int count) {
    if (count < 1) throw std::invalid_argument("diagonalize_oracle_lowest: count must be >= 1");
    return solve(assemble(potential, mass, grid), 'I', 0.0, count);
}

}  // namespace nearprobe
