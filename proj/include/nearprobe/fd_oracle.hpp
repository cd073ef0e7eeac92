#pragma once

#include <functional>
#include <vector>

namespace nearprobe {

// Test oracle: second-order finite-difference diagonalization of the 1D
// radial Schroedinger problem with Dirichlet boundaries. Independent of the
// analytic Morse machinery; linked only by tests and diagnostics.
struct OracleGrid {
    double d_min;
    double d_max;
    int points;           // >= 2000
    double max_spacing;   // reject coarser grids; <= 0 disables the check
};

struct OracleResult {
    std::vector<double> grid;                   // node positions
    std::vector<double> energies;               // ascending, J
    std::vector<std::vector<double>> vectors;   // continuum-normalized eigenfunctions
    int bound_count = 0;                        // energies below zero
};

// Eigenpairs with energy below max_energy (threshold convention).
OracleResult diagonalize_oracle(const std::function<double(double)>& potential, double mass,
                                const OracleGrid& grid, double max_energy = 0.0);

// Lowest `count` eigenpairs regardless of sign (for confined model potentials).
OracleResult diagonalize_oracle_lowest(const std::function<double(double)>& potential,
                                       double mass, const OracleGrid& grid, int count);

}  // namespace nearprobe
