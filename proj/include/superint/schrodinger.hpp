#pragma once

#include <functional>
#include <vector>

#include "superint/core.hpp"
#include "superint/integrals.hpp"
#include "superint/potentials.hpp"

namespace superint {

struct Grid1D {
  double a = -12.0, b = 12.0;  // Dirichlet walls
  int N = 2000;                // interior points
  double h() const { return (b - a) / (N + 1); }
  double x(int i) const { return a + h() * (i + 1); }  // i = 0..N-1
};

struct EigenResult {
  std::vector<double> eigenvalues;            // ascending, finest grid
  std::vector<std::vector<double>> vectors;   // L2-normalized, finest grid
  std::vector<double> richardson;             // extrapolated values
  std::vector<double> grid_error;             // |E(N) - E(2N)|
  Grid1D grid;                                // finest grid used
};

// Lowest n eigenpairs of -(hbar^2/2) d2/dx2 + V with Dirichlet walls;
// second-order central differences, Sturm bisection for the values
// (parallel over indices) and inverse iteration for the vectors;
// Richardson extrapolation from the N and 2N grids.
EigenResult solve_1d(const std::function<double(double)>& V, Grid1D grid,
                     int n_levels, double hbar = 1.0,
                     double converge_tol = 1e-2,
                     par::Exec exec = par::default_exec());

// Eigenvalues only, on one grid (building block; exposed for the kernels).
std::vector<double> tridiag_lowest_eigenvalues(const std::vector<double>& diag,
                                               const std::vector<double>& off,
                                               int n_levels,
                                               par::Exec exec = par::default_exec());

struct Level2D {
  double E = 0.0;
  int nx = 0, ny = 0;
  double richardson_error = 0.0;
};

struct Spectrum2DOptions {
  double L = 12.0;   // default half-width per axis
  int N = 2000;
  int levels_per_axis = 16;
  double hbar = 1.0;
  double x_center = 0.0, y_center = 0.0;  // pick the pole-free interval
};

// All sums E = Ex(nx) + Ey(ny) below the cutoff for a separable potential.
// Axis intervals stop at pole guard bands (Dirichlet walls there).
std::vector<Level2D> spectrum_2d_separable(const Potential& pot, double cutoff,
                                           const Spectrum2DOptions& opts = {});

struct CommutatorReport {
  double residual_coarse = 0.0;
  double residual_fine = 0.0;   // grid refined by 2
  double order = 0.0;           // log2(coarse/fine)
};

// Discretizes H and the normal-ordered X on a 2D grid, applies [H, X] to the
// test functions and reports the interior max residual under refinement.
CommutatorReport grid_commutator_residual(
    const Potential& pot, const ThirdOrderIntegral& X, const Region& region,
    int N, const std::vector<std::function<double(Vec2)>>& test_functions);

}  // namespace superint
