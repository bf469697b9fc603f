/**
 * @file elliptic.hpp
 * @brief Quasi-steady chemoattractant: (I - Delta_h) S = rho with Neumann walls.
 *
 * Three-point Laplacian; the wall rows use mirror ghost nodes (S_{-1} = S_1),
 * so row 0 reads S_0 - 2 (S_1 - S_0)/h^2 = rho_0.  The matrix is a strictly
 * diagonally dominant M-matrix, which gives the discrete maximum principle
 * and makes the Thomas algorithm stable without pivoting.
 */
#pragma once

#include "motility/grid.hpp"

#include <span>
#include <vector>

namespace motility {

/// Solve a tridiagonal system in place. `lower[0]` and `upper[n-1]` are ignored.
/// `rhs` is overwritten with the solution.
inline void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                         std::span<const double> upper, std::span<double> rhs,
                         std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    double denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = i + 1 < n ? upper[i] / denom : 0.0;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

/// Reusable solver for one grid; owns its scratch buffers, so one instance
/// must not be shared between threads.
class ChemoattractantSolver {
public:
    explicit ChemoattractantSolver(const Grid1D& grid) : n_(grid.size()) {
        const double r = 1.0 / (grid.spacing() * grid.spacing());
        lower_.assign(n_, -r);
        upper_.assign(n_, -r);
        diag_.assign(n_, 1.0 + 2.0 * r);
        upper_[0] = -2.0 * r;
        lower_[n_ - 1] = -2.0 * r;
    }

    void solve(std::span<const double> rho, std::span<double> S) {
        std::copy(rho.begin(), rho.end(), S.begin());
        thomas_solve(lower_, diag_, upper_, S, scratch_);
    }

private:
    std::size_t n_;
    std::vector<double> lower_, diag_, upper_, scratch_;
};

inline Field solve_chemoattractant(const Field& rho) {
    Field S(rho.grid);
    ChemoattractantSolver solver(rho.grid);
    solver.solve(rho.values, S.values);
    return S;
}

}  // namespace motility
