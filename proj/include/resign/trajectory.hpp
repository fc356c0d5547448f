// trajectory.hpp — sampled density-matrix trajectory on a time grid

#pragma once

#include <cstddef>
#include <vector>

#include "resign/matrix.hpp"

namespace resign {

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityState> states;
    // Exact time derivatives at each grid point; empty when only samples are
    // known, in which case consumers fall back to finite differences.
    std::vector<ComplexMatrix> derivatives;

    std::size_t size() const noexcept { return times.size(); }
    Index dim() const noexcept { return states.empty() ? 0 : states.front().dim(); }
    bool has_derivatives() const noexcept { return !derivatives.empty(); }

    /// Throws GridMismatch / DimMismatch when sizes, ordering or dimensions
    /// are inconsistent.
    void check() const;
};

/// Three-point finite-difference weights for d/dt at grid index n: central
/// in the interior, one-sided second order at both ends. Works on
/// non-uniform grids. Requires at least three points.
struct Stencil {
    std::size_t index[3];
    double weight[3];
};
Stencil derivative_stencil(const std::vector<double>& times, std::size_t n);

/// ρ̇ at every grid point: exact derivatives when present, else finite
/// differences of the samples.
std::vector<ComplexMatrix> trajectory_derivatives(const Trajectory& traj);

}  // namespace resign
