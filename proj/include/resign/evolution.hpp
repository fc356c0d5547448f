// evolution.hpp — Lindblad right-hand side, fixed-step RK4 integration of
// time-dependent generators and closed-loop verification of a synthesized
// generator against the trajectory it was built from.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "resign/matrix.hpp"
#include "resign/trajectory.hpp"

namespace resign {

struct Dissipator {
    ComplexMatrix op;
    double rate = 0.0;
};

struct TimeInterval {
    double start = 0.0;
    double end = 0.0;
    bool contains(double t) const noexcept { return t >= start && t <= end; }
};

/// Generator sampled on a grid. Between grid points the action is
/// interpolated linearly (Midpoint) and held constant over each RK4 substep at
/// the substep midpoint, or held at the left grid value (PiecewiseConstant).
struct LindbladGenerator {
    enum class Interpolation { Midpoint, PiecewiseConstant };

    std::vector<double> grid;
    std::vector<ComplexMatrix> H;
    std::vector<std::vector<Dissipator>> terms;
    Interpolation interpolation = Interpolation::Midpoint;
    // Grid intervals that verification must skip (singular or capped rates).
    std::vector<TimeInterval> excluded;

    std::size_t size() const noexcept { return grid.size(); }
    Index dim() const noexcept { return H.empty() ? 0 : H.front().rows(); }

    /// Strictly increasing grid, consistent sizes, Hermitian H within 1e-8.
    void check() const;

    /// Constant generator replicated over a grid.
    static LindbladGenerator constant(std::vector<double> grid, const ComplexMatrix& H,
                                      const std::vector<Dissipator>& terms);
};

/// −i[H, ρ] + Σ γ (L ρ L† − ½{L†L, ρ}). Throws DimMismatch.
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& H,
                           std::span<const Dissipator> terms);

/// Column-major vectorized generator S with vec(rhs(ρ)) = S·vec(ρ).
ComplexMatrix superoperator(const ComplexMatrix& H, std::span<const Dissipator> terms);

struct IntegrationOptions {
    int substeps = 1;
    double blowup_norm = 10.0;
};

/// Classical RK4 with step = grid spacing / substeps. ρ is re-symmetrized after
/// every step; the trace is not renormalized. Returns the state at every grid
/// point from `first` through `last` inclusive (defaults: whole grid).
/// Throws StepBlowup when ‖ρ‖_max exceeds options.blowup_norm.
std::vector<ComplexMatrix> integrate(const ComplexMatrix& rho0, const LindbladGenerator& gen,
                                     const IntegrationOptions& options = {},
                                     std::size_t first = 0, std::size_t last = static_cast<std::size_t>(-1));

std::vector<ComplexMatrix> integrate(const DensityState& rho0, const LindbladGenerator& gen,
                                     const IntegrationOptions& options = {});

struct PointResidual {
    double t = 0.0;
    double rhs_error = 0.0;    // ‖L_t(ρ) − ρ̇_fd‖_max
    double state_error = 0.0;  // ‖ρ_integrated − ρ_input‖_max
    double trace = 1.0;        // Tr ρ_integrated
    double min_eigenvalue = 0.0;
    double rhs_hermiticity = 0.0;  // ‖R − R†‖_max of the rhs at the input state
    double rhs_trace = 0.0;        // |Tr R|
    double rhs_scale = 1.0;
    bool excluded = false;
};

struct VerificationReport {
    double max_state_error = 0.0;
    double max_rhs_error = 0.0;
    double trace_drift = 0.0;  // max |Tr ρ(t) − Tr ρ(window start)| over integrated windows
    double min_eigenvalue = 0.0;
    double duration = 0.0;     // total integrated time
    std::size_t windows = 0;
    std::vector<TimeInterval> excluded;
    std::vector<PointResidual> points;
};

struct VerificationOptions {
    IntegrationOptions integration;
    // Use the trajectory's exact derivatives for the rhs residual instead of
    // central differences.
    bool use_exact_derivatives = false;
};

/// Compares the generator against the input trajectory pointwise (rhs
/// residual) and by re-integration. Integration restarts from the input state
/// after every excluded interval; points inside excluded intervals carry no
/// errors. Residuals are evaluated in parallel.
VerificationReport verify_reconstruction(const Trajectory& input, const LindbladGenerator& gen,
                                         const VerificationOptions& options = {});

/// Serial reference for verify_reconstruction; identical results.
VerificationReport verify_reconstruction_serial(const Trajectory& input, const LindbladGenerator& gen,
                                                const VerificationOptions& options = {});

}  // namespace resign
