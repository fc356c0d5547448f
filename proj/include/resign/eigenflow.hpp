// eigenflow.hpp — smooth, gauge-fixed eigendecomposition of ρ(t) along a grid,
// the state-dependent Hamiltonian that transports the eigenvectors, and the
// eigenvalue rates in the co-rotating diagonal frame.
//
// Conventions: frames hold eigenvector columns ψ̃_k in tracked order (column k
// at t_{n+1} continues column k at t_n). The default gauge is parallel
// transport, ⟨ψ̃_k(t_n)|ψ̃_k(t_{n+1})⟩ > 0, which yields the Hamiltonian of
// minimal Hilbert–Schmidt norm. H = i Σ_k |∂_t ψ̃_k⟩⟨ψ̃_k| = i U̇ U†.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "resign/matrix.hpp"
#include "resign/trajectory.hpp"

namespace resign {

struct EigenFrame {
    double t = 0.0;
    RealVector p;       // eigenvalues in tracked order
    ComplexMatrix U;    // gauge-fixed eigenvector columns
    RealVector phase;   // φ_k: ψ̃_k = e^{iφ_k} ψ_k with ψ_k in the reference gauge
};

struct FrameDerivatives {
    RealVector f;             // eigenvalue rates, Σ f = 0
    ComplexMatrix Udot;
    double offdiag_residual = 0.0;
};

enum class FrameOrdering {
    MatchBasis,  // first frame: column k is the eigenvector with largest weight on |k⟩
    Ascending,   // first frame: solver order (ascending eigenvalues)
};

struct TrackingOptions {
    FrameOrdering ordering = FrameOrdering::MatchBasis;
    double ambiguity_tol = 1e-6;
};

/// Sequential eigenvector continuation along the grid. Throws
/// InsufficientStencil for fewer than three points and
/// DegenerateTrackingFailure when best-overlap matching is ambiguous.
std::vector<EigenFrame> track_frames(std::span<const double> times,
                                     std::span<const DensityState> states,
                                     const TrackingOptions& options = {});

/// Re-phases every column so its reference component (the largest entry of
/// that column in the first frame) is real and positive. This is the
/// "unoptimized" gauge; the Hamiltonian built from it is generally larger.
std::vector<EigenFrame> rephase_to_reference_gauge(std::span<const EigenFrame> frames);

struct HamiltonianEstimate {
    ComplexMatrix H;      // Hermitian part of i U̇ U†
    ComplexMatrix Udot;
    double antihermitian_residual = 0.0;  // ‖(H_raw − H_raw†)/2‖_max before symmetrizing
};

HamiltonianEstimate estimate_hamiltonian(std::span<const EigenFrame> frames, std::size_t n);

/// Hermitian H at grid index n (see estimate_hamiltonian for the diagnostics).
ComplexMatrix build_hamiltonian(std::span<const EigenFrame> frames, std::size_t n);

/// f = diag U†(ρ̇ + i[H, ρ])U. Throws OffDiagonalResidualTooLarge when the
/// off-diagonal part exceeds tol_offdiag (negative ⇒ 1e-6·max(1, ‖ρ̇‖_max)),
/// and TraceLeak when |Σ f| > 1e-8; smaller sums are projected out.
FrameDerivatives rotating_frame_derivative(const ComplexMatrix& rho,
                                           const ComplexMatrix& rho_dot,
                                           const EigenFrame& frame,
                                           const HamiltonianEstimate& hamiltonian,
                                           double tol_offdiag = -1.0);

inline constexpr double kTraceLeakTol = 1e-8;

}  // namespace resign
