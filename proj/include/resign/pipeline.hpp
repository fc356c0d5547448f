// pipeline.hpp — trajectory → state-dependent Lindblad generator.
//
// analyze_trajectory tracks the eigenframes (sequential along the grid), then
// estimates H(t) and the eigenvalue rates f(t) at every grid point.
// synthesize_rates runs the compensation at every grid point and assembles the
// lab-frame generator. Per-point work is OpenMP-parallel; the *_serial
// variants are the reference implementations and must agree bit for bit.

#pragma once

#include <cstddef>
#include <vector>

#include "resign/eigenflow.hpp"
#include "resign/evolution.hpp"
#include "resign/synthesis.hpp"
#include "resign/trajectory.hpp"

namespace resign {

struct AnalysisOptions {
    TrackingOptions tracking;
    double tol_offdiag = -1.0;  // negative ⇒ 1e-6·max(1, ‖ρ̇‖_max) per point
};

struct FrameAnalysis {
    std::vector<double> times;
    std::vector<ComplexMatrix> rho;
    std::vector<EigenFrame> frames;
    std::vector<HamiltonianEstimate> hamiltonians;
    std::vector<FrameDerivatives> derivatives;

    std::size_t size() const noexcept { return times.size(); }
};

FrameAnalysis analyze_trajectory(const Trajectory& traj, const AnalysisOptions& options = {});
FrameAnalysis analyze_trajectory_serial(const Trajectory& traj, const AnalysisOptions& options = {});

struct SynthesisOptions {
    SignPolicy policy = SignPolicy::all_nonnegative();
    SingularityPolicy singularity;
    double eps_f = -1.0;
    double eps_p = 1e-10;
};

struct SynthesisResult {
    std::vector<std::vector<RatedTerm>> terms;  // per grid point
    std::vector<double> flux_deficit;           // per grid point
    std::vector<bool> capped;                   // per grid point
    std::vector<TimeInterval> singular_intervals;
    std::vector<TimeInterval> capped_intervals;
    LindbladGenerator generator;
    std::size_t total_terms = 0;
    std::size_t sign_compliant = 0;
    std::size_t max_terms_per_point = 0;
};

/// Error mode: throws the earliest SingularRate, either at a grid point or for
/// a grid interval inside which a denominator eigenvalue reaches eps_p (cubic
/// Hermite interpolation of p with slopes f). Cap mode: records those
/// intervals, plus intervals around capped points, and excludes them from the
/// generator's verification windows.
SynthesisResult synthesize_rates(const FrameAnalysis& analysis, const SynthesisOptions& options);
SynthesisResult synthesize_rates_serial(const FrameAnalysis& analysis, const SynthesisOptions& options);

/// Minimum over [0, 1] of the cubic Hermite interpolant with values p0, p1 and
/// slopes m0, m1 (per unit time) on an interval of length h.
double hermite_minimum(double p0, double m0, double p1, double m1, double h);

/// Merges overlapping or touching intervals; output sorted by start.
std::vector<TimeInterval> merge_intervals(std::vector<TimeInterval> intervals);

/// Applies LINDBLAD_RESIGN_THREADS (if set) as the OpenMP thread cap.
/// Returns the thread count in effect.
int configure_threads_from_env();

}  // namespace resign
