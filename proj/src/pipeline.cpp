#include "resign/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>

namespace resign {

namespace {

// Rethrows the exception of the lowest grid index so parallel and serial
// runs fail identically.
void rethrow_first(const std::vector<std::exception_ptr>& errors) {
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

FrameAnalysis analyze_impl(const Trajectory& traj, const AnalysisOptions& options, bool parallel) {
    traj.check();
    FrameAnalysis out;
    out.times = traj.times;
    out.rho.reserve(traj.size());
    for (const auto& s : traj.states) out.rho.push_back(s.matrix());
    out.frames = track_frames(traj.times, traj.states, options.tracking);

    const auto rho_dot = trajectory_derivatives(traj);
    const std::size_t count = traj.size();
    out.hamiltonians.resize(count);
    out.derivatives.resize(count);
    std::vector<std::exception_ptr> errors(count);

#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(count); ++n) {
        try {
            out.hamiltonians[n] = estimate_hamiltonian(out.frames, n);
            out.derivatives[n] = rotating_frame_derivative(out.rho[n], rho_dot[n], out.frames[n],
                                                           out.hamiltonians[n], options.tol_offdiag);
        } catch (...) {
            errors[n] = std::current_exception();
        }
    }
    rethrow_first(errors);
    return out;
}

struct PointOutcome {
    Compensation comp;
    std::exception_ptr error;
};

SynthesisResult synthesize_impl(const FrameAnalysis& analysis, const SynthesisOptions& options,
                                bool parallel) {
    const std::size_t count = analysis.size();
    if (count < 2) throw GridMismatch("synthesize: needs at least two grid points");
    const int d = static_cast<int>(analysis.frames.front().p.size());
    options.policy.check(d);

    std::vector<PointOutcome> outcome(count);
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(count); ++n) {
        RateProblem problem;
        problem.p = analysis.frames[n].p;
        problem.f = analysis.derivatives[n].f;
        problem.eps_f = options.eps_f;
        problem.eps_p = options.eps_p;
        problem.time = analysis.times[n];
        try {
            outcome[n].comp = compensate(problem, options.policy, options.singularity);
        } catch (const SingularRate& e) {
            // Widen the point failure to the neighbouring grid interval.
            const double a = analysis.times[n > 0 ? n - 1 : n];
            const double b = analysis.times[static_cast<std::size_t>(n) + 1 < count ? n + 1 : n];
            outcome[n].error = std::make_exception_ptr(SingularRate(a, b, e.target, e.source, e.flux));
        } catch (...) {
            outcome[n].error = std::current_exception();
        }
    }

    const bool cap_mode = options.singularity.mode == SingularityPolicy::Mode::Cap;
    std::size_t first_error = count;
    for (std::size_t n = 0; n < count; ++n) {
        if (outcome[n].error) {
            first_error = n;
            break;
        }
    }

    // Interval scan: a denominator eigenvalue that vanishes between two grid
    // points makes the rates on both sides blow up. Only intervals before the
    // first point failure are scanned, so the earliest failure wins.
    SynthesisResult result;
    for (std::size_t n = 0; n + 1 < first_error; ++n) {
        const double h = analysis.times[n + 1] - analysis.times[n];
        auto vanishes = [&](const Compensation& c, std::size_t at) -> bool {
            for (std::size_t k = 0; k < c.denominators.size(); ++k) {
                const int idx = c.denominators[k];
                const double pmin = hermite_minimum(analysis.frames[n].p(idx), analysis.derivatives[n].f(idx),
                                                    analysis.frames[n + 1].p(idx),
                                                    analysis.derivatives[n + 1].f(idx), h);
                if (pmin > options.eps_p) continue;
                if (!cap_mode) {
                    const auto& term = c.terms[k];
                    const bool forward = term.required == Sign::Nonnegative;
                    const int source = forward ? term.spec.from() : term.spec.to();
                    const int target = forward ? term.spec.to() : term.spec.from();
                    const double flux = std::abs(term.rate) * std::max(analysis.frames[at].p(idx), 0.0);
                    throw SingularRate(analysis.times[n], analysis.times[n + 1], target, source, flux);
                }
                return true;
            }
            return false;
        };
        if (vanishes(outcome[n].comp, n) || vanishes(outcome[n + 1].comp, n + 1)) {
            result.singular_intervals.push_back({analysis.times[n], analysis.times[n + 1]});
        }
    }
    if (first_error < count) std::rethrow_exception(outcome[first_error].error);

    result.terms.resize(count);
    result.flux_deficit.resize(count);
    result.capped.resize(count);
    std::vector<ComplexMatrix> hamiltonians(count);
    for (std::size_t n = 0; n < count; ++n) {
        auto& comp = outcome[n].comp;
        result.flux_deficit[n] = comp.flux_deficit;
        result.capped[n] = comp.capped;
        result.total_terms += comp.terms.size();
        result.max_terms_per_point = std::max(result.max_terms_per_point, comp.terms.size());
        for (const auto& t : comp.terms) result.sign_compliant += complies(t) ? 1 : 0;
        result.terms[n] = std::move(comp.terms);
        hamiltonians[n] = analysis.hamiltonians[n].H;
        if (comp.capped) {
            result.capped_intervals.push_back(
                {analysis.times[n > 0 ? n - 1 : n], analysis.times[n + 1 < count ? n + 1 : n]});
        }
    }
    result.singular_intervals = merge_intervals(std::move(result.singular_intervals));
    result.capped_intervals = merge_intervals(std::move(result.capped_intervals));

    result.generator = assemble_generator(analysis.frames, result.terms, hamiltonians);
    std::vector<TimeInterval> excluded = result.singular_intervals;
    excluded.insert(excluded.end(), result.capped_intervals.begin(), result.capped_intervals.end());
    result.generator.excluded = merge_intervals(std::move(excluded));
    return result;
}

}  // namespace

FrameAnalysis analyze_trajectory(const Trajectory& traj, const AnalysisOptions& options) {
    return analyze_impl(traj, options, true);
}

FrameAnalysis analyze_trajectory_serial(const Trajectory& traj, const AnalysisOptions& options) {
    return analyze_impl(traj, options, false);
}

SynthesisResult synthesize_rates(const FrameAnalysis& analysis, const SynthesisOptions& options) {
    return synthesize_impl(analysis, options, true);
}

SynthesisResult synthesize_rates_serial(const FrameAnalysis& analysis, const SynthesisOptions& options) {
    return synthesize_impl(analysis, options, false);
}

double hermite_minimum(double p0, double m0, double p1, double m1, double h) {
    // p(s) = a + b s + c s² + e s³ on s ∈ [0, 1]
    const double a = p0;
    const double b = h * m0;
    const double c = 3.0 * (p1 - p0) - 2.0 * h * m0 - h * m1;
    const double e = 2.0 * (p0 - p1) + h * m0 + h * m1;
    auto eval = [&](double s) { return a + s * (b + s * (c + s * e)); };

    double best = std::min(p0, p1);
    // p'(s) = b + 2c s + 3e s²
    const double qa = 3.0 * e, qb = 2.0 * c, qc = b;
    auto consider = [&](double s) {
        if (s > 0.0 && s < 1.0) best = std::min(best, eval(s));
    };
    if (std::abs(qa) < 1e-300) {
        if (std::abs(qb) > 1e-300) consider(-qc / qb);
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (qb + std::copysign(sq, qb));
            if (q != 0.0) {
                consider(q / qa);
                consider(qc / q);
            } else {
                consider(0.0);
            }
        }
    }
    return best;
}

std::vector<TimeInterval> merge_intervals(std::vector<TimeInterval> intervals) {
    std::sort(intervals.begin(), intervals.end(),
              [](const TimeInterval& x, const TimeInterval& y) { return x.start < y.start; });
    std::vector<TimeInterval> out;
    for (const auto& iv : intervals) {
        if (!out.empty() && iv.start <= out.back().end) {
            out.back().end = std::max(out.back().end, iv.end);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

int configure_threads_from_env() {
    if (const char* env = std::getenv("LINDBLAD_RESIGN_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) omp_set_num_threads(static_cast<int>(n));
    }
    return omp_get_max_threads();
}

}  // namespace resign
