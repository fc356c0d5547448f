#include "resign/eigenflow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace resign {

namespace {

// Greedy assignment on a weight matrix w(row, col): repeatedly take the
// largest remaining entry. Returns col_for_row.
std::vector<Index> greedy_assignment(const Eigen::MatrixXd& w) {
    const Index d = w.rows();
    std::vector<Index> col_for_row(d, -1);
    std::vector<bool> row_used(d, false), col_used(d, false);
    for (Index round = 0; round < d; ++round) {
        double best = -1.0;
        Index br = -1, bc = -1;
        for (Index r = 0; r < d; ++r) {
            if (row_used[r]) continue;
            for (Index c = 0; c < d; ++c) {
                if (col_used[c]) continue;
                if (w(r, c) > best) {
                    best = w(r, c);
                    br = r;
                    bc = c;
                }
            }
        }
        row_used[br] = col_used[bc] = true;
        col_for_row[br] = bc;
    }
    return col_for_row;
}

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a + std::numbers::pi, two_pi);
    if (a < 0) a += two_pi;
    return a - std::numbers::pi;
}

Index largest_component(const ComplexVector& v) {
    Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    return idx;
}

void update_phases(EigenFrame& frame, const std::vector<Index>& ref, const RealVector* previous) {
    const Index d = frame.U.cols();
    frame.phase.resize(d);
    for (Index k = 0; k < d; ++k) {
        const cplx c = frame.U(ref[k], k);
        if (previous == nullptr) {
            frame.phase(k) = std::abs(c) > 0.0 ? std::arg(c) : 0.0;
        } else if (std::abs(c) < 1e-12) {
            frame.phase(k) = (*previous)(k);
        } else {
            frame.phase(k) = (*previous)(k) + wrap_angle(std::arg(c) - (*previous)(k));
        }
    }
}

EigenFrame initial_frame(double t, const ComplexMatrix& rho, FrameOrdering ordering) {
    const auto eig = hermitian_eig(rho);
    const Index d = rho.rows();
    std::vector<Index> order(d);
    if (ordering == FrameOrdering::MatchBasis) {
        order = greedy_assignment(eig.vectors.cwiseAbs2());
    } else {
        for (Index k = 0; k < d; ++k) order[k] = k;
    }
    EigenFrame frame;
    frame.t = t;
    frame.p.resize(d);
    frame.U.resize(d, d);
    for (Index k = 0; k < d; ++k) {
        ComplexVector v = eig.vectors.col(order[k]);
        const Index pivot = ordering == FrameOrdering::MatchBasis ? k : largest_component(v);
        const cplx c = v(pivot);
        if (std::abs(c) > 0.0) v *= std::conj(c) / std::abs(c);
        frame.U.col(k) = v;
        frame.p(k) = eig.values(order[k]);
    }
    return frame;
}

}  // namespace

std::vector<EigenFrame> track_frames(std::span<const double> times,
                                     std::span<const DensityState> states,
                                     const TrackingOptions& options) {
    if (times.size() != states.size()) throw GridMismatch("track_frames: times and states differ in length");
    if (times.size() < 3) throw InsufficientStencil("track_frames needs at least 3 grid points");
    const Index d = states.front().dim();

    std::vector<EigenFrame> frames;
    frames.reserve(times.size());
    frames.push_back(initial_frame(times[0], states[0].matrix(), options.ordering));

    std::vector<Index> ref(d);
    for (Index k = 0; k < d; ++k) ref[k] = largest_component(frames[0].U.col(k));
    update_phases(frames[0], ref, nullptr);

    for (std::size_t n = 1; n < times.size(); ++n) {
        if (states[n].dim() != d) throw DimMismatch("track_frames: state dimension changed along grid");
        const EigenFrame& prev = frames.back();
        const auto eig = hermitian_eig(states[n].matrix());
        const ComplexMatrix overlap = prev.U.adjoint() * eig.vectors;
        const Eigen::MatrixXd mag = overlap.cwiseAbs();

        const auto match = greedy_assignment(mag);
        for (Index k = 0; k < d; ++k) {
            double best = -1.0, second = -1.0;
            Index best_col = -1;
            for (Index c = 0; c < d; ++c) {
                const double v = mag(k, c);
                if (v > best) {
                    second = best;
                    best = v;
                    best_col = c;
                } else if (v > second) {
                    second = v;
                }
            }
            if (best_col != match[k] || (d > 1 && best - second <= options.ambiguity_tol)) {
                throw DegenerateTrackingFailure(times[n], static_cast<int>(k));
            }
        }

        EigenFrame frame;
        frame.t = times[n];
        frame.p.resize(d);
        frame.U.resize(d, d);
        for (Index k = 0; k < d; ++k) {
            const Index c = match[k];
            const cplx ov = overlap(k, c);
            frame.U.col(k) = eig.vectors.col(c) * (std::conj(ov) / std::abs(ov));
            frame.p(k) = eig.values(c);
        }
        update_phases(frame, ref, &prev.phase);
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<EigenFrame> rephase_to_reference_gauge(std::span<const EigenFrame> frames) {
    std::vector<EigenFrame> out(frames.begin(), frames.end());
    for (auto& f : out) {
        for (Index k = 0; k < f.U.cols(); ++k) {
            f.U.col(k) *= std::polar(1.0, -f.phase(k));
        }
        f.phase.setZero();
    }
    return out;
}

HamiltonianEstimate estimate_hamiltonian(std::span<const EigenFrame> frames, std::size_t n) {
    if (frames.size() < 3) throw InsufficientStencil("Hamiltonian estimate needs at least 3 frames");
    if (n >= frames.size()) throw GridMismatch("estimate_hamiltonian: index out of range");
    std::vector<double> times(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) times[k] = frames[k].t;
    const auto s = derivative_stencil(times, n);

    HamiltonianEstimate est;
    est.Udot = s.weight[0] * frames[s.index[0]].U + s.weight[1] * frames[s.index[1]].U +
               s.weight[2] * frames[s.index[2]].U;
    const ComplexMatrix raw = kI * est.Udot * frames[n].U.adjoint();
    est.antihermitian_residual = 0.5 * max_norm(raw - raw.adjoint());
    est.H = hermitian_part(raw);
    return est;
}

ComplexMatrix build_hamiltonian(std::span<const EigenFrame> frames, std::size_t n) {
    return estimate_hamiltonian(frames, n).H;
}

FrameDerivatives rotating_frame_derivative(const ComplexMatrix& rho,
                                           const ComplexMatrix& rho_dot,
                                           const EigenFrame& frame,
                                           const HamiltonianEstimate& hamiltonian,
                                           double tol_offdiag) {
    const Index d = rho.rows();
    if (rho.cols() != d || rho_dot.rows() != d || rho_dot.cols() != d || frame.U.rows() != d ||
        hamiltonian.H.rows() != d) {
        throw DimMismatch("rotating_frame_derivative: inconsistent dimensions");
    }
    if (tol_offdiag < 0.0) tol_offdiag = 1e-6 * std::max(1.0, max_norm(rho_dot));

    const ComplexMatrix m =
        frame.U.adjoint() * (rho_dot + kI * commutator(hamiltonian.H, rho)) * frame.U;

    FrameDerivatives out;
    out.Udot = hamiltonian.Udot;
    out.f = m.diagonal().real();
    double off = 0.0;
    for (Index r = 0; r < d; ++r) {
        for (Index c = 0; c < d; ++c) {
            if (r != c) off = std::max(off, std::abs(m(r, c)));
        }
    }
    out.offdiag_residual = off;
    if (off > tol_offdiag) throw OffDiagonalResidualTooLarge(frame.t, off, tol_offdiag);

    const double sum = out.f.sum();
    if (std::abs(sum) > kTraceLeakTol) throw TraceLeak(frame.t, sum);
    out.f.array() -= sum / static_cast<double>(d);
    return out;
}

}  // namespace resign
