#include "resign/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace resign {

namespace {

// dst += scale · (a ⊗ b)
void add_kron(ComplexMatrix& dst, const ComplexMatrix& a, const ComplexMatrix& b, cplx scale) {
    const Index p = b.rows();
    const Index q = b.cols();
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            const cplx aij = scale * a(i, j);
            if (aij == cplx(0.0, 0.0)) continue;
            dst.block(i * p, j * q, p, q) += aij * b;
        }
    }
}

void check_term_dims(Index d, std::span<const Dissipator> terms, const char* what) {
    for (const auto& t : terms) {
        if (t.op.rows() != d || t.op.cols() != d) {
            throw DimMismatch(std::string(what) + ": jump operator dimension mismatch");
        }
    }
}

ComplexVector vec(const ComplexMatrix& m) {
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, Index d) {
    return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

bool grids_match(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t n = 0; n < a.size(); ++n) {
        if (std::abs(a[n] - b[n]) > 1e-12 * std::max(1.0, std::abs(a[n]))) return false;
    }
    return true;
}

double rhs_scale(const ComplexMatrix& H, std::span<const Dissipator> terms) {
    double s = max_norm(H);
    for (const auto& t : terms) {
        const double l = max_norm(t.op);
        s += std::abs(t.rate) * l * l;
    }
    return std::max(1.0, s);
}

std::vector<ComplexMatrix> finite_difference_derivatives(const Trajectory& traj) {
    std::vector<ComplexMatrix> out(traj.size());
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const auto s = derivative_stencil(traj.times, n);
        out[n] = s.weight[0] * traj.states[s.index[0]].matrix() +
                 s.weight[1] * traj.states[s.index[1]].matrix() +
                 s.weight[2] * traj.states[s.index[2]].matrix();
    }
    return out;
}

std::vector<ComplexMatrix> integrate_impl(const ComplexMatrix& rho0, const LindbladGenerator& gen,
                                          const IntegrationOptions& options, std::size_t first,
                                          std::size_t last, bool parallel) {
    const Index d = gen.dim();
    if (rho0.rows() != d || rho0.cols() != d) throw DimMismatch("integrate: initial state dimension mismatch");
    if (options.substeps < 1) throw Error("integrate: substeps must be >= 1");
    if (last == static_cast<std::size_t>(-1)) last = gen.size() - 1;
    if (first > last || last >= gen.size()) throw GridMismatch("integrate: invalid grid range");

    const std::size_t count = last - first + 1;
    std::vector<ComplexMatrix> super(count);
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(count); ++k) {
        super[k] = superoperator(gen.H[first + k], gen.terms[first + k]);
    }

    std::vector<ComplexMatrix> out;
    out.reserve(count);
    out.push_back(rho0);
    ComplexVector x = vec(rho0);
    ComplexMatrix s_step;
    for (std::size_t k = 0; k + 1 < count; ++k) {
        const double t0 = gen.grid[first + k];
        const double dt = gen.grid[first + k + 1] - t0;
        const double h = dt / options.substeps;
        for (int sub = 0; sub < options.substeps; ++sub) {
            if (gen.interpolation == LindbladGenerator::Interpolation::Midpoint) {
                const double w = (sub + 0.5) / options.substeps;
                s_step = (1.0 - w) * super[k] + w * super[k + 1];
            } else {
                s_step = super[k];
            }
            const ComplexVector k1 = s_step * x;
            const ComplexVector k2 = s_step * (x + (0.5 * h) * k1);
            const ComplexVector k3 = s_step * (x + (0.5 * h) * k2);
            const ComplexVector k4 = s_step * (x + h * k3);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

            ComplexMatrix rho = hermitian_part(unvec(x, d));
            const double norm = max_norm(rho);
            if (!(norm <= options.blowup_norm)) throw StepBlowup(t0 + (sub + 1) * h, norm);
            x = vec(rho);
        }
        out.push_back(unvec(x, d));
    }
    return out;
}

VerificationReport verify_impl(const Trajectory& input, const LindbladGenerator& gen,
                               const VerificationOptions& options, bool parallel) {
    input.check();
    gen.check();
    if (!grids_match(input.times, gen.grid)) throw GridMismatch("verify: trajectory and generator grids differ");
    if (input.dim() != gen.dim()) throw DimMismatch("verify: trajectory and generator dimensions differ");

    const std::size_t count = input.size();
    const auto rho_dot = (options.use_exact_derivatives && input.has_derivatives())
                             ? input.derivatives
                             : finite_difference_derivatives(input);

    auto interval_excluded = [&](std::size_t n) {
        for (const auto& e : gen.excluded) {
            if (e.start < input.times[n + 1] && e.end > input.times[n]) return true;
        }
        return false;
    };
    auto point_excluded = [&](std::size_t n) {
        for (const auto& e : gen.excluded) {
            if (e.contains(input.times[n])) return true;
        }
        return false;
    };

    VerificationReport report;
    report.excluded = gen.excluded;
    report.points.resize(count);

#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(count); ++n) {
        auto& pt = report.points[n];
        pt.t = input.times[n];
        pt.excluded = point_excluded(n);
        const ComplexMatrix& rho = input.states[n].matrix();
        const ComplexMatrix r = lindblad_rhs(rho, gen.H[n], gen.terms[n]);
        pt.rhs_error = max_norm(r - rho_dot[n]);
        pt.rhs_hermiticity = max_norm(r - r.adjoint());
        pt.rhs_trace = std::abs(r.trace());
        pt.rhs_scale = rhs_scale(gen.H[n], gen.terms[n]);
        pt.state_error = 0.0;
        pt.trace = 1.0;
        pt.min_eigenvalue = input.states[n].min_eigenvalue();
    }

    // Maximal runs of consecutive non-excluded intervals.
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    for (std::size_t n = 0; n + 1 < count;) {
        if (interval_excluded(n)) {
            ++n;
            continue;
        }
        std::size_t end = n;
        while (end + 1 < count && !interval_excluded(end)) ++end;
        windows.emplace_back(n, end);
        n = end;
    }
    std::vector<bool> covered(count, false);
    for (const auto& [a, b] : windows) {
        for (std::size_t n = a; n <= b; ++n) covered[n] = true;
    }
    for (std::size_t n = 0; n < count; ++n) {
        if (!covered[n]) report.points[n].excluded = true;
    }

    std::vector<double> drift(windows.size(), 0.0);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t w = 0; w < static_cast<std::ptrdiff_t>(windows.size()); ++w) {
        const auto [a, b] = windows[w];
        const ComplexMatrix& start = input.states[a].matrix();
        const double trace0 = start.trace().real();
        std::vector<ComplexMatrix> states;
        try {
            states = integrate_impl(start, gen, options.integration, a, b, false);
        } catch (const StepBlowup&) {
            for (std::size_t n = a; n <= b; ++n) {
                report.points[n].state_error = std::numeric_limits<double>::infinity();
            }
            drift[w] = std::numeric_limits<double>::infinity();
            continue;
        }
        for (std::size_t n = a; n <= b; ++n) {
            const ComplexMatrix& rho = states[n - a];
            auto& pt = report.points[n];
            pt.state_error = max_norm(rho - input.states[n].matrix());
            pt.trace = rho.trace().real();
            pt.min_eigenvalue = hermitian_eig(rho).values(0);
            drift[w] = std::max(drift[w], std::abs(pt.trace - trace0));
        }
    }

    report.windows = windows.size();
    report.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : windows) report.duration += input.times[b] - input.times[a];
    for (double dr : drift) report.trace_drift = std::max(report.trace_drift, dr);
    for (const auto& pt : report.points) {
        if (pt.excluded) continue;
        report.max_rhs_error = std::max(report.max_rhs_error, pt.rhs_error);
        report.max_state_error = std::max(report.max_state_error, pt.state_error);
        report.min_eigenvalue = std::min(report.min_eigenvalue, pt.min_eigenvalue);
    }
    if (!std::isfinite(report.min_eigenvalue)) report.min_eigenvalue = 0.0;
    return report;
}

}  // namespace

void LindbladGenerator::check() const {
    if (grid.size() != H.size() || grid.size() != terms.size()) {
        throw GridMismatch("generator: grid, Hamiltonian and term lists differ in length");
    }
    if (grid.size() < 2) throw GridMismatch("generator: needs at least two grid points");
    for (std::size_t n = 1; n < grid.size(); ++n) {
        if (!(grid[n] > grid[n - 1])) throw GridMismatch("generator: grid not strictly increasing");
    }
    const Index d = dim();
    for (std::size_t n = 0; n < grid.size(); ++n) {
        if (H[n].rows() != d || H[n].cols() != d) throw DimMismatch("generator: Hamiltonian dimension mismatch");
        const double dev = hermiticity_error(H[n]);
        if (dev > 1e-8) throw NonHermitianInput(dev);
        check_term_dims(d, terms[n], "generator");
    }
}

LindbladGenerator LindbladGenerator::constant(std::vector<double> grid, const ComplexMatrix& H,
                                              const std::vector<Dissipator>& terms) {
    LindbladGenerator gen;
    const std::size_t n = grid.size();
    gen.grid = std::move(grid);
    gen.H.assign(n, H);
    gen.terms.assign(n, terms);
    return gen;
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& H,
                           std::span<const Dissipator> terms) {
    const Index d = rho.rows();
    if (rho.cols() != d || H.rows() != d || H.cols() != d) throw DimMismatch("lindblad_rhs: dimension mismatch");
    check_term_dims(d, terms, "lindblad_rhs");

    ComplexMatrix out = -kI * commutator(H, rho);
    for (const auto& term : terms) {
        if (term.rate == 0.0) continue;
        const ComplexMatrix& L = term.op;
        const ComplexMatrix LdL = L.adjoint() * L;
        out += term.rate * (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
    }
    return out;
}

ComplexMatrix superoperator(const ComplexMatrix& H, std::span<const Dissipator> terms) {
    const Index d = H.rows();
    if (H.cols() != d) throw DimMismatch("superoperator: Hamiltonian is not square");
    check_term_dims(d, terms, "superoperator");

    // ρ̇ = Kρ + ρK† + Σ γ LρL†  with  K = −iH − ½ Σ γ L†L.
    ComplexMatrix K = -kI * H;
    for (const auto& t : terms) K -= 0.5 * t.rate * (t.op.adjoint() * t.op);

    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
    add_kron(s, id, K, 1.0);
    add_kron(s, K.conjugate(), id, 1.0);
    for (const auto& t : terms) {
        if (t.rate == 0.0) continue;
        add_kron(s, t.op.conjugate(), t.op, t.rate);
    }
    return s;
}

std::vector<ComplexMatrix> integrate(const ComplexMatrix& rho0, const LindbladGenerator& gen,
                                     const IntegrationOptions& options, std::size_t first,
                                     std::size_t last) {
    gen.check();
    return integrate_impl(rho0, gen, options, first, last, true);
}

std::vector<ComplexMatrix> integrate(const DensityState& rho0, const LindbladGenerator& gen,
                                     const IntegrationOptions& options) {
    return integrate(rho0.matrix(), gen, options);
}

VerificationReport verify_reconstruction(const Trajectory& input, const LindbladGenerator& gen,
                                         const VerificationOptions& options) {
    return verify_impl(input, gen, options, true);
}

VerificationReport verify_reconstruction_serial(const Trajectory& input, const LindbladGenerator& gen,
                                                const VerificationOptions& options) {
    return verify_impl(input, gen, options, false);
}

}  // namespace resign
