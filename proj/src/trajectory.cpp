#include "resign/trajectory.hpp"

#include <string>

namespace resign {

void Trajectory::check() const {
    if (states.size() != times.size()) {
        throw GridMismatch("trajectory: " + std::to_string(times.size()) + " times but " +
                           std::to_string(states.size()) + " states");
    }
    if (has_derivatives() && derivatives.size() != times.size()) {
        throw GridMismatch("trajectory: derivative count does not match grid");
    }
    for (std::size_t n = 1; n < times.size(); ++n) {
        if (!(times[n] > times[n - 1])) {
            throw GridMismatch("trajectory: grid not strictly increasing at index " + std::to_string(n));
        }
    }
    const Index d = dim();
    for (const auto& s : states) {
        if (s.dim() != d) throw DimMismatch("trajectory: states have differing dimensions");
    }
    for (const auto& m : derivatives) {
        if (m.rows() != d || m.cols() != d) throw DimMismatch("trajectory: derivative has wrong shape");
    }
}

Stencil derivative_stencil(const std::vector<double>& times, std::size_t n) {
    const std::size_t count = times.size();
    if (count < 3) throw InsufficientStencil("derivative stencil needs at least 3 grid points");
    std::size_t first = n == 0 ? 0 : (n + 1 == count ? count - 3 : n - 1);
    Stencil s{};
    for (std::size_t k = 0; k < 3; ++k) s.index[k] = first + k;

    // Derivatives of the Lagrange basis polynomials evaluated at times[n].
    const double x = times[n];
    for (std::size_t k = 0; k < 3; ++k) {
        const double xk = times[s.index[k]];
        double denom = 1.0;
        double numer = 0.0;
        for (std::size_t m = 0; m < 3; ++m) {
            if (m == k) continue;
            denom *= xk - times[s.index[m]];
            double prod = 1.0;
            for (std::size_t q = 0; q < 3; ++q) {
                if (q == k || q == m) continue;
                prod *= x - times[s.index[q]];
            }
            numer += prod;
        }
        s.weight[k] = numer / denom;
    }
    return s;
}

std::vector<ComplexMatrix> trajectory_derivatives(const Trajectory& traj) {
    if (traj.has_derivatives()) return traj.derivatives;
    std::vector<ComplexMatrix> out(traj.size());
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const auto s = derivative_stencil(traj.times, n);
        out[n] = s.weight[0] * traj.states[s.index[0]].matrix() +
                 s.weight[1] * traj.states[s.index[1]].matrix() +
                 s.weight[2] * traj.states[s.index[2]].matrix();
    }
    return out;
}

}  // namespace resign
