#include "resign/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace resign {

JumpSpec JumpSpec::transition(int to, int from, int dim) {
    if (to == from || to < 0 || from < 0 || to >= dim || from >= dim) {
        throw DimMismatch("JumpSpec: invalid transition indices");
    }
    if (to > from) return {to, from, false, dim};
    return {from, to, true, dim};
}

ComplexMatrix JumpSpec::matrix() const {
    return basis_op(dim, to(), from());
}

bool complies(const RatedTerm& term, double slack) noexcept {
    return term.required == Sign::Nonnegative ? term.rate >= -slack : term.rate <= slack;
}

SignPolicy SignPolicy::alternating(int dim) {
    std::vector<Sign> signs;
    for (int k = 0; k + 1 < std::max(dim, 2); ++k) {
        signs.push_back(k % 2 == 0 ? Sign::Nonnegative : Sign::Nonpositive);
    }
    return per_round(std::move(signs));
}

Sign SignPolicy::sign_for_round(std::size_t round) const {
    switch (mode_) {
        case Mode::AllNonnegative: return Sign::Nonnegative;
        case Mode::AllNonpositive: return Sign::Nonpositive;
        case Mode::PerRound:
            if (round >= rounds_.size()) throw InvalidPolicy("sign policy has no entry for round " + std::to_string(round + 1));
            return rounds_[round];
    }
    return Sign::Nonnegative;
}

void SignPolicy::check(int dim) const {
    if (mode_ == Mode::PerRound && rounds_.size() < static_cast<std::size_t>(std::max(dim - 1, 0))) {
        throw InvalidPolicy("per-round sign policy lists " + std::to_string(rounds_.size()) +
                            " signs, dimension " + std::to_string(dim) + " needs " + std::to_string(dim - 1));
    }
}

std::string SignPolicy::describe() const {
    switch (mode_) {
        case Mode::AllNonnegative: return "nonneg";
        case Mode::AllNonpositive: return "nonpos";
        case Mode::PerRound: {
            std::string s = "per-round:";
            for (Sign g : rounds_) s += g == Sign::Nonnegative ? '+' : '-';
            return s;
        }
    }
    return "?";
}

double RateProblem::flux_threshold() const {
    if (eps_f >= 0.0) return eps_f;
    const double m = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    return 1e-12 * std::max(1.0, m);
}

RealVector channel_action(const JumpSpec& spec, double rate, const RealVector& p) {
    if (p.size() != spec.dim) throw DimMismatch("channel_action: eigenvalue vector has wrong length");
    RealVector out = RealVector::Zero(spec.dim);
    const double moved = rate * p(spec.from());
    out(spec.to()) = moved;
    out(spec.from()) = -moved;
    return out;
}

RealVector total_action(std::span<const RatedTerm> terms, const RealVector& p) {
    RealVector out = RealVector::Zero(p.size());
    for (const auto& t : terms) out += channel_action(t.spec, t.rate, p);
    return out;
}

Compensation compensate(const RateProblem& problem, const SignPolicy& policy,
                        const SingularityPolicy& singularity) {
    const RealVector& p = problem.p;
    const int d = static_cast<int>(p.size());
    if (problem.f.size() != d) throw DimMismatch("compensate: p and f differ in length");
    policy.check(d);
    if (singularity.mode == SingularityPolicy::Mode::Cap && !(singularity.gamma_max > 0.0)) {
        throw InvalidPolicy("rate cap must be positive");
    }

    const double sum = problem.f.sum();
    if (std::abs(sum) > kTraceLeakTol) throw InfeasibleTrace(problem.time, sum);

    const double eps_f = problem.flux_threshold();
    RealVector r = problem.f.array() - sum / d;
    for (int k = 0; k < d; ++k) {
        if (std::abs(r(k)) <= eps_f) r(k) = 0.0;
    }

    Compensation out;
    std::vector<int> sources, sinks;
    for (std::size_t round = 0;; ++round) {
        sources.clear();
        sinks.clear();
        for (int k = 0; k < d; ++k) {
            if (r(k) < 0.0) sources.push_back(k);
            if (r(k) > 0.0) sinks.push_back(k);
        }
        if (sources.empty() || sinks.empty()) break;
        // Most negative source / most positive sink first; stable sort keeps
        // the lower index on ties.
        std::stable_sort(sources.begin(), sources.end(), [&](int a, int b) { return r(a) < r(b); });
        std::stable_sort(sinks.begin(), sinks.end(), [&](int a, int b) { return r(a) > r(b); });

        const Sign sign = policy.sign_for_round(round);
        auto denominator = [&](int src, int snk) { return sign == Sign::Nonnegative ? src : snk; };

        // Prefer the largest-first pair; fall back to any pair whose
        // denominator is not vanishing.
        int src = -1, snk = -1;
        for (int s : sources) {
            for (int k : sinks) {
                if (p(denominator(s, k)) > problem.eps_p) {
                    src = s;
                    snk = k;
                    break;
                }
            }
            if (src >= 0) break;
        }

        const bool singular = src < 0;
        if (singular) {
            src = sources.front();
            snk = sinks.front();
        }
        const double g = std::min(-r(src), r(snk));
        const int den = denominator(src, snk);

        double magnitude;
        bool capped = false;
        if (singular) {
            if (singularity.mode == SingularityPolicy::Mode::Error) {
                throw SingularRate(problem.time, problem.time, snk, src, g);
            }
            magnitude = singularity.gamma_max;
            capped = true;
        } else {
            magnitude = g / p(den);
        }
        if (singularity.mode == SingularityPolicy::Mode::Cap && magnitude > singularity.gamma_max) {
            magnitude = singularity.gamma_max;
            capped = true;
        }
        if (capped) {
            out.capped = true;
            out.flux_deficit += std::max(g - magnitude * std::max(p(den), 0.0), 0.0);
        }

        RatedTerm term;
        term.required = sign;
        if (sign == Sign::Nonnegative) {
            term.spec = JumpSpec::transition(snk, src, d);
            term.rate = magnitude;
        } else {
            term.spec = JumpSpec::transition(src, snk, d);
            term.rate = -magnitude;
        }
        out.terms.push_back(term);
        out.denominators.push_back(den);

        if (-r(src) <= r(snk)) {
            r(snk) += r(src);
            r(src) = 0.0;
        } else {
            r(src) += r(snk);
            r(snk) = 0.0;
        }
        if (std::abs(r(src)) <= eps_f) r(src) = 0.0;
        if (std::abs(r(snk)) <= eps_f) r(snk) = 0.0;
    }
    return out;
}

LindbladGenerator assemble_generator(std::span<const EigenFrame> frames,
                                     std::span<const std::vector<RatedTerm>> terms,
                                     std::span<const ComplexMatrix> hamiltonians) {
    if (frames.size() != terms.size() || frames.size() != hamiltonians.size()) {
        throw GridMismatch("assemble_generator: frames, terms and Hamiltonians differ in length");
    }
    LindbladGenerator gen;
    gen.grid.reserve(frames.size());
    gen.H.reserve(frames.size());
    gen.terms.reserve(frames.size());
    for (std::size_t n = 0; n < frames.size(); ++n) {
        const ComplexMatrix& U = frames[n].U;
        gen.grid.push_back(frames[n].t);
        gen.H.push_back(hamiltonians[n]);
        std::vector<Dissipator> ops;
        ops.reserve(terms[n].size());
        for (const auto& term : terms[n]) {
            if (term.spec.dim != U.rows()) throw DimMismatch("assemble_generator: term dimension mismatch");
            ops.push_back({U.col(term.spec.to()) * U.col(term.spec.from()).adjoint(), term.rate});
        }
        gen.terms.push_back(std::move(ops));
    }
    return gen;
}

}  // namespace resign
