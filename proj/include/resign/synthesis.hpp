// synthesis.hpp — rate determination by eigenvalue-flux compensation.
//
// In the co-rotating frame ρ_D = diag(p) evolves as ρ̇_D = diag(f) with Σ f = 0.
// Every two-level jump operator |i⟩⟨j| moves population between exactly two
// eigenvalues:
//
//     γ (a ρ_D a† − ½{a†a, ρ_D}) = γ p_j (e_i − e_j)        for a = |i⟩⟨j|.
//
// compensate() pairs the most negative residual flux (a source) with the most
// positive one (a sink), routes min(|f_source|, f_sink) through one channel and
// retires whichever side is exhausted. Each round contributes one term and
// retires at least one index, so a problem of dimension d needs at most d − 1
// terms. The sign of each round's rate is prescribed by a SignPolicy: a
// nonnegative rate uses |sink⟩⟨source| with γ = g / p_source, a nonpositive
// rate uses the reverse operator |source⟩⟨sink| with γ = −g / p_sink.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "resign/eigenflow.hpp"
#include "resign/evolution.hpp"
#include "resign/matrix.hpp"

namespace resign {

/// Elementary jump operator in canonical form: `target` > `source` (0-based).
/// dagger = false is a_ij = |target⟩⟨source|, dagger = true its adjoint
/// |source⟩⟨target|.
struct JumpSpec {
    int target = 1;
    int source = 0;
    bool dagger = false;
    int dim = 2;

    /// Canonical form of the operator |to⟩⟨from| (to ≠ from).
    static JumpSpec transition(int to, int from, int dim);

    /// Row index of the single nonzero entry (population is moved into it).
    int to() const noexcept { return dagger ? source : target; }
    /// Column index of the single nonzero entry (population is drawn from it).
    int from() const noexcept { return dagger ? target : source; }

    ComplexMatrix matrix() const;
    bool operator==(const JumpSpec&) const = default;
};

enum class Sign { Nonnegative, Nonpositive };

struct RatedTerm {
    JumpSpec spec;
    double rate = 0.0;
    Sign required = Sign::Nonnegative;
};

/// Slack used for sign compliance checks.
inline constexpr double kSignSlack = 1e-12;

bool complies(const RatedTerm& term, double slack = kSignSlack) noexcept;

class SignPolicy {
public:
    enum class Mode { AllNonnegative, AllNonpositive, PerRound };

    static SignPolicy all_nonnegative() { return SignPolicy(Mode::AllNonnegative, {}); }
    static SignPolicy all_nonpositive() { return SignPolicy(Mode::AllNonpositive, {}); }
    static SignPolicy per_round(std::vector<Sign> signs) { return SignPolicy(Mode::PerRound, std::move(signs)); }
    /// +, −, +, … with d − 1 entries.
    static SignPolicy alternating(int dim);

    Mode mode() const noexcept { return mode_; }
    const std::vector<Sign>& rounds() const noexcept { return rounds_; }
    Sign sign_for_round(std::size_t round) const;
    /// Throws InvalidPolicy when a PerRound list is shorter than d − 1.
    void check(int dim) const;
    std::string describe() const;

private:
    SignPolicy(Mode m, std::vector<Sign> r) : mode_(m), rounds_(std::move(r)) {}
    Mode mode_;
    std::vector<Sign> rounds_;
};

struct SingularityPolicy {
    enum class Mode { Error, Cap };
    Mode mode = Mode::Error;
    double gamma_max = 0.0;  // used in Cap mode, must be > 0

    static SingularityPolicy error() { return {}; }
    static SingularityPolicy cap(double gmax) { return {Mode::Cap, gmax}; }
};

struct RateProblem {
    RealVector p;
    RealVector f;
    double eps_f = -1.0;  // negative ⇒ 1e-12 · max(1, max|f|)
    double eps_p = 1e-10;
    double time = 0.0;    // only used to label errors

    double flux_threshold() const;
};

struct Compensation {
    std::vector<RatedTerm> terms;
    double flux_deficit = 0.0;  // flux not delivered because of rate capping
    bool capped = false;
    // Tracked indices whose eigenvalue appears in a rate denominator.
    std::vector<int> denominators;
};

/// Diagonal of Φ_a[diag(p)] for the operator `spec` at rate `rate`.
RealVector channel_action(const JumpSpec& spec, double rate, const RealVector& p);

/// Sum of channel actions over a term list.
RealVector total_action(std::span<const RatedTerm> terms, const RealVector& p);

/// Solves Σ_terms channel_action = f for at most d − 1 terms obeying `policy`.
/// Throws InfeasibleTrace when |Σ f| > 1e-8 and, in Error mode, SingularRate
/// when every admissible pairing needs a denominator ≤ eps_p.
Compensation compensate(const RateProblem& problem, const SignPolicy& policy,
                        const SingularityPolicy& singularity = {});

/// A_{k,t} = U_t a_k U_t† for each term and grid point, with H(t) alongside.
LindbladGenerator assemble_generator(std::span<const EigenFrame> frames,
                                     std::span<const std::vector<RatedTerm>> terms,
                                     std::span<const ComplexMatrix> hamiltonians);

}  // namespace resign
