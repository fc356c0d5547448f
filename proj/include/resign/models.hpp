// models.hpp — analytic reference trajectories.
//
// Two-level models use the basis ordering (excited, ground) with ℏ = 1. The
// Jaynes–Cummings entry is the reduced atom state for a resonant cavity
// (ω_c = ω_a = ω, Ω = 1) that starts in the vacuum:
//
//     ρ(t) = [ ρ11 c²              ρ12 c e^{−iωt} ]      c = cos(t/2)
//            [ ρ21 c e^{iωt}   1 − ρ11 c²         ]

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "resign/evolution.hpp"
#include "resign/matrix.hpp"
#include "resign/trajectory.hpp"

namespace resign {

struct JCParams {
    double omega = 1.0;
    double rho11 = 1.0;
    cplx rho12 = 0.0;

    /// Throws InvalidInitialState unless the initial matrix is a density matrix.
    void check() const;
};

DensityState jc_exact(const JCParams& params, double t);
ComplexMatrix jc_exact_derivative(const JCParams& params, double t);

/// α(t) = ρ11 sin t / (ρ11 cos t + ρ11 − 2)
double jc_alpha(double rho11, double t);

enum class RateSign { Nonnegative, Nonpositive };

struct JCRates {
    double gamma1 = 0.0;  // rate of σ− (decay of the excited population)
    double gamma2 = 0.0;  // rate of σ+ (pumping of the excited population)
};

/// Piecewise closed-form rates for a diagonal initial state. Nonnegative:
/// γ1 = tan(t/2) on [2nπ, (2n+1)π), γ2 = α(t) otherwise. Nonpositive: γ1 =
/// tan(t/2) on [(2n+1)π, (2n+2)π), γ2 = α(t) otherwise. Intervals are taken
/// half-open as written. Throws SingularAt within `eps` of a divergence and
/// InvalidInitialState when ρ12 ≠ 0.
JCRates jc_reference_rates(const JCParams& params, double t, RateSign sign, double eps = 1e-9);

/// Analytic trajectory model: ρ(t) and ρ̇(t) in closed form.
class TrajectoryModel {
public:
    virtual ~TrajectoryModel() = default;
    virtual std::string name() const = 0;
    virtual Index dim() const = 0;
    virtual ComplexMatrix rho(double t) const = 0;
    virtual ComplexMatrix rho_dot(double t) const = 0;
    /// Time-independent Lindblad generator producing this trajectory, when one exists.
    virtual std::optional<std::pair<ComplexMatrix, std::vector<Dissipator>>> generator() const {
        return std::nullopt;
    }
    /// Default sampling window [t0, t1] and spacing.
    virtual double default_t0() const { return 0.0; }
    virtual double default_t1() const { return 2.0; }
    virtual double default_dt() const { return 1e-3; }

    /// Samples the model on `times`, validating each state with `tol`.
    Trajectory sample(const std::vector<double>& times, double tol = 1e-8) const;
};

using ModelParams = std::map<std::string, double>;

struct ModelInfo {
    std::string name;
    std::string description;
    ModelParams defaults;
};

/// Names and parameter keys (with defaults) of the built-in models.
const std::vector<ModelInfo>& model_catalog();

/// Builds a model by name. Unknown parameter keys are rejected. Throws
/// UnknownModel for names not in the catalog.
std::unique_ptr<TrajectoryModel> library_model(const std::string& name, const ModelParams& params = {});

/// Uniform grid t0, t0 + dt, … up to t1 (inclusive within dt/2).
std::vector<double> uniform_grid(double t0, double t1, double dt);

}  // namespace resign
