#include "resign/models.hpp"

#include <cmath>
#include <numbers>

namespace resign {

namespace {

constexpr double kPi = std::numbers::pi;

ComplexMatrix two_level(double rho11, cplx rho12) {
    ComplexMatrix m(2, 2);
    m << rho11, rho12,
         std::conj(rho12), 1.0 - rho11;
    return m;
}

void check_initial(double rho11, cplx rho12) {
    try {
        validate_density(two_level(rho11, rho12), 1e-12);
    } catch (const InvalidDensity& e) {
        throw InvalidInitialState(std::string("initial two-level state is not a density matrix (") + e.what() + ")");
    }
}

double take(ModelParams& remaining, const std::string& key) {
    auto it = remaining.find(key);
    if (it == remaining.end()) throw Error("model parameter '" + key + "' missing");
    const double v = it->second;
    remaining.erase(it);
    return v;
}

class JCModel final : public TrajectoryModel {
public:
    explicit JCModel(JCParams p) : p_(p) { p_.check(); }
    std::string name() const override { return "jc"; }
    Index dim() const override { return 2; }
    ComplexMatrix rho(double t) const override { return jc_exact(p_, t).matrix(); }
    ComplexMatrix rho_dot(double t) const override { return jc_exact_derivative(p_, t); }
    double default_t0() const override { return 0.1; }
    double default_t1() const override { return 3.0; }

private:
    JCParams p_;
};

// Bloch vector precessing about z under H = ωσ_z/2.
class UnitaryModel final : public TrajectoryModel {
public:
    UnitaryModel(double omega, double rx, double ry, double rz) : omega_(omega), r_{rx, ry, rz} {
        if (rx * rx + ry * ry + rz * rz > 1.0 + 1e-12) throw InvalidInitialState("Bloch vector longer than 1");
    }
    std::string name() const override { return "unitary"; }
    Index dim() const override { return 2; }
    ComplexMatrix rho(double t) const override {
        const double c = std::cos(omega_ * t), s = std::sin(omega_ * t);
        const double x = r_[0] * c - r_[1] * s;
        const double y = r_[0] * s + r_[1] * c;
        return 0.5 * (pauli::identity() + x * pauli::x() + y * pauli::y() + r_[2] * pauli::z());
    }
    ComplexMatrix rho_dot(double t) const override { return -kI * commutator(hamiltonian(), rho(t)); }
    std::optional<std::pair<ComplexMatrix, std::vector<Dissipator>>> generator() const override {
        return std::make_pair(hamiltonian(), std::vector<Dissipator>{});
    }

private:
    ComplexMatrix hamiltonian() const { return 0.5 * omega_ * pauli::z(); }
    double omega_;
    double r_[3];
};

// L = σ− at rate γ.
class AmplitudeDampingModel final : public TrajectoryModel {
public:
    AmplitudeDampingModel(double gamma, double rho11, cplx rho12) : gamma_(gamma), rho11_(rho11), rho12_(rho12) {
        check_initial(rho11, rho12);
    }
    std::string name() const override { return "amplitude_damping"; }
    Index dim() const override { return 2; }
    ComplexMatrix rho(double t) const override {
        return two_level(rho11_ * std::exp(-gamma_ * t), rho12_ * std::exp(-0.5 * gamma_ * t));
    }
    ComplexMatrix rho_dot(double t) const override {
        const double d11 = -gamma_ * rho11_ * std::exp(-gamma_ * t);
        const cplx d12 = -0.5 * gamma_ * rho12_ * std::exp(-0.5 * gamma_ * t);
        ComplexMatrix m(2, 2);
        m << d11, d12,
             std::conj(d12), -d11;
        return m;
    }
    std::optional<std::pair<ComplexMatrix, std::vector<Dissipator>>> generator() const override {
        return std::make_pair(ComplexMatrix::Zero(2, 2).eval(),
                              std::vector<Dissipator>{{pauli::lowering(), gamma_}});
    }

private:
    double gamma_, rho11_;
    cplx rho12_;
};

// L = σ_z at rate γ/2: coherences decay as e^{−γt}.
class DephasingModel final : public TrajectoryModel {
public:
    DephasingModel(double gamma, double rho11, cplx rho12) : gamma_(gamma), rho11_(rho11), rho12_(rho12) {
        check_initial(rho11, rho12);
    }
    std::string name() const override { return "dephasing"; }
    Index dim() const override { return 2; }
    ComplexMatrix rho(double t) const override { return two_level(rho11_, rho12_ * std::exp(-gamma_ * t)); }
    ComplexMatrix rho_dot(double t) const override {
        const cplx d12 = -gamma_ * rho12_ * std::exp(-gamma_ * t);
        ComplexMatrix m(2, 2);
        m << 0.0, d12,
             std::conj(d12), 0.0;
        return m;
    }
    std::optional<std::pair<ComplexMatrix, std::vector<Dissipator>>> generator() const override {
        return std::make_pair(ComplexMatrix::Zero(2, 2).eval(),
                              std::vector<Dissipator>{{pauli::z(), 0.5 * gamma_}});
    }

private:
    double gamma_, rho11_;
    cplx rho12_;
};

}  // namespace

void JCParams::check() const { check_initial(rho11, rho12); }

DensityState jc_exact(const JCParams& params, double t) {
    params.check();
    const double c = std::cos(0.5 * t);
    const cplx coherence = params.rho12 * c * std::polar(1.0, -params.omega * t);
    return validate_density(two_level(params.rho11 * c * c, coherence), 1e-10);
}

ComplexMatrix jc_exact_derivative(const JCParams& params, double t) {
    const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
    const double d11 = -params.rho11 * c * s;
    const cplx d12 = params.rho12 * std::polar(1.0, -params.omega * t) * (-0.5 * s - kI * params.omega * c);
    ComplexMatrix m(2, 2);
    m << d11, d12,
         std::conj(d12), -d11;
    return m;
}

double jc_alpha(double rho11, double t) {
    return rho11 * std::sin(t) / (rho11 * std::cos(t) + rho11 - 2.0);
}

JCRates jc_reference_rates(const JCParams& params, double t, RateSign sign, double eps) {
    params.check();
    if (std::abs(params.rho12) > 0.0) {
        throw InvalidInitialState("closed-form JC rates need a diagonal initial state");
    }
    if (params.rho11 == 0.0) return {};  // stationary ground state

    const double m = std::floor(t / kPi);
    const bool even = std::fmod(m, 2.0) == 0.0;
    const bool decay_branch = sign == RateSign::Nonnegative ? even : !even;

    JCRates rates;
    if (decay_branch) {
        // tan(t/2) diverges at odd multiples of π: the right end of the
        // nonnegative branch and the left end of the nonpositive one.
        const double pole = sign == RateSign::Nonnegative ? (m + 1.0) * kPi : m * kPi;
        if (std::abs(t - pole) <= eps) throw SingularAt(pole);
        rates.gamma1 = std::tan(0.5 * t);
    } else {
        const double den = params.rho11 * std::cos(t) + params.rho11 - 2.0;
        if (std::abs(den) <= eps) throw SingularAt(t);
        rates.gamma2 = jc_alpha(params.rho11, t);
    }
    return rates;
}

Trajectory TrajectoryModel::sample(const std::vector<double>& times, double tol) const {
    Trajectory traj;
    traj.times = times;
    traj.states.reserve(times.size());
    traj.derivatives.reserve(times.size());
    for (double t : times) {
        traj.states.push_back(validate_density(rho(t), tol));
        traj.derivatives.push_back(rho_dot(t));
    }
    return traj;
}

const std::vector<ModelInfo>& model_catalog() {
    static const std::vector<ModelInfo> catalog = {
        {"jc", "Jaynes-Cummings reduced atom state, cavity in vacuum",
         {{"omega", 1.0}, {"rho11", 1.0}, {"rho12_re", 0.0}, {"rho12_im", 0.0}}},
        {"unitary", "qubit precessing under H = omega*sigma_z/2 (Bloch vector rx, ry, rz)",
         {{"omega", 1.0}, {"rx", 0.6}, {"ry", 0.0}, {"rz", 0.3}}},
        {"amplitude_damping", "constant-rate decay, L = sigma_minus at rate gamma",
         {{"gamma", 0.5}, {"rho11", 0.8}, {"rho12_re", 0.3}, {"rho12_im", 0.0}}},
        {"dephasing", "pure dephasing, L = sigma_z at rate gamma/2",
         {{"gamma", 0.5}, {"rho11", 0.7}, {"rho12_re", 0.3}, {"rho12_im", 0.0}}},
    };
    return catalog;
}

std::unique_ptr<TrajectoryModel> library_model(const std::string& name, const ModelParams& params) {
    const ModelInfo* info = nullptr;
    for (const auto& m : model_catalog()) {
        if (m.name == name) info = &m;
    }
    if (info == nullptr) throw UnknownModel(name);

    ModelParams merged = info->defaults;
    for (const auto& [key, value] : params) {
        if (!merged.count(key)) throw Error("model '" + name + "' has no parameter '" + key + "'");
        merged[key] = value;
    }
    ModelParams rest = merged;
    if (name == "jc") {
        JCParams p;
        p.omega = take(rest, "omega");
        p.rho11 = take(rest, "rho11");
        const double re = take(rest, "rho12_re");
        p.rho12 = cplx(re, take(rest, "rho12_im"));
        return std::make_unique<JCModel>(p);
    }
    if (name == "unitary") {
        const double omega = take(rest, "omega");
        const double rx = take(rest, "rx");
        const double ry = take(rest, "ry");
        return std::make_unique<UnitaryModel>(omega, rx, ry, take(rest, "rz"));
    }
    const double gamma = take(rest, "gamma");
    const double rho11 = take(rest, "rho11");
    const double re = take(rest, "rho12_re");
    const cplx rho12(re, take(rest, "rho12_im"));
    if (name == "amplitude_damping") return std::make_unique<AmplitudeDampingModel>(gamma, rho11, rho12);
    return std::make_unique<DephasingModel>(gamma, rho11, rho12);
}

std::vector<double> uniform_grid(double t0, double t1, double dt) {
    if (!(dt > 0.0) || !(t1 > t0)) throw GridMismatch("uniform_grid: need dt > 0 and t1 > t0");
    const auto steps = static_cast<long>(std::floor((t1 - t0) / dt + 0.5));
    std::vector<double> grid(steps + 1);
    for (long k = 0; k <= steps; ++k) grid[k] = t0 + k * dt;
    return grid;
}

}  // namespace resign
