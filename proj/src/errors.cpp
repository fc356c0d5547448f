#include "resign/errors.hpp"

#include <sstream>

namespace resign {

namespace {

template <typename... Args>
std::string concat(const Args&... args) {
    std::ostringstream os;
    os.precision(10);
    (os << ... << args);
    return os.str();
}

const char* violation_name(InvalidDensity::Violation v) {
    switch (v) {
        case InvalidDensity::Violation::NotHermitian: return "NotHermitian";
        case InvalidDensity::Violation::TraceNotOne: return "TraceNotOne";
        case InvalidDensity::Violation::NotPSD: return "NotPSD";
    }
    return "?";
}

}  // namespace

NonHermitianInput::NonHermitianInput(double dev)
    : Error(concat("NonHermitianInput: |M - M^dagger|_max = ", dev)), deviation(dev) {}

InvalidDensity::InvalidDensity(Violation v, double mag)
    : Error(concat(violation_name(v), ": violation magnitude ", mag)), violation(v), magnitude(mag) {}

DegenerateTrackingFailure::DegenerateTrackingFailure(double t, int col)
    : Error(concat("DegenerateTrackingFailure: ambiguous eigenvector matching for column ", col,
                   " at t = ", t)),
      time(t),
      column(col) {}

OffDiagonalResidualTooLarge::OffDiagonalResidualTooLarge(double t, double r, double tl)
    : Error(concat("OffDiagonalResidualTooLarge: residual ", r, " > ", tl, " at t = ", t)),
      time(t),
      residual(r),
      tol(tl) {}

TraceLeak::TraceLeak(double t, double tr)
    : Error(concat("TraceLeak: sum of eigenvalue rates ", tr, " at t = ", t)), time(t), trace(tr) {}

SingularRate::SingularRate(double a, double b, int tgt, int src, double g)
    : Error(concat("SingularRate: flux ", g, " from index ", src + 1, " to index ", tgt + 1,
                   " needs a vanishing eigenvalue in [", a, ", ", b, "]")),
      t_start(a),
      t_end(b),
      target(tgt),
      source(src),
      flux(g) {}

InfeasibleTrace::InfeasibleTrace(double t, double s)
    : Error(concat("InfeasibleTrace: sum of f = ", s, " at t = ", t)), time(t), sum(s) {}

StepBlowup::StepBlowup(double t, double n)
    : Error(concat("StepBlowup: |rho|_max = ", n, " at t = ", t)), time(t), norm(n) {}

UnknownModel::UnknownModel(const std::string& n) : Error("UnknownModel: " + n), name(n) {}

SingularAt::SingularAt(double tt) : Error(concat("SingularAt: rate diverges at t = ", tt)), t(tt) {}

ParseError::ParseError(const std::string& f, int l, const std::string& what)
    : Error(concat(f, ":", l, ": ", what)), file(f), line(l) {}

}  // namespace resign
