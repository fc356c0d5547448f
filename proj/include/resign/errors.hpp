// errors.hpp — exception types raised across the library
//
// Every failure the library can report derives from resign::Error. Types that
// carry structured context (times, indices, magnitudes) expose it as public
// fields so callers such as the CLI can map them to exit codes and messages.

#pragma once

#include <stdexcept>
#include <string>

namespace resign {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonHermitianInput : public Error {
public:
    NonHermitianInput(double deviation);
    double deviation;
};

class DimMismatch : public Error {
public:
    using Error::Error;
};

class InvalidDensity : public Error {
public:
    enum class Violation { NotHermitian, TraceNotOne, NotPSD };
    InvalidDensity(Violation violation, double magnitude);
    Violation violation;
    double magnitude;
};

class DegenerateTrackingFailure : public Error {
public:
    DegenerateTrackingFailure(double time, int column);
    double time;
    int column;
};

class InsufficientStencil : public Error {
public:
    using Error::Error;
};

class OffDiagonalResidualTooLarge : public Error {
public:
    OffDiagonalResidualTooLarge(double time, double residual, double tol);
    double time;
    double residual;
    double tol;
};

class TraceLeak : public Error {
public:
    TraceLeak(double time, double trace);
    double time;
    double trace;
};

// A synthesized rate needs a denominator (an eigenvalue of rho) that vanishes.
// [t_start, t_end] is the grid interval; both equal the grid time when the
// failure is detected at a single point.
class SingularRate : public Error {
public:
    SingularRate(double t_start, double t_end, int target, int source, double flux);
    double t_start;
    double t_end;
    int target;  // 0-based tracked index receiving flux
    int source;  // 0-based tracked index giving flux
    double flux;
};

class InfeasibleTrace : public Error {
public:
    InfeasibleTrace(double time, double sum);
    double time;
    double sum;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class StepBlowup : public Error {
public:
    StepBlowup(double time, double norm);
    double time;
    double norm;
};

class UnknownModel : public Error {
public:
    explicit UnknownModel(const std::string& name);
    std::string name;
};

class InvalidInitialState : public Error {
public:
    using Error::Error;
};

class SingularAt : public Error {
public:
    explicit SingularAt(double t);
    double t;
};

class InvalidPolicy : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& file, int line, const std::string& what);
    std::string file;
    int line;
};

}  // namespace resign
