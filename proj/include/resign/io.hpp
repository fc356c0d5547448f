// io.hpp — text file formats used by the command-line tool.
//
// All numbers are written with 17 significant digits so doubles round-trip
// exactly. Matrices are stored dense and row-major, one matrix row per line as
// "re im re im …". Lines starting with '#' are comments. The layouts are described in README.md.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "resign/eigenflow.hpp"
#include "resign/evolution.hpp"
#include "resign/synthesis.hpp"
#include "resign/trajectory.hpp"

namespace resign::io {

std::string format_double(double v);

// Trajectory file
void write_trajectory(std::ostream& os, const Trajectory& traj, double tol = 1e-8);
Trajectory read_trajectory(std::istream& is, const std::string& source = "<stream>");
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj, double tol = 1e-8);
Trajectory load_trajectory(const std::filesystem::path& path);

// Operator file: U_t and H(t) per grid point
struct OperatorRecord {
    double t = 0.0;
    ComplexMatrix U;
    ComplexMatrix H;
};
void write_operators(std::ostream& os, std::span<const EigenFrame> frames, std::span<const ComplexMatrix> H);
std::vector<OperatorRecord> read_operators(std::istream& is, const std::string& source = "<stream>");

// Rates table (CSV): t,term,target,source,dagger,sign,rate with 1-based indices
struct RateRow {
    double t = 0.0;
    int term = 0;
    RatedTerm rated;
};
void write_rates(std::ostream& os, std::span<const double> times,
                 std::span<const std::vector<RatedTerm>> terms);
std::vector<RateRow> read_rates(std::istream& is, int dim, const std::string& source = "<stream>");

// Excluded intervals (CSV): kind,t_start,t_end
struct IntervalSet {
    std::vector<TimeInterval> singular;
    std::vector<TimeInterval> capped;
};
void write_intervals(std::ostream& os, const IntervalSet& intervals);
IntervalSet read_intervals(std::istream& is, const std::string& source = "<stream>");

/// Rebuilds the lab-frame generator from saved operators, rates and intervals.
/// Throws GridMismatch when rate times do not match operator grid points.
LindbladGenerator generator_from_artifacts(const std::vector<OperatorRecord>& operators,
                                           const std::vector<RateRow>& rates,
                                           const IntervalSet& intervals);

// Verification report: key = value summary and a per-point CSV table
void write_report(std::ostream& os, const VerificationReport& report, double bound, bool passed);
void write_report_points(std::ostream& os, const VerificationReport& report);

}  // namespace resign::io
