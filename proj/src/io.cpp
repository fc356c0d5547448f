#include "resign/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace resign::io {

namespace {

// Line reader that skips blank lines and '#' comments and tracks line numbers.
class LineReader {
public:
    LineReader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

    bool next(std::string& line) {
        while (std::getline(is_, line)) {
            ++line_no_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        return false;
    }

    std::string require(const char* what) {
        std::string line;
        if (!next(line)) fail(std::string("unexpected end of file, expected ") + what);
        return line;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }
    int line() const noexcept { return line_no_; }

private:
    std::istream& is_;
    std::string source_;
    int line_no_ = 0;
};

double parse_double(const std::string& token, const LineReader& reader) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) reader.fail("malformed number '" + token + "'");
        return v;
    } catch (const std::logic_error&) {
        reader.fail("malformed number '" + token + "'");
    }
}

long parse_int(const std::string& token, const LineReader& reader) {
    try {
        std::size_t used = 0;
        const long v = std::stol(token, &used);
        if (used != token.size()) reader.fail("malformed integer '" + token + "'");
        return v;
    } catch (const std::logic_error&) {
        reader.fail("malformed integer '" + token + "'");
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    if (sep == ' ') {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) out.push_back(tok);
        return out;
    }
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// "key value" header line
std::string header_value(LineReader& reader, const std::string& key) {
    const auto toks = split(reader.require(key.c_str()), ' ');
    if (toks.size() != 2 || toks[0] != key) reader.fail("expected '" + key + " <value>'");
    return toks[1];
}

void write_matrix(std::ostream& os, const ComplexMatrix& m) {
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) os << ' ';
            os << format_double(m(r, c).real()) << ' ' << format_double(m(r, c).imag());
        }
        os << '\n';
    }
}

ComplexMatrix read_matrix(LineReader& reader, Index d) {
    ComplexMatrix m(d, d);
    for (Index r = 0; r < d; ++r) {
        const auto toks = split(reader.require("matrix row"), ' ');
        if (static_cast<Index>(toks.size()) != 2 * d) {
            reader.fail("matrix row needs " + std::to_string(2 * d) + " numbers, got " + std::to_string(toks.size()));
        }
        for (Index c = 0; c < d; ++c) {
            m(r, c) = cplx(parse_double(toks[2 * c], reader), parse_double(toks[2 * c + 1], reader));
        }
    }
    return m;
}

void expect_keyword(LineReader& reader, const std::string& keyword) {
    const auto line = reader.require(keyword.c_str());
    if (split(line, ' ') != std::vector<std::string>{keyword}) reader.fail("expected '" + keyword + "'");
}

double read_time_line(LineReader& reader) {
    const auto toks = split(reader.require("t <time>"), ' ');
    if (toks.size() != 2 || toks[0] != "t") reader.fail("expected 't <time>'");
    return parse_double(toks[1], reader);
}

void check_magic(LineReader& reader, const std::string& kind) {
    const std::string v = header_value(reader, "format");
    if (v != kind + "/1") reader.fail("unsupported format '" + v + "', expected '" + kind + "/1'");
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory(std::ostream& os, const Trajectory& traj, double tol) {
    traj.check();
    os << "# lindblad-resign trajectory\n";
    os << "format trajectory/1\n";
    os << "dim " << traj.dim() << '\n';
    os << "tol " << format_double(tol) << '\n';
    os << "points " << traj.size() << '\n';
    os << "derivatives " << (traj.has_derivatives() ? 1 : 0) << '\n';
    for (std::size_t n = 0; n < traj.size(); ++n) {
        os << "t " << format_double(traj.times[n]) << '\n';
        os << "rho\n";
        write_matrix(os, traj.states[n].matrix());
        if (traj.has_derivatives()) {
            os << "drho\n";
            write_matrix(os, traj.derivatives[n]);
        }
    }
}

Trajectory read_trajectory(std::istream& is, const std::string& source) {
    LineReader reader(is, source);
    check_magic(reader, "trajectory");
    const long d = parse_int(header_value(reader, "dim"), reader);
    if (d < 2) reader.fail("dim must be at least 2");
    const double tol = parse_double(header_value(reader, "tol"), reader);
    if (!(tol > 0.0)) reader.fail("tol must be positive");
    const long points = parse_int(header_value(reader, "points"), reader);
    if (points < 1) reader.fail("points must be positive");
    const long with_deriv = parse_int(header_value(reader, "derivatives"), reader);

    Trajectory traj;
    for (long n = 0; n < points; ++n) {
        const double t = read_time_line(reader);
        if (!traj.times.empty() && !(t > traj.times.back())) reader.fail("time grid not strictly increasing");
        expect_keyword(reader, "rho");
        const int row_line = reader.line() + 1;
        const ComplexMatrix rho = read_matrix(reader, d);
        try {
            traj.states.push_back(validate_density(rho, tol));
        } catch (const InvalidDensity& e) {
            throw ParseError(source, row_line, std::string("invalid density matrix at t = ") + format_double(t) +
                                                   ": " + e.what());
        }
        traj.times.push_back(t);
        if (with_deriv) {
            expect_keyword(reader, "drho");
            traj.derivatives.push_back(read_matrix(reader, d));
        }
    }
    std::string extra;
    if (reader.next(extra)) reader.fail("trailing content after last point");
    return traj;
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj, double tol) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_trajectory(os, traj, tol);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParseError(path.string(), 0, "cannot open file");
    return read_trajectory(is, path.string());
}

void write_operators(std::ostream& os, std::span<const EigenFrame> frames, std::span<const ComplexMatrix> H) {
    if (frames.size() != H.size()) throw GridMismatch("write_operators: frames and Hamiltonians differ in length");
    os << "# lindblad-resign operators: eigenframe U and Hamiltonian H per grid point\n";
    os << "format operators/1\n";
    os << "dim " << (frames.empty() ? 0 : frames.front().U.rows()) << '\n';
    os << "points " << frames.size() << '\n';
    for (std::size_t n = 0; n < frames.size(); ++n) {
        os << "t " << format_double(frames[n].t) << '\n';
        os << "U\n";
        write_matrix(os, frames[n].U);
        os << "H\n";
        write_matrix(os, H[n]);
    }
}

std::vector<OperatorRecord> read_operators(std::istream& is, const std::string& source) {
    LineReader reader(is, source);
    check_magic(reader, "operators");
    const long d = parse_int(header_value(reader, "dim"), reader);
    if (d < 2) reader.fail("dim must be at least 2");
    const long points = parse_int(header_value(reader, "points"), reader);
    std::vector<OperatorRecord> out;
    for (long n = 0; n < points; ++n) {
        OperatorRecord rec;
        rec.t = read_time_line(reader);
        expect_keyword(reader, "U");
        rec.U = read_matrix(reader, d);
        expect_keyword(reader, "H");
        rec.H = read_matrix(reader, d);
        out.push_back(std::move(rec));
    }
    return out;
}

void write_rates(std::ostream& os, std::span<const double> times,
                 std::span<const std::vector<RatedTerm>> terms) {
    if (times.size() != terms.size()) throw GridMismatch("write_rates: grid and term lists differ in length");
    os << "t,term,target,source,dagger,sign,rate\n";
    for (std::size_t n = 0; n < times.size(); ++n) {
        for (std::size_t k = 0; k < terms[n].size(); ++k) {
            const auto& rt = terms[n][k];
            os << format_double(times[n]) << ',' << k + 1 << ',' << rt.spec.target + 1 << ','
               << rt.spec.source + 1 << ',' << (rt.spec.dagger ? 1 : 0) << ','
               << (rt.required == Sign::Nonnegative ? '+' : '-') << ',' << format_double(rt.rate) << '\n';
        }
    }
}

std::vector<RateRow> read_rates(std::istream& is, int dim, const std::string& source) {
    LineReader reader(is, source);
    std::string line;
    if (!reader.next(line) || line != "t,term,target,source,dagger,sign,rate") {
        reader.fail("expected rates header 't,term,target,source,dagger,sign,rate'");
    }
    std::vector<RateRow> out;
    while (reader.next(line)) {
        const auto f = split(line, ',');
        if (f.size() != 7) reader.fail("rates row needs 7 fields");
        RateRow row;
        row.t = parse_double(f[0], reader);
        row.term = static_cast<int>(parse_int(f[1], reader));
        const long target = parse_int(f[2], reader), src = parse_int(f[3], reader);
        const long dagger = parse_int(f[4], reader);
        if (src < 1 || target <= src || target > dim) reader.fail("jump indices must satisfy 1 <= source < target <= dim");
        if (dagger != 0 && dagger != 1) reader.fail("dagger must be 0 or 1");
        if (f[5] != "+" && f[5] != "-") reader.fail("sign must be '+' or '-'");
        row.rated.spec = {static_cast<int>(target - 1), static_cast<int>(src - 1), dagger == 1, dim};
        row.rated.required = f[5] == "+" ? Sign::Nonnegative : Sign::Nonpositive;
        row.rated.rate = parse_double(f[6], reader);
        out.push_back(row);
    }
    return out;
}

void write_intervals(std::ostream& os, const IntervalSet& intervals) {
    os << "kind,t_start,t_end\n";
    for (const auto& iv : intervals.singular) {
        os << "singular," << format_double(iv.start) << ',' << format_double(iv.end) << '\n';
    }
    for (const auto& iv : intervals.capped) {
        os << "capped," << format_double(iv.start) << ',' << format_double(iv.end) << '\n';
    }
}

IntervalSet read_intervals(std::istream& is, const std::string& source) {
    LineReader reader(is, source);
    std::string line;
    if (!reader.next(line) || line != "kind,t_start,t_end") reader.fail("expected intervals header");
    IntervalSet out;
    while (reader.next(line)) {
        const auto f = split(line, ',');
        if (f.size() != 3) reader.fail("interval row needs 3 fields");
        const TimeInterval iv{parse_double(f[1], reader), parse_double(f[2], reader)};
        if (f[0] == "singular") {
            out.singular.push_back(iv);
        } else if (f[0] == "capped") {
            out.capped.push_back(iv);
        } else {
            reader.fail("unknown interval kind '" + f[0] + "'");
        }
    }
    return out;
}

LindbladGenerator generator_from_artifacts(const std::vector<OperatorRecord>& operators,
                                           const std::vector<RateRow>& rates,
                                           const IntervalSet& intervals) {
    LindbladGenerator gen;
    const std::size_t count = operators.size();
    gen.grid.reserve(count);
    gen.terms.assign(count, {});
    for (const auto& rec : operators) {
        gen.grid.push_back(rec.t);
        gen.H.push_back(rec.H);
    }
    std::size_t n = 0;
    for (const auto& row : rates) {
        while (n < count && gen.grid[n] < row.t) ++n;
        if (n == count || gen.grid[n] != row.t) {
            throw GridMismatch("rate at t = " + format_double(row.t) + " does not match any operator grid point");
        }
        const ComplexMatrix& U = operators[n].U;
        if (row.rated.spec.dim != U.rows()) throw DimMismatch("rates and operators differ in dimension");
        gen.terms[n].push_back({U.col(row.rated.spec.to()) * U.col(row.rated.spec.from()).adjoint(),
                                row.rated.rate});
    }
    gen.excluded = intervals.singular;
    gen.excluded.insert(gen.excluded.end(), intervals.capped.begin(), intervals.capped.end());
    return gen;
}

void write_report(std::ostream& os, const VerificationReport& report, double bound, bool passed) {
    os << "# lindblad-resign verification report\n";
    os << "status = " << (passed ? "pass" : "fail") << '\n';
    os << "state_error_bound = " << format_double(bound) << '\n';
    os << "max_state_error = " << format_double(report.max_state_error) << '\n';
    os << "max_rhs_error = " << format_double(report.max_rhs_error) << '\n';
    os << "trace_drift = " << format_double(report.trace_drift) << '\n';
    os << "min_eigenvalue = " << format_double(report.min_eigenvalue) << '\n';
    os << "integrated_duration = " << format_double(report.duration) << '\n';
    const PointResidual* worst_rhs = nullptr;
    const PointResidual* worst_state = nullptr;
    for (const auto& p : report.points) {
        if (p.excluded) continue;
        if (!worst_rhs || p.rhs_error > worst_rhs->rhs_error) worst_rhs = &p;
        if (!worst_state || p.state_error > worst_state->state_error) worst_state = &p;
    }
    if (worst_rhs) os << "worst_rhs_t = " << format_double(worst_rhs->t) << '\n';
    if (worst_state) os << "worst_state_t = " << format_double(worst_state->t) << '\n';
    os << "windows = " << report.windows << '\n';
    os << "points = " << report.points.size() << '\n';
    os << "excluded_intervals = " << report.excluded.size() << '\n';
    for (const auto& iv : report.excluded) {
        os << "excluded = [" << format_double(iv.start) << ", " << format_double(iv.end) << "]\n";
    }
}

void write_report_points(std::ostream& os, const VerificationReport& report) {
    os << "t,rhs_error,state_error,trace,min_eigenvalue,excluded\n";
    for (const auto& p : report.points) {
        os << format_double(p.t) << ',' << format_double(p.rhs_error) << ',' << format_double(p.state_error)
           << ',' << format_double(p.trace) << ',' << format_double(p.min_eigenvalue) << ','
           << (p.excluded ? 1 : 0) << '\n';
    }
}

}  // namespace resign::io
