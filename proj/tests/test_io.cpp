#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "resign/io.hpp"
#include "resign/models.hpp"
#include "resign/pipeline.hpp"
#include "support/generators.hpp"

using namespace resign;
using resign::testing::Rng;

namespace {

bool bit_equal(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(cplx) * a.size()) == 0;
}

int parse_error_line(const std::string& text) {
    std::istringstream is(text);
    try {
        io::read_trajectory(is, "case");
    } catch (const ParseError& e) {
        return e.line;
    }
    return -1;
}

const char* kSmall =
    "# comment\n"
    "format trajectory/1\n"
    "dim 2\n"
    "tol 1e-8\n"
    "points 2\n"
    "derivatives 0\n"
    "t 0\n"
    "rho\n"
    "0.5 0 0 0\n"
    "0 0 0.5 0\n"
    "t 0.5\n"
    "rho\n"
    "0.6 0 0.1 0.1\n"
    "0.1 -0.1 0.4 0\n";

std::string replace_line(std::string text, int line, const std::string& with) {
    std::istringstream is(text);
    std::ostringstream os;
    std::string l;
    for (int n = 1; std::getline(is, l); ++n) os << (n == line ? with : l) << '\n';
    return os.str();
}

}  // namespace

TEST(TrajectoryFile, RoundTripIsBitExact) {
    Rng rng(71);
    for (int trial = 0; trial < 5; ++trial) {
        const Index d = rng.integer(2, 5);
        const auto traj = resign::testing::exact_trajectory(resign::testing::random_system(rng, d), 0.0123, 40);
        std::stringstream ss;
        io::write_trajectory(ss, traj);
        const auto back = io::read_trajectory(ss);
        ASSERT_EQ(back.size(), traj.size());
        for (std::size_t n = 0; n < traj.size(); ++n) {
            EXPECT_EQ(std::memcmp(&back.times[n], &traj.times[n], sizeof(double)), 0);
            EXPECT_TRUE(bit_equal(back.states[n].matrix(), traj.states[n].matrix()));
            EXPECT_TRUE(bit_equal(back.derivatives[n], traj.derivatives[n]));
        }
        std::stringstream again;
        io::write_trajectory(again, back);
        EXPECT_EQ(again.str(), [&] {
            std::stringstream s;
            io::write_trajectory(s, traj);
            return s.str();
        }());
    }
}

TEST(TrajectoryFile, ReadsHandWrittenFile) {
    std::istringstream is(kSmall);
    const auto traj = io::read_trajectory(is);
    EXPECT_EQ(traj.size(), 2u);
    EXPECT_FALSE(traj.has_derivatives());
    EXPECT_EQ(traj.states[1].matrix()(0, 1), cplx(0.1, 0.1));
}

TEST(TrajectoryFile, ParseErrorsCarryLineNumbers) {
    EXPECT_EQ(parse_error_line(kSmall), -1);
    EXPECT_EQ(parse_error_line(replace_line(kSmall, 2, "format trajectory/9")), 2);
    EXPECT_EQ(parse_error_line(replace_line(kSmall, 9, "0.5 0 0 zero")), 9);
    EXPECT_EQ(parse_error_line(replace_line(kSmall, 10, "0 0 0.5")), 10);
    EXPECT_EQ(parse_error_line(replace_line(kSmall, 11, "t 0")), 11);
    // Not a density matrix: reported at the first row of the offending matrix
    EXPECT_EQ(parse_error_line(replace_line(kSmall, 13, "1.6 0 0.1 0.1")), 13);
    EXPECT_EQ(parse_error_line(std::string(kSmall) + "t 1\n"), 15);
    std::istringstream truncated("format trajectory/1\ndim 2\n");
    EXPECT_THROW(io::read_trajectory(truncated), ParseError);
}

TEST(RatesFile, RoundTrip) {
    const std::vector<double> times{0.0, 0.25};
    const std::vector<std::vector<RatedTerm>> terms{
        {{JumpSpec{2, 0, true, 3}, -0.75, Sign::Nonpositive}, {JumpSpec{1, 0, false, 3}, 1.0 / 3.0, Sign::Nonnegative}},
        {}};
    std::stringstream ss;
    io::write_rates(ss, times, terms);
    EXPECT_NE(ss.str().find("0,1,3,1,1,-,-0.75"), std::string::npos);
    const auto rows = io::read_rates(ss, 3);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[0].rated.spec == terms[0][0].spec);
    EXPECT_EQ(rows[1].rated.rate, 1.0 / 3.0);
    EXPECT_EQ(rows[1].term, 2);
    std::istringstream bad("t,term,target,source,dagger,sign,rate\n0,1,1,2,0,+,0.5\n");
    try {
        io::read_rates(bad, 3);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 2);
    }
}

TEST(IntervalsFile, RoundTrip) {
    io::IntervalSet set{{{1.0, 1.5}}, {{2.0, 2.25}, {3.0, 3.5}}};
    std::stringstream ss;
    io::write_intervals(ss, set);
    const auto back = io::read_intervals(ss);
    ASSERT_EQ(back.singular.size(), 1u);
    ASSERT_EQ(back.capped.size(), 2u);
    EXPECT_EQ(back.capped[1].end, 3.5);
}

TEST(Artifacts, ReloadedGeneratorEqualsAssembledOne) {
    Rng rng(72);
    const auto traj = resign::testing::exact_trajectory(resign::testing::random_system(rng, 3), 1e-3, 200);
    const auto analysis = analyze_trajectory(traj);
    SynthesisOptions opts;
    opts.policy = SignPolicy::alternating(3);
    const auto result = synthesize_rates(analysis, opts);

    std::vector<ComplexMatrix> hs;
    for (const auto& h : analysis.hamiltonians) hs.push_back(h.H);
    std::stringstream ops, rates;
    io::write_operators(ops, analysis.frames, hs);
    io::write_rates(rates, analysis.times, result.terms);
    const auto gen = io::generator_from_artifacts(io::read_operators(ops), io::read_rates(rates, 3), {});
    ASSERT_EQ(gen.size(), result.generator.size());
    for (std::size_t n = 0; n < gen.size(); ++n) {
        EXPECT_TRUE(bit_equal(gen.H[n], result.generator.H[n]));
        ASSERT_EQ(gen.terms[n].size(), result.generator.terms[n].size());
        for (std::size_t k = 0; k < gen.terms[n].size(); ++k) {
            EXPECT_TRUE(bit_equal(gen.terms[n][k].op, result.generator.terms[n][k].op));
            EXPECT_EQ(gen.terms[n][k].rate, result.generator.terms[n][k].rate);
        }
    }

    std::stringstream rates_copy(rates.str());
    auto rows = io::read_rates(rates_copy, 3);
    rows.front().t += 1e-7;
    std::stringstream ops2;
    io::write_operators(ops2, analysis.frames, hs);
    EXPECT_THROW(io::generator_from_artifacts(io::read_operators(ops2), rows, {}), GridMismatch);
}
