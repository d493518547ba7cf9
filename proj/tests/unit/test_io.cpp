#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cmm/errors.hpp"
#include "cmm/parallel.hpp"
#include "cmm/report.hpp"
#include "cmm/serialize.hpp"
#include "cmm/verification.hpp"
#include "oracles.hpp"

using namespace cmm;

TEST(State, RoundTripIsBitExact) {
  const TorusModel m({TorusGeometry::flat(1, 16), TorusGeometry::flat(1, 16)}, {0}, {1.0});
  const Potentials phi = m.random(1, 0.05, 2);
  std::stringstream buf;
  write_state(buf, make_state(m, phi));
  const StateFile s = read_state(buf);
  EXPECT_EQ(s.backend, Backend::Torus);
  EXPECT_EQ(s.resolution, 16);
  EXPECT_EQ(potentials_from_state(m, s), phi);
}

TEST(State, TruncatedOrForeignInputIsIoError) {
  const ToricModel m({ToricCP1Geometry(1.0, 64), ToricCP1Geometry(1.0, 64)}, {0}, {1.0});
  std::stringstream buf;
  write_state(buf, make_state(m, m.random(2, 0.05, 3)));
  const std::string bytes = buf.str();
  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, bytes.size() - 8}) {
    std::stringstream part(bytes.substr(0, cut));
    EXPECT_THROW(read_state(part), IoError) << "cut " << cut;
  }
  std::stringstream junk("NOTSTATE0000000000000000000000000000");
  EXPECT_THROW(read_state(junk), IoError);
}

TEST(State, MismatchedModelIsDimensionError) {
  const TorusModel a({TorusGeometry::flat(1, 16), TorusGeometry::flat(1, 16)}, {0}, {1.0});
  const TorusModel b({TorusGeometry::flat(1, 32), TorusGeometry::flat(1, 32)}, {0}, {1.0});
  const ToricModel c({ToricCP1Geometry(1.0, 64), ToricCP1Geometry(1.0, 64)}, {0}, {1.0});
  const StateFile s = make_state(a, a.zero());
  EXPECT_THROW(potentials_from_state(b, s), DimensionError);
  EXPECT_THROW(potentials_from_state(c, s), DimensionError);
}

TEST(State, FieldsCsvHeader) {
  const ToricModel m({ToricCP1Geometry(1.0, 64), ToricCP1Geometry(1.0, 64)}, {0}, {1.0});
  const std::string csv = fields_csv(m, {std::vector<double>(64, 1.0)}, {"rho"});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x0,rho");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 65);
  EXPECT_THROW(fields_csv(m, {std::vector<double>(64)}, {"a", "b"}), DimensionError);
}

TEST(Report, DigestIsFnv1aOfCompactDump) {
  EXPECT_EQ(oracle::fnv1a64("a"), "af63dc4c8601ec8c");
  const json j = {{"b", 1}, {"a", {{"z", 2.5}, {"y", "s"}}}};
  EXPECT_EQ(config_digest(j), oracle::fnv1a64(j.dump()));
  EXPECT_NE(config_digest(j), config_digest(json{{"b", 2}}));
}

TEST(Report, DumpIsSortedWithTrailingNewline) {
  const std::string s = dump_json(json{{"b", 1}, {"a", 2}});
  EXPECT_EQ(s.back(), '\n');
  EXPECT_LT(s.find("\"a\""), s.find("\"b\""));
}

TEST(Report, ChecksAndBounds) {
  SuiteReport r("x", json::object());
  r.add("small", 1e-9, 1e-8);
  EXPECT_TRUE(r.passed());
  r.add("nan", std::nan(""), 1.0);
  EXPECT_FALSE(r.find("nan")->passed);
  r.add_at_least("order", 3.9, 3.5);
  EXPECT_TRUE(r.find("order")->passed);
  EXPECT_FALSE(r.passed());
  const json j = r.to_json();
  EXPECT_EQ(j.at("checks").size(), 3u);
  EXPECT_FALSE(j.at("passed").get<bool>());
}

TEST(Parallel, SumsDoNotDependOnThreadCount) {
  auto term = [](std::size_t i) { return std::sin(0.37 * double(i)) / (1.0 + double(i)); };
  set_thread_count(1);
  const double one = deterministic_sum(100000, term, 512);
  const auto many1 = deterministic_sums(100000, 2, [&](std::size_t i, double* o) { o[0] = term(i); o[1] = 1.0; }, 512);
  for (int t : {2, 3, 8}) {
    set_thread_count(t);
    EXPECT_EQ(deterministic_sum(100000, term, 512), one);
    EXPECT_EQ(deterministic_sums(100000, 2, [&](std::size_t i, double* o) { o[0] = term(i); o[1] = 1.0; }, 512), many1);
  }
  EXPECT_EQ(many1[1], 100000.0);
  set_thread_count(1);
}

TEST(Parallel, ForCoversRangeOnce) {
  set_thread_count(4);
  std::vector<int> hits(10007, 0);
  parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  }, 100);
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 10007);
  set_thread_count(1);
}

TEST(VerificationHelpers, RandomHermitianSpectrum) {
  Rng rng(3);
  for (int n : {1, 2, 3}) {
    const Eigen::MatrixXcd H = random_hermitian(rng, n, 0.4);
    EXPECT_TRUE(H.isApprox(H.adjoint(), 1e-15));
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H).eigenvalues();
    EXPECT_GE(ev.minCoeff(), 0.6 - 1e-12);
    EXPECT_LE(ev.maxCoeff(), 1.4 + 1e-12);
  }
}

TEST(VerificationHelpers, AntisymmetrizedTopMatchesPencil) {
  Rng rng(4);
  for (int dim : {2, 4, 6}) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim), B = A;
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        A(i, j) = rng.normal();
        B(i, j) = rng.normal();
        A(j, i) = -A(i, j);
        B(j, i) = -B(i, j);
      }
    const int n = dim / 2;
    const auto m = oracle::mixed_volumes(A, B);
    std::vector<Eigen::MatrixXd> forms(n, A);
    for (int k = 0; k <= n; ++k) {
      for (int i = 0; i < n; ++i) forms[i] = i < k ? A : B;
      double fact = 1.0;
      for (int i = 2; i <= k; ++i) fact *= i;
      for (int i = 2; i <= n - k; ++i) fact *= i;
      EXPECT_NEAR(antisymmetrized_top(dim, {}, forms) / fact, m[k], 1e-10) << "dim " << dim << " k " << k;
    }
  }
}
