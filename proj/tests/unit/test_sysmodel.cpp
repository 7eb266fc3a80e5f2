#include "helpers.hpp"
#include "tlmor/benchmark.hpp"
#include "tlmor/linalg.hpp"
#include "tlmor/matrix_io.hpp"

#include <doctest.h>

#include <numbers>
#include <sstream>

using namespace tlmor;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("ordered modes: eigenvalue sequence and tie order") {
  const auto modes = ordered_laplacian_modes(8);
  const int expected[8] = {2, 5, 5, 8, 10, 10, 13, 13};
  for (int i = 0; i < 8; ++i) CHECK(modes[i].lambda() == expected[i]);
  CHECK(modes[1].k1 == 1);
  CHECK(modes[1].k2 == 2);
  CHECK(modes[2].k1 == 2);
  CHECK(modes[2].k2 == 1);
}

TEST_CASE("ordered modes: no mode below the cut is skipped") {
  const auto modes = ordered_laplacian_modes(300);
  const int cut = modes.back().lambda();
  int count_below = 0;
  for (int a = 1; a * a < cut; ++a)
    for (int b = 1; a * a + b * b < cut; ++b) ++count_below;
  int ours_below = 0;
  for (const auto& m : modes) ours_below += m.lambda() < cut;
  CHECK(ours_below == count_below);
}

TEST_CASE("benchmark: leading entries from closed forms") {
  BenchmarkConfig cfg;
  const StochasticLinearSystem sys = build_heat_spde_benchmark(cfg);
  CHECK(sys.n() == 100);
  CHECK(sys.A(0, 0) == Approx(2.2).epsilon(1e-15));
  CHECK(sys.A.isDiagonal(0.0));
  CHECK(sys.B(0, 0) == Approx(4.0 / pi).epsilon(1e-14));
  CHECK(sys.C(0, 0) == Approx(16.0 / (3.0 * pi * pi * pi)).epsilon(1e-14));
  CHECK(sys.K.rows() == 1);
  CHECK(sys.K(0, 0) == 1.0);
}

TEST_CASE("benchmark: B vanishes for mode indices divisible by four") {
  BenchmarkConfig cfg;
  const StochasticLinearSystem sys = build_heat_spde_benchmark(cfg);
  const auto modes = ordered_laplacian_modes(cfg.n);
  int checked = 0;
  for (Index k = 0; k < cfg.n; ++k) {
    if (modes[k].k1 % 4 == 0 || modes[k].k2 % 4 == 0) {
      CHECK(sys.B(k, 0) == 0.0);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("benchmark: noise entries against composite Simpson") {
  BenchmarkConfig cfg;
  cfg.n = 12;
  const StochasticLinearSystem sys = build_heat_spde_benchmark(cfg);
  const auto modes = ordered_laplacian_modes(cfg.n);
  // Two-dimensional integrand factorizes; integrate each factor separately.
  auto factor_x = [](int a, int b, int pts) {
    auto f = [a, b](double s) { return std::exp(-std::abs(s - pi / 2)) * std::sin(a * s) * std::sin(b * s); };
    return testutil::simpson(f, 0.0, pi / 2, pts / 2) + testutil::simpson(f, pi / 2, pi, pts / 2);
  };
  auto factor_y = [](int a, int b, int pts) {
    auto f = [a, b](double s) { return std::exp(-s) * std::sin(a * s) * std::sin(b * s); };
    return testutil::simpson(f, 0.0, pi, pts);
  };
  for (Index k : {0, 1, 5, 11})
    for (Index i : {0, 2, 7, 11}) {
      const auto& mk = modes[k];
      const auto& mi = modes[i];
      const double oracle = cfg.gamma * (4.0 / (pi * pi)) * factor_x(mk.k1, mi.k1, 10000) * factor_y(mk.k2, mi.k2, 10000);
      const double finer = cfg.gamma * (4.0 / (pi * pi)) * factor_x(mk.k1, mi.k1, 20000) * factor_y(mk.k2, mi.k2, 20000);
      CHECK(std::abs(sys.N[0](k, i) - oracle) <= 1e-10);
      CHECK(std::abs(finer - oracle) <= 1e-9 * std::max(1e-3, std::abs(oracle)));
    }
}

TEST_CASE("benchmark: noise matrix symmetric, q=2 powers commute") {
  BenchmarkConfig cfg;
  cfg.n = 30;
  cfg.q = 2;
  cfg.rho = 0.5;
  const StochasticLinearSystem sys = build_heat_spde_benchmark(cfg);
  const Matrix& N1 = sys.N[0];
  const Matrix& N2 = sys.N[1];
  CHECK((N1 - N1.transpose()).norm() <= 1e-10 * N1.norm());
  CHECK((N1 * N2 - N2 * N1).norm() <= 1e-8 * N1.norm() * N2.norm());
  CHECK(sys.K(0, 1) == 0.5);
  CHECK(sys.K(1, 0) == 0.5);
  // N2 = N1^{6/5}: the fifth power of N2 equals the sixth power of N1.
  Matrix N1_6 = N1;
  for (int i = 0; i < 5; ++i) N1_6 = N1_6 * N1;
  Matrix N2_5 = N2;
  for (int i = 0; i < 4; ++i) N2_5 = N2_5 * N2;
  CHECK(testutil::rel_err(N2_5, N1_6) < 1e-8);
}

TEST_CASE("benchmark: larger n keeps the n=100 prefix") {
  BenchmarkConfig small, large;
  large.n = 400;
  const StochasticLinearSystem a = build_heat_spde_benchmark(small);
  const StochasticLinearSystem b = build_heat_spde_benchmark(large);
  CHECK(b.A.topLeftCorner(100, 100) == a.A);
  CHECK(b.B.topRows(100) == a.B);
  CHECK(b.C.leftCols(100) == a.C);
  CHECK(b.N[0].topLeftCorner(100, 100) == a.N[0]);
}

TEST_CASE("benchmark config validation") {
  BenchmarkConfig cfg;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.q = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.rho = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.T = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("control signal normalization") {
  const ControlSignal u = benchmark_control(1.0);
  CHECK(u.c_u == Approx(1.0503957).epsilon(1e-7));
  for (double T : {0.5, 1.0, 2.0, 3.0}) {
    const ControlSignal v = benchmark_control(T);
    const double energy = testutil::simpson([&](double t) { return v(t).squaredNorm(); }, 0.0, T, 2000);
    CHECK(std::abs(energy - 1.0) <= 1e-10);
  }
  CHECK(benchmark_control(500.0).c_u == Approx(std::sqrt(0.2)).epsilon(1e-12));
}

TEST_CASE("symmetric power rejects indefinite input, clamps rounding noise") {
  Matrix X{{1.0, 0.0}, {0.0, -0.5}};
  CHECK_THROWS_AS(symmetric_power(X, 1.2), Error);
  Matrix Y{{1.0, 0.0}, {0.0, -1e-13}};
  const Matrix Z = symmetric_power(Y, 1.2);
  CHECK(std::abs(Z(1, 1)) < 1e-15);
  CHECK(Z(0, 0) == Approx(1.0));
}

TEST_CASE("system validation") {
  StochasticLinearSystem s = scalar_system(-1.0, 1.0, 1.0, 0.5);
  CHECK_NOTHROW(s.validate());
  StochasticLinearSystem bad = s;
  bad.K(0, 0) = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = s;
  bad.A(0, 0) = std::nan("");
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = s;
  bad.B = Matrix::Zero(2, 1);
  CHECK_THROWS_AS(bad.validate(), DimensionError);
  bad = s;
  bad.N.push_back(Matrix::Identity(1, 1));
  CHECK_THROWS(bad.validate());
}

TEST_CASE("system file round trip is exact") {
  std::mt19937_64 gen(7);
  const StochasticLinearSystem s = testutil::random_system(gen, 5, 2, 3, 2);
  std::stringstream ss;
  io::write_system(ss, s);
  const std::string text = ss.str();
  CHECK(text.rfind("STOCHLIN 5 2 3 2\n", 0) == 0);
  const StochasticLinearSystem r = io::read_system(ss);
  CHECK(r.A == s.A);
  CHECK(r.B == s.B);
  CHECK(r.C == s.C);
  CHECK(r.N[0] == s.N[0]);
  CHECK(r.N[1] == s.N[1]);
  CHECK(r.K == s.K);
}

TEST_CASE("dual and transformed systems") {
  std::mt19937_64 gen(3);
  const StochasticLinearSystem s = testutil::random_system(gen, 4, 1, 2, 1);
  const StochasticLinearSystem d = s.dual();
  CHECK(d.A == s.A.transpose());
  CHECK(d.B == s.C.transpose());
  CHECK(d.C == s.B.transpose());
  const Matrix S = testutil::random_matrix(gen, 4, 4) + 3.0 * Matrix::Identity(4, 4);
  const Matrix Sinv = S.inverse();
  const StochasticLinearSystem t = s.transformed(S, Sinv);
  CHECK(testutil::rel_err(t.A, S * s.A * Sinv) < 1e-14);
  CHECK(testutil::rel_err(t.C * t.B, s.C * s.B) < 1e-12);
}

TEST_CASE("psd factor handles the fully correlated case") {
  Matrix K{{1.0, 1.0}, {1.0, 1.0}};
  const Matrix F = psd_factor(K);
  CHECK((F * F.transpose() - K).norm() < 1e-12);
  CHECK(F.row(0) == F.row(1));
}
