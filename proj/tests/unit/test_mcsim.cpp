#include "helpers.hpp"
#include "tlmor/balancing.hpp"
#include "tlmor/benchmark.hpp"
#include "tlmor/gramians.hpp"
#include "tlmor/kernels/kernels.hpp"
#include "tlmor/mcsim.hpp"

#include <doctest.h>

#include <sstream>

using namespace tlmor;

namespace {

struct Moments {
  double mean, se;
};

Moments moments(const Vector& v) {
  const double m = v.mean();
  const double var = (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace

TEST_CASE("noise plan factor reproduces K") {
  for (double rho : {-1.0, -0.3, 0.0, 0.5, 1.0}) {
    const Matrix K{{1.0, rho}, {rho, 1.0}};
    const NoisePlan p = make_noise_plan(K, 1.0, 100);
    CHECK((p.factor * p.factor.transpose() - K).norm() <= 1e-12);
    CHECK(p.h == 0.01);
  }
  CHECK_THROWS(make_noise_plan(Matrix{{1.0, 2.0}, {2.0, 1.0}}, 1.0, 10));
}

TEST_CASE("increments: variance, perfect correlation and independence") {
  const rng::NormalGenerator gen(123, rng::Stream::Test);
  const Index N = 100000;
  Matrix dW;
  {
    const NoisePlan p = make_noise_plan(Matrix::Identity(1, 1), 1.0, 100);
    wiener_increments(p, gen, 0, N, 0, dW);
    const double var = dW.row(0).squaredNorm() / N;
    CHECK(var >= 0.0094);
    CHECK(var <= 0.0106);
  }
  {
    const NoisePlan p = make_noise_plan(Matrix::Ones(2, 2), 1.0, 100);
    wiener_increments(p, gen, 0, 1000, 3, dW);
    CHECK(dW.row(0) == dW.row(1));
  }
  {
    const NoisePlan p = make_noise_plan(Matrix::Identity(2, 2), 1.0, 100);
    wiener_increments(p, gen, 0, N, 0, dW);
    const Vector prod = (dW.row(0).array() * dW.row(1).array()).matrix().transpose();
    const Moments m = moments(prod);
    CHECK(std::abs(m.mean) <= 3.0 * m.se);
  }
}

TEST_CASE("increments are a pure function of (seed, path, step)") {
  const rng::NormalGenerator gen(77, rng::Stream::Simulation);
  const NoisePlan p = make_noise_plan(Matrix::Identity(2, 2), 1.0, 10);
  Matrix a, b;
  wiener_increments(p, gen, 0, 10, 4, a);
  wiener_increments(p, gen, 6, 1, 4, b);
  CHECK(a.col(6) == b.col(0));
}

TEST_CASE("scalar second moments") {
  const Index M = 10000;
  Vector v(M);
  auto sys = scalar_system(0.0, 0.0, 1.0, 1.0);
  for (Index j = 0; j < M; ++j)
    v(j) = std::pow(simulate_matrix_state(sys, Matrix::Ones(1, 1), 1.0, 1000, 5, j)(0, 0), 2);
  Moments m = moments(v);
  CHECK(std::abs(m.mean - std::exp(1.0)) <= 3.0 * m.se);

  sys = scalar_system(-0.5, 0.0, 1.0, 1.0);
  for (Index j = 0; j < M; ++j)
    v(j) = std::pow(simulate_matrix_state(sys, Matrix::Ones(1, 1), 1.0, 1000, 6, j)(0, 0), 2);
  m = moments(v);
  CHECK(std::abs(m.mean - 1.0) <= 3.0 * m.se);
}

TEST_CASE("deterministic matrix state follows the implicit recursion") {
  std::mt19937_64 gen(229);
  const auto sys = testutil::random_system(gen, 4, 1, 1, 1, -1.0, 0.0);
  const Matrix X0 = testutil::random_matrix(gen, 4, 2);
  const Matrix R = (Matrix::Identity(4, 4) - 0.01 * sys.A).inverse();
  Matrix ref = X0;
  for (int k = 0; k < 100; ++k) ref = R * ref;
  CHECK(testutil::rel_err(simulate_matrix_state(sys, X0, 1.0, 100, 1, 0), ref) < 1e-12);
  const Matrix E = sys.A.exp() * X0;
  const double e2 = (simulate_matrix_state(sys, X0, 1.0, 100, 1, 0) - E).norm();
  const double e3 = (simulate_matrix_state(sys, X0, 1.0, 1000, 1, 0) - E).norm();
  CHECK(e2 / e3 == doctest::Approx(10.0).epsilon(0.1));
  CHECK(simulate_matrix_state(testutil::random_system(gen, 3, 1, 1, 2), Matrix::Zero(3, 2), 1.0, 50, 1, 0).isZero(0.0));
}

TEST_CASE("reduced model equal to the full system in another basis has zero error") {
  std::mt19937_64 gen(233);
  const auto sys = testutil::random_system(gen, 5, 1, 2, 2);
  const Matrix S = testutil::random_matrix(gen, 5, 5) + 3.0 * Matrix::Identity(5, 5);
  SimulationConfig cfg;
  cfg.paths = 300;
  cfg.steps = 200;
  const OutputErrorEstimate e = simulate_pair(sys, sys.transformed(S, S.inverse()), benchmark_control(1.0), 1.0, cfg);
  CHECK(e.sup_error <= 1e-10);
  CHECK(simulate_pair(sys, sys, benchmark_control(1.0), 1.0, cfg).sup_error == 0.0);
}

TEST_CASE("MC mean of the state matches the mean recursion") {
  std::mt19937_64 gen(239);
  auto sys = testutil::random_system(gen, 3, 1, 3, 2, -0.5, 0.8);
  sys.C = Matrix::Identity(3, 3);
  const ControlSignal u = benchmark_control(1.0);
  SimulationConfig cfg;
  cfg.paths = 20000;
  cfg.steps = 100;
  const Matrix Y = simulate_terminal_outputs(sys, u, 1.0, cfg);
  const double h = 0.01;
  const Matrix R = (Matrix::Identity(3, 3) - h * sys.A).inverse();
  Vector m = Vector::Zero(3);
  for (int k = 0; k < 100; ++k) m = R * (m + h * sys.B * u(k * h));
  for (Index i = 0; i < 3; ++i) {
    const Moments mm = moments(Y.row(i).transpose());
    CHECK(std::abs(mm.mean - m(i)) <= 3.0 * mm.se);
  }
}

TEST_CASE("results do not depend on the thread count") {
  std::mt19937_64 gen(241);
  const auto sys = testutil::random_system(gen, 6, 1, 1, 2);
  const GramianSet g = exact_gramians(sys, 1.0);
  const BalancingTransform tr = balanced_transform(g.P, g.Q);
  std::vector<StochasticLinearSystem> roms{truncate(sys, tr, 2).as_system(), truncate(sys, tr, 4).as_system()};
  SimulationConfig cfg;
  cfg.paths = 1000;
  cfg.steps = 100;
  cfg.block = 64;
  cfg.threads = 1;
  const auto a = simulate_output_errors(sys, roms, benchmark_control(1.0), 1.0, cfg);
  cfg.threads = 4;
  const auto b = simulate_output_errors(sys, roms, benchmark_control(1.0), 1.0, cfg);
  for (std::size_t s = 0; s < roms.size(); ++s) {
    CHECK(a[s].mean == b[s].mean);
    CHECK(a[s].stderr_ == b[s].stderr_);
    CHECK(a[s].sup_error >= 0.0);
    CHECK(a[s].stderr_.allFinite());
  }
}

TEST_CASE("kernel tables give matching simulations") {
  if (!kernels::avx2_kernels()) return;
  std::mt19937_64 gen(251);
  const auto sys = testutil::random_system(gen, 9, 1, 1, 2);
  const GramianSet g = exact_gramians(sys, 1.0);
  const auto rom = truncate(sys, balanced_transform(g.P, g.Q), 3).as_system();
  SimulationConfig cfg;
  cfg.paths = 200;
  cfg.steps = 100;
  const std::string before = kernels::active_kernels().name;
  kernels::select_kernels("scalar");
  const auto a = simulate_pair(sys, rom, benchmark_control(1.0), 1.0, cfg);
  kernels::select_kernels("avx2");
  const auto b = simulate_pair(sys, rom, benchmark_control(1.0), 1.0, cfg);
  kernels::select_kernels(before);
  CHECK((a.mean - b.mean).norm() <= 1e-12 * a.mean.norm());
}

TEST_CASE("blow-up is reported") {
  const auto sys = scalar_system(0.0, 1.0, 1.0, 1e200);
  SimulationConfig cfg;
  cfg.paths = 4;
  cfg.steps = 10;
  CHECK_THROWS_AS(simulate_terminal_outputs(sys, benchmark_control(1.0), 1.0, cfg), BlowUpError);
}

TEST_CASE("singular implicit step is reported") {
  const auto sys = scalar_system(10.0, 1.0, 1.0, 0.0);
  SimulationConfig cfg;
  cfg.paths = 4;
  cfg.steps = 10;
  CHECK_THROWS_AS(simulate_terminal_outputs(sys, benchmark_control(1.0), 1.0, cfg), SingularError);
}

TEST_CASE("error profile CSV") {
  OutputErrorEstimate e;
  e.time = Vector::LinSpaced(3, 0.0, 1.0);
  e.mean = Vector::Constant(3, 0.1);
  e.stderr_ = Vector::Zero(3);
  std::ostringstream os;
  write_error_profile(os, e);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,mean_err,stderr");
  int rows = 0;
  while (std::getline(in, line)) {
    double t, m, s;
    char c1, c2;
    std::istringstream ls(line);
    ls >> t >> c1 >> m >> c2 >> s;
    CHECK(t == e.time(rows));
    CHECK(m == 0.1);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("benchmark r=8: halving the step moves the error within the MC noise") {
  const auto sys = build_heat_spde_benchmark({});
  const GramianSet g = exact_gramians(sys, 1.0);
  const auto rom = truncate(sys, balanced_transform(g.P, g.Q), 8).as_system();
  SimulationConfig cfg;
  cfg.paths = 1000;
  cfg.steps = 500;
  const auto a = simulate_pair(sys, rom, benchmark_control(1.0), 1.0, cfg);
  cfg.steps = 1000;
  const auto b = simulate_pair(sys, rom, benchmark_control(1.0), 1.0, cfg);
  // The two runs draw different increments, so their difference carries both errors.
  CHECK(std::abs(a.sup_error - b.sup_error) <= 3.0 * std::hypot(a.sup_stderr, b.sup_stderr));
}
