#include "helpers.hpp"
#include <algorithm>
#include "tlmor/balancing.hpp"
#include "tlmor/benchmark.hpp"
#include "tlmor/gramians.hpp"
#include "tlmor/mcsim.hpp"

#include <doctest.h>

#include <numbers>

using namespace tlmor;
using doctest::Approx;

namespace {

Matrix spd(std::mt19937_64& gen, Index n) {
  const Matrix G = testutil::random_matrix(gen, n, n);
  return G * G.transpose() + 0.1 * Matrix::Identity(n, n);
}

void check_transform_invariants(const BalancingTransform& tr) {
  const Index n = tr.S.rows();
  const double tol = 1e-8 * std::sqrt(static_cast<double>(n));
  CHECK((tr.S * tr.Sinv - Matrix::Identity(n, n)).norm() <= tol);
  for (Index i = 1; i < n; ++i) CHECK(tr.sigma(i) <= tr.sigma(i - 1));
  CHECK(tr.sigma.minCoeff() >= 0.0);
  if (tr.kind == TransformKind::Modal) CHECK((tr.S * tr.S.transpose() - Matrix::Identity(n, n)).norm() <= tol);
}

}  // namespace

TEST_CASE("modal transform examples") {
  const Matrix P = Vector(Eigen::Vector2d(4.0, 1.0)).asDiagonal();
  const BalancingTransform t = modal_transform(P);
  CHECK(t.sigma(0) == Approx(4.0));
  CHECK(t.sigma(1) == Approx(1.0));
  CHECK(t.S.cwiseAbs().isApprox(Matrix::Identity(2, 2), 1e-14));
  check_transform_invariants(t);

  const double c = std::numbers::sqrt2 / 2;
  const Matrix R{{c, -c}, {c, c}};
  const Matrix P2 = R * Vector(Eigen::Vector2d(9.0, 1.0)).asDiagonal() * R.transpose();
  const BalancingTransform t2 = modal_transform(P2);
  CHECK(t2.sigma(0) == Approx(9.0));
  CHECK(t2.sigma(1) == Approx(1.0));
  CHECK((t2.S * R).cwiseAbs().isApprox(Matrix::Identity(2, 2), 1e-12));
}

TEST_CASE("modal transform diagonalizes random PSD matrices") {
  std::mt19937_64 gen(157);
  for (int inst = 0; inst < 10; ++inst) {
    const Matrix P = spd(gen, 6);
    const BalancingTransform t = modal_transform(P);
    check_transform_invariants(t);
    const Matrix D = t.S * P * t.S.transpose();
    CHECK((D - Matrix(t.sigma.asDiagonal())).norm() <= 1e-9 * t.sigma(0));
  }
}

TEST_CASE("balanced transform examples") {
  const Matrix P = Vector(Eigen::Vector2d(4.0, 1.0)).asDiagonal();
  const BalancingTransform t = balanced_transform(P, P);
  CHECK(t.sigma(0) == Approx(4.0));
  CHECK(t.sigma(1) == Approx(1.0));
  CHECK(t.S.cwiseAbs().isApprox(Matrix::Identity(2, 2), 1e-12));

  const BalancingTransform s = balanced_transform(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 8.0));
  CHECK(s.sigma(0) == Approx(4.0));
  CHECK(s.S(0, 0) == Approx(std::pow(4.0, 0.25)));
  CHECK(s.kind == TransformKind::Balanced);
}

TEST_CASE("balancing identities and Hankel singular values") {
  std::mt19937_64 gen(163);
  for (int inst = 0; inst < 10; ++inst) {
    const Matrix P = spd(gen, 7), Q = spd(gen, 7);
    const BalancingTransform t = balanced_transform(P, Q);
    check_transform_invariants(t);
    const Matrix Sig = t.sigma.asDiagonal();
    CHECK((t.S * P * t.S.transpose() - Sig).norm() <= 1e-6 * Sig.norm());
    CHECK((t.Sinv.transpose() * Q * t.Sinv - Sig).norm() <= 1e-6 * Sig.norm());
    Eigen::EigenSolver<Matrix> es(P * Q, false);
    std::vector<double> hsv;
    for (Index i = 0; i < 7; ++i) hsv.push_back(std::sqrt(es.eigenvalues()(i).real()));
    std::sort(hsv.rbegin(), hsv.rend());
    for (Index i = 0; i < 7; ++i) CHECK(t.sigma(i) == Approx(hsv[i]).epsilon(1e-8));
  }
}

TEST_CASE("balanced transform: regularization and rank failures") {
  const Matrix P = Vector(Eigen::Vector3d(1.0, 1.0, 0.0)).asDiagonal();
  const Matrix Q = Vector(Eigen::Vector3d(0.0, 1.0, 1.0)).asDiagonal();
  // The eigenvalue floor makes semidefinite Gramians usable.
  const BalancingTransform t = balanced_transform(P, Q);
  CHECK((t.S * t.Sinv - Matrix::Identity(3, 3)).norm() <= 1e-8 * std::sqrt(3.0));
  CHECK(t.sigma(0) == Approx(1.0));
  // Without it the rank gap is reported.
  CHECK_THROWS_AS(balanced_transform(P, Q, 0.0), SingularError);
  CHECK_THROWS_AS(balanced_transform(Matrix::Zero(3, 3), Q), SingularError);
}

TEST_CASE("Hankel singular values are invariant under orthogonal state transforms") {
  std::mt19937_64 gen(167);
  for (int inst = 0; inst < 5; ++inst) {
    const auto sys = testutil::random_system(gen, 6, 2, 2, 2);
    const Matrix U = testutil::random_orthogonal(gen, 6);
    const auto rot = sys.transformed(U, U.transpose());
    const GramianSet a = exact_gramians(sys, 1.0), b = exact_gramians(rot, 1.0);
    const Vector sa = balanced_transform(a.P, a.Q).sigma, sb = balanced_transform(b.P, b.Q).sigma;
    CHECK((sa - sb).norm() <= 1e-7 * sa.norm());
    // Gramian transformation law.
    CHECK(testutil::rel_err(b.P, U * a.P * U.transpose()) < 1e-9);
    CHECK(testutil::rel_err(b.Q, U * a.Q * U.transpose()) < 1e-9);
  }
}

TEST_CASE("Gramians transform with S and S^-T for general S") {
  std::mt19937_64 gen(173);
  const auto sys = testutil::random_system(gen, 5, 1, 1, 1);
  const GramianSet g = exact_gramians(sys, 1.0);
  const BalancingTransform tr = balanced_transform(g.P, g.Q);
  const GramianSet h = exact_gramians(sys.transformed(tr.S, tr.Sinv), 1.0);
  const Matrix Sig = tr.sigma.asDiagonal();
  CHECK(testutil::rel_err(h.P, Sig) < 1e-7);
  CHECK(testutil::rel_err(h.Q, Sig) < 1e-7);
}

TEST_CASE("truncation: projector and block structure") {
  std::mt19937_64 gen(179);
  const auto sys = testutil::random_system(gen, 6, 2, 2, 2);
  const GramianSet g = exact_gramians(sys, 1.0);
  for (const BalancingTransform& tr : {modal_transform(g.P), balanced_transform(g.P, g.Q)}) {
    const ReducedSystem rom = truncate(sys, tr, 3);
    CHECK((rom.W.transpose() * rom.V - Matrix::Identity(3, 3)).norm() <= 1e-8);
    if (tr.kind == TransformKind::Modal) CHECK(rom.W.isApprox(rom.V, 1e-14));
    const Matrix Pr = rom.V * rom.W.transpose();
    CHECK((Pr * Pr - Pr).norm() <= 1e-8 * Pr.norm());
    CHECK(testutil::rel_err(rom.A11, rom.W.transpose() * sys.A * rom.V) < 1e-12);
    CHECK(testutil::rel_err(rom.B1, rom.W.transpose() * sys.B) < 1e-12);
    CHECK(testutil::rel_err(rom.C1, sys.C * rom.V) < 1e-12);
    CHECK(testutil::rel_err(rom.N11[1], rom.W.transpose() * sys.N[1] * rom.V) < 1e-12);
    CHECK(rom.A12.rows() == 3);
    CHECK(rom.A12.cols() == 3);
    CHECK(rom.transformed.A.topRightCorner(3, 3) == rom.A12);
    CHECK(rom.sigma1.size() == 3);
    CHECK(rom.sigma2.size() == 3);
    CHECK(rom.K == sys.K);
    const StochasticLinearSystem red = rom.as_system();
    CHECK(red.n() == 3);
    CHECK_NOTHROW(red.validate());
  }
}

TEST_CASE("r = n reduced model reproduces outputs pathwise") {
  std::mt19937_64 gen(181);
  const auto sys = testutil::random_system(gen, 5, 1, 2, 2);
  const GramianSet g = exact_gramians(sys, 1.0);
  const ReducedSystem rom = truncate(sys, balanced_transform(g.P, g.Q), 5);
  SimulationConfig cfg;
  cfg.paths = 64;
  cfg.steps = 200;
  const ControlSignal u = benchmark_control(1.0);
  const Matrix yf = simulate_terminal_outputs(sys, u, 1.0, cfg);
  const Matrix yr = simulate_terminal_outputs(rom.as_system(), u, 1.0, cfg);
  CHECK((yf - yr).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, yf.cwiseAbs().maxCoeff()));
}

TEST_CASE("truncating an unreachable decoupled block leaves the output unchanged") {
  StochasticLinearSystem s;
  s.A = Vector(Eigen::Vector2d(-1.0, -2.0)).asDiagonal();
  s.B = Matrix{{1.0}, {0.0}};
  s.C = Matrix{{1.0, 1.0}};
  s.N = {Matrix(Vector(Eigen::Vector2d(0.5, 0.3)).asDiagonal())};
  s.K = Matrix::Identity(1, 1);
  BalancingTransform id{Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector(Eigen::Vector2d(1.0, 0.0)),
                        TransformKind::Modal};
  const ReducedSystem rom = truncate(s, id, 1);
  SimulationConfig cfg;
  cfg.paths = 32;
  cfg.steps = 100;
  const OutputErrorEstimate e = simulate_pair(s, rom.as_system(), benchmark_control(1.0), 1.0, cfg);
  CHECK(e.sup_error == 0.0);
}

TEST_CASE("suggest_order examples") {
  CHECK(suggest_order(Vector(Eigen::Vector2d(1.0, 1e-9)), 1e-6) == 1);
  CHECK(suggest_order(Vector::Ones(5), 0.5) == 5);
  CHECK(suggest_order(Vector(Eigen::Vector3d(1.0, 1e-3, 1e-3)), 1e-3) == 1);
}

TEST_CASE("benchmark HSV decay gives a suggested order of 7 or 8") {
  const StochasticLinearSystem sys = build_heat_spde_benchmark({});
  const GramianSet g = exact_gramians(sys, 1.0);
  const BalancingTransform tr = balanced_transform(g.P, g.Q);
  const Index r = suggest_order(tr.sigma, 1e-5);
  CHECK(r >= 7);
  CHECK(r <= 8);
  const Matrix Sig = tr.sigma.asDiagonal();
  CHECK((tr.S * g.P * tr.S.transpose() - Sig).norm() <= 1e-6 * Sig.norm());
  CHECK((tr.Sinv.transpose() * g.Q * tr.Sinv - Sig).norm() <= 1e-6 * Sig.norm());
}
