#include "tlmor/benchmark.hpp"

#include "tlmor/linalg.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace tlmor {

namespace {

constexpr double pi = std::numbers::pi;

// cos(k pi / 4) from an exact table so that vanishing entries are exact zeros.
double cos_quarter_pi(int k) {
  static const double table[8] = {1.0, std::numbers::sqrt2 / 2, 0.0, -std::numbers::sqrt2 / 2,
                                  -1.0, -std::numbers::sqrt2 / 2, 0.0, std::numbers::sqrt2 / 2};
  return table[((k % 8) + 8) % 8];
}

// int_{pi/4}^{3pi/4} sin(k s) ds
double inner_sine_integral(int k) { return (cos_quarter_pi(k) - cos_quarter_pi(3 * k)) / k; }

// int_0^pi sin(k s) ds
double full_sine_integral(int k) { return (k % 2 == 1) ? 2.0 / k : 0.0; }

template <class F>
double adaptive_integral(F&& f, double a, double b) {
  double err = 0.0;
  const double val =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-12, &err);
  if (!(err <= 1e-12)) {
    std::ostringstream os;
    os << "benchmark: quadrature did not converge on [" << a << ", " << b << "], error estimate " << err;
    throw ConvergenceError(os.str());
  }
  return val;
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (!(alpha > 0.0)) throw Error("benchmark: alpha must be positive");
  if (n < 1) throw Error("benchmark: n must be at least 1");
  if (!(T > 0.0)) throw Error("benchmark: T must be positive");
  if (q != 1 && q != 2) throw Error("benchmark: q must be 1 or 2");
  if (!(std::abs(rho) <= 1.0)) throw Error("benchmark: |rho| must not exceed 1");
  if (!std::isfinite(beta) || !std::isfinite(gamma)) throw Error("benchmark: non-finite beta/gamma");
}

std::vector<LaplacianMode> ordered_laplacian_modes(Index n) {
  int kmax = static_cast<int>(std::ceil(std::sqrt(8.0 * static_cast<double>(n) / pi))) + 2;
  for (;;) {
    std::vector<LaplacianMode> modes;
    for (int k1 = 1; k1 <= kmax; ++k1)
      for (int k2 = 1; k2 <= kmax; ++k2) modes.push_back({k1, k2});
    std::sort(modes.begin(), modes.end(), [](const LaplacianMode& a, const LaplacianMode& b) {
      if (a.lambda() != b.lambda()) return a.lambda() < b.lambda();
      if (a.k1 != b.k1) return a.k1 < b.k1;
      return a.k2 < b.k2;
    });
    // Every mode with eigenvalue <= kmax^2 + 1 is in the candidate grid.
    if (static_cast<Index>(modes.size()) >= n && modes[static_cast<size_t>(n - 1)].lambda() <= kmax * kmax + 1) {
      modes.resize(static_cast<size_t>(n));
      return modes;
    }
    kmax *= 2;
  }
}

double noise_kernel_x(int a, int b) {
  auto f = [a, b](double s) { return std::exp(-std::abs(s - pi / 2)) * std::sin(a * s) * std::sin(b * s); };
  // Split at the kink of |s - pi/2|.
  return adaptive_integral(f, 0.0, pi / 2) + adaptive_integral(f, pi / 2, pi);
}

double noise_kernel_y(int a, int b) {
  auto f = [a, b](double s) { return std::exp(-s) * std::sin(a * s) * std::sin(b * s); };
  return adaptive_integral(f, 0.0, pi);
}

Matrix symmetric_power(const Matrix& X, double p, double tol) {
  SymmetricEigen es = sorted_symmetric_eigen(X);
  const double scale = es.values.cwiseAbs().maxCoeff();
  Vector mu = es.values;
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu(i) < -tol * scale) {
      std::ostringstream os;
      os << "benchmark: fractional power of an indefinite matrix (eigenvalue " << mu(i) << ", scale "
         << scale << ")";
      throw Error(os.str());
    }
    mu(i) = mu(i) > 0.0 ? std::pow(mu(i), p) : 0.0;
  }
  return symmetrized(es.vectors * mu.asDiagonal() * es.vectors.transpose());
}

StochasticLinearSystem build_heat_spde_benchmark(const BenchmarkConfig& cfg) {
  cfg.validate();
  const Index n = cfg.n;
  const std::vector<LaplacianMode> modes = ordered_laplacian_modes(n);
  int kmax = 0;
  for (const auto& md : modes) kmax = std::max({kmax, md.k1, md.k2});

  // Tensor-product factors of the noise kernel, symmetric in (a, b).
  Matrix kx(kmax + 1, kmax + 1), ky(kmax + 1, kmax + 1);
  for (int a = 1; a <= kmax; ++a)
    for (int b = a; b <= kmax; ++b) {
      kx(a, b) = kx(b, a) = noise_kernel_x(a, b);
      ky(a, b) = ky(b, a) = noise_kernel_y(a, b);
    }

  const double norm2 = (2.0 / pi) * (2.0 / pi);
  StochasticLinearSystem sys;
  sys.A = Matrix::Zero(n, n);
  sys.B = Matrix::Zero(n, 1);
  sys.C = Matrix::Zero(1, n);
  Matrix noise(n, n);
  for (Index k = 0; k < n; ++k) {
    const LaplacianMode& mk = modes[static_cast<size_t>(k)];
    sys.A(k, k) = -cfg.alpha * mk.lambda() + cfg.beta;
    const double inner = inner_sine_integral(mk.k1) * inner_sine_integral(mk.k2);
    const double full = full_sine_integral(mk.k1) * full_sine_integral(mk.k2);
    sys.B(k, 0) = (2.0 / pi) * inner;
    sys.C(0, k) = 4.0 / (3.0 * pi * pi) * (2.0 / pi) * (full - inner);
    for (Index i = 0; i < n; ++i) {
      const LaplacianMode& mi = modes[static_cast<size_t>(i)];
      noise(k, i) = norm2 * kx(mk.k1, mi.k1) * ky(mk.k2, mi.k2);
    }
  }
  sys.N.push_back(cfg.gamma * noise);
  if (cfg.q == 2) {
    // (gamma M)^(6/5) = |gamma|^(6/5) M^(6/5) for the real fifth root.
    sys.N.push_back(std::pow(std::abs(cfg.gamma), 1.2) * symmetric_power(noise, 1.2));
    sys.K = Matrix{{1.0, cfg.rho}, {cfg.rho, 1.0}};
  } else {
    sys.K = Matrix::Identity(1, 1);
  }
  sys.validate();
  return sys;
}

ControlSignal benchmark_control(double T) {
  if (!(T > 0.0)) throw Error("control: T must be positive");
  ControlSignal u;
  u.m = 1;
  u.c_u = std::sqrt(0.2 / -std::expm1(-0.2 * T));
  const double cu = u.c_u;
  u.eval = [cu](double t) { return Vector::Constant(1, cu * std::exp(-0.1 * t)); };
  return u;
}

}  // namespace tlmor
