#include "tlmor/mcsim.hpp"

#include "tlmor/kernels/kernels.hpp"
#include "tlmor/linalg.hpp"
#include "tlmor/matrix_io.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

namespace tlmor {

NoisePlan make_noise_plan(const Matrix& K, double T, Index steps) {
  if (steps < 1) throw Error("make_noise_plan: steps must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw Error("make_noise_plan: T must be positive");
  NoisePlan plan;
  plan.factor = K.rows() > 0 ? psd_factor(K) : Matrix(0, 0);
  plan.h = T / static_cast<double>(steps);
  plan.steps = steps;
  return plan;
}

void wiener_increments(const NoisePlan& plan, const rng::NormalGenerator& gen, std::uint64_t first_path,
                       Index cols, Index step, Matrix& dW) {
  const Index q = plan.q();
  dW.resize(q, cols);
  if (q == 0) return;
  Matrix xi(q, cols);
  for (Index j = 0; j < cols; ++j)
    gen.fill(first_path + static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(step),
             std::span<double>(xi.col(j).data(), static_cast<std::size_t>(q)));
  dW.noalias() = std::sqrt(plan.h) * plan.factor * xi;
}

Stepper::Stepper(const StochasticLinearSystem& sys, double h, StepScheme scheme) : sys_(sys) {
  const Index n = sys.n();
  diagonal_ = sys.A.isDiagonal(0.0);
  noisy_ = false;
  for (const Matrix& Ni : sys.N) noisy_ = noisy_ || !Ni.isZero(0.0);
  if (diagonal_) {
    scale_.resize(n);
    for (Index i = 0; i < n; ++i) {
      const double a = sys.A(i, i);
      const double denom = 1.0 - h * a;
      if (scheme == StepScheme::SemiImplicit && std::abs(denom) < 1e-12) {
        std::ostringstream os;
        os << "Stepper: I - hA is singular (h = " << h << ")";
        throw SingularError(os.str());
      }
      scale_(i) = scheme == StepScheme::SemiImplicit ? 1.0 / denom : std::exp(h * a);
    }
  } else if (scheme == StepScheme::SemiImplicit) {
    Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - h * sys.A);
    if (lu.rcond() < 1e-14) {
      std::ostringstream os;
      os << "Stepper: I - hA is singular (h = " << h << ", rcond " << lu.rcond() << ")";
      throw SingularError(os.str());
    }
    prop_ = lu.inverse();
  } else {
    prop_ = (h * sys.A).exp();
  }
  zero_drift_ = Vector::Zero(n);
}

void Stepper::step(Matrix& X, const Vector& drift, const Matrix& dW) {
  const Index n = sys_.n();
  const Index cols = X.cols();
  const std::size_t q = noisy_ ? static_cast<std::size_t>(sys_.q()) : 0;
  work_.resize(q);
  std::vector<const double*> wptr(q);
  for (std::size_t i = 0; i < q; ++i) {
    work_[i].resize(n, cols);
    work_[i].noalias() = sys_.N[i] * X;
    wptr[i] = work_[i].data();
  }
  const double* dptr = drift.size() == n ? drift.data() : zero_drift_.data();
  const kernels::KernelTable& kt = kernels::active_kernels();
  if (diagonal_) {
    kt.em_combine(n, cols, X.data(), wptr.data(), q, dW.data(), dptr, scale_.data(), X.data());
  } else {
    combined_.resize(n, cols);
    kt.em_combine(n, cols, X.data(), wptr.data(), q, dW.data(), dptr, nullptr, combined_.data());
    X.noalias() = prop_ * combined_;
  }
}

namespace {

struct BlockSums {
  std::vector<Vector> sum, sumsq;  // per reduced model, per time point
};

void check_finite(const Matrix& Y, const char* who, Index step, double h) {
  if (Y.allFinite()) return;
  std::ostringstream os;
  os << "simulation blew up in the " << who << " at step " << step << " (t = " << step * h << ", h = " << h
     << "); reduce the step size";
  throw BlowUpError(os.str());
}

BlockSums simulate_block(const StochasticLinearSystem& full, const std::vector<StochasticLinearSystem>& roms,
                         const ControlSignal& u, const NoisePlan& plan, const rng::NormalGenerator& gen,
                         std::uint64_t first, Index cols) {
  const Index steps = plan.steps;
  const double h = plan.h;
  Stepper fstep(full, h);
  std::vector<Stepper> rsteps;
  rsteps.reserve(roms.size());
  for (const auto& r : roms) rsteps.emplace_back(r, h);
  Matrix X = Matrix::Zero(full.n(), cols);
  std::vector<Matrix> Xr;
  for (const auto& r : roms) Xr.push_back(Matrix::Zero(r.n(), cols));
  BlockSums out;
  out.sum.assign(roms.size(), Vector::Zero(steps + 1));
  out.sumsq.assign(roms.size(), Vector::Zero(steps + 1));
  Matrix dW, Y, Yr;
  std::vector<double> dist(static_cast<std::size_t>(cols));
  const kernels::KernelTable& kt = kernels::active_kernels();
  for (Index k = 0; k < steps; ++k) {
    wiener_increments(plan, gen, first, cols, k, dW);
    const Vector uk = u(k * h);
    fstep.step(X, (h * (full.B * uk)).eval(), dW);
    Y.noalias() = full.C * X;
    check_finite(Y, "full model", k + 1, h);
    for (std::size_t s = 0; s < roms.size(); ++s) {
      rsteps[s].step(Xr[s], (h * (roms[s].B * uk)).eval(), dW);
      Yr.noalias() = roms[s].C * Xr[s];
      check_finite(Yr, "reduced model", k + 1, h);
      kt.column_distance(static_cast<std::size_t>(Y.rows()), static_cast<std::size_t>(cols), Y.data(), Yr.data(),
                         dist.data());
      double s1 = 0.0, s2 = 0.0;
      for (double d : dist) {
        s1 += d;
        s2 += d * d;
      }
      out.sum[s](k + 1) = s1;
      out.sumsq[s](k + 1) = s2;
    }
  }
  return out;
}

template <class Fn>
void run_blocks(Index nblocks, int threads, Fn&& fn) {
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(nblocks)));
  if (t == 1) {
    for (Index b = 0; b < nblocks; ++b) fn(b);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(t));
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Index b = w; b < nblocks; b += t) fn(b);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void validate_config(const SimulationConfig& cfg) {
  if (cfg.steps < 1) throw Error("simulation: steps must be positive");
  if (cfg.paths < 2) throw Error("simulation: at least two paths are needed for a standard error");
  if (cfg.block < 1) throw Error("simulation: block size must be positive");
}

}  // namespace

std::vector<OutputErrorEstimate> simulate_output_errors(const StochasticLinearSystem& full,
                                                        const std::vector<StochasticLinearSystem>& roms,
                                                        const ControlSignal& u, double T,
                                                        const SimulationConfig& cfg) {
  validate_config(cfg);
  full.validate();
  for (const auto& r : roms) {
    r.validate();
    if (r.q() != full.q() || r.p() != full.p() || r.m() != full.m())
      throw DimensionError("simulate_output_errors: reduced model does not match the full model");
  }
  const NoisePlan plan = make_noise_plan(full.K, T, cfg.steps);
  const rng::NormalGenerator gen(cfg.seed, rng::Stream::Simulation);
  const Index nblocks = (cfg.paths + cfg.block - 1) / cfg.block;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(nblocks));
  run_blocks(nblocks, cfg.threads, [&](Index b) {
    const Index first = b * cfg.block;
    const Index cols = std::min(cfg.block, cfg.paths - first);
    blocks[static_cast<std::size_t>(b)] =
        simulate_block(full, roms, u, plan, gen, static_cast<std::uint64_t>(first), cols);
  });
  std::vector<OutputErrorEstimate> out(roms.size());
  const double P = static_cast<double>(cfg.paths);
  for (std::size_t s = 0; s < roms.size(); ++s) {
    Vector sum = Vector::Zero(cfg.steps + 1), sumsq = Vector::Zero(cfg.steps + 1);
    for (const auto& b : blocks) {
      sum += b.sum[s];
      sumsq += b.sumsq[s];
    }
    OutputErrorEstimate& e = out[s];
    e.paths = cfg.paths;
    e.steps = cfg.steps;
    e.time = Vector::LinSpaced(cfg.steps + 1, 0.0, T);
    e.mean = sum / P;
    e.stderr_.resize(cfg.steps + 1);
    for (Index k = 0; k <= cfg.steps; ++k) {
      const double var = std::max(0.0, (sumsq(k) - sum(k) * sum(k) / P) / (P - 1.0));
      e.stderr_(k) = std::sqrt(var / P);
    }
    e.sup_error = e.mean.maxCoeff(&e.argmax);
    e.sup_stderr = e.stderr_(e.argmax);
  }
  return out;
}

OutputErrorEstimate simulate_pair(const StochasticLinearSystem& full, const StochasticLinearSystem& rom,
                                  const ControlSignal& u, double T, const SimulationConfig& cfg) {
  return simulate_output_errors(full, {rom}, u, T, cfg).front();
}

Matrix simulate_terminal_outputs(const StochasticLinearSystem& sys, const ControlSignal& u, double T,
                                 const SimulationConfig& cfg) {
  validate_config(cfg);
  const NoisePlan plan = make_noise_plan(sys.K, T, cfg.steps);
  const rng::NormalGenerator gen(cfg.seed, rng::Stream::Simulation);
  Matrix Yall(sys.p(), cfg.paths);
  const Index nblocks = (cfg.paths + cfg.block - 1) / cfg.block;
  run_blocks(nblocks, cfg.threads, [&](Index b) {
    const Index first = b * cfg.block;
    const Index cols = std::min(cfg.block, cfg.paths - first);
    Stepper st(sys, plan.h);
    Matrix X = Matrix::Zero(sys.n(), cols), dW;
    for (Index k = 0; k < plan.steps; ++k) {
      wiener_increments(plan, gen, static_cast<std::uint64_t>(first), cols, k, dW);
      st.step(X, (plan.h * (sys.B * u(k * plan.h))).eval(), dW);
    }
    Yall.middleCols(first, cols) = sys.C * X;
  });
  check_finite(Yall, "model", plan.steps, plan.h);
  return Yall;
}

Matrix simulate_matrix_state(const StochasticLinearSystem& sys, const Matrix& X0, double T, Index steps,
                             std::uint64_t seed, std::uint64_t path, StepScheme scheme, rng::Stream stream) {
  if (X0.rows() != sys.n()) throw DimensionError("simulate_matrix_state: X0 has the wrong row count");
  const NoisePlan plan = make_noise_plan(sys.K, T, steps);
  const rng::NormalGenerator gen(seed, stream);
  Stepper st(sys, plan.h, scheme);
  Matrix X = X0, dW1, dW;
  const Vector none;
  for (Index k = 0; k < steps; ++k) {
    wiener_increments(plan, gen, path, 1, k, dW1);
    dW = dW1.replicate(1, X.cols());
    st.step(X, none, dW);
  }
  check_finite(X, "matrix state", steps, plan.h);
  return X;
}

void write_error_profile(std::ostream& os, const OutputErrorEstimate& est) {
  io::CsvWriter csv(os, {"t", "mean_err", "stderr"});
  for (Index k = 0; k < est.time.size(); ++k) {
    csv.cell(est.time(k));
    csv.cell(est.mean(k));
    csv.cell(est.stderr_(k));
    csv.end_row();
  }
}

}  // namespace tlmor
