#include "evoeq/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/FFT>

namespace evoeq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void fft_columns(Matrix& values, bool forward) {
  Eigen::FFT<double> fft;
  const Index n = values.rows();
  std::vector<Complex> in(static_cast<std::size_t>(n));
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (Index c = 0; c < values.cols(); ++c) {
    for (Index j = 0; j < n; ++j) in[static_cast<std::size_t>(j)] = values(j, c);
    if (forward) {
      fft.fwd(out, in);
    } else {
      fft.inv(out, in);  // includes the 1/n factor
    }
    for (Index j = 0; j < n; ++j) values(j, c) = out[static_cast<std::size_t>(j)];
  }
}

Vector damping_weights(const TimeGrid& grid) {
  Vector w(grid.n_steps);
  for (Index j = 0; j < grid.n_steps; ++j) {
    w(j) = std::exp(-grid.nu * grid.time(j));
  }
  return w;
}

}  // namespace

void TimeGrid::validate() const {
  if (n_steps < 8 || (n_steps & (n_steps - 1)) != 0) {
    throw ConfigError("TimeGrid: n_steps must be a power of two >= 8");
  }
  if (!(dt > 0.0)) throw ConfigError("TimeGrid: dt must be positive");
  if (!(nu > 0.0)) throw ConfigError("TimeGrid: nu must be positive");
  if (nu * window() < 16.0) {
    std::ostringstream os;
    os << "TimeGrid: nu * window = " << nu * window()
       << " < 16; wraparound damping insufficient";
    throw ConfigError(os.str());
  }
}

double TimeGrid::xi(Index j) const {
  return kTwoPi * static_cast<double>(freq_index(j)) /
         (static_cast<double>(n_steps) * dt);
}

void WeightedSignal::validate() const {
  grid.validate();
  if (values.rows() != grid.n_steps) {
    throw ShapeError("WeightedSignal: row count must equal n_steps");
  }
  if (!all_finite(values)) {
    throw ConfigError("WeightedSignal: entries must be finite");
  }
}

double weighted_norm(const WeightedSignal& f) {
  const Vector w = damping_weights(f.grid);
  double acc = 0.0;
  for (Index j = 0; j < f.values.rows(); ++j) {
    acc += std::norm(w(j)) * f.values.row(j).squaredNorm();
  }
  return std::sqrt(acc * f.grid.dt);
}

Complex weighted_inner(const WeightedSignal& f, const WeightedSignal& g) {
  if (!(f.grid == g.grid) || f.dim() != g.dim()) {
    throw ShapeError("weighted_inner: signals live on different grids");
  }
  const Vector w = damping_weights(f.grid);
  Complex acc = 0.0;
  for (Index j = 0; j < f.values.rows(); ++j) {
    acc += std::norm(w(j)) * f.values.row(j).dot(g.values.row(j));
  }
  // Eigen's dot is conjugate-linear in the first argument; the weighted
  // pairing <f, g> is linear in f.
  return std::conj(acc) * f.grid.dt;
}

double spectral_norm(const SpectralSignal& f) {
  const double dxi = kTwoPi / (static_cast<double>(f.grid.n_steps) * f.grid.dt);
  return std::sqrt(f.values.squaredNorm() * dxi);
}

SpectralSignal fourier_laplace(const WeightedSignal& f) {
  f.validate();
  const TimeGrid& grid = f.grid;
  Matrix work = f.values;
  const Vector w = damping_weights(grid);
  for (Index j = 0; j < work.rows(); ++j) work.row(j) *= w(j);
  fft_columns(work, /*forward=*/true);
  const double scale = grid.dt / std::sqrt(kTwoPi);
  for (Index j = 0; j < work.rows(); ++j) {
    work.row(j) *= scale * std::exp(Complex(0.0, -grid.xi(j) * grid.t0));
  }
  return SpectralSignal{grid, std::move(work)};
}

WeightedSignal fourier_laplace_inverse(const SpectralSignal& f) {
  const TimeGrid& grid = f.grid;
  Matrix work = f.values;
  const double scale = std::sqrt(kTwoPi) / grid.dt;
  for (Index j = 0; j < work.rows(); ++j) {
    work.row(j) *= scale * std::exp(Complex(0.0, grid.xi(j) * grid.t0));
  }
  fft_columns(work, /*forward=*/false);
  for (Index j = 0; j < work.rows(); ++j) {
    work.row(j) *= std::exp(grid.nu * grid.time(j));
  }
  return WeightedSignal{grid, std::move(work)};
}

double band_limit_fraction(const WeightedSignal& f) {
  const SpectralSignal spec = fourier_laplace(f);
  const Index n = f.grid.n_steps;
  const double xi_half = std::numbers::pi / (2.0 * f.grid.dt);
  double total = 0.0;
  double top = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double e = spec.values.row(j).squaredNorm();
    total += e;
    if (std::abs(f.grid.xi(j)) >= xi_half) top += e;
  }
  if (total == 0.0) return 0.0;
  return top / total;
}

WeightedSignal td_apply(const WeightedSignal& f) {
  const double fraction = band_limit_fraction(f);
  if (fraction > kBandLimitTolerance) {
    std::ostringstream os;
    os << "td_apply: top-octave energy fraction " << fraction
       << " exceeds " << kBandLimitTolerance;
    throw AliasingError(os.str(), fraction);
  }
  SpectralSignal spec = fourier_laplace(f);
  for (Index j = 0; j < spec.values.rows(); ++j) {
    spec.values.row(j) *= Complex(f.grid.nu, f.grid.xi(j));
  }
  return fourier_laplace_inverse(spec);
}

WeightedSignal td_inverse(const WeightedSignal& f) {
  SpectralSignal spec = fourier_laplace(f);
  for (Index j = 0; j < spec.values.rows(); ++j) {
    spec.values.row(j) /= Complex(f.grid.nu, f.grid.xi(j));
  }
  return fourier_laplace_inverse(spec);
}

WeightedSignal cumulative_integral(const WeightedSignal& f) {
  f.validate();
  Matrix out = Matrix::Zero(f.values.rows(), f.values.cols());
  for (Index j = 1; j < f.values.rows(); ++j) {
    out.row(j) =
        out.row(j - 1) + 0.5 * f.grid.dt * (f.values.row(j - 1) + f.values.row(j));
  }
  return WeightedSignal{f.grid, std::move(out)};
}

WeightedSignal matlaw_apply(const MaterialLaw& law, const WeightedSignal& f) {
  if (!(f.grid.nu > law.nu0())) {
    std::ostringstream os;
    os << "matlaw_apply: grid weight nu = " << f.grid.nu
       << " must exceed the law abscissa nu0 = " << law.nu0();
    throw HalfPlaneDomainError(os.str());
  }
  if (law.dim() != f.dim()) {
    throw ShapeError("matlaw_apply: law dimension does not match the signal");
  }
  SpectralSignal spec = fourier_laplace(f);
  for (Index j = 0; j < spec.values.rows(); ++j) {
    const Matrix mz = law.eval(Complex(f.grid.nu, f.grid.xi(j)));
    spec.values.row(j) = (mz * spec.values.row(j).transpose()).transpose();
  }
  return fourier_laplace_inverse(spec);
}

double causality_defect(const WeightedSignal& u, double a) {
  const double total = weighted_norm(u);
  if (total == 0.0) return 0.0;
  WeightedSignal head = u;
  for (Index j = 0; j < head.values.rows(); ++j) {
    if (head.grid.time(j) >= a) head.values.row(j).setZero();
  }
  return weighted_norm(head) / total;
}

EvoSolver::EvoSolver(MaterialLaw law, Matrix a_skew, TimeGrid grid, Path path,
                     std::optional<Decomposition> dec)
    : law_(std::move(law)),
      a_skew_(std::move(a_skew)),
      grid_(grid),
      path_(path),
      dec_(std::move(dec)) {
  grid_.validate();
  if (a_skew_.rows() != law_.dim() || a_skew_.cols() != law_.dim()) {
    throw ShapeError("EvoSolver: A and the material law dimensions differ");
  }
  const double scale = std::max(1.0, operator_norm(a_skew_));
  if (operator_norm(a_skew_ + a_skew_.adjoint()) > 1e-12 * scale) {
    throw StructureError("EvoSolver: A must be skew-selfadjoint");
  }
  if (!(grid_.nu > law_.nu0())) {
    throw HalfPlaneDomainError("EvoSolver: requires nu > nu0");
  }
  if (path_ == Path::kBlockFormula && !dec_) {
    throw ConfigError("EvoSolver: block-formula path needs a decomposition");
  }
  {
    const Complex z0(grid_.nu, 0.37 * grid_.nu);
    const Matrix at_conj = law_.eval(std::conj(z0));
    const Matrix conj_at = law_.eval(z0).conjugate();
    real_structure_ =
        (at_conj - conj_at).cwiseAbs().maxCoeff() <
            1e-13 * (1.0 + operator_norm(conj_at)) &&
        a_skew_.imag().cwiseAbs().maxCoeff() == 0.0;
  }
  if (const auto analytic = picard_coercivity_analytic(law_, grid_.nu)) {
    // Exact line minimum: Re(z M(z)) is frequency-independent here.
    coercivity_ = *analytic;
  } else {
    double worst = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < grid_.n_steps; ++j) {
      if (real_structure_ && grid_.freq_index(j) < 0) continue;
      const Complex z(grid_.nu, grid_.xi(j));
      worst = std::min(worst, hermitian_lower_bound(z * law_.eval(z)));
    }
    coercivity_ = worst;
  }
  if (!(coercivity_ > 0.0)) {
    std::ostringstream os;
    os << "EvoSolver: certificate 'picard_coercivity' failed; requires "
          "Re zM(z) >= c > 0 on the solve frequencies, measured c = "
       << coercivity_;
    throw WellPosednessError(os.str(), coercivity_);
  }
}

std::vector<WeightedSignal> EvoSolver::solve(
    const std::vector<WeightedSignal>& fs) const {
  std::vector<SpectralSignal> specs;
  specs.reserve(fs.size());
  for (const WeightedSignal& f : fs) {
    if (!(f.grid == grid_)) {
      throw ShapeError("EvoSolver::solve: input grid differs from solver grid");
    }
    if (f.dim() != law_.dim()) {
      throw ShapeError("EvoSolver::solve: input dimension mismatch");
    }
    specs.push_back(fourier_laplace(f));
  }
  const bool use_mirror = real_structure_ && path_ == Path::kLu;
  for (Index j = 0; j < grid_.n_steps; ++j) {
    const Index k = grid_.freq_index(j);
    if (use_mirror && k < 0 && k != -grid_.n_steps / 2) {
      continue;  // handled together with the mirrored bin below
    }
    const Complex z(grid_.nu, grid_.xi(j));
    const Matrix zm = z * law_.eval(z);
    if (path_ == Path::kBlockFormula) {
      const Matrix inv = perturbed_block_inverse(zm, a_skew_, *dec_);
      for (SpectralSignal& spec : specs) {
        spec.values.row(j) = (inv * spec.values.row(j).transpose()).transpose();
      }
    } else {
      Eigen::PartialPivLU<Matrix> lu(zm + a_skew_);
      for (SpectralSignal& spec : specs) {
        Vector rhs = spec.values.row(j).transpose();
        Vector sol = lu.solve(rhs);
        if (!sol.array().isFinite().all()) {
          std::ostringstream os;
          os << "EvoSolver: frequency solve failed at xi = " << grid_.xi(j);
          throw SolverError(os.str(), grid_.xi(j));
        }
        spec.values.row(j) = sol.transpose();
      }
      // T(conj z) = conj(T(z)) reuses the factorisation for the bin at -xi.
      if (use_mirror && k > 0) {
        const Index mirror = grid_.n_steps - j;
        for (SpectralSignal& spec : specs) {
          Vector rhs = spec.values.row(mirror).transpose().conjugate();
          spec.values.row(mirror) = lu.solve(rhs).conjugate().transpose();
        }
      }
    }
  }
  std::vector<WeightedSignal> out;
  out.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    WeightedSignal u = fourier_laplace_inverse(specs[i]);
    const double fn = weighted_norm(fs[i]);
    const double un = weighted_norm(u);
    if (un > fn / coercivity_ + 1e-9 * (1.0 + fn / coercivity_)) {
      std::ostringstream os;
      os << "EvoSolver: solution norm " << un
         << " violates the bound ||U||_nu <= ||f||_nu / c = "
         << fn / coercivity_;
      throw InternalConsistencyError(os.str());
    }
    out.push_back(std::move(u));
  }
  return out;
}

WeightedSignal EvoSolver::solve(const WeightedSignal& f) const {
  return solve(std::vector<WeightedSignal>{f}).front();
}

WeightedSignal evo_solve(const MaterialLaw& law, const Matrix& a_skew,
                         const TimeGrid& grid, const WeightedSignal& f) {
  return EvoSolver(law, a_skew, grid).solve(f);
}

double gaussian_bump(double t, double center, double width) {
  const double u = (t - center) / width;
  return std::exp(-0.5 * u * u);
}

double mollified_indicator(double t, double a, double b, double ramp) {
  // Smooth transition with all derivatives vanishing at the endpoints, so
  // the sampled signal meets the band-limit and causality tolerances.
  const auto edge = [](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double g0 = std::exp(-1.0 / x);
    const double g1 = std::exp(-1.0 / (1.0 - x));
    return g0 / (g0 + g1);
  };
  return edge((t - a) / ramp) * edge((b - t) / ramp);
}

}  // namespace evoeq
