#include "wormhole/lindblad.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace wormhole {

namespace odeint = boost::numeric::odeint;

namespace {

using FlatState = std::vector<Complex>;

constexpr int kMaxNoisyMajorana = 8;

// d/dt B = -i (H_rows B - B H_cols) + rates .* B for one block of an
// operator on the doubled space; rows and cols are basis-index subsets
// that H does not couple to their complements.
class BlockGenerator {
 public:
  BlockGenerator(const MatrixXc& h, const std::vector<Index>& rows,
                 const std::vector<Index>& cols, double gamma)
      : h_rows_(h(rows, rows)), h_cols_(h(cols, cols)), rates_(rows.size(), cols.size()) {
    for (Index i = 0; i < rates_.rows(); ++i) {
      for (Index k = 0; k < rates_.cols(); ++k) {
        const auto diff = static_cast<std::uint64_t>(rows[i] ^ cols[k]);
        rates_(i, k) = -2.0 * gamma * std::popcount(diff);
      }
    }
  }

  Index rows() const { return rates_.rows(); }
  Index cols() const { return rates_.cols(); }

  void operator()(const FlatState& x, FlatState& dxdt, double /*t*/) const {
    Eigen::Map<const MatrixXc> b(x.data(), rows(), cols());
    Eigen::Map<MatrixXc> db(dxdt.data(), rows(), cols());
    db.noalias() = h_rows_ * b;
    db.noalias() -= b * h_cols_;
    db *= Complex{0.0, -1.0};
    db.array() += rates_.array() * b.array();
  }

 private:
  MatrixXc h_rows_, h_cols_;
  MatrixXr rates_;
};

std::vector<Index> iota(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

// Integrates from t = 0 and calls `observe(block, k)` for every requested
// time index k.
void integrate_block(const BlockGenerator& gen, const MatrixXc& b0, const VectorXr& times,
                     const IntegratorOptions& options,
                     const std::function<void(Eigen::Map<const MatrixXc>, Index)>& observe) {
  if (times.size() == 0) return;
  std::vector<double> ts;
  const bool prepend = times(0) > 0.0;
  if (times(0) < 0.0) throw std::invalid_argument("lindblad: times must be non-negative");
  if (prepend) ts.push_back(0.0);
  for (Index k = 0; k < times.size(); ++k) {
    if (k > 0 && times(k) <= times(k - 1)) throw std::invalid_argument("lindblad: times must ascend");
    ts.push_back(times(k));
  }

  FlatState x(b0.data(), b0.data() + b0.size());
  auto stepper = odeint::make_dense_output(options.atol, options.rtol,
                                           odeint::runge_kutta_dopri5<FlatState>());
  Index seen = 0;
  auto observer = [&](const FlatState& s, double) {
    const Index k = seen++ - (prepend ? 1 : 0);
    if (k >= 0) observe(Eigen::Map<const MatrixXc>(s.data(), gen.rows(), gen.cols()), k);
  };
  odeint::integrate_times(stepper, std::cref(gen), x, ts.begin(), ts.end(),
                          options.initial_step, observer);
}

}  // namespace

double DensityMatrix::min_eigenvalue() const {
  const MatrixXc herm = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

MatrixXc lindblad_rhs(const MatrixXc& h, const MatrixXc& rho, double gamma) {
  if (h.rows() != rho.rows() || h.cols() != rho.cols() || h.rows() != h.cols()) {
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  }
  const BlockGenerator gen(h, iota(h.rows()), iota(h.rows()), gamma);
  FlatState x(rho.data(), rho.data() + rho.size());
  FlatState dx(x.size());
  gen(x, dx, 0.0);
  return Eigen::Map<const MatrixXc>(dx.data(), rho.rows(), rho.cols());
}

std::vector<DensityMatrix> evolve_noisy(const MatrixXc& h, const DensityMatrix& rho0,
                                        double gamma, const VectorXr& times,
                                        const IntegratorOptions& options) {
  if (gamma < 0.0) throw std::invalid_argument("evolve_noisy: gamma must be non-negative");
  if (h.rows() != rho0.dim()) throw std::invalid_argument("evolve_noisy: dimension mismatch");
  if (h.rows() > (Index{1} << kMaxNoisyMajorana)) {
    throw std::invalid_argument("evolve_noisy: dimension above 256");
  }
  const BlockGenerator gen(h, iota(h.rows()), iota(h.rows()), gamma);
  std::vector<DensityMatrix> out;
  out.reserve(static_cast<std::size_t>(times.size()));
  integrate_block(gen, rho0.matrix, times, options, [&](Eigen::Map<const MatrixXc> b, Index k) {
    DensityMatrix snap{b};
    const double lowest = snap.min_eigenvalue();
    if (lowest < -options.positivity_tol) {
      throw std::runtime_error("evolve_noisy: positivity violated at t = " +
                               std::to_string(times(k)) + " (min eigenvalue " +
                               std::to_string(lowest) + ")");
    }
    out.push_back(std::move(snap));
  });
  return out;
}

SignalTrace noisy_signal(const DoubledSystem& sys, const TfdState& tfd, double gamma,
                         const VectorXr& times, const IntegratorOptions& options) {
  if (gamma < 0.0) throw std::invalid_argument("noisy_signal: gamma must be non-negative");
  if (sys.n_majorana > kMaxNoisyMajorana) throw std::invalid_argument("noisy_signal: N must be <= 8");
  if (!sys.h_full) throw std::invalid_argument("noisy_signal: dense doubled Hamiltonian required");
  const MatrixXc& h = *sys.h_full;
  const Index d = h.rows();
  if (tfd.vector.size() != d) throw std::invalid_argument("noisy_signal: dimension mismatch");

  // H and every Z_k conserve total parity, so psi_j^L|TFD><TFD| stays in
  // the single (parity(ket), parity(bra)) block it starts in.
  auto sector_of = [&](const VectorXc& v) -> std::optional<ParitySector> {
    double even = 0.0, odd = 0.0;
    for (Index a = 0; a < d; ++a) {
      ((std::popcount(static_cast<std::uint64_t>(a)) & 1) ? odd : even) += std::norm(v(a));
    }
    const double total = even + odd;
    if (odd <= 1e-24 * total) return ParitySector::even;
    if (even <= 1e-24 * total) return ParitySector::odd;
    return std::nullopt;
  };

  VectorXc c = VectorXc::Zero(times.size());
  const auto bra_sector = sector_of(tfd.vector);
  for (int j = 0; j < sys.n_majorana; ++j) {
    const VectorXc ket = apply_pauli(sys.majorana_left[j], tfd.vector);
    const auto ket_sector = sector_of(ket);
    const bool blocked = bra_sector && ket_sector;
    const auto rows = blocked ? parity_indices(sys.n_qubits(), *ket_sector) : iota(d);
    const auto cols = blocked ? parity_indices(sys.n_qubits(), *bra_sector) : iota(d);

    std::vector<Index> col_pos(static_cast<std::size_t>(d), -1);
    for (std::size_t k = 0; k < cols.size(); ++k) col_pos[static_cast<std::size_t>(cols[k])] = static_cast<Index>(k);

    const MatrixXc b0 = ket(rows) * tfd.vector(cols).adjoint();
    const BlockGenerator gen(h, rows, cols, gamma);
    const PauliString& psi_r = sys.majorana_right[j];

    // Tr[psi^R rho] = sum_a <a^x| psi^R |a> rho(a, a^x)
    integrate_block(gen, b0, times, options, [&](Eigen::Map<const MatrixXc> b, Index k) {
      Complex tr{0.0, 0.0};
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto a = static_cast<std::uint64_t>(rows[i]);
        const Index pos = col_pos[static_cast<std::size_t>(a ^ psi_r.x_mask())];
        if (pos >= 0) tr += psi_r.phase() * psi_r.sign_on(a) * b(static_cast<Index>(i), pos);
      }
      c(k) += tr;
    });
  }
  c /= static_cast<double>(sys.n_majorana);
  return make_trace(times, std::move(c));
}

std::optional<double> critical_gamma(const std::vector<double>& gammas,
                                     const std::vector<double>& peaks) {
  if (gammas.size() != peaks.size() || gammas.size() < 2) {
    throw std::invalid_argument("critical_gamma: need matching gamma and peak samples");
  }
  if (gammas.front() != 0.0) throw std::invalid_argument("critical_gamma: gamma = 0 must be sampled");
  for (std::size_t k = 1; k < gammas.size(); ++k) {
    if (gammas[k] <= gammas[k - 1]) throw std::invalid_argument("critical_gamma: gammas must ascend");
  }
  const double target = 0.5 * peaks.front();
  for (std::size_t k = 0; k + 1 < gammas.size(); ++k) {
    const double fa = peaks[k], fb = peaks[k + 1];
    if (!(fa >= target && fb < target)) continue;
    const double frac = (fa - target) / (fa - fb);
    if (gammas[k] == 0.0) return frac * gammas[k + 1];
    const double la = std::log(gammas[k]), lb = std::log(gammas[k + 1]);
    return std::exp(la + frac * (lb - la));
  }
  return std::nullopt;
}

NoiseScan critical_gamma(const DoubledSystem& sys, const TfdState& tfd,
                         const std::vector<double>& gammas, const VectorXr& times,
                         const IntegratorOptions& options) {
  NoiseScan scan;
  scan.gammas = gammas;
  for (double g : gammas) scan.peaks.push_back(noisy_signal(sys, tfd, g, times, options).peak_height);
  scan.gamma_star = critical_gamma(scan.gammas, scan.peaks);
  return scan;
}

}  // namespace wormhole
