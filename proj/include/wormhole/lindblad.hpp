#ifndef WORMHOLE_LINDBLAD_HPP_
#define WORMHOLE_LINDBLAD_HPP_

#include <optional>
#include <vector>

#include "wormhole/syk.hpp"
#include "wormhole/tfd.hpp"
#include "wormhole/transmission.hpp"
#include "wormhole/types.hpp"

namespace wormhole {

struct DensityMatrix {
  MatrixXc matrix;

  Index dim() const { return matrix.rows(); }
  Complex trace() const { return matrix.trace(); }
  double hermiticity_residual() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const;

  static DensityMatrix pure(const VectorXc& psi) { return {psi * psi.adjoint()}; }
};

struct NoiseConfig {
  double gamma = 0.0;  // dephasing rate on every qubit of the doubled chain
};

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 1e-2;
  double positivity_tol = 1e-5;  // abort threshold for negative eigenvalues
};

/// -i[H, rho] + gamma sum_k (Z_k rho Z_k - rho), the dephasing term
/// evaluated elementwise as -2 gamma hamming(a, b) rho_ab.
MatrixXc lindblad_rhs(const MatrixXc& h, const MatrixXc& rho, double gamma);

/// Adaptive Dormand-Prince 4(5) evolution with dense output at `times`
/// (ascending, non-negative; evolution starts at t = 0). Throws
/// std::runtime_error if a snapshot has an eigenvalue below
/// -positivity_tol.
std::vector<DensityMatrix> evolve_noisy(const MatrixXc& h, const DensityMatrix& rho0,
                                        double gamma, const VectorXr& times,
                                        const IntegratorOptions& options = {});

/// Noisy transmission signal C(t) = (1/N) sum_j Tr[psi_j^R rho_j(t)] with
/// rho_j(0) = psi_j^L |TFD><TFD|. Requires N <= 8.
SignalTrace noisy_signal(const DoubledSystem& sys, const TfdState& tfd, double gamma,
                         const VectorXr& times, const IntegratorOptions& options = {});

/// gamma at which the peak falls to half of its gamma = 0 value, by
/// piecewise-linear interpolation in log gamma between the first bracketing
/// pair (linear in gamma when the lower bracket is 0). `gammas` must be
/// ascending and start at 0; returns nullopt when no pair brackets the
/// crossing.
std::optional<double> critical_gamma(const std::vector<double>& gammas,
                                     const std::vector<double>& peaks);

struct NoiseScan {
  std::vector<double> gammas;
  std::vector<double> peaks;
  std::optional<double> gamma_star;
};

NoiseScan critical_gamma(const DoubledSystem& sys, const TfdState& tfd,
                         const std::vector<double>& gammas, const VectorXr& times,
                         const IntegratorOptions& options = {});

}  // namespace wormhole

#endif  // WORMHOLE_LINDBLAD_HPP_
