#ifndef WORMHOLE_TFD_HPP_
#define WORMHOLE_TFD_HPP_

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wormhole/spectral.hpp"
#include "wormhole/types.hpp"

namespace wormhole {

struct Provenance {
  int n_majorana = 0;
  double sparsity = 1.0;
  std::uint64_t seed = 0;
};

/// Thermofield double on the doubled space. Component a * d_s + b holds the
/// amplitude of |a>_L |b>_R.
struct TfdState {
  VectorXc vector;
  double beta = 0.0;
  double log_z = 0.0;  // log of sum_n exp(-beta E_n)
  Index single_dim = 0;
  Provenance provenance;

  double partition_z() const { return std::exp(log_z); }

  /// d_s x d_s view with rows indexed by the left factor.
  Eigen::Map<const RowMajorMatrixXc> amplitudes() const {
    return {vector.data(), single_dim, single_dim};
  }
};

/// Z^{-1/2} sum_n e^{-beta E_n / 2} |n>_L |n*>_R, so the amplitude matrix is
/// e^{-beta H / 2} / sqrt(Z). With real eigenvectors (a real Hamiltonian) the
/// right factor is |n> itself. Weights are taken relative to the ground
/// state so deep spectra neither underflow nor overflow.
TfdState build_tfd(const Spectrum& single_side, double beta, Provenance provenance = {});

/// rho_L = Tr_R |TFD><TFD| = M M^dagger.
MatrixXc reduced_left(const TfdState& state);
/// rho_R = Tr_L |TFD><TFD| = M^T M^*.
MatrixXc reduced_right(const TfdState& state);

/// Von Neumann entropy of rho_L in nats; eigenvalues below 1e-14 are
/// dropped.
double entanglement_entropy(const TfdState& state);

/// || rho_L - e^{-beta H} / Z ||_F, with the Gibbs state built from its own
/// diagonalization of h_single.
double thermal_fidelity_error(const TfdState& state, const MatrixXc& h_single, double beta);

/// |<a|b>|.
double tfd_overlap(const TfdState& a, const TfdState& b);

struct TfdDiagnostics {
  double sparsity = 1.0;
  std::uint64_t seed = 0;
  double s_ent = 0.0;
  double s_over_smax = 0.0;
  double thermal_err = 0.0;
  double overlap_with_dense = 0.0;
};

TfdDiagnostics diagnose_tfd(const TfdState& state, const MatrixXc& h_single,
                            const TfdState& dense_reference);

void write_tfd_csv(std::ostream& os, const std::vector<TfdDiagnostics>& rows);

}  // namespace wormhole

#endif  // WORMHOLE_TFD_HPP_
