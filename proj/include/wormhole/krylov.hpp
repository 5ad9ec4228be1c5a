#ifndef WORMHOLE_KRYLOV_HPP_
#define WORMHOLE_KRYLOV_HPP_

#include <vector>

#include "wormhole/pauli.hpp"
#include "wormhole/syk.hpp"
#include "wormhole/tfd.hpp"
#include "wormhole/transmission.hpp"
#include "wormhole/types.hpp"

namespace wormhole {

/// Doubled Hamiltonian applied through its tensor structure: the shared
/// single-side matrix acts on either factor of the reshaped vector and the
/// coupling is a sum of N two-Majorana Pauli strings.
class MatrixFreeHamiltonian {
 public:
  MatrixFreeHamiltonian(MatrixXc h_single, int n_majorana, double mu);
  explicit MatrixFreeHamiltonian(const DoubledSystem& sys);

  Index single_dim() const { return h_single_.rows(); }
  Index dim() const { return single_dim() * single_dim(); }
  int n_majorana() const { return n_majorana_; }
  double mu() const { return mu_; }
  const MatrixXc& h_single() const { return h_single_; }
  const std::vector<PauliString>& majorana_left() const { return left_; }
  const std::vector<PauliString>& majorana_right() const { return right_; }

  /// out = H in. `out` must not alias `in`.
  void apply(const VectorXc& in, VectorXc& out) const;
  VectorXc apply(const VectorXc& in) const {
    VectorXc out(in.size());
    apply(in, out);
    return out;
  }

 private:
  MatrixXc h_single_;
  MatrixXc h_single_t_;
  int n_majorana_;
  double mu_;
  std::vector<PauliString> left_, right_;
  std::vector<PauliString> pairs_;  // i mu psi_j^L psi_j^R with coefficient folded in
};

inline VectorXc apply_h(const MatrixFreeHamiltonian& h, const VectorXc& v) { return h.apply(v); }

/// Lanczos basis V_m with tridiagonal projection T_m = V^dagger H V.
struct KrylovBasis {
  MatrixXc vectors;  // d x m, orthonormal columns
  VectorXr alpha;    // diagonal of T, length m
  VectorXr beta;     // off-diagonal of T, length m - 1
  double start_norm = 0.0;
  double next_beta = 0.0;  // beta_m, weight of the first discarded direction
  bool breakdown = false;  // closed early on an invariant subspace

  Index dim() const { return vectors.cols(); }
};

/// Off-diagonal magnitude below which the Krylov space counts as closed.
inline constexpr double kLanczosBreakdown = 1e-12;

/// Builds up to m Lanczos vectors from `start` with full
/// reorthogonalization.
template <typename Operator>
KrylovBasis lanczos(const Operator& op, const VectorXc& start, Index m) {
  const Index d = start.size();
  if (m < 2) throw std::invalid_argument("lanczos: need m >= 2");
  if (m > d) throw std::invalid_argument("lanczos: m exceeds the Hilbert-space dimension");
  KrylovBasis kb;
  kb.start_norm = start.norm();
  if (kb.start_norm == 0.0) throw std::invalid_argument("lanczos: zero start vector");
  kb.vectors.resize(d, m);
  kb.alpha.resize(m);
  kb.beta.resize(m - 1);
  kb.vectors.col(0) = start / kb.start_norm;

  VectorXc w(d);
  Index k = 0;
  for (;; ++k) {
    op.apply(kb.vectors.col(k).eval(), w);
    kb.alpha(k) = kb.vectors.col(k).dot(w).real();
    // Full Gram-Schmidt against every previous vector, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = kb.vectors.leftCols(k + 1);
      w.noalias() -= basis * (basis.adjoint() * w);
    }
    const double b = w.norm();
    if (k + 1 == m) {
      kb.next_beta = b;
      break;
    }
    if (b < kLanczosBreakdown) {
      kb.breakdown = true;
      kb.next_beta = b;
      break;
    }
    kb.beta(k) = b;
    kb.vectors.col(k + 1) = w / b;
  }
  const Index used = k + 1;
  kb.vectors.conservativeResize(d, used);
  kb.alpha.conservativeResize(used);
  kb.beta.conservativeResize(used - 1);
  return kb;
}

/// e^{-iHt} restricted to a Krylov space, reusable for any number of times.
class KrylovPropagator {
 public:
  explicit KrylovPropagator(KrylovBasis basis);

  const KrylovBasis& basis() const { return basis_; }

  /// Coefficients c(t) with e^{-iHt} psi ~ V c(t).
  VectorXc coefficients(double t) const;
  VectorXc evolve(double t) const { return basis_.vectors * coefficients(t); }

  /// A-posteriori error estimate beta_m |e_m^T e^{-iTt} e_1| ||psi||.
  double error_estimate(double t) const;

 private:
  KrylovBasis basis_;
  VectorXr theta_;
  MatrixXr q_;
};

/// e^{-iHt} psi via an m-dimensional Lanczos projection.
VectorXc lanczos_evolve(const MatrixFreeHamiltonian& h, const VectorXc& psi, double t,
                        Index m = 60);

struct KrylovSignal {
  SignalTrace trace;
  double max_error_estimate = 0.0;
  bool breakdown = false;
};

/// Even Majorana indices 0, 2, ..., N-2.
std::vector<int> even_sites(int n_majorana);
std::vector<int> all_sites(int n_majorana);

/// C(t) = mean_j <phi(t)| psi_j^R |chi_j(t)> with phi(t) = e^{-iHt}|TFD>
/// and chi_j(t) = e^{-iHt} psi_j^L |TFD>. Each Krylov space is built once
/// from its start vector; every time point is evaluated from t = 0.
KrylovSignal signal_krylov(const MatrixFreeHamiltonian& h, const TfdState& tfd,
                           const std::vector<int>& sites, const VectorXr& times, Index m = 60);

}  // namespace wormhole

#endif  // WORMHOLE_KRYLOV_HPP_
