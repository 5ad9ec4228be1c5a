#include "wormhole/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wormhole {

MatrixFreeHamiltonian::MatrixFreeHamiltonian(MatrixXc h_single, int n_majorana, double mu)
    : h_single_(std::move(h_single)), n_majorana_(n_majorana), mu_(mu) {
  if (n_majorana < 4 || n_majorana % 2 != 0) {
    throw std::invalid_argument("MatrixFreeHamiltonian: N must be even and at least 4");
  }
  if (h_single_.rows() != (Index{1} << (n_majorana / 2)) || h_single_.cols() != h_single_.rows()) {
    throw std::invalid_argument("MatrixFreeHamiltonian: single-side dimension must be 2^{N/2}");
  }
  h_single_t_ = h_single_.transpose();
  for (int j = 0; j < n_majorana; ++j) {
    left_.push_back(jw_majorana(j, n_majorana));
    right_.push_back(jw_majorana(n_majorana + j, n_majorana));
    const PauliString pair = left_.back() * right_.back();
    pairs_.push_back(pair.with_phase_exponent(pair.phase_exponent() + 1));  // factor i
  }
}

MatrixFreeHamiltonian::MatrixFreeHamiltonian(const DoubledSystem& sys)
    : MatrixFreeHamiltonian(sys.h_single, sys.n_majorana, sys.mu) {}

void MatrixFreeHamiltonian::apply(const VectorXc& in, VectorXc& out) const {
  const Index ds = single_dim();
  if (in.size() != ds * ds) throw std::invalid_argument("apply_h: dimension mismatch");
  out.resize(in.size());
  Eigen::Map<const RowMajorMatrixXc> m_in(in.data(), ds, ds);
  Eigen::Map<RowMajorMatrixXc> m_out(out.data(), ds, ds);
  // (h (x) I) v  <->  h M,   (I (x) h) v  <->  M h^T
  m_out.noalias() = h_single_ * m_in;
  m_out.noalias() += m_in * h_single_t_;

  for (const auto& p : pairs_) {
    const Complex c = mu_ * p.phase();
    const std::uint64_t x = p.x_mask();
    const Index d = in.size();
    for (Index a = 0; a < d; ++a) {
      const auto basis = static_cast<std::uint64_t>(a);
      out(static_cast<Index>(basis ^ x)) += (c * p.sign_on(basis)) * in(a);
    }
  }
}

KrylovPropagator::KrylovPropagator(KrylovBasis basis) : basis_(std::move(basis)) {
  const Index m = basis_.dim();
  MatrixXr t = MatrixXr::Zero(m, m);
  t.diagonal() = basis_.alpha;
  if (m > 1) {
    t.diagonal(1) = basis_.beta;
    t.diagonal(-1) = basis_.beta;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXr> solver(t);
  theta_ = solver.eigenvalues();
  q_ = solver.eigenvectors();
}

VectorXc KrylovPropagator::coefficients(double t) const {
  // e^{-iTt} e_1 = Q e^{-i theta t} Q^T e_1
  VectorXc rotated(theta_.size());
  for (Index k = 0; k < theta_.size(); ++k) {
    rotated(k) = std::polar(q_(0, k), -theta_(k) * t);
  }
  return basis_.start_norm * (q_.cast<Complex>() * rotated);
}

double KrylovPropagator::error_estimate(double t) const {
  if (basis_.breakdown) return 0.0;
  const VectorXc c = coefficients(t);
  return basis_.next_beta * std::abs(c(c.size() - 1));
}

VectorXc lanczos_evolve(const MatrixFreeHamiltonian& h, const VectorXc& psi, double t, Index m) {
  if (psi.size() != h.dim()) throw std::invalid_argument("lanczos_evolve: dimension mismatch");
  if (t == 0.0) return psi;
  return KrylovPropagator(lanczos(h, psi, m)).evolve(t);
}

std::vector<int> even_sites(int n_majorana) {
  std::vector<int> s;
  for (int j = 0; j < n_majorana; j += 2) s.push_back(j);
  return s;
}

std::vector<int> all_sites(int n_majorana) {
  std::vector<int> s;
  for (int j = 0; j < n_majorana; ++j) s.push_back(j);
  return s;
}

KrylovSignal signal_krylov(const MatrixFreeHamiltonian& h, const TfdState& tfd,
                           const std::vector<int>& sites, const VectorXr& times, Index m) {
  if (sites.empty()) throw std::invalid_argument("signal_krylov: no sites requested");
  if (tfd.vector.size() != h.dim()) throw std::invalid_argument("signal_krylov: dimension mismatch");
  for (int j : sites) {
    if (j < 0 || j >= h.n_majorana()) throw std::out_of_range("signal_krylov: site index");
  }
  const Index m_eff = std::min<Index>(m, h.dim());

  KrylovSignal out;
  const KrylovPropagator phi(lanczos(h, tfd.vector, m_eff));
  out.breakdown = phi.basis().breakdown;
  const MatrixXc& v_phi = phi.basis().vectors;

  // Everything after the two Lanczos runs happens in the small spaces:
  // C_j(t) = c_phi(t)^dagger G c_chi(t) with G = V_phi^dagger psi_j^R V_chi.
  const Index nt = times.size();
  MatrixXc c_phi(v_phi.cols(), nt);
  for (Index k = 0; k < nt; ++k) {
    c_phi.col(k) = phi.coefficients(times(k));
    out.max_error_estimate = std::max(out.max_error_estimate, phi.error_estimate(times(k)));
  }

  constexpr Index kBlock = 8;  // columns of psi^R V_chi held at once
  MatrixXc block(h.dim(), kBlock);
  VectorXc c = VectorXc::Zero(nt);
  VectorXc inserted(h.dim());
  for (int j : sites) {
    apply_pauli(h.majorana_left()[static_cast<std::size_t>(j)], tfd.vector, inserted);
    const KrylovPropagator chi(lanczos(h, inserted, m_eff));
    out.breakdown = out.breakdown || chi.basis().breakdown;
    const MatrixXc& v_chi = chi.basis().vectors;
    const PauliString& psi_r = h.majorana_right()[static_cast<std::size_t>(j)];

    MatrixXc g(v_phi.cols(), v_chi.cols());
    for (Index c0 = 0; c0 < v_chi.cols(); c0 += kBlock) {
      const Index nb = std::min(kBlock, v_chi.cols() - c0);
      apply_pauli(psi_r, v_chi.middleCols(c0, nb), block.leftCols(nb));
      g.middleCols(c0, nb).noalias() = v_phi.adjoint() * block.leftCols(nb);
    }
    for (Index k = 0; k < nt; ++k) {
      c(k) += c_phi.col(k).dot(g * chi.coefficients(times(k)));
      out.max_error_estimate = std::max(out.max_error_estimate, chi.error_estimate(times(k)));
    }
  }
  c /= static_cast<double>(sites.size());
  out.trace = make_trace(times, std::move(c));
  return out;
}

}  // namespace wormhole
