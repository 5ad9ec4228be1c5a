#include "wormhole/tfd.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wormhole {

namespace {

constexpr double kEigenFloor = 1e-14;

}  // namespace

TfdState build_tfd(const Spectrum& single_side, double beta, Provenance provenance) {
  if (beta < 0.0) throw std::invalid_argument("build_tfd: beta must be non-negative");
  if (!single_side.eigenvectors) throw std::invalid_argument("build_tfd: eigenvectors required");
  const VectorXr& e = single_side.eigenvalues;
  const MatrixXc& u = *single_side.eigenvectors;
  const Index ds = e.size();

  const double e0 = e.minCoeff();
  const VectorXr shifted = -0.5 * beta * (e.array() - e0);
  const VectorXr half_weights = shifted.array().exp();
  const double z_shifted = half_weights.squaredNorm();

  // M = U diag(w) U^dagger = e^{-beta H / 2} / sqrt(Z), independent of the
  // eigenvector phases. For real eigenvectors this is U diag(w) U^T.
  RowMajorMatrixXc m = u * (half_weights / std::sqrt(z_shifted)).asDiagonal() * u.adjoint();

  TfdState s;
  s.vector = Eigen::Map<const VectorXc>(m.data(), ds * ds);
  s.beta = beta;
  s.log_z = std::log(z_shifted) - beta * e0;
  s.single_dim = ds;
  s.provenance = provenance;
  return s;
}

MatrixXc reduced_left(const TfdState& state) {
  const auto m = state.amplitudes();
  return m * m.adjoint();
}

MatrixXc reduced_right(const TfdState& state) {
  const auto m = state.amplitudes();
  return m.transpose() * m.conjugate();
}

double entanglement_entropy(const TfdState& state) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(reduced_left(state), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double p : solver.eigenvalues()) {
    if (p > kEigenFloor) s -= p * std::log(p);
  }
  return s;
}

double thermal_fidelity_error(const TfdState& state, const MatrixXc& h_single, double beta) {
  if (h_single.rows() != state.single_dim) {
    throw std::invalid_argument("thermal_fidelity_error: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(h_single);
  const VectorXr& e = solver.eigenvalues();
  const VectorXr w = (-beta * (e.array() - e.minCoeff())).exp();
  const MatrixXc gibbs =
      solver.eigenvectors() * (w / w.sum()).asDiagonal() * solver.eigenvectors().adjoint();
  return (reduced_left(state) - gibbs).norm();
}

double tfd_overlap(const TfdState& a, const TfdState& b) {
  if (a.vector.size() != b.vector.size()) throw std::invalid_argument("tfd_overlap: dimension mismatch");
  return std::abs(a.vector.dot(b.vector));
}

TfdDiagnostics diagnose_tfd(const TfdState& state, const MatrixXc& h_single,
                            const TfdState& dense_reference) {
  TfdDiagnostics d;
  d.sparsity = state.provenance.sparsity;
  d.seed = state.provenance.seed;
  d.s_ent = entanglement_entropy(state);
  d.s_over_smax = d.s_ent / std::log(static_cast<double>(state.single_dim));
  d.thermal_err = thermal_fidelity_error(state, h_single, state.beta);
  d.overlap_with_dense = tfd_overlap(state, dense_reference);
  return d;
}

void write_tfd_csv(std::ostream& os, const std::vector<TfdDiagnostics>& rows) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "p,seed,S_ent,S_over_Smax,thermal_err,overlap_with_dense\n" << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.sparsity << ',' << r.seed << ',' << r.s_ent << ',' << r.s_over_smax << ','
        << r.thermal_err << ',' << r.overlap_with_dense << '\n';
  }
  os << out.str();
}

}  // namespace wormhole
