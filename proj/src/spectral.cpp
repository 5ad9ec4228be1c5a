#include "wormhole/spectral.hpp"

#include <bit>
#include <cstdint>

namespace wormhole {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kParityTol = 1e-10;

int qubits_for(Index dim) {
  if (dim <= 0 || !std::has_single_bit(static_cast<std::uint64_t>(dim))) {
    throw std::invalid_argument("dimension must be a power of two");
  }
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

}  // namespace

Spectrum diagonalize(const MatrixXc& h, SpectrumSource source, bool with_vectors) {
  if (h.rows() != h.cols()) throw std::invalid_argument("diagonalize: matrix not square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * scale) {
    throw std::domain_error("diagonalize: matrix is not Hermitian");
  }
  const auto options = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  Spectrum s;
  // Real symmetric input goes through the real solver: half the work and
  // real eigenvectors.
  if (h.imag().cwiseAbs().maxCoeff() <= kHermitianTol * scale) {
    Eigen::SelfAdjointEigenSolver<MatrixXr> solver(h.real(), options);
    if (solver.info() != Eigen::Success) throw std::runtime_error("diagonalize: solver failed");
    s.eigenvalues = solver.eigenvalues();
    if (with_vectors) s.eigenvectors = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXc> solver(h, options);
    if (solver.info() != Eigen::Success) throw std::runtime_error("diagonalize: solver failed");
    s.eigenvalues = solver.eigenvalues();
    if (with_vectors) s.eigenvectors = solver.eigenvectors();
  }
  s.source = source;
  return s;
}

MatrixXc parity_operator(int n_qubits) {
  const Index d = Index{1} << n_qubits;
  VectorXc diag(d);
  for (Index a = 0; a < d; ++a) {
    diag(a) = (std::popcount(static_cast<std::uint64_t>(a)) & 1) ? -1.0 : 1.0;
  }
  return diag.asDiagonal();
}

std::vector<Index> parity_indices(int n_qubits, ParitySector sector) {
  if (sector == ParitySector::none) throw std::invalid_argument("parity_indices: no sector");
  const int want = sector == ParitySector::even ? 0 : 1;
  std::vector<Index> idx;
  const Index d = Index{1} << n_qubits;
  idx.reserve(static_cast<std::size_t>(d / 2));
  for (Index a = 0; a < d; ++a) {
    if ((std::popcount(static_cast<std::uint64_t>(a)) & 1) == want) idx.push_back(a);
  }
  return idx;
}

MatrixXc parity_project(const MatrixXc& h, ParitySector sector) {
  if (sector == ParitySector::none) throw std::invalid_argument("parity_project: no sector");
  const int n = qubits_for(h.rows());
  const auto even = parity_indices(n, ParitySector::even);
  const auto odd = parity_indices(n, ParitySector::odd);
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (h(even, odd).cwiseAbs().maxCoeff() > kParityTol * scale ||
      h(odd, even).cwiseAbs().maxCoeff() > kParityTol * scale) {
    throw std::domain_error("parity_project: Hamiltonian does not conserve parity");
  }
  const auto& keep = sector == ParitySector::even ? even : odd;
  return h(keep, keep);
}

ChaosClass classify(double mean_r, SymmetryClass declared) {
  if (!(mean_r >= 0.0 && mean_r <= 1.0)) throw std::out_of_range("classify: <r> outside [0,1]");
  double chaotic = 0.55;
  ChaosClass label = ChaosClass::gue;
  switch (declared) {
    case SymmetryClass::unitary: break;
    case SymmetryClass::orthogonal:
      chaotic = 0.52;
      label = ChaosClass::goe;
      break;
    case SymmetryClass::symplectic:
      chaotic = 0.62;
      label = ChaosClass::gse;
      break;
  }
  if (mean_r >= chaotic) return label;
  if (mean_r >= 0.40) return ChaosClass::transitional;
  if (mean_r >= kGapRatioPoisson) return ChaosClass::poisson_like;
  return ChaosClass::sub_poisson;
}

std::string_view to_string(ChaosClass c) {
  switch (c) {
    case ChaosClass::gue: return "GUE";
    case ChaosClass::goe: return "GOE";
    case ChaosClass::gse: return "GSE";
    case ChaosClass::transitional: return "transitional";
    case ChaosClass::poisson_like: return "Poisson-like";
    case ChaosClass::sub_poisson: return "sub-Poisson";
  }
  return "unknown";
}

}  // namespace wormhole
