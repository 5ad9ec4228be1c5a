#ifndef WORMHOLE_SPECTRAL_HPP_
#define WORMHOLE_SPECTRAL_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "wormhole/types.hpp"

namespace wormhole {

enum class SpectrumSource { single_side, doubled };
enum class ParitySector { none, even, odd };

struct Spectrum {
  VectorXr eigenvalues;                  // ascending
  std::optional<MatrixXc> eigenvectors;  // columns aligned with eigenvalues
  SpectrumSource source = SpectrumSource::single_side;
  ParitySector sector = ParitySector::none;
};

/// Full Hermitian eigendecomposition. Throws std::domain_error if h deviates
/// from Hermitian by more than 1e-12 (relative to its largest entry).
Spectrum diagonalize(const MatrixXc& h, SpectrumSource source = SpectrumSource::single_side,
                     bool with_vectors = true);

struct GapRatio {
  double mean = 0.0;
  std::size_t ratios = 0;           // number of r_n that entered the mean
  std::size_t distinct_levels = 0;  // after collapsing exact degeneracies
  bool degenerate = false;          // flagged: fewer than 3 distinct levels
};

/// Relative width below which neighbouring levels count as one level.
inline constexpr double kDegeneracyTolerance = 1e-9;

/// Mean adjacent gap ratio <min(s_n, s_{n+1}) / max(s_n, s_{n+1})>.
///
/// Exactly degenerate levels (within kDegeneracyTolerance of the spectral
/// width) are merged first: a symmetry-enforced doublet is one level, not a
/// zero spacing. If fewer than three distinct levels remain the spectrum is
/// perfectly clustered and the result is r = 0 with `degenerate` set.
template <typename Derived>
GapRatio gap_ratio(const Eigen::DenseBase<Derived>& levels,
                   double degeneracy_tol = kDegeneracyTolerance) {
  if (levels.size() < 3) throw std::invalid_argument("gap_ratio: need at least 3 levels");
  std::vector<double> e(static_cast<std::size_t>(levels.size()));
  for (Index n = 0; n < levels.size(); ++n) e[static_cast<std::size_t>(n)] = levels.derived().coeff(n);
  std::sort(e.begin(), e.end());
  const double width = e.back() - e.front();
  const double scale = std::max({width, std::abs(e.front()), std::abs(e.back())});
  const double tol = degeneracy_tol * (scale > 0.0 ? scale : 1.0);

  std::vector<double> distinct{e.front()};
  for (std::size_t n = 1; n < e.size(); ++n) {
    if (e[n] - distinct.back() > tol) distinct.push_back(e[n]);
  }
  GapRatio out;
  out.distinct_levels = distinct.size();
  if (distinct.size() < 3) {
    out.degenerate = true;
    return out;
  }
  double sum = 0.0;
  for (std::size_t n = 0; n + 2 < distinct.size(); ++n) {
    const double s0 = distinct[n + 1] - distinct[n];
    const double s1 = distinct[n + 2] - distinct[n + 1];
    sum += std::min(s0, s1) / std::max(s0, s1);
  }
  out.ratios = distinct.size() - 2;
  out.mean = sum / static_cast<double>(out.ratios);
  return out;
}

inline GapRatio gap_ratio(const Spectrum& s) { return gap_ratio(s.eigenvalues); }

/// Dense fermion parity Z x Z x ... x Z on n_qubits.
MatrixXc parity_operator(int n_qubits);

/// Basis indices belonging to a parity sector (even: even popcount).
std::vector<Index> parity_indices(int n_qubits, ParitySector sector);

/// Restricts h to one eigenspace of the parity operator. Throws
/// std::domain_error if h mixes the sectors beyond 1e-10.
MatrixXc parity_project(const MatrixXc& h, ParitySector sector);

enum class ChaosClass { gue, goe, gse, transitional, poisson_like, sub_poisson };
enum class SymmetryClass { unitary, orthogonal, symplectic };

/// Reference <r> values for the random-matrix ensembles.
inline constexpr double kGapRatioGue = 0.603;
inline constexpr double kGapRatioGoe = 0.536;
inline constexpr double kGapRatioGse = 0.676;
inline constexpr double kGapRatioPoisson = 0.386;

/// Labels a mean gap ratio. GOE/GSE labels only appear when the caller
/// declares that symmetry class.
ChaosClass classify(double mean_r, SymmetryClass declared = SymmetryClass::unitary);

std::string_view to_string(ChaosClass c);

}  // namespace wormhole

#endif  // WORMHOLE_SPECTRAL_HPP_
