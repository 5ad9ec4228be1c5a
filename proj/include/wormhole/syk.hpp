#ifndef WORMHOLE_SYK_HPP_
#define WORMHOLE_SYK_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "wormhole/pauli.hpp"
#include "wormhole/types.hpp"

namespace wormhole {

struct Coupling {
  std::array<int, 4> index;  // strictly increasing i < j < k < l
  double value;
};

/// Sparse q=4 coupling tensor. Entries are kept in lexicographic order of
/// their index tuples.
struct CouplingTensor {
  int n_majorana = 0;
  double sparsity = 1.0;
  std::uint64_t seed = 0;
  double variance_target = 0.0;
  std::vector<Coupling> entries;

  std::size_t size() const { return entries.size(); }
};

/// Number of candidate couplings, C(n, 4).
std::int64_t coupling_count(int n_majorana);

/// Retained-coupling variance 6 J^2 / (p N^3) with J = 1.
double coupling_variance(int n_majorana, double sparsity);

/// Samples a sparse SYK tensor.
///
/// Candidates are visited in lexicographic order; each one draws a uniform
/// retention variate and then a standard normal, whether or not it is kept.
/// The same seed therefore yields the same underlying draw at every
/// sparsity, with sparsity acting as a nested mask plus a 1/sqrt(p) rescale.
CouplingTensor sample_couplings(int n_majorana, double sparsity, std::uint64_t seed);

/// -(1/4!) sum J_ijkl psi_i psi_j psi_k psi_l over N/2 qubits.
OperatorSum syk_operator(const CouplingTensor& c);

/// Same sum with Majorana index j mapped to chain index j + offset on a
/// chain of n_qubits (used to place the right copy on the doubled chain).
OperatorSum syk_operator(const CouplingTensor& c, int majorana_offset, int n_qubits);

/// Dense single-side Hamiltonian of dimension 2^{N/2}.
MatrixXc build_single_side(const CouplingTensor& c);

/// i mu sum_j psi_j^L psi_j^R on the N-qubit doubled chain.
OperatorSum interaction_operator(int n_majorana, double mu);

enum class DenseMode { dense, matrix_free };

struct DoubledSystem {
  int n_majorana = 0;
  double mu = 0.0;
  MatrixXc h_single;  // shared by the left and right copies
  std::vector<PauliString> majorana_left;   // on N qubits
  std::vector<PauliString> majorana_right;  // on N qubits
  std::optional<MatrixXc> h_full;

  int n_qubits() const { return n_majorana; }
  Index single_dim() const { return h_single.rows(); }
  Index dim() const { return single_dim() * single_dim(); }
  const MatrixXc& h_left() const { return h_single; }
  const MatrixXc& h_right() const { return h_single; }
};

/// Assembles H = H_L + H_R + H_int. Left Majoranas live on qubits
/// [0, N/2), right Majoranas on [N/2, N) of one Jordan-Wigner chain. In
/// dense mode h_full is formed and symmetrized as (H + H^dagger)/2.
DoubledSystem build_doubled(const CouplingTensor& c, double mu,
                            DenseMode mode = DenseMode::dense);

/// Deterministic text dump: a '#'-prefixed header followed by
/// "i j k l value" lines in lexicographic order.
void write_couplings(std::ostream& os, const CouplingTensor& c);
CouplingTensor read_couplings(std::istream& is);

}  // namespace wormhole

#endif  // WORMHOLE_SYK_HPP_
