#ifndef WORMHOLE_PAULI_HPP_
#define WORMHOLE_PAULI_HPP_

#include <bit>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "wormhole/types.hpp"

namespace wormhole {

/// A Pauli string i^phase * X^x * Z^z on n qubits.
///
/// Qubit 0 is the slowest-varying Kronecker factor, so it maps to the most
/// significant bit of a computational basis index. The masks are stored in
/// basis-index bit order: qubit q lives at bit (n_qubits - 1 - q). With that
/// layout a string acts on |a> as  i^phase (-1)^popcount(z & a) |a ^ x>.
class PauliString {
 public:
  static constexpr int kMaxQubits = 64;

  PauliString() = default;
  explicit PauliString(int n_qubits);
  PauliString(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask,
              int phase_exponent = 0);

  /// Builds a string from letters such as "ZXIY" (qubit 0 first), with a
  /// Hermitian phase of +1.
  static PauliString from_letters(const std::string& letters);

  int n_qubits() const { return n_qubits_; }
  std::uint64_t x_mask() const { return x_mask_; }
  std::uint64_t z_mask() const { return z_mask_; }

  /// Exponent k of the internal canonical phase i^k, k in {0,1,2,3}.
  int phase_exponent() const { return phase_; }

  /// Phase relative to the letter form (I/X/Y/Z per qubit), as an exponent
  /// of i. Zero means the string is exactly its letter product.
  int letter_phase_exponent() const {
    return (phase_ - std::popcount(x_mask_ & z_mask_)) & 3;
  }
  Complex letter_phase() const;

  char letter(int qubit) const;
  std::string letters() const;

  bool x(int qubit) const { return (x_mask_ >> bit(qubit)) & 1u; }
  bool z(int qubit) const { return (z_mask_ >> bit(qubit)) & 1u; }

  bool is_identity_masks() const { return x_mask_ == 0 && z_mask_ == 0; }
  bool is_hermitian() const { return (letter_phase_exponent() & 1) == 0; }
  bool commutes_with(const PauliString& other) const;

  /// Sign picked up by basis state |a> (before the global phase).
  double sign_on(std::uint64_t basis) const {
    return (std::popcount(z_mask_ & basis) & 1) ? -1.0 : 1.0;
  }
  Complex phase() const;

  PauliString adjoint() const;
  PauliString with_phase_exponent(int k) const {
    return PauliString(n_qubits_, x_mask_, z_mask_, k);
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  int bit(int qubit) const { return n_qubits_ - 1 - qubit; }

  int n_qubits_ = 0;
  std::uint64_t x_mask_ = 0;
  std::uint64_t z_mask_ = 0;
  int phase_ = 0;
};

/// Exact product a*b including phase.
PauliString multiply(const PauliString& a, const PauliString& b);
inline PauliString operator*(const PauliString& a, const PauliString& b) {
  return multiply(a, b);
}

/// Jordan-Wigner Majorana with 0-based index j on a chain of n_qubits.
/// Even j gives (Z...Z) X on qubit j/2, odd j gives (Z...Z) Y.
PauliString jw_majorana(int j, int n_qubits);

/// Weighted sum of Pauli strings.
///
/// Each stored string carries letter phase +1; the coefficient absorbs the
/// rest, so an OperatorSum is Hermitian exactly when all its coefficients
/// are real.
class OperatorSum {
 public:
  struct Term {
    Complex coefficient;
    PauliString string;
  };

  explicit OperatorSum(int n_qubits) : n_qubits_(n_qubits) {}

  int n_qubits() const { return n_qubits_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Adds coefficient * string, merging with an existing term on equal masks
  /// and dropping the result if it cancels to zero.
  OperatorSum& add(Complex coefficient, const PauliString& string);
  OperatorSum& operator+=(const OperatorSum& other);

  OperatorSum adjoint() const;
  bool is_hermitian(double tol = 0.0) const;

 private:
  struct MaskHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
      return std::hash<std::uint64_t>{}(k.first * 0x9E3779B97F4A7C15ull ^ k.second);
    }
  };

  int n_qubits_;
  std::vector<Term> terms_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::size_t, MaskHash> index_;
};

OperatorSum operator*(const OperatorSum& a, const OperatorSum& b);

/// Applies a Pauli string to a basis-indexed vector: out = P * in.
template <typename InDerived, typename OutDerived>
void apply_pauli(const PauliString& p, const Eigen::MatrixBase<InDerived>& in,
                 Eigen::MatrixBase<OutDerived> const& out_) {
  auto& out = const_cast<Eigen::MatrixBase<OutDerived>&>(out_);
  const Complex ph = p.phase();
  const std::uint64_t x = p.x_mask();
  for (Index a = 0; a < in.rows(); ++a) {
    const auto basis = static_cast<std::uint64_t>(a);
    out.row(static_cast<Index>(basis ^ x)) = (ph * p.sign_on(basis)) * in.row(a);
  }
}

template <typename Derived>
MatrixXc apply_pauli(const PauliString& p, const Eigen::MatrixBase<Derived>& in) {
  MatrixXc out(in.rows(), in.cols());
  apply_pauli(p, in, out);
  return out;
}

MatrixXc to_dense(const PauliString& p);
MatrixXc to_dense(const OperatorSum& op);

}  // namespace wormhole

#endif  // WORMHOLE_PAULI_HPP_
