#include "wormhole/pauli.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace wormhole {

namespace {

constexpr Complex kPowersOfI[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};

std::uint64_t full_mask(int n) {
  return n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
}

void check_qubits(int n) {
  if (n < 0 || n > PauliString::kMaxQubits) {
    throw std::invalid_argument("PauliString: qubit count out of range");
  }
}

}  // namespace

PauliString::PauliString(int n_qubits) : n_qubits_(n_qubits) { check_qubits(n_qubits); }

PauliString::PauliString(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask,
                         int phase_exponent)
    : n_qubits_(n_qubits), x_mask_(x_mask), z_mask_(z_mask), phase_(phase_exponent & 3) {
  check_qubits(n_qubits);
  if ((x_mask | z_mask) & ~full_mask(n_qubits)) {
    throw std::invalid_argument("PauliString: mask has bits beyond n_qubits");
  }
}

PauliString PauliString::from_letters(const std::string& letters) {
  const int n = static_cast<int>(letters.size());
  check_qubits(n);
  std::uint64_t x = 0, z = 0;
  for (int q = 0; q < n; ++q) {
    const std::uint64_t b = std::uint64_t{1} << (n - 1 - q);
    switch (letters[q]) {
      case 'I': break;
      case 'X': x |= b; break;
      case 'Z': z |= b; break;
      case 'Y': x |= b; z |= b; break;
      default: throw std::invalid_argument("PauliString: unknown letter");
    }
  }
  // Y = i X Z, so each Y contributes one factor of i to the canonical phase.
  return PauliString(n, x, z, std::popcount(x & z));
}

Complex PauliString::phase() const { return kPowersOfI[phase_]; }

Complex PauliString::letter_phase() const { return kPowersOfI[letter_phase_exponent()]; }

char PauliString::letter(int qubit) const {
  if (qubit < 0 || qubit >= n_qubits_) throw std::out_of_range("PauliString: qubit index");
  const bool xb = x(qubit), zb = z(qubit);
  if (xb && zb) return 'Y';
  if (xb) return 'X';
  if (zb) return 'Z';
  return 'I';
}

std::string PauliString::letters() const {
  std::string s(static_cast<std::size_t>(n_qubits_), 'I');
  for (int q = 0; q < n_qubits_; ++q) s[static_cast<std::size_t>(q)] = letter(q);
  return s;
}

bool PauliString::commutes_with(const PauliString& other) const {
  const int overlap =
      std::popcount(x_mask_ & other.z_mask_) + std::popcount(z_mask_ & other.x_mask_);
  return (overlap & 1) == 0;
}

PauliString PauliString::adjoint() const {
  // (i^k X^x Z^z)^dagger = i^-k Z^z X^x = i^-k (-1)^{|x&z|} X^x Z^z
  const int k = (-phase_ + 2 * std::popcount(x_mask_ & z_mask_)) & 3;
  return PauliString(n_qubits_, x_mask_, z_mask_, k);
}

PauliString multiply(const PauliString& a, const PauliString& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw std::invalid_argument("multiply: mismatched qubit counts");
  }
  // Moving Z^{z_a} past X^{x_b} costs (-1)^{|z_a & x_b|}.
  const int k = a.phase_exponent() + b.phase_exponent() +
                2 * std::popcount(a.z_mask() & b.x_mask());
  return PauliString(a.n_qubits(), a.x_mask() ^ b.x_mask(), a.z_mask() ^ b.z_mask(), k);
}

PauliString jw_majorana(int j, int n_qubits) {
  check_qubits(n_qubits);
  if (j < 0 || j >= 2 * n_qubits) {
    throw std::out_of_range("jw_majorana: index out of range");
  }
  const int site = j / 2;
  const int bit = n_qubits - 1 - site;
  // Z on every qubit before `site`: bits above `bit`.
  const std::uint64_t z_string = full_mask(n_qubits) & ~full_mask(bit + 1);
  const std::uint64_t here = std::uint64_t{1} << bit;
  if (j % 2 == 0) return PauliString(n_qubits, here, z_string, 0);
  return PauliString(n_qubits, here, z_string | here, 1);
}

OperatorSum& OperatorSum::add(Complex coefficient, const PauliString& string) {
  if (string.n_qubits() != n_qubits_) {
    throw std::invalid_argument("OperatorSum: mismatched qubit counts");
  }
  const Complex c = coefficient * string.letter_phase();
  const PauliString canonical = string.with_phase_exponent(
      std::popcount(string.x_mask() & string.z_mask()));
  const std::pair key{canonical.x_mask(), canonical.z_mask()};
  auto it = index_.find(key);
  if (it == index_.end()) {
    if (c != Complex{0.0, 0.0}) {
      index_.emplace(key, terms_.size());
      terms_.push_back({c, canonical});
    }
    return *this;
  }
  const std::size_t pos = it->second;
  terms_[pos].coefficient += c;
  if (terms_[pos].coefficient == Complex{0.0, 0.0}) {
    // swap-remove, then repoint the moved term's index
    index_.erase(it);
    if (pos + 1 != terms_.size()) {
      terms_[pos] = terms_.back();
      index_[{terms_[pos].string.x_mask(), terms_[pos].string.z_mask()}] = pos;
    }
    terms_.pop_back();
  }
  return *this;
}

OperatorSum& OperatorSum::operator+=(const OperatorSum& other) {
  for (const auto& t : other.terms()) add(t.coefficient, t.string);
  return *this;
}

OperatorSum OperatorSum::adjoint() const {
  OperatorSum out(n_qubits_);
  for (const auto& t : terms_) out.add(std::conj(t.coefficient), t.string.adjoint());
  return out;
}

bool OperatorSum::is_hermitian(double tol) const {
  return std::all_of(terms_.begin(), terms_.end(), [tol](const Term& t) {
    return std::abs(t.coefficient.imag()) <= tol;
  });
}

OperatorSum operator*(const OperatorSum& a, const OperatorSum& b) {
  OperatorSum out(a.n_qubits());
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      out.add(ta.coefficient * tb.coefficient, multiply(ta.string, tb.string));
    }
  }
  return out;
}

namespace {

void check_dense(int n_qubits) {
  if (n_qubits > kMaxDenseQubits) {
    throw std::length_error("to_dense: dimension exceeds dense storage limit");
  }
}

void accumulate(MatrixXc& m, Complex coefficient, const PauliString& p) {
  const Complex c = coefficient * p.phase();
  const std::uint64_t x = p.x_mask();
  for (Index a = 0; a < m.cols(); ++a) {
    const auto basis = static_cast<std::uint64_t>(a);
    m(static_cast<Index>(basis ^ x), a) += c * p.sign_on(basis);
  }
}

}  // namespace

MatrixXc to_dense(const PauliString& p) {
  check_dense(p.n_qubits());
  const Index d = Index{1} << p.n_qubits();
  MatrixXc m = MatrixXc::Zero(d, d);
  accumulate(m, 1.0, p);
  return m;
}

MatrixXc to_dense(const OperatorSum& op) {
  check_dense(op.n_qubits());
  const Index d = Index{1} << op.n_qubits();
  MatrixXc m = MatrixXc::Zero(d, d);
  for (const auto& t : op.terms()) accumulate(m, t.coefficient, t.string);
  return m;
}

}  // namespace wormhole
