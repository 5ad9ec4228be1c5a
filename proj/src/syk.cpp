#include "wormhole/syk.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace wormhole {

namespace {

void check_majorana_count(int n) {
  if (n < 4 || n % 2 != 0) {
    throw std::invalid_argument("SYK: N must be even and at least 4");
  }
  if (n / 2 > PauliString::kMaxQubits / 2) {
    throw std::invalid_argument("SYK: N too large");
  }
}

}  // namespace

std::int64_t coupling_count(int n) {
  if (n < 4) return 0;
  const std::int64_t m = n;
  return m * (m - 1) * (m - 2) * (m - 3) / 24;
}

double coupling_variance(int n_majorana, double sparsity) {
  const double n = n_majorana;
  return 6.0 / (sparsity * n * n * n);
}

CouplingTensor sample_couplings(int n_majorana, double sparsity, std::uint64_t seed) {
  check_majorana_count(n_majorana);
  if (!(sparsity > 0.0 && sparsity <= 1.0)) {
    throw std::invalid_argument("sample_couplings: sparsity must lie in (0, 1]");
  }
  CouplingTensor c;
  c.n_majorana = n_majorana;
  c.sparsity = sparsity;
  c.seed = seed;
  c.variance_target = coupling_variance(n_majorana, sparsity);
  const double sigma = std::sqrt(c.variance_target);

  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = n_majorana;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          const double u = uniform(engine);
          const double g = normal(engine);
          if (u < sparsity) c.entries.push_back({{i, j, k, l}, sigma * g});
        }
  return c;
}

OperatorSum syk_operator(const CouplingTensor& c, int majorana_offset, int n_qubits) {
  std::vector<PauliString> psi;
  psi.reserve(static_cast<std::size_t>(c.n_majorana));
  for (int j = 0; j < c.n_majorana; ++j) psi.push_back(jw_majorana(j + majorana_offset, n_qubits));

  OperatorSum h(n_qubits);
  for (const auto& e : c.entries) {
    const auto& [i, j, k, l] = e.index;
    const PauliString product = psi[i] * psi[j] * psi[k] * psi[l];
    h.add(-e.value / 24.0, product);
  }
  return h;
}

OperatorSum syk_operator(const CouplingTensor& c) {
  check_majorana_count(c.n_majorana);
  return syk_operator(c, 0, c.n_majorana / 2);
}

MatrixXc build_single_side(const CouplingTensor& c) { return to_dense(syk_operator(c)); }

OperatorSum interaction_operator(int n_majorana, double mu) {
  check_majorana_count(n_majorana);
  const int n_qubits = n_majorana;
  OperatorSum h(n_qubits);
  for (int j = 0; j < n_majorana; ++j) {
    const PauliString pair = jw_majorana(j, n_qubits) * jw_majorana(n_majorana + j, n_qubits);
    h.add(Complex{0.0, mu}, pair);
  }
  return h;
}

DoubledSystem build_doubled(const CouplingTensor& c, double mu, DenseMode mode) {
  check_majorana_count(c.n_majorana);
  const int n = c.n_majorana;
  DoubledSystem sys;
  sys.n_majorana = n;
  sys.mu = mu;
  sys.h_single = build_single_side(c);
  for (int j = 0; j < n; ++j) {
    sys.majorana_left.push_back(jw_majorana(j, n));
    sys.majorana_right.push_back(jw_majorana(n + j, n));
  }
  if (mode == DenseMode::matrix_free) return sys;
  if (n > kMaxDenseQubits) {
    throw std::length_error("build_doubled: dense doubled Hamiltonian infeasible; use matrix_free");
  }

  // The right copy carries the left parity string, which cancels in every
  // four-Majorana product, so H_R = I (x) h on the chain.
  const Index ds = sys.single_dim();
  const MatrixXc id = MatrixXc::Identity(ds, ds);
  MatrixXc h = to_dense(interaction_operator(n, mu));
  h += Eigen::kroneckerProduct(sys.h_single, id);
  h += Eigen::kroneckerProduct(id, sys.h_single);
  sys.h_full = (0.5 * (h + h.adjoint())).eval();
  return sys;
}

void write_couplings(std::ostream& os, const CouplingTensor& c) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "# n_majorana " << c.n_majorana << '\n'
      << std::setprecision(17) << "# sparsity " << c.sparsity << '\n'
      << "# seed " << c.seed << '\n'
      << "# variance_target " << c.variance_target << '\n';
  for (const auto& e : c.entries) {
    out << e.index[0] << ' ' << e.index[1] << ' ' << e.index[2] << ' ' << e.index[3] << ' '
        << e.value << '\n';
  }
  os << out.str();
}

CouplingTensor read_couplings(std::istream& is) {
  CouplingTensor c;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "n_majorana") ls >> c.n_majorana;
      else if (key == "sparsity") ls >> c.sparsity;
      else if (key == "seed") ls >> c.seed;
      else if (key == "variance_target") ls >> c.variance_target;
      continue;
    }
    Coupling e{};
    if (!(ls >> e.index[0] >> e.index[1] >> e.index[2] >> e.index[3] >> e.value)) {
      throw std::runtime_error("read_couplings: malformed line: " + line);
    }
    c.entries.push_back(e);
  }
  return c;
}

}  // namespace wormhole
