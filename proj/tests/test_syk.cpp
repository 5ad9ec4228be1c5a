#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "wormhole/spectral.hpp"
#include "wormhole/syk.hpp"

using namespace wormhole;

TEST_CASE("dense tensor at N = 10") {
  const CouplingTensor c = sample_couplings(10, 1.0, 3);
  CHECK(coupling_count(10) == 210);
  CHECK(c.size() == 210);
  CHECK(c.variance_target == doctest::Approx(0.006).epsilon(1e-12));
  CHECK(coupling_variance(10, 0.1) == doctest::Approx(0.06).epsilon(1e-12));
  for (const auto& e : c.entries) {
    CHECK(e.index[0] < e.index[1]);
    CHECK(e.index[1] < e.index[2]);
    CHECK(e.index[2] < e.index[3]);
  }
  CHECK(std::is_sorted(c.entries.begin(), c.entries.end(),
                       [](const Coupling& a, const Coupling& b) { return a.index < b.index; }));
}

TEST_CASE("sampling is deterministic and sparsity is a nested mask") {
  const CouplingTensor a = sample_couplings(10, 0.3, 42);
  const CouplingTensor b = sample_couplings(10, 0.3, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.entries[k].index == b.entries[k].index);
    CHECK(a.entries[k].value == b.entries[k].value);
  }
  const CouplingTensor dense = sample_couplings(10, 0.6, 42);
  for (const auto& e : a.entries) {
    const auto it = std::find_if(dense.entries.begin(), dense.entries.end(),
                                 [&](const Coupling& d) { return d.index == e.index; });
    REQUIRE(it != dense.entries.end());
    CHECK(e.value == doctest::Approx(it->value * std::sqrt(0.6 / 0.3)).epsilon(1e-14));
  }
}

TEST_CASE("ensemble second moment and retention fraction") {
  const int n = 8;
  const double p = 0.4;
  const int tensors = 2000;
  double sum2 = 0.0;
  std::size_t kept = 0;
  for (int s = 0; s < tensors; ++s) {
    const CouplingTensor c = sample_couplings(n, p, static_cast<std::uint64_t>(s));
    kept += c.size();
    for (const auto& e : c.entries) sum2 += e.value * e.value;
  }
  const double var = sum2 / static_cast<double>(kept);
  CHECK(std::abs(var / coupling_variance(n, p) - 1.0) < 0.05);

  const double trials = static_cast<double>(tensors) * 70.0;
  const double sigma = std::sqrt(trials * p * (1.0 - p));
  CHECK(std::abs(static_cast<double>(kept) - p * trials) < 3.0 * sigma);
}

TEST_CASE("invalid sampling parameters") {
  CHECK_THROWS_AS(sample_couplings(9, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_couplings(2, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_couplings(10, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_couplings(10, 1.5, 0), std::invalid_argument);
}

TEST_CASE("single coupling at N = 4 gives J/24 Z1 Z2") {
  CouplingTensor c;
  c.n_majorana = 4;
  const double j = 1.7;
  c.entries.push_back({{0, 1, 2, 3}, j});
  const MatrixXc h = build_single_side(c);
  CHECK(oracle::max_abs(h - (j / 24.0) * oracle::kron_string("ZZ")) <= 1e-15);

  // Same thing straight from the Kronecker Majoranas.
  const MatrixXc ref = -(j / 24.0) * oracle::majorana(0, 2) * oracle::majorana(1, 2) *
                       oracle::majorana(2, 2) * oracle::majorana(3, 2);
  CHECK(oracle::max_abs(h - ref) <= 1e-15);

  const VectorXr e = diagonalize(h).eigenvalues;
  CHECK(e(0) == doctest::Approx(-j / 24.0));
  CHECK(e(1) == doctest::Approx(-j / 24.0));
  CHECK(e(2) == doctest::Approx(j / 24.0));
  CHECK(e(3) == doctest::Approx(j / 24.0));
}

TEST_CASE("empty tensor gives the zero matrix") {
  CouplingTensor c;
  c.n_majorana = 6;
  const MatrixXc h = build_single_side(c);
  CHECK(h.rows() == 8);
  CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single side at N = 10 is Hermitian and matches a Kronecker oracle") {
  const CouplingTensor c = sample_couplings(10, 1.0, 5);
  const MatrixXc h = build_single_side(c);
  CHECK(h.rows() == 32);
  CHECK(oracle::max_abs(h - h.adjoint()) <= 1e-14);

  MatrixXc ref = MatrixXc::Zero(32, 32);
  for (const auto& e : c.entries) {
    ref -= (e.value / 24.0) * oracle::majorana(e.index[0], 5) * oracle::majorana(e.index[1], 5) *
           oracle::majorana(e.index[2], 5) * oracle::majorana(e.index[3], 5);
  }
  CHECK(oracle::max_abs(h - ref) <= 1e-14);
}

TEST_CASE("doubled system structure") {
  const CouplingTensor c = sample_couplings(6, 1.0, 9);
  const double mu = 0.3;
  const DoubledSystem sys = build_doubled(c, mu);
  REQUIRE(sys.h_full);
  const MatrixXc& h = *sys.h_full;
  CHECK(h.rows() == 64);
  CHECK(oracle::max_abs(h - h.adjoint()) == 0.0);

  // Right copy built symbolically on the doubled chain equals I (x) h.
  const MatrixXc hs = build_single_side(c);
  const MatrixXc id = MatrixXc::Identity(8, 8);
  const MatrixXc h_l = to_dense(syk_operator(c, 0, 6));
  const MatrixXc h_r = to_dense(syk_operator(c, 6, 6));
  CHECK(oracle::max_abs(h_l - oracle::kron(hs, id)) <= 1e-15);
  CHECK(oracle::max_abs(h_r - oracle::kron(id, hs)) <= 1e-15);
  CHECK((h_l * h_r - h_r * h_l).norm() <= 1e-12);

  MatrixXc h_int = MatrixXc::Zero(64, 64);
  for (int j = 0; j < 6; ++j) {
    h_int += Complex(0.0, mu) * oracle::majorana(j, 6) * oracle::majorana(6 + j, 6);
  }
  CHECK(oracle::max_abs(h - (h_l + h_r + h_int)) <= 1e-14);
  CHECK(oracle::max_abs(h_int - h_int.adjoint()) <= 1e-15);

  for (int j = 0; j < 6; ++j) {
    CHECK(oracle::max_abs(to_dense(sys.majorana_left[j]) - oracle::majorana(j, 6)) == 0.0);
    CHECK(oracle::max_abs(to_dense(sys.majorana_right[j]) - oracle::majorana(6 + j, 6)) == 0.0);
  }
}

TEST_CASE("uncoupled doubled spectrum is the set of pairwise sums") {
  const CouplingTensor c = sample_couplings(6, 1.0, 4);
  const DoubledSystem sys = build_doubled(c, 0.0);
  const VectorXr e = diagonalize(sys.h_single).eigenvalues;
  std::vector<double> sums;
  for (Index a = 0; a < e.size(); ++a) {
    for (Index b = 0; b < e.size(); ++b) sums.push_back(e(a) + e(b));
  }
  std::sort(sums.begin(), sums.end());
  const VectorXr full = diagonalize(*sys.h_full, SpectrumSource::doubled, false).eigenvalues;
  for (std::size_t k = 0; k < sums.size(); ++k) CHECK(full(static_cast<Index>(k)) == doctest::Approx(sums[k]).epsilon(1e-12));
}

TEST_CASE("coupling alone at N = 4 has a symmetric spectrum") {
  CouplingTensor c;
  c.n_majorana = 4;
  const DoubledSystem sys = build_doubled(c, 0.1);
  CHECK(sys.dim() == 16);
  const VectorXr e = diagonalize(*sys.h_full, SpectrumSource::doubled, false).eigenvalues;
  for (Index k = 0; k < e.size(); ++k) CHECK(e(k) == doctest::Approx(-e(e.size() - 1 - k)).epsilon(1e-12));
}

TEST_CASE("coupling term does not depend on sparsity") {
  const DoubledSystem a = build_doubled(sample_couplings(6, 1.0, 2), 0.2);
  const DoubledSystem b = build_doubled(sample_couplings(6, 0.1, 2), 0.2);
  const MatrixXc id = MatrixXc::Identity(8, 8);
  auto strip = [&](const DoubledSystem& s) {
    return (*s.h_full - oracle::kron(s.h_single, id) - oracle::kron(id, s.h_single)).eval();
  };
  CHECK(oracle::max_abs(strip(a) - strip(b)) <= 1e-15);
  CHECK(to_dense(interaction_operator(6, 0.2)) == to_dense(interaction_operator(6, 0.2)));
}

TEST_CASE("doubled dimension at N = 10 and the dense limit") {
  const DoubledSystem sys = build_doubled(sample_couplings(10, 0.2, 1), 0.1);
  CHECK(sys.dim() == 1024);
  CHECK(sys.h_full->rows() == 1024);
  const DoubledSystem mf = build_doubled(sample_couplings(16, 0.01, 1), 0.1, DenseMode::matrix_free);
  CHECK_FALSE(mf.h_full);
  CHECK(mf.single_dim() == 256);
  CHECK_THROWS_AS(build_doubled(sample_couplings(16, 0.01, 1), 0.1), std::length_error);
}

TEST_CASE("coupling dump round trip") {
  const CouplingTensor c = sample_couplings(8, 0.5, 77);
  std::stringstream ss;
  write_couplings(ss, c);
  const std::string text = ss.str();
  CHECK(text.rfind("# n_majorana 8", 0) == 0);
  const CouplingTensor back = read_couplings(ss);
  CHECK(back.n_majorana == 8);
  CHECK(back.sparsity == c.sparsity);
  CHECK(back.seed == 77);
  CHECK(back.variance_target == c.variance_target);
  REQUIRE(back.size() == c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    CHECK(back.entries[k].index == c.entries[k].index);
    CHECK(back.entries[k].value == c.entries[k].value);
  }
  std::stringstream again;
  write_couplings(again, back);
  CHECK(again.str() == text);
}
