#include <doctest.h>

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.hpp"
#include "wormhole/spectral.hpp"
#include "wormhole/syk.hpp"
#include "wormhole/tfd.hpp"
#include "wormhole/transmission.hpp"

using namespace wormhole;

namespace {

struct Setup {
  DoubledSystem sys;
  TfdState tfd;
};

Setup setup(int n, double p, std::uint64_t seed, double mu, double beta = 8.0) {
  const CouplingTensor c = sample_couplings(n, p, seed);
  DoubledSystem sys = build_doubled(c, mu);
  TfdState tfd = build_tfd(diagonalize(sys.h_single), beta, {n, p, seed});
  return {std::move(sys), std::move(tfd)};
}

VectorXc values_of(const VectorXr& t, double (*f)(double)) {
  VectorXc v(t.size());
  for (Index k = 0; k < t.size(); ++k) v(k) = f(t(k));
  return v;
}

}  // namespace

TEST_CASE("peak extraction") {
  const VectorXr t = uniform_grid(30.0, 121);
  CHECK(t(0) == 0.0);
  CHECK(t(120) == 30.0);

  const Peak flat = extract_peak(t, VectorXc::Constant(121, Complex(0.3, 0.4)));
  CHECK(flat.time == 0.0);
  CHECK(flat.height == doctest::Approx(0.5));

  const VectorXc gauss = values_of(t, [](double x) { return std::exp(-(x - 7.0) * (x - 7.0)); });
  CHECK(extract_peak(t, gauss).time == doctest::Approx(7.0));
  const VectorXr t2 = uniform_grid(30.0, 120);
  const Peak p2 = extract_peak(t2, values_of(t2, [](double x) { return std::exp(-(x - 7.0) * (x - 7.0)); }));
  CHECK(std::abs(p2.time - 7.0) <= 0.5 * (t2(1) - t2(0)));

  CHECK_THROWS_AS(extract_peak(VectorXr(), VectorXc()), std::invalid_argument);
}

TEST_CASE("full width at half maximum") {
  const VectorXr t = uniform_grid(10.0, 1001);
  const auto tri = fwhm(t, values_of(t, [](double x) { return std::max(0.0, 1.0 - std::abs(x - 5.0)); }));
  REQUIRE(tri);
  CHECK(*tri == doctest::Approx(1.0).epsilon(1e-2));
  CHECK_FALSE(fwhm(t, VectorXc::Ones(t.size())));

  const SignalTrace tr = make_trace(t, values_of(t, [](double x) { return std::exp(-x); }));
  CHECK(tr.peak_time == 0.0);
  CHECK_FALSE(tr.fwhm);
}

TEST_CASE("exact signal matches dense matrix exponentials at N = 6") {
  const Setup s = setup(6, 1.0, 12, 0.1);
  const VectorXr times = uniform_grid(30.0, 40);
  const SignalTrace tr = signal_exact(s.sys, s.tfd, times);
  const MatrixXc& h = *s.sys.h_full;
  for (Index k = 0; k < times.size(); ++k) {
    const MatrixXc u = (Complex(0.0, -times(k)) * h).exp();
    const VectorXc phi = u * s.tfd.vector;
    Complex c{0.0, 0.0};
    for (int j = 0; j < 6; ++j) {
      const VectorXc chi = u * (oracle::majorana(j, 6) * s.tfd.vector);
      c += phi.dot(oracle::majorana(6 + j, 6) * chi);
    }
    c /= 6.0;
    CHECK(std::abs(tr.values(k) - c) <= 1e-8);
  }
}

TEST_CASE("t = 0 value is the direct expectation at N = 8") {
  const Setup s = setup(8, 0.5, 3, 0.1);
  const SignalTrace tr = signal_exact(s.sys, s.tfd, uniform_grid(30.0, 80));
  Complex c0{0.0, 0.0};
  for (int j = 0; j < 8; ++j) {
    c0 += s.tfd.vector.dot(oracle::majorana(8 + j, 8) * (oracle::majorana(j, 8) * s.tfd.vector));
  }
  c0 /= 8.0;
  CHECK(std::abs(tr.values(0) - c0) <= 1e-10);
  CHECK(tr.values.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  CHECK(tr.peak_height == doctest::Approx(tr.values.cwiseAbs().maxCoeff()));
}

TEST_CASE("vanishing coupling produces no transfer peak") {
  // With mu -> 0 the TFD still evolves under H_L + H_R, so |C| is not flat;
  // what vanishes is the mu-driven revival.
  const VectorXr times = uniform_grid(30.0, 80);
  const Setup tiny = setup(8, 1.0, 6, 1e-6);
  const Setup zero = setup(8, 1.0, 6, 0.0);
  const Setup coupled = setup(8, 1.0, 6, 0.1);
  const SignalTrace a = signal_exact(tiny.sys, tiny.tfd, times);
  const SignalTrace b = signal_exact(zero.sys, zero.tfd, times);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(a.peak_height < 0.25 * signal_exact(coupled.sys, coupled.tfd, times).peak_height);
}

TEST_CASE("peak is insensitive to doubling the grid resolution") {
  const Setup s = setup(8, 1.0, 2, 0.1);
  const Spectrum doubled = diagonalize(*s.sys.h_full, SpectrumSource::doubled);
  const double coarse = signal_exact(s.sys, doubled, s.tfd, uniform_grid(30.0, 80)).peak_height;
  const double fine = signal_exact(s.sys, doubled, s.tfd, uniform_grid(30.0, 159)).peak_height;
  CHECK(std::abs(coarse - fine) < 1e-3);
}

TEST_CASE("trace CSV layout") {
  const VectorXr t = uniform_grid(1.0, 3);
  VectorXc v(3);
  v << Complex(1, 0), Complex(0, 0.5), Complex(0.3, -0.4);
  std::ostringstream os;
  write_trace_csv(os, make_trace(t, v));
  CHECK(os.str() == "t,re_C,im_C,abs_C\n0,1,0,1\n0.5,0,0.5,0.5\n1,0.3,-0.4,0.5\n");
}
