#include "wormhole/transmission.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wormhole {

VectorXr uniform_grid(double t_max, Index points) {
  if (points < 1) throw std::invalid_argument("uniform_grid: need at least one point");
  if (points == 1) return VectorXr::Zero(1);
  return VectorXr::LinSpaced(points, 0.0, t_max);
}

Peak extract_peak(const VectorXr& times, const VectorXc& values) {
  if (values.size() == 0 || values.size() != times.size()) {
    throw std::invalid_argument("extract_peak: empty or inconsistent trace");
  }
  Peak p;
  p.height = std::abs(values(0));
  for (Index k = 1; k < values.size(); ++k) {
    const double a = std::abs(values(k));
    if (a > p.height) {
      p.height = a;
      p.index = k;
    }
  }
  p.time = times(p.index);
  return p;
}

Peak extract_peak(const SignalTrace& trace) { return extract_peak(trace.times, trace.values); }

std::optional<double> fwhm(const VectorXr& times, const VectorXc& values) {
  const Peak p = extract_peak(times, values);
  const double half = 0.5 * p.height;
  const VectorXr a = values.cwiseAbs();

  // Time where |C| crosses `half` between samples i (above) and k (below).
  auto crossing = [&](Index i, Index k) {
    return times(i) + (times(k) - times(i)) * (a(i) - half) / (a(i) - a(k));
  };

  std::optional<double> left, right;
  for (Index k = p.index - 1; k >= 0; --k) {
    if (a(k) < half) {
      left = crossing(k + 1, k);
      break;
    }
  }
  for (Index k = p.index + 1; k < a.size(); ++k) {
    if (a(k) < half) {
      right = crossing(k - 1, k);
      break;
    }
  }
  if (!left || !right) return std::nullopt;
  return *right - *left;
}

std::optional<double> fwhm(const SignalTrace& trace) { return fwhm(trace.times, trace.values); }

SignalTrace make_trace(VectorXr times, VectorXc values) {
  SignalTrace t;
  t.times = std::move(times);
  t.values = std::move(values);
  const Peak p = extract_peak(t.times, t.values);
  t.peak_height = p.height;
  t.peak_time = p.time;
  t.fwhm = fwhm(t.times, t.values);
  return t;
}

SignalTrace signal_exact(const DoubledSystem& sys, const TfdState& tfd, const VectorXr& times) {
  if (!sys.h_full) throw std::invalid_argument("signal_exact: dense doubled Hamiltonian required");
  return signal_exact(sys, diagonalize(*sys.h_full, SpectrumSource::doubled), tfd, times);
}

SignalTrace signal_exact(const DoubledSystem& sys, const Spectrum& doubled,
                         const TfdState& tfd, const VectorXr& times) {
  if (!doubled.eigenvectors) throw std::invalid_argument("signal_exact: eigenvectors required");
  const MatrixXc& v = *doubled.eigenvectors;
  const VectorXr& e = doubled.eigenvalues;
  const Index d = e.size();
  if (tfd.vector.size() != d || sys.dim() != d) {
    throw std::invalid_argument("signal_exact: dimension mismatch");
  }

  // phases(m, t) = exp(-i E_m t)
  const MatrixXr et = e * times.transpose();
  MatrixXc phases(d, times.size());
  phases.real() = et.array().cos().matrix();
  phases.imag() = -et.array().sin().matrix();

  // C_j(t) = <TFD| e^{iHt} psi_j^R e^{-iHt} psi_j^L |TFD>. Columns of `bra`
  // are e^{-iHt}|TFD>, columns of `ket` are e^{-iHt} psi_j^L |TFD>.
  const VectorXc w = v.adjoint() * tfd.vector;
  const MatrixXc bra = v * (phases.array().colwise() * w.array()).matrix();

  VectorXc c = VectorXc::Zero(times.size());
  MatrixXc inserted(d, times.size());
  for (int j = 0; j < sys.n_majorana; ++j) {
    const VectorXc x = v.adjoint() * apply_pauli(sys.majorana_left[j], tfd.vector);
    const MatrixXc ket = v * (phases.array().colwise() * x.array()).matrix();
    apply_pauli(sys.majorana_right[j], ket, inserted);
    c += (bra.array().conjugate() * inserted.array()).colwise().sum().transpose().matrix();
  }
  c /= static_cast<double>(sys.n_majorana);
  return make_trace(times, std::move(c));
}

void write_trace_csv(std::ostream& os, const SignalTrace& trace) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "t,re_C,im_C,abs_C\n" << std::setprecision(15);
  for (Index k = 0; k < trace.times.size(); ++k) {
    const Complex c = trace.values(k);
    out << trace.times(k) << ',' << c.real() << ',' << c.imag() << ',' << std::abs(c) << '\n';
  }
  os << out.str();
}

}  // namespace wormhole
