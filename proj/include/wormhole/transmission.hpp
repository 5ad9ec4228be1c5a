#ifndef WORMHOLE_TRANSMISSION_HPP_
#define WORMHOLE_TRANSMISSION_HPP_

#include <iosfwd>
#include <optional>

#include "wormhole/spectral.hpp"
#include "wormhole/syk.hpp"
#include "wormhole/tfd.hpp"
#include "wormhole/types.hpp"

namespace wormhole {

/// `points` uniformly spaced samples on [0, t_max], both ends included.
VectorXr uniform_grid(double t_max, Index points);

struct Peak {
  double height = 0.0;
  double time = 0.0;
  Index index = 0;
};

/// Sampled transmission signal C(t) with its derived observables.
struct SignalTrace {
  VectorXr times;
  VectorXc values;
  double peak_height = 0.0;
  double peak_time = 0.0;
  std::optional<double> fwhm;
};

/// argmax |C| over the grid, ties going to the earliest sample.
Peak extract_peak(const VectorXr& times, const VectorXc& values);
Peak extract_peak(const SignalTrace& trace);

/// Full width at half maximum around the peak with linear interpolation of
/// each half-height crossing; nullopt when either side never drops below
/// half height on the grid.
std::optional<double> fwhm(const VectorXr& times, const VectorXc& values);
std::optional<double> fwhm(const SignalTrace& trace);

/// Packs samples into a trace and fills in peak and FWHM.
SignalTrace make_trace(VectorXr times, VectorXc values);

/// Exact transmission signal averaged over all N Majorana sites, evaluated
/// in the eigenbasis of the dense doubled Hamiltonian.
SignalTrace signal_exact(const DoubledSystem& sys, const TfdState& tfd, const VectorXr& times);

/// Same, reusing a precomputed decomposition of sys.h_full.
SignalTrace signal_exact(const DoubledSystem& sys, const Spectrum& doubled,
                         const TfdState& tfd, const VectorXr& times);

/// CSV with columns t,re_C,im_C,abs_C.
void write_trace_csv(std::ostream& os, const SignalTrace& trace);

}  // namespace wormhole

#endif  // WORMHOLE_TRANSMISSION_HPP_
