#ifndef WORMHOLE_ENSEMBLE_HPP_
#define WORMHOLE_ENSEMBLE_HPP_

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wormhole/transmission.hpp"
#include "wormhole/types.hpp"

namespace wormhole {

enum class Engine { exact, krylov, lindblad };

std::string_view to_string(Engine e);
Engine parse_engine(std::string_view name);

struct TimeGrid {
  double t_max = 30.0;
  Index points = 120;

  VectorXr times() const { return uniform_grid(t_max, points); }
  bool operator==(const TimeGrid&) const = default;
};

struct SweepSpec {
  int n_majorana = 10;
  double beta = 8.0;
  std::vector<double> sparsities{1.0};
  std::vector<double> mus{0.1};
  std::vector<double> gammas{0.0};
  int realizations = 1;
  std::uint64_t seed_base = 0;
  TimeGrid grid;
  Engine engine = Engine::exact;
  Index krylov_dim = 60;
  std::vector<int> sites;  // empty: every site (exact, lindblad) or even sites (krylov)
  bool measure_r = true;
  bool measure_entropy = true;
  bool keep_traces = false;
  int jobs = 1;

  /// Throws std::invalid_argument on empty lists, out-of-range values or
  /// an engine that cannot handle n_majorana.
  void validate() const;

  bool operator==(const SweepSpec&) const = default;
};

struct GroupKey {
  double p = 1.0;
  double mu = 0.0;
  double gamma = 0.0;

  auto operator<=>(const GroupKey&) const = default;
};

struct RecordKey {
  GroupKey group;
  std::uint64_t seed = 0;

  auto operator<=>(const RecordKey&) const = default;
};

struct EnsembleRecord {
  double p = 1.0;
  double mu = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  double peak_height = 0.0;
  double peak_time = 0.0;
  std::optional<double> fwhm;
  std::optional<double> mean_r;
  std::optional<double> s_ent;
  std::optional<SignalTrace> trace;  // only with keep_traces

  RecordKey key() const { return {{p, mu, gamma}, seed}; }
};

struct SweepFailure {
  RecordKey key;
  std::string message;
};

struct SweepResult {
  std::vector<EnsembleRecord> records;  // sorted by (p, mu, gamma, seed)
  std::vector<SweepFailure> failures;   // sorted by key
};

/// Runs every (p, mu, gamma, seed) tuple on a pool of spec.jobs threads.
/// The single-side Hamiltonian and TFD of each (p, seed) are shared by all
/// of its (mu, gamma) tuples. A failing tuple is reported in `failures`
/// and contributes no record.
SweepResult run_sweep(const SweepSpec& spec);

enum class Observable { peak_height, peak_time, fwhm, mean_r, s_ent };

std::string_view to_string(Observable o);

struct AggregateStats {
  GroupKey key;
  double mean = 0.0;
  std::optional<double> std;  // undefined for a single sample
  std::optional<double> sem;
  Index count = 0;
};

/// Sample mean, n-1 standard deviation and standard error of `values`.
AggregateStats summarize(std::span<const double> values, GroupKey key = {});

/// One entry per group key in ascending order; records lacking the
/// observable are skipped, groups left empty are omitted.
std::vector<AggregateStats> aggregate(const std::vector<EnsembleRecord>& records,
                                      Observable observable = Observable::peak_height);

/// |mean_a - mean_b| / sqrt(sem_a^2 + sem_b^2).
double z_score(const AggregateStats& a, const AggregateStats& b);

struct PairwiseZ {
  double max_z = 0.0;
  std::size_t first = 0;
  std::size_t second = 0;
};

/// Largest z-score over all pairs; groups without a SEM are ignored.
std::optional<PairwiseZ> max_pairwise_z(const std::vector<AggregateStats>& stats);

/// Least-squares slope of log sigma against log p.
double powerlaw_fit(std::span<const double> sparsities, std::span<const double> stds);

/// sigma_2 / sigma_1 of a matrix of mean peaks (rows mu, columns gamma).
double factorization_residual(const MatrixXr& peaks);

/// Two-qubit gates charged to one retained four-Majorana term per Trotter
/// step; 210 dense terms at N = 10 give 1260.
inline constexpr int kCnotsPerTerm = 6;

struct GateEstimate {
  int n_majorana = 0;
  double sparsity = 1.0;
  std::int64_t terms = 0;  // round(p C(N,4)), at least 1
  std::int64_t cnots = 0;
  double reduction = 1.0;  // dense cnots / sparse cnots
};

GateEstimate gate_estimate(int n_majorana, double sparsity);

/// CSV with header p,mu,gamma,seed,peak_height,peak_time,fwhm,mean_r,s_ent
/// and empty fields for unmeasured observables.
void write_records_csv(std::ostream& os, const std::vector<EnsembleRecord>& records);

struct Analysis {
  std::optional<double> powerlaw_exponent;
  std::optional<double> factorization_residual;
  std::optional<PairwiseZ> max_z;
  std::vector<GateEstimate> gate_estimates;
};

/// Derived analyses that the sweep supports: the power law needs three or
/// more sparsities at one (mu, gamma), the factorization residual a full
/// mu x gamma grid of at least 2 x 2 at one sparsity.
Analysis analyze(const SweepSpec& spec, const std::vector<AggregateStats>& peaks);

nlohmann::json summary_json(const std::vector<AggregateStats>& stats, const Analysis& analysis,
                            std::size_t failures = 0);

std::string group_label(const GroupKey& key);

/// Shortest text that reads back to the same double, locale-free.
std::string format_double(double v);

}  // namespace wormhole

#endif  // WORMHOLE_ENSEMBLE_HPP_
