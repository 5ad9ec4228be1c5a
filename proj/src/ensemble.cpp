#include "wormhole/ensemble.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <Eigen/SVD>

#include "wormhole/krylov.hpp"
#include "wormhole/lindblad.hpp"
#include "wormhole/spectral.hpp"
#include "wormhole/syk.hpp"
#include "wormhole/tfd.hpp"

namespace wormhole {

namespace {

constexpr int kMaxExactMajorana = kMaxDenseQubits;  // doubled chain on N qubits
constexpr int kMaxLindbladMajorana = 8;

struct Task {
  double p;
  std::uint64_t seed;
};

struct TaskOutput {
  std::vector<EnsembleRecord> records;
  std::vector<SweepFailure> failures;
};

void fill_from_trace(EnsembleRecord& r, SignalTrace trace, bool keep) {
  r.peak_height = trace.peak_height;
  r.peak_time = trace.peak_time;
  r.fwhm = trace.fwhm;
  if (keep) r.trace = std::move(trace);
}

TaskOutput run_task(const SweepSpec& spec, const Task& task, const VectorXr& times) {
  TaskOutput out;
  auto fail_all = [&](const std::string& what) {
    for (double mu : spec.mus) {
      for (double g : spec.gammas) out.failures.push_back({{{task.p, mu, g}, task.seed}, what});
    }
  };

  CouplingTensor couplings;
  TfdState tfd;
  EnsembleRecord base;
  base.p = task.p;
  base.seed = task.seed;
  try {
    couplings = sample_couplings(spec.n_majorana, task.p, task.seed);
    const Spectrum single = diagonalize(build_single_side(couplings), SpectrumSource::single_side);
    if (spec.measure_r) base.mean_r = gap_ratio(single).mean;
    tfd = build_tfd(single, spec.beta, {spec.n_majorana, task.p, task.seed});
    if (spec.measure_entropy) base.s_ent = entanglement_entropy(tfd);
  } catch (const std::exception& e) {
    fail_all(e.what());
    return out;
  }

  for (double mu : spec.mus) {
    std::optional<DoubledSystem> sys;
    std::string setup_error;
    try {
      sys = build_doubled(couplings, mu,
                          spec.engine == Engine::krylov ? DenseMode::matrix_free : DenseMode::dense);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    for (double g : spec.gammas) {
      EnsembleRecord r = base;
      r.mu = mu;
      r.gamma = g;
      if (!sys) {
        out.failures.push_back({r.key(), setup_error});
        continue;
      }
      try {
        switch (spec.engine) {
          case Engine::exact:
            fill_from_trace(r, signal_exact(*sys, tfd, times), spec.keep_traces);
            break;
          case Engine::krylov: {
            const MatrixFreeHamiltonian h(*sys);
            const auto sites = spec.sites.empty() ? even_sites(spec.n_majorana) : spec.sites;
            fill_from_trace(r, signal_krylov(h, tfd, sites, times, spec.krylov_dim).trace,
                            spec.keep_traces);
            break;
          }
          case Engine::lindblad:
            fill_from_trace(r, noisy_signal(*sys, tfd, g, times), spec.keep_traces);
            break;
        }
        out.records.push_back(std::move(r));
      } catch (const std::exception& e) {
        out.failures.push_back({r.key(), e.what()});
      }
    }
  }
  return out;
}

template <typename Range>
void require_nonempty(const Range& r, const char* what) {
  if (r.empty()) throw std::invalid_argument(std::string("sweep: empty ") + what + " list");
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::exact: return "exact";
    case Engine::krylov: return "krylov";
    case Engine::lindblad: return "lindblad";
  }
  return "unknown";
}

Engine parse_engine(std::string_view name) {
  if (name == "exact") return Engine::exact;
  if (name == "krylov") return Engine::krylov;
  if (name == "lindblad") return Engine::lindblad;
  throw std::invalid_argument("unknown engine '" + std::string(name) + "'");
}

std::string_view to_string(Observable o) {
  switch (o) {
    case Observable::peak_height: return "peak_height";
    case Observable::peak_time: return "peak_time";
    case Observable::fwhm: return "fwhm";
    case Observable::mean_r: return "mean_r";
    case Observable::s_ent: return "s_ent";
  }
  return "unknown";
}

void SweepSpec::validate() const {
  if (n_majorana < 4 || n_majorana % 2 != 0) throw std::invalid_argument("sweep: N must be even and >= 4");
  if (!(beta >= 0.0)) throw std::invalid_argument("sweep: beta must be non-negative");
  require_nonempty(sparsities, "sparsity");
  require_nonempty(mus, "mu");
  require_nonempty(gammas, "gamma");
  for (double p : sparsities) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("sweep: sparsity must lie in (0, 1]");
  }
  for (double g : gammas) {
    if (!(g >= 0.0)) throw std::invalid_argument("sweep: gamma must be non-negative");
  }
  if (realizations < 1) throw std::invalid_argument("sweep: need at least one realization");
  if (grid.points < 2 || !(grid.t_max > 0.0)) throw std::invalid_argument("sweep: bad time grid");
  if (jobs < 1) throw std::invalid_argument("sweep: jobs must be >= 1");
  for (int j : sites) {
    if (j < 0 || j >= n_majorana) throw std::invalid_argument("sweep: site index out of range");
  }
  switch (engine) {
    case Engine::exact:
    case Engine::krylov:
      if (std::any_of(gammas.begin(), gammas.end(), [](double g) { return g != 0.0; })) {
        throw std::invalid_argument("sweep: nonzero gamma needs the lindblad engine");
      }
      if (engine == Engine::exact && n_majorana > kMaxExactMajorana) {
        throw std::invalid_argument("sweep: exact engine limited to N <= 14");
      }
      if (engine == Engine::krylov && (krylov_dim < 2 || krylov_dim > (Index{1} << n_majorana))) {
        throw std::invalid_argument("sweep: krylov dimension out of range");
      }
      break;
    case Engine::lindblad:
      if (n_majorana > kMaxLindbladMajorana) throw std::invalid_argument("sweep: lindblad engine limited to N <= 8");
      break;
  }
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<Task> tasks;
  for (double p : spec.sparsities) {
    for (int k = 0; k < spec.realizations; ++k) {
      tasks.push_back({p, spec.seed_base + static_cast<std::uint64_t>(k)});
    }
  }
  const VectorXr times = spec.grid.times();
  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      outputs[i] = run_task(spec, tasks[i], times);
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(spec.jobs), tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  SweepResult result;
  for (auto& o : outputs) {
    std::move(o.records.begin(), o.records.end(), std::back_inserter(result.records));
    std::move(o.failures.begin(), o.failures.end(), std::back_inserter(result.failures));
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const auto& a, const auto& b) { return a.key() < b.key(); });
  const auto dup = std::adjacent_find(result.records.begin(), result.records.end(),
                                      [](const auto& a, const auto& b) { return a.key() == b.key(); });
  if (dup != result.records.end()) throw std::logic_error("sweep: duplicate record key");
  std::sort(result.failures.begin(), result.failures.end(),
            [](const auto& a, const auto& b) { return a.key < b.key; });
  return result;
}

AggregateStats summarize(std::span<const double> values, GroupKey key) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  AggregateStats s;
  s.key = key;
  s.count = static_cast<Index>(values.size());
  const Eigen::Map<const VectorXr> v(values.data(), s.count);
  s.mean = v.mean();
  if (s.count > 1) {
    s.std = std::sqrt((v.array() - s.mean).square().sum() / static_cast<double>(s.count - 1));
    s.sem = *s.std / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

std::vector<AggregateStats> aggregate(const std::vector<EnsembleRecord>& records,
                                      Observable observable) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  auto pick = [observable](const EnsembleRecord& r) -> std::optional<double> {
    switch (observable) {
      case Observable::peak_height: return r.peak_height;
      case Observable::peak_time: return r.peak_time;
      case Observable::fwhm: return r.fwhm;
      case Observable::mean_r: return r.mean_r;
      case Observable::s_ent: return r.s_ent;
    }
    return std::nullopt;
  };
  // Sorting by seed inside each group makes the sums independent of the
  // order records arrive in.
  std::map<GroupKey, std::vector<std::pair<std::uint64_t, double>>> groups;
  for (const auto& r : records) {
    if (const auto v = pick(r)) groups[r.key().group].emplace_back(r.seed, *v);
  }
  std::vector<AggregateStats> out;
  for (auto& [key, entries] : groups) {
    std::sort(entries.begin(), entries.end());
    std::vector<double> values;
    for (const auto& e : entries) values.push_back(e.second);
    out.push_back(summarize(values, key));
  }
  return out;
}

double z_score(const AggregateStats& a, const AggregateStats& b) {
  if (!a.sem || !b.sem) throw std::invalid_argument("z_score: standard error undefined");
  const double denom = std::hypot(*a.sem, *b.sem);
  const double diff = std::abs(a.mean - b.mean);
  if (denom == 0.0) {
    if (diff == 0.0) return 0.0;
    throw std::domain_error("z_score: zero standard error with distinct means");
  }
  return diff / denom;
}

std::optional<PairwiseZ> max_pairwise_z(const std::vector<AggregateStats>& stats) {
  std::optional<PairwiseZ> best;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    for (std::size_t j = i + 1; j < stats.size(); ++j) {
      if (!stats[i].sem || !stats[j].sem) continue;
      if (*stats[i].sem == 0.0 && *stats[j].sem == 0.0) continue;
      const double z = z_score(stats[i], stats[j]);
      if (!best || z > best->max_z) best = PairwiseZ{z, i, j};
    }
  }
  return best;
}

double powerlaw_fit(std::span<const double> sparsities, std::span<const double> stds) {
  if (sparsities.size() != stds.size()) throw std::invalid_argument("powerlaw_fit: size mismatch");
  if (sparsities.size() < 3) throw std::invalid_argument("powerlaw_fit: need at least 3 points");
  const auto n = static_cast<Index>(sparsities.size());
  VectorXr x(n), y(n);
  for (Index i = 0; i < n; ++i) {
    const double p = sparsities[static_cast<std::size_t>(i)];
    const double s = stds[static_cast<std::size_t>(i)];
    if (!(p > 0.0) || !(s > 0.0)) throw std::domain_error("powerlaw_fit: inputs must be positive");
    x(i) = std::log(p);
    y(i) = std::log(s);
  }
  const VectorXr xc = x.array() - x.mean();
  const double sxx = xc.squaredNorm();
  if (sxx == 0.0) throw std::domain_error("powerlaw_fit: sparsities must not all coincide");
  return xc.dot(y.array().matrix() - VectorXr::Constant(n, y.mean())) / sxx;
}

double factorization_residual(const MatrixXr& peaks) {
  if (peaks.rows() < 2 || peaks.cols() < 2) {
    throw std::invalid_argument("factorization_residual: need at least a 2 x 2 matrix");
  }
  const Eigen::JacobiSVD<MatrixXr> svd(peaks);
  const VectorXr& s = svd.singularValues();
  if (s(0) == 0.0) throw std::domain_error("factorization_residual: zero matrix");
  return s(1) / s(0);
}

GateEstimate gate_estimate(int n_majorana, double sparsity) {
  if (n_majorana < 4 || n_majorana % 2 != 0) throw std::invalid_argument("gate_estimate: N must be even and >= 4");
  if (!(sparsity > 0.0 && sparsity <= 1.0)) throw std::invalid_argument("gate_estimate: sparsity must lie in (0, 1]");
  GateEstimate g;
  g.n_majorana = n_majorana;
  g.sparsity = sparsity;
  const std::int64_t dense_terms = coupling_count(n_majorana);
  g.terms = std::max<std::int64_t>(1, std::llround(sparsity * static_cast<double>(dense_terms)));
  g.cnots = g.terms * kCnotsPerTerm;
  g.reduction = static_cast<double>(dense_terms * kCnotsPerTerm) / static_cast<double>(g.cnots);
  return g;
}

void write_records_csv(std::ostream& os, const std::vector<EnsembleRecord>& records) {
  std::string out = "p,mu,gamma,seed,peak_height,peak_time,fwhm,mean_r,s_ent\n";
  auto opt = [&out](const std::optional<double>& v) {
    out += ',';
    if (v) out += format_double(*v);
  };
  for (const auto& r : records) {
    out += format_double(r.p) + ',' + format_double(r.mu) + ',' + format_double(r.gamma) + ',' +
           std::to_string(r.seed) + ',' + format_double(r.peak_height) + ',' +
           format_double(r.peak_time);
    opt(r.fwhm);
    opt(r.mean_r);
    opt(r.s_ent);
    out += '\n';
  }
  os << out;
}

Analysis analyze(const SweepSpec& spec, const std::vector<AggregateStats>& peaks) {
  Analysis a;
  a.max_z = max_pairwise_z(peaks);

  std::map<std::pair<double, double>, std::pair<std::vector<double>, std::vector<double>>> by_mg;
  for (const auto& s : peaks) {
    if (s.std && *s.std > 0.0) {
      auto& [ps, sigmas] = by_mg[{s.key.mu, s.key.gamma}];
      ps.push_back(s.key.p);
      sigmas.push_back(*s.std);
    }
  }
  if (by_mg.size() == 1 && by_mg.begin()->second.first.size() >= 3) {
    const auto& [ps, sigmas] = by_mg.begin()->second;
    a.powerlaw_exponent = powerlaw_fit(ps, sigmas);
  }

  std::vector<double> mus = spec.mus, gammas = spec.gammas;
  std::sort(mus.begin(), mus.end());
  std::sort(gammas.begin(), gammas.end());
  if (mus.size() >= 2 && gammas.size() >= 2) {
    const double p0 = *std::min_element(spec.sparsities.begin(), spec.sparsities.end());
    MatrixXr grid = MatrixXr::Constant(static_cast<Index>(mus.size()), static_cast<Index>(gammas.size()),
                                       std::nan(""));
    for (const auto& s : peaks) {
      if (s.key.p != p0) continue;
      const auto i = std::lower_bound(mus.begin(), mus.end(), s.key.mu) - mus.begin();
      const auto j = std::lower_bound(gammas.begin(), gammas.end(), s.key.gamma) - gammas.begin();
      grid(i, j) = s.mean;
    }
    if (!grid.array().isNaN().any() && grid.norm() > 0.0) a.factorization_residual = factorization_residual(grid);
  }

  for (double p : spec.sparsities) a.gate_estimates.push_back(gate_estimate(spec.n_majorana, p));
  return a;
}

std::string group_label(const GroupKey& key) {
  return "p=" + format_double(key.p) + ",mu=" + format_double(key.mu) + ",gamma=" +
         format_double(key.gamma);
}

nlohmann::json summary_json(const std::vector<AggregateStats>& stats, const Analysis& analysis,
                            std::size_t failures) {
  using nlohmann::json;
  json groups = json::object();
  for (const auto& s : stats) {
    json g = {{"p", s.key.p}, {"mu", s.key.mu}, {"gamma", s.key.gamma}, {"mean", s.mean}, {"count", s.count}};
    g["std"] = s.std ? json(*s.std) : json(nullptr);
    g["sem"] = s.sem ? json(*s.sem) : json(nullptr);
    groups[group_label(s.key)] = std::move(g);
  }
  json an = json::object();
  an["powerlaw_exponent"] = analysis.powerlaw_exponent ? json(*analysis.powerlaw_exponent) : json(nullptr);
  an["factorization_residual"] =
      analysis.factorization_residual ? json(*analysis.factorization_residual) : json(nullptr);
  if (analysis.max_z) {
    an["z_scores"] = {{"max", analysis.max_z->max_z},
                      {"between", {group_label(stats.at(analysis.max_z->first).key),
                                   group_label(stats.at(analysis.max_z->second).key)}}};
  } else {
    an["z_scores"] = nullptr;
  }
  json gates = json::array();
  for (const auto& g : analysis.gate_estimates) {
    gates.push_back({{"n_majorana", g.n_majorana}, {"sparsity", g.sparsity}, {"terms", g.terms},
                     {"cnots", g.cnots}, {"reduction", g.reduction}});
  }
  an["gate_estimates"] = std::move(gates);
  return {{"groups", std::move(groups)}, {"analysis", std::move(an)}, {"failed_realizations", failures}};
}

}  // namespace wormhole
