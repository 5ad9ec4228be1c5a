#include "wormhole/cli.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <CLI11.hpp>

#include "wormhole/lindblad.hpp"
#include "wormhole/syk.hpp"
#include "wormhole/tfd.hpp"

#ifndef WORMHOLE_VERSION
#define WORMHOLE_VERSION "dev"
#endif

namespace wormhole::cli {

const char* const kBuildVersion = WORMHOLE_VERSION;

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::sweep_sparsity, "sweep-sparsity"}, {Command::sweep_mu, "sweep-mu"},
    {Command::noise_grid, "noise-grid"},         {Command::tfd_diagnostics, "tfd-diagnostics"},
    {Command::level_spacing, "level-spacing"},   {Command::krylov_signal, "krylov-signal"},
    {Command::gate_estimate, "gate-estimate"},
};

// Largest single side the diagonalizing commands accept (d_s = 4096).
constexpr int kMaxSingleSideMajorana = 24;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view sector_name(ParitySector s) {
  switch (s) {
    case ParitySector::none: return "full";
    case ParitySector::even: return "even";
    case ParitySector::odd: return "odd";
  }
  return "full";
}

ParitySector parse_sector(std::string_view name) {
  if (name == "full") return ParitySector::none;
  if (name == "even") return ParitySector::even;
  if (name == "odd") return ParitySector::odd;
  throw UsageError("unknown parity sector '" + std::string(name) + "'");
}

bool is_sweep(Command c) {
  return c == Command::sweep_sparsity || c == Command::sweep_mu || c == Command::noise_grid ||
         c == Command::krylov_signal;
}

// Derived fields: never read from files or flags.
void finalize(RunConfig& c) {
  c.sweep.keep_traces = c.emit_traces || c.command == Command::krylov_signal;
  c.sweep.measure_r = true;
  c.sweep.measure_entropy = true;
}

void check_single_side(const SweepSpec& s) {
  if (s.n_majorana < 4 || s.n_majorana % 2 != 0) throw UsageError("N must be even and >= 4");
  if (s.sparsities.empty()) throw UsageError("empty sparsity list");
  for (double p : s.sparsities) {
    if (!(p > 0.0 && p <= 1.0)) throw UsageError("sparsity must lie in (0, 1]");
  }
  if (s.realizations < 1) throw UsageError("need at least one realization");
  if (!(s.beta >= 0.0)) throw UsageError("beta must be non-negative");
}

void validate(const RunConfig& c) {
  if (is_sweep(c.command)) {
    try {
      c.sweep.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (c.command == Command::krylov_signal && c.sweep.engine != Engine::krylov) {
      throw UsageError("krylov-signal runs the krylov engine only");
    }
    if (c.command == Command::noise_grid && c.sweep.engine != Engine::lindblad) {
      throw UsageError("noise-grid runs the lindblad engine only");
    }
    return;
  }
  check_single_side(c.sweep);
  if (c.command != Command::gate_estimate && c.sweep.n_majorana > kMaxSingleSideMajorana) {
    throw UsageError("single-side diagonalization limited to N <= 24");
  }
}

void apply_json(RunConfig& c, const json& j) {
  static const std::set<std::string> known{
      "command", "n_majorana", "beta",   "sparsities", "mus",         "gammas",        "realizations",
      "seed_base", "time_max", "time_points", "engine", "krylov_dim", "sites",   "jobs",
      "output",  "format",     "emit_traces", "emit_plot_data", "sector"};
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw UsageError("unknown config key '" + key + "'");
  }
  try {
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    SweepSpec& s = c.sweep;
    take("n_majorana", s.n_majorana);
    take("beta", s.beta);
    take("sparsities", s.sparsities);
    take("mus", s.mus);
    take("gammas", s.gammas);
    take("realizations", s.realizations);
    take("seed_base", s.seed_base);
    take("time_max", s.grid.t_max);
    take("time_points", s.grid.points);
    take("krylov_dim", s.krylov_dim);
    take("sites", s.sites);
    take("jobs", s.jobs);
    take("emit_traces", c.emit_traces);
    take("emit_plot_data", c.emit_plot_data);
    if (j.contains("engine")) s.engine = parse_engine(j.at("engine").get<std::string>());
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("format")) c.format = parse_format(j.at("format").get<std::string>());
    if (j.contains("sector")) c.sector = parse_sector(j.at("sector").get<std::string>());
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

json physics_json(const RunConfig& c) {
  json j = to_json(c);
  for (const char* k : {"output", "format", "jobs", "emit_traces", "emit_plot_data"}) j.erase(k);
  return j;
}

std::string quoted(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') {
      out += '\\';
      out += ch;
    } else if (ch == '\n') {
      out += "\\n";
    } else {
      out += ch;
    }
  }
  return out + '"';
}

std::string error_line(std::string_view kind, std::string_view message, std::string_view key = {}) {
  std::string out = "error kind=" + std::string(kind);
  if (!key.empty()) out += " key=" + quoted(key);
  return out + " message=" + quoted(message) + "\n";
}

std::string record_key_label(const RecordKey& k) {
  return group_label(k.group) + ",seed=" + std::to_string(k.seed);
}

std::string file_tag(const GroupKey& k) {
  return "p" + format_double(k.p) + "_mu" + format_double(k.mu) + "_g" + format_double(k.gamma);
}

// ---- output ----------------------------------------------------------------

class Writer {
 public:
  explicit Writer(const RunConfig& c) : cfg_(c), manifest_(manifest_line(c)) {
    std::error_code ec;
    fs::create_directories(c.output, ec);
    if (ec) throw IoError("cannot create " + c.output.string() + ": " + ec.message());
  }

  const std::string& manifest() const { return manifest_; }
  bool csv() const { return cfg_.format != OutputFormat::json; }
  bool json_out() const { return cfg_.format != OutputFormat::csv; }

  fs::path text(const fs::path& rel, const std::string& body) {
    return put(rel, manifest_ + "\n" + body);
  }

  fs::path json_file(const fs::path& rel, json body) {
    json doc = {{"manifest", manifest_json()}};
    doc.update(body);
    return put(rel, doc.dump(2) + "\n");
  }

  json manifest_json() const {
    return {{"build_version", kBuildVersion}, {"spec_hash", spec_hash(cfg_)},
            {"seed_base", cfg_.sweep.seed_base}, {"command", to_string(cfg_.command)}};
  }

  void config() {
    json doc = {{"manifest", manifest_json()}, {"config", to_json(cfg_)}};
    put("run_config.json", doc.dump(2) + "\n");
  }

 private:
  fs::path put(const fs::path& rel, const std::string& body) {
    const fs::path path = cfg_.output / rel;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    f << body;
    f.close();
    if (!f) throw IoError("cannot write " + path.string());
    return path;
  }

  const RunConfig& cfg_;
  std::string manifest_;
};

std::string csv_of(void (*write)(std::ostream&, const std::vector<EnsembleRecord>&),
                   const std::vector<EnsembleRecord>& rows) {
  std::ostringstream os;
  write(os, rows);
  return os.str();
}

json stats_json(const AggregateStats& s) {
  return {{"mean", s.mean}, {"std", s.std ? json(*s.std) : json(nullptr)},
          {"sem", s.sem ? json(*s.sem) : json(nullptr)}, {"count", s.count}};
}

std::string pm(const AggregateStats& s) {
  std::ostringstream os;
  os.precision(4);
  os << s.mean;
  if (s.sem) os << " +- " << *s.sem;
  os << " (n=" << s.count << ")";
  return os.str();
}

int report_failures(const std::vector<SweepFailure>& failures, std::ostream& err) {
  for (const auto& f : failures) err << error_line("compute", f.message, record_key_label(f.key));
  return failures.empty() ? 0 : 1;
}

// Per-sparsity mean r, one value per (p, seed).
std::vector<AggregateStats> r_by_sparsity(const std::vector<EnsembleRecord>& records) {
  std::map<double, std::map<std::uint64_t, double>> by_p;
  for (const auto& r : records) {
    if (r.mean_r) by_p[r.p].emplace(r.seed, *r.mean_r);
  }
  std::vector<AggregateStats> out;
  for (const auto& [p, seeds] : by_p) {
    std::vector<double> v;
    for (const auto& [seed, r] : seeds) v.push_back(r);
    out.push_back(summarize(v, {p, 0.0, 0.0}));
  }
  return out;
}

int run_sweep_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Writer w(c);
  w.config();
  const SweepResult res = run_sweep(c.sweep);
  const auto peaks = aggregate(res.records);
  const Analysis analysis = analyze(c.sweep, peaks);

  if (w.csv()) w.text("records.csv", csv_of(write_records_csv, res.records));
  if (w.json_out()) {
    json doc = summary_json(peaks, analysis, res.failures.size());
    json chaos = json::object();
    for (const auto& s : r_by_sparsity(res.records)) {
      json g = stats_json(s);
      g["class"] = to_string(classify(std::clamp(s.mean, 0.0, 1.0)));
      chaos["p=" + format_double(s.key.p)] = std::move(g);
    }
    doc["mean_r"] = std::move(chaos);
    if (c.command == Command::noise_grid) {
      std::map<std::pair<double, double>, std::pair<std::vector<double>, std::vector<double>>> curves;
      for (const auto& s : peaks) {
        auto& [gs, ps] = curves[{s.key.p, s.key.mu}];
        gs.push_back(s.key.gamma);
        ps.push_back(s.mean);
      }
      json crit = json::object();
      for (const auto& [pm_key, curve] : curves) {
        std::optional<double> g;
        if (curve.first.size() >= 2 && curve.first.front() == 0.0) g = critical_gamma(curve.first, curve.second);
        crit["p=" + format_double(pm_key.first) + ",mu=" + format_double(pm_key.second)] =
            g ? json(*g) : json(nullptr);
      }
      doc["critical_gamma"] = std::move(crit);
    }
    w.json_file("summary.json", std::move(doc));
  }
  if (c.sweep.keep_traces) {
    for (const auto& r : res.records) {
      if (!r.trace) continue;
      std::ostringstream os;
      write_trace_csv(os, *r.trace);
      w.text(fs::path("traces") / (file_tag(r.key().group) + "_seed" + std::to_string(r.seed) + ".csv"),
             os.str());
    }
  }
  if (c.emit_plot_data) emit_plot_data(res.records, c.output / "plot", w.manifest(), err);

  for (const auto& s : peaks) out << group_label(s.key) << " peak " << pm(s) << "\n";
  if (analysis.powerlaw_exponent) out << "std ~ p^" << *analysis.powerlaw_exponent << "\n";
  if (analysis.max_z) out << "max pairwise z " << analysis.max_z->max_z << "\n";
  return report_failures(res.failures, err);
}

int run_tfd_diagnostics(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Writer w(c);
  w.config();
  const SweepSpec& s = c.sweep;
  std::vector<TfdDiagnostics> rows;
  std::vector<SweepFailure> failures;
  for (int k = 0; k < s.realizations; ++k) {
    const std::uint64_t seed = s.seed_base + static_cast<std::uint64_t>(k);
    std::optional<TfdState> dense;
    try {
      const MatrixXc h = build_single_side(sample_couplings(s.n_majorana, 1.0, seed));
      dense = build_tfd(diagonalize(h), s.beta, {s.n_majorana, 1.0, seed});
    } catch (const std::exception& e) {
      for (double p : s.sparsities) failures.push_back({{{p, 0.0, 0.0}, seed}, e.what()});
      continue;
    }
    for (double p : s.sparsities) {
      try {
        const MatrixXc h = build_single_side(sample_couplings(s.n_majorana, p, seed));
        const TfdState tfd = build_tfd(diagonalize(h), s.beta, {s.n_majorana, p, seed});
        rows.push_back(diagnose_tfd(tfd, h, *dense));
      } catch (const std::exception& e) {
        failures.push_back({{{p, 0.0, 0.0}, seed}, e.what()});
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const TfdDiagnostics& a, const TfdDiagnostics& b) {
    return std::tie(a.sparsity, a.seed) < std::tie(b.sparsity, b.seed);
  });

  if (w.csv()) {
    std::ostringstream os;
    write_tfd_csv(os, rows);
    w.text("tfd.csv", os.str());
  }
  json groups = json::object();
  for (double p : s.sparsities) {
    std::vector<double> ent, ov;
    double worst = 0.0;
    for (const auto& r : rows) {
      if (r.sparsity != p) continue;
      ent.push_back(r.s_ent);
      ov.push_back(r.overlap_with_dense);
      worst = std::max(worst, r.thermal_err);
    }
    if (ent.empty()) continue;
    const AggregateStats se = summarize(ent, {p, 0.0, 0.0});
    groups["p=" + format_double(p)] = {{"s_ent", stats_json(se)},
                                       {"overlap_with_dense", stats_json(summarize(ov))},
                                       {"max_thermal_err", worst}};
    out << "p=" << format_double(p) << " S_ent " << pm(se) << " max thermal err " << worst << "\n";
  }
  if (w.json_out()) w.json_file("summary.json", {{"groups", groups}, {"failed_realizations", failures.size()}});
  return report_failures(failures, err);
}

int run_level_spacing(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Writer w(c);
  w.config();
  const SweepSpec& s = c.sweep;
  std::string csv = "p,seed,mean_r,distinct_levels,degenerate\n";
  std::vector<AggregateStats> stats;
  std::vector<SweepFailure> failures;
  for (double p : s.sparsities) {
    std::vector<double> rs;
    for (int k = 0; k < s.realizations; ++k) {
      const std::uint64_t seed = s.seed_base + static_cast<std::uint64_t>(k);
      try {
        MatrixXc h = build_single_side(sample_couplings(s.n_majorana, p, seed));
        if (c.sector != ParitySector::none) h = parity_project(h, c.sector);
        const GapRatio g = gap_ratio(diagonalize(h, SpectrumSource::single_side, false));
        rs.push_back(g.mean);
        csv += format_double(p) + ',' + std::to_string(seed) + ',' + format_double(g.mean) + ',' +
               std::to_string(g.distinct_levels) + ',' + (g.degenerate ? "1" : "0") + '\n';
      } catch (const std::exception& e) {
        failures.push_back({{{p, 0.0, 0.0}, seed}, e.what()});
      }
    }
    if (!rs.empty()) stats.push_back(summarize(rs, {p, 0.0, 0.0}));
  }

  if (w.csv()) w.text("level_spacing.csv", csv);
  json groups = json::object();
  for (const auto& st : stats) {
    json g = stats_json(st);
    g["class"] = to_string(classify(st.mean));
    groups["p=" + format_double(st.key.p)] = std::move(g);
    out << "p=" << format_double(st.key.p) << " <r> " << pm(st) << " " << to_string(classify(st.mean)) << "\n";
  }
  if (w.json_out()) {
    w.json_file("summary.json", {{"sector", sector_name(c.sector)}, {"groups", groups},
                                 {"failed_realizations", failures.size()}});
  }
  if (c.emit_plot_data && !stats.empty()) {
    std::string body = "# mean adjacent gap ratio versus sparsity\n# columns: p mean_r sem\n";
    for (const auto& st : stats) {
      body += format_double(st.key.p) + ' ' + format_double(st.mean) + ' ' + format_double(st.sem.value_or(0.0)) + '\n';
    }
    w.text(fs::path("plot") / "r_vs_sparsity.dat", body);
  }
  return report_failures(failures, err);
}

int run_gate_estimate(const RunConfig& c, std::ostream& out) {
  Writer w(c);
  w.config();
  std::string csv = "n_majorana,p,terms,cnots,reduction\n";
  json rows = json::array();
  for (double p : c.sweep.sparsities) {
    const GateEstimate g = gate_estimate(c.sweep.n_majorana, p);
    csv += std::to_string(g.n_majorana) + ',' + format_double(p) + ',' + std::to_string(g.terms) + ',' +
           std::to_string(g.cnots) + ',' + format_double(g.reduction) + '\n';
    rows.push_back({{"n_majorana", g.n_majorana}, {"sparsity", p}, {"terms", g.terms}, {"cnots", g.cnots},
                    {"reduction", g.reduction}});
    out << "N=" << g.n_majorana << " p=" << format_double(p) << " terms=" << g.terms << " cnots=" << g.cnots
        << " reduction=" << format_double(g.reduction) << "x\n";
  }
  if (w.csv()) w.text("gates.csv", csv);
  if (w.json_out()) w.json_file("summary.json", {{"gate_estimates", rows}});
  return 0;
}

// ---- plot data -------------------------------------------------------------

struct Series {
  std::string header;  // "# mu=0.1 gamma=0"
  std::vector<std::array<double, 3>> rows;
};

std::string render(const std::string& manifest, const std::string& title, const std::string& columns,
                   const std::vector<Series>& blocks) {
  std::string body = manifest + "\n# " + title + "\n# columns: " + columns + "\n";
  bool first = true;
  for (const auto& b : blocks) {
    if (!first) body += "\n\n";  // gnuplot-style index separator
    first = false;
    body += b.header + '\n';
    for (const auto& r : b.rows) {
      body += format_double(r[0]) + ' ' + format_double(r[1]) + ' ' + format_double(r[2]) + '\n';
    }
  }
  return body;
}

void put_file(const fs::path& path, const std::string& body, std::vector<fs::path>& written) {
  std::ofstream f(path, std::ios::binary);
  f << body;
  f.close();
  if (!f) throw IoError("cannot write " + path.string());
  written.push_back(path);
}

}  // namespace

// ---- names -----------------------------------------------------------------

std::string_view to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  throw UsageError("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::both: return "both";
  }
  return "both";
}

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  if (name == "both") return OutputFormat::both;
  throw UsageError("unknown format '" + std::string(name) + "'");
}

// ---- configuration ---------------------------------------------------------

RunConfig defaults_for(Command c) {
  RunConfig r;
  r.command = c;
  r.sweep.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::vector<double> nine{1.0, 0.5, 0.3, 0.2, 0.1, 0.07, 0.05, 0.03, 0.02};
  switch (c) {
    case Command::sweep_sparsity:
    case Command::level_spacing:
    case Command::gate_estimate:
      r.sweep.sparsities = nine;
      break;
    case Command::sweep_mu:
      r.sweep.sparsities = {1.0, 0.1, 0.05};
      r.sweep.mus = {0.02, 0.05, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5};
      break;
    case Command::noise_grid:
      r.sweep.n_majorana = 8;
      r.sweep.engine = Engine::lindblad;
      r.sweep.sparsities = {1.0, 0.3, 0.1, 0.05};
      r.sweep.gammas = {0.0, 0.001, 0.003, 0.01, 0.03, 0.1};
      break;
    case Command::tfd_diagnostics:
      r.sweep.sparsities = {1.0, 0.1, 0.02};
      break;
    case Command::krylov_signal:
      r.sweep.engine = Engine::krylov;
      break;
  }
  finalize(r);
  return r;
}

json to_json(const RunConfig& c) {
  const SweepSpec& s = c.sweep;
  return {{"command", to_string(c.command)},
          {"n_majorana", s.n_majorana},
          {"beta", s.beta},
          {"sparsities", s.sparsities},
          {"mus", s.mus},
          {"gammas", s.gammas},
          {"realizations", s.realizations},
          {"seed_base", s.seed_base},
          {"time_max", s.grid.t_max},
          {"time_points", s.grid.points},
          {"engine", to_string(s.engine)},
          {"krylov_dim", s.krylov_dim},
          {"sites", s.sites},
          {"jobs", s.jobs},
          {"output", c.output.string()},
          {"format", to_string(c.format)},
          {"emit_traces", c.emit_traces},
          {"emit_plot_data", c.emit_plot_data},
          {"sector", sector_name(c.sector)}};
}

RunConfig run_config_from_json(const json& doc) {
  const json& j = doc.is_object() && doc.contains("config") ? doc.at("config") : doc;
  if (!j.is_object() || !j.contains("command") || !j.at("command").is_string()) {
    throw UsageError("config: missing command");
  }
  RunConfig c = defaults_for(parse_command(j.at("command").get<std::string>()));
  apply_json(c, j);
  finalize(c);
  return c;
}

std::string spec_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : physics_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::string manifest_line(const RunConfig& c) {
  return "# wormhole " + std::string(kBuildVersion) + " spec_hash=" + spec_hash(c) +
         " seed_base=" + std::to_string(c.sweep.seed_base) + " command=" + std::string(to_string(c.command));
}

RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Sparse SYK wormhole-transmission numerics", "wormhole"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  const std::map<Command, const char*> about{
      {Command::sweep_sparsity, "Transmission peak and <r> across sparsities"},
      {Command::sweep_mu, "Transmission peak across inter-system couplings"},
      {Command::noise_grid, "Dephasing scan with the Lindblad engine"},
      {Command::tfd_diagnostics, "Thermality, entropy and dense overlap of the TFD"},
      {Command::level_spacing, "Adjacent gap ratio of the single-side spectrum"},
      {Command::krylov_signal, "Matrix-free Krylov transmission traces"},
      {Command::gate_estimate, "Two-qubit gate count per Trotter step"},
  };
  for (const auto& [cmd, name] : kCommands) app.add_subcommand(std::string(name), about.at(cmd))->fallthrough();

  std::string config_path, engine, output, format, sector;
  int n = 0, realizations = 0, jobs = 0;
  double beta = 0.0, t_max = 0.0;
  Index points = 0, krylov_dim = 0;
  std::uint64_t seed_base = 0;
  std::vector<double> mus, sparsities, gammas;
  std::vector<int> sites;
  bool traces = false, no_plot = false;

  auto* o_config = app.add_option("--config", config_path, "JSON run configuration; flags override it")
                       ->check(CLI::ExistingFile);
  auto* o_n = app.add_option("--n-majorana,-N", n, "Majoranas per side (even)");
  auto* o_beta = app.add_option("--beta", beta, "Inverse temperature of the TFD");
  auto* o_mu = app.add_option("--mu", mus, "Inter-system coupling (repeatable)");
  auto* o_p = app.add_option("--sparsity,-p", sparsities, "Coupling retention probability (repeatable)");
  auto* o_g = app.add_option("--gamma", gammas, "Dephasing rate (repeatable)");
  auto* o_real = app.add_option("--realizations,-r", realizations, "Disorder realizations per point");
  auto* o_seed = app.add_option("--seed-base", seed_base, "First seed; realization k uses seed_base + k");
  auto* o_tmax = app.add_option("--time-max", t_max, "End of the time grid");
  auto* o_pts = app.add_option("--time-points", points, "Points on [0, time-max]");
  auto* o_kd = app.add_option("--krylov-dim", krylov_dim, "Krylov subspace dimension");
  auto* o_eng = app.add_option("--engine", engine, "exact | krylov | lindblad")
                    ->check(CLI::IsMember({"exact", "krylov", "lindblad"}));
  auto* o_sites = app.add_option("--sites", sites, "Majorana sites averaged over, comma separated")->delimiter(',');
  auto* o_out = app.add_option("--output,-o", output, "Output directory");
  auto* o_fmt = app.add_option("--format", format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));
  auto* o_jobs = app.add_option("--jobs,-j", jobs, "Worker threads (default: all cores)");
  auto* o_sector = app.add_option("--sector", sector, "level-spacing: full | even | odd")
                       ->check(CLI::IsMember({"full", "even", "odd"}));
  auto* o_traces = app.add_flag("--traces", traces, "Write every C(t) trace");
  auto* o_noplot = app.add_flag("--no-plot-data", no_plot, "Skip the plot data files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const Command cmd = parse_command(app.get_subcommands().front()->get_name());
  RunConfig c = defaults_for(cmd);
  if (*o_config) {
    std::ifstream f(config_path);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw UsageError("config: " + std::string(e.what()));
    }
    json& body = j.is_object() && j.contains("config") ? j["config"] : j;
    if (body.is_object()) body.erase("command");  // the subcommand on the line wins
    apply_json(c, body);
  }

  SweepSpec& s = c.sweep;
  if (*o_n) s.n_majorana = n;
  if (*o_beta) s.beta = beta;
  if (*o_mu) s.mus = mus;
  if (*o_p) s.sparsities = sparsities;
  if (*o_g) s.gammas = gammas;
  if (*o_real) s.realizations = realizations;
  if (*o_seed) s.seed_base = seed_base;
  if (*o_tmax) s.grid.t_max = t_max;
  if (*o_pts) s.grid.points = points;
  if (*o_kd) s.krylov_dim = krylov_dim;
  if (*o_eng) s.engine = parse_engine(engine);
  if (*o_sites) s.sites = sites;
  if (*o_jobs) s.jobs = jobs;
  if (*o_out) c.output = output;
  if (*o_fmt) c.format = parse_format(format);
  if (*o_sector) c.sector = parse_sector(sector);
  if (*o_traces) c.emit_traces = traces;
  if (*o_noplot) c.emit_plot_data = !no_plot;
  finalize(c);
  validate(c);
  return c;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  validate(c);
  switch (c.command) {
    case Command::sweep_sparsity:
    case Command::sweep_mu:
    case Command::noise_grid:
    case Command::krylov_signal:
      return run_sweep_command(c, out, err);
    case Command::tfd_diagnostics:
      return run_tfd_diagnostics(c, out, err);
    case Command::level_spacing:
      return run_level_spacing(c, out, err);
    case Command::gate_estimate:
      return run_gate_estimate(c, out);
  }
  return 1;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const UsageError& e) {
    err << error_line("usage", e.what());
    return 2;
  }
  try {
    return run(c, out, err);
  } catch (const UsageError& e) {
    err << error_line("usage", e.what());
    return 2;
  } catch (const IoError& e) {
    err << error_line("io", e.what());
    return 1;
  } catch (const std::exception& e) {
    err << error_line("compute", e.what());
    return 1;
  }
}

std::vector<fs::path> emit_plot_data(const std::vector<EnsembleRecord>& records, const fs::path& dir,
                                     const std::string& manifest, std::ostream& warn) {
  if (records.empty()) {
    warn << "warning: no records, plot data skipped\n";
    return {};
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const auto peaks = aggregate(records);
  std::set<double> ps, mus, gammas;
  for (const auto& s : peaks) {
    ps.insert(s.key.p);
    mus.insert(s.key.mu);
    gammas.insert(s.key.gamma);
  }
  auto row = [](double x, const AggregateStats& s) { return std::array<double, 3>{x, s.mean, s.sem.value_or(0.0)}; };

  std::vector<fs::path> written;
  {
    std::map<std::pair<double, double>, Series> blocks;
    for (const auto& s : peaks) {
      Series& b = blocks[{s.key.mu, s.key.gamma}];
      b.header = "# mu=" + format_double(s.key.mu) + " gamma=" + format_double(s.key.gamma);
      b.rows.push_back(row(s.key.p, s));
    }
    std::vector<Series> v;
    for (auto& [k, b] : blocks) v.push_back(std::move(b));
    put_file(dir / "signal_vs_sparsity.dat",
             render(manifest, "transmission peak |C(t*)| versus sparsity", "p peak_mean peak_sem", v), written);
  }
  if (const auto rs = r_by_sparsity(records); !rs.empty()) {
    Series b{"# all couplings", {}};
    for (const auto& s : rs) b.rows.push_back(row(s.key.p, s));
    put_file(dir / "r_vs_sparsity.dat",
             render(manifest, "mean adjacent gap ratio versus sparsity", "p mean_r sem", {b}), written);
  }
  {
    std::string body = manifest + "\n# raw transmission peaks, one line per realization\n"
                                  "# columns: p mu gamma seed peak\n";
    for (const auto& r : records) {
      body += format_double(r.p) + ' ' + format_double(r.mu) + ' ' + format_double(r.gamma) + ' ' +
              std::to_string(r.seed) + ' ' + format_double(r.peak_height) + '\n';
    }
    put_file(dir / "peaks_by_sparsity.dat", body, written);
  }
  for (double p : ps) {
    const std::string tag = "p" + format_double(p);
    if (mus.size() > 1) {
      std::map<double, Series> blocks;
      for (const auto& s : peaks) {
        if (s.key.p != p) continue;
        Series& b = blocks[s.key.gamma];
        b.header = "# gamma=" + format_double(s.key.gamma);
        b.rows.push_back(row(s.key.mu, s));
      }
      std::vector<Series> v;
      for (auto& [k, b] : blocks) v.push_back(std::move(b));
      put_file(dir / ("peak_vs_mu_" + tag + ".dat"),
               render(manifest, "transmission peak versus mu at p=" + format_double(p), "mu peak_mean peak_sem", v),
               written);
    }
    if (gammas.size() > 1) {
      std::map<double, Series> blocks;
      for (const auto& s : peaks) {
        if (s.key.p != p) continue;
        Series& b = blocks[s.key.mu];
        b.header = "# mu=" + format_double(s.key.mu);
        b.rows.push_back(row(s.key.gamma, s));
      }
      std::vector<Series> v;
      for (auto& [k, b] : blocks) v.push_back(std::move(b));
      put_file(dir / ("peak_vs_gamma_" + tag + ".dat"),
               render(manifest, "transmission peak versus dephasing rate at p=" + format_double(p),
                      "gamma peak_mean peak_sem", v),
               written);
    }
  }
  return written;
}

}  // namespace wormhole::cli
