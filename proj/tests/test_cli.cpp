#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wormhole/cli.hpp"

using namespace wormhole;
using namespace wormhole::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("wormhole-cli-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "wormhole");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "wormhole");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_args(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("run config survives a JSON round trip") {
  for (Command c : {Command::sweep_sparsity, Command::sweep_mu, Command::noise_grid, Command::tfd_diagnostics,
                    Command::level_spacing, Command::krylov_signal, Command::gate_estimate}) {
    const RunConfig d = defaults_for(c);
    CHECK(run_config_from_json(to_json(d)) == d);
  }
  RunConfig c = defaults_for(Command::krylov_signal);
  c.sweep.n_majorana = 12;
  c.sweep.beta = 4.5;
  c.sweep.sparsities = {0.3, 0.07};
  c.sweep.mus = {0.1, 0.2};
  c.sweep.realizations = 7;
  c.sweep.seed_base = 123456789012345ull;
  c.sweep.grid = {25.0, 61};
  c.sweep.krylov_dim = 40;
  c.sweep.sites = {1, 3, 5};
  c.sweep.jobs = 3;
  c.output = "somewhere/else";
  c.format = OutputFormat::csv;
  c.emit_traces = true;
  c.emit_plot_data = false;
  const nlohmann::json text = nlohmann::json::parse(to_json(c).dump());
  CHECK(run_config_from_json(text) == c);
  CHECK(run_config_from_json({{"config", text}}) == c);

  CHECK_THROWS_AS(run_config_from_json({{"command", "sweep-mu"}, {"n_majorna", 8}}), UsageError);
  CHECK_THROWS_AS(run_config_from_json({{"n_majorana", 8}}), UsageError);
  CHECK_THROWS_AS(run_config_from_json({{"command", "sweep-mu"}, {"beta", "hot"}}), UsageError);
}

TEST_CASE("spec hash follows the physics only") {
  RunConfig a = defaults_for(Command::sweep_sparsity);
  RunConfig b = a;
  b.output = "elsewhere";
  b.sweep.jobs = a.sweep.jobs + 5;
  b.format = OutputFormat::json;
  CHECK(spec_hash(a) == spec_hash(b));
  CHECK(spec_hash(a).size() == 16);
  b.sweep.seed_base = 1;
  CHECK(spec_hash(a) != spec_hash(b));
  CHECK(manifest_line(a).rfind("# wormhole " + std::string(kBuildVersion) + " spec_hash=" + spec_hash(a) +
                                   " seed_base=0",
                               0) == 0);
}

TEST_CASE("flags, defaults and config precedence") {
  const RunConfig d = parse({"sweep-mu"});
  CHECK(d.command == Command::sweep_mu);
  CHECK(d.sweep.n_majorana == 10);
  CHECK(d.sweep.beta == 8.0);
  CHECK(d.sweep.mus.size() == 8);
  CHECK(d.sweep.grid.points == 120);
  CHECK(d.sweep.grid.t_max == 30.0);

  const RunConfig f = parse({"sweep-sparsity", "--sparsity", "1.0", "--sparsity", "0.02", "-r", "10",
                             "--sites", "0,2,4", "--mu", "0.2", "--format", "csv"});
  CHECK(f.sweep.sparsities == std::vector<double>{1.0, 0.02});
  CHECK(f.sweep.sites == std::vector<int>{0, 2, 4});
  CHECK(f.sweep.mus == std::vector<double>{0.2});
  CHECK(f.sweep.realizations == 10);
  CHECK(f.format == OutputFormat::csv);

  CHECK(parse({"noise-grid"}).sweep.n_majorana == 8);
  CHECK(parse({"noise-grid"}).sweep.engine == Engine::lindblad);

  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.json";
  std::ofstream(cfg) << R"({"n_majorana": 8, "beta": 2.0, "realizations": 3, "command": "gate-estimate"})";
  const RunConfig c = parse({"sweep-sparsity", "--config", cfg.string(), "--beta", "5"});
  CHECK(c.command == Command::sweep_sparsity);  // the subcommand on the line wins
  CHECK(c.sweep.n_majorana == 8);
  CHECK(c.sweep.realizations == 3);
  CHECK(c.sweep.beta == 5.0);

  CHECK_THROWS_AS(parse({}), UsageError);
  CHECK_THROWS_AS(parse({"teleport"}), UsageError);
  CHECK_THROWS_AS(parse({"sweep-mu", "--engine", "magic"}), UsageError);
  CHECK_THROWS_AS(parse({"sweep-mu", "--sparsity", "1.5"}), UsageError);
  CHECK_THROWS_AS(parse({"sweep-mu", "--gamma", "0.1"}), UsageError);
  CHECK_THROWS_AS(parse({"noise-grid", "-N", "10"}), UsageError);
  CHECK_THROWS_AS(parse({"level-spacing", "-N", "9"}), UsageError);
  CHECK_THROWS_AS(parse({"sweep-mu", "-N", "ten"}), UsageError);
  CHECK_THROWS_AS(parse({"sweep-mu", "--help"}), HelpRequested);
}

TEST_CASE("exit codes and error lines") {
  const Result gates = invoke({"gate-estimate", "-N", "10", "-p", "1", "-p", "0.02", "-o",
                               (fs::temp_directory_path() / "wormhole-cli-gates").string()});
  fs::remove_all(fs::temp_directory_path() / "wormhole-cli-gates");
  CHECK(gates.code == 0);
  CHECK(gates.out.find("p=1 terms=210 cnots=1260") != std::string::npos);
  CHECK(gates.out.find("p=0.02 terms=4 cnots=24 reduction=52.5x") != std::string::npos);

  const Result bad = invoke({"sweep-mu", "--realizations", "0"});
  CHECK(bad.code == 2);
  CHECK(bad.err.rfind("error kind=usage message=\"", 0) == 0);
  CHECK(invoke({"sweep-mu", "--no-such-flag"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);

  TempDir tmp;
  std::ofstream(tmp.path / "blocker") << "x";
  const Result io = invoke({"gate-estimate", "-o", (tmp.path / "blocker" / "out").string()});
  CHECK(io.code == 1);
  CHECK(io.err.rfind("error kind=io", 0) == 0);
}

TEST_CASE("sweep outputs carry the manifest and reparse to the same config") {
  TempDir tmp;
  const fs::path out = tmp.path / "run";
  const Result r = invoke({"sweep-mu", "-N", "6", "-p", "1", "-p", "0.5", "--mu", "0.1", "--mu", "0.3", "-r", "3",
                           "--seed-base", "40", "--time-points", "40", "--traces", "-j", "2", "-o", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());

  const RunConfig back = run_config_from_json(nlohmann::json::parse(slurp(out / "run_config.json")));
  const std::string manifest = manifest_line(back);
  CHECK(manifest.find("seed_base=40") != std::string::npos);

  std::size_t files = 0, traces = 0;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const std::string text = slurp(e.path());
    if (e.path().extension() == ".json") {
      const auto j = nlohmann::json::parse(text);
      CHECK(j.at("manifest").at("spec_hash") == spec_hash(back));
      CHECK(j.at("manifest").at("build_version") == kBuildVersion);
      CHECK(j.at("manifest").at("seed_base") == 40);
    } else {
      CHECK(text.rfind(manifest + "\n", 0) == 0);
    }
    if (e.path().parent_path().filename() == "traces") ++traces;
  }
  CHECK(traces == 12);
  CHECK(fs::exists(out / "plot" / "peak_vs_mu_p1.dat"));
  CHECK(fs::exists(out / "plot" / "peak_vs_mu_p0.5.dat"));
  CHECK_FALSE(fs::exists(out / "plot" / "peak_vs_gamma_p1.dat"));
  CHECK(files == 12 + 3 + 3 + 2);  // traces, run_config/records/summary, three generic plots, two mu curves

  // Same sweep serially: identical records.
  const fs::path serial = tmp.path / "serial";
  REQUIRE(invoke({"sweep-mu", "-N", "6", "-p", "1", "-p", "0.5", "--mu", "0.1", "--mu", "0.3", "-r", "3",
                  "--seed-base", "40", "--time-points", "40", "-j", "1", "-o", serial.string()})
              .code == 0);
  CHECK(slurp(out / "records.csv") == slurp(serial / "records.csv"));

  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary.at("groups").size() == 4);
  CHECK(summary.at("mean_r").contains("p=0.5"));
}

TEST_CASE("noise grid reports the critical rate") {
  TempDir tmp;
  const Result r = invoke({"noise-grid", "-N", "4", "-p", "1", "--gamma", "0", "--gamma", "0.5", "--gamma", "5",
                           "-r", "2", "--time-points", "30", "--format", "json", "-o", tmp.path.string()});
  REQUIRE(r.code == 0);
  CHECK_FALSE(fs::exists(tmp.path / "records.csv"));
  const auto summary = nlohmann::json::parse(slurp(tmp.path / "summary.json"));
  CHECK(summary.at("critical_gamma").contains("p=1,mu=0.1"));
  CHECK(fs::exists(tmp.path / "plot" / "peak_vs_gamma_p1.dat"));
}

TEST_CASE("level spacing, TFD diagnostics and Krylov traces") {
  TempDir tmp;
  const Result ls = invoke({"level-spacing", "-N", "10", "-p", "1", "-r", "5", "--sector", "even", "-o",
                            (tmp.path / "ls").string()});
  REQUIRE(ls.code == 0);
  const auto ls_sum = nlohmann::json::parse(slurp(tmp.path / "ls" / "summary.json"));
  CHECK(ls_sum.at("sector") == "even");
  CHECK(ls_sum.at("groups").at("p=1").at("count") == 5);

  const Result tfd = invoke({"tfd-diagnostics", "-N", "8", "-r", "2", "-o", (tmp.path / "tfd").string()});
  REQUIRE(tfd.code == 0);
  const std::string csv = slurp(tmp.path / "tfd" / "tfd.csv");
  CHECK(csv.find("p,seed,S_ent,S_over_Smax,thermal_err,overlap_with_dense\n") != std::string::npos);
  const auto tfd_sum = nlohmann::json::parse(slurp(tmp.path / "tfd" / "summary.json"));
  CHECK(tfd_sum.at("groups").at("p=1").at("overlap_with_dense").at("mean").get<double>() ==
        doctest::Approx(1.0));
  CHECK(tfd_sum.at("groups").at("p=0.02").at("max_thermal_err").get<double>() <= 1e-10);

  const Result kr = invoke({"krylov-signal", "-N", "6", "-r", "1", "--krylov-dim", "30", "--time-points", "20",
                            "-o", (tmp.path / "kr").string()});
  REQUIRE(kr.code == 0);
  CHECK(fs::exists(tmp.path / "kr" / "traces" / "p1_mu0.1_g0_seed0.csv"));
}

TEST_CASE("plot data needs records") {
  TempDir tmp;
  std::ostringstream warn;
  CHECK(emit_plot_data({}, tmp.path / "plot", "# m", warn).empty());
  CHECK(warn.str().find("warning") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp.path / "plot"));

  std::vector<EnsembleRecord> recs(2);
  recs[0].p = 1.0;
  recs[0].peak_height = 0.9;
  recs[0].mean_r = 0.6;
  recs[1].p = 0.1;
  recs[1].peak_height = 0.8;
  const auto files = emit_plot_data(recs, tmp.path / "plot", "# m", warn);
  CHECK(files.size() == 3);
  const std::string sig = slurp(tmp.path / "plot" / "signal_vs_sparsity.dat");
  CHECK(sig == "# m\n# transmission peak |C(t*)| versus sparsity\n# columns: p peak_mean peak_sem\n"
               "# mu=0 gamma=0\n0.1 0.8 0\n1 0.9 0\n");
}
