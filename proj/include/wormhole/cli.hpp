#ifndef WORMHOLE_CLI_HPP_
#define WORMHOLE_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wormhole/ensemble.hpp"
#include "wormhole/spectral.hpp"

namespace wormhole::cli {

enum class Command {
  sweep_sparsity,
  sweep_mu,
  noise_grid,
  tfd_diagnostics,
  level_spacing,
  krylov_signal,
  gate_estimate,
};

enum class OutputFormat { csv, json, both };

std::string_view to_string(Command c);
Command parse_command(std::string_view name);
std::string_view to_string(OutputFormat f);
OutputFormat parse_format(std::string_view name);

struct RunConfig {
  Command command = Command::sweep_sparsity;
  SweepSpec sweep;
  std::filesystem::path output = "wormhole-out";
  OutputFormat format = OutputFormat::both;
  bool emit_traces = false;
  bool emit_plot_data = true;
  ParitySector sector = ParitySector::none;  // level-spacing only

  bool operator==(const RunConfig&) const = default;
};

/// Bad flags, bad config files and values rejected by module preconditions.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Defaults for a subcommand: the fiducial N = 10, beta = 8, mu = 0.1 point,
/// widened to the natural scan for each sweep.
RunConfig defaults_for(Command c);

nlohmann::json to_json(const RunConfig& c);

/// Missing keys keep the subcommand defaults; unknown keys are a UsageError.
/// Accepts either the bare object or a run manifest holding it under "config".
RunConfig run_config_from_json(const nlohmann::json& j);

/// 16 hex digits of FNV-1a over the physics part of the configuration
/// (everything except output location, format and thread count).
std::string spec_hash(const RunConfig& c);

extern const char* const kBuildVersion;

/// "# wormhole <version> spec_hash=<hash> seed_base=<seed> command=<name>"
std::string manifest_line(const RunConfig& c);

/// Parses argv (argv[0] is the program name). Flags override values from
/// --config, which override the subcommand defaults. Throws UsageError;
/// --help is reported through HelpRequested.
RunConfig parse_args(int argc, const char* const* argv);

struct HelpRequested {
  std::string text;
};

/// Runs a validated configuration, writing into c.output. Returns the
/// process exit code: 0 on success, 1 if any realization failed.
int run(const RunConfig& c, std::ostream& out, std::ostream& err);

/// Full entry point: usage errors exit 2, compute and I/O failures exit 1.
/// Every error is one line on `err` starting with "error kind=".
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Whitespace-delimited figure data with "#" headers, one file per figure
/// the records support. Returns the paths written; warns and writes
/// nothing for an empty record set.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<EnsembleRecord>& records,
                                                  const std::filesystem::path& dir,
                                                  const std::string& manifest, std::ostream& warn);

}  // namespace wormhole::cli

#endif  // WORMHOLE_CLI_HPP_
