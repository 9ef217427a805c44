#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "cca/engine.hpp"
#include "cca/errors.hpp"
#include "cca/plotdata.hpp"
#include "cca/scenario.hpp"
#include "cca/trace_io.hpp"

namespace fs = std::filesystem;
using namespace cca;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCollision = 1;
constexpr int kExitUsage = 2;

std::optional<std::string> user_scenario_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("CCA_SCENARIOS"); env != nullptr && *env != '\0') {
    return std::string(env);
  }
  return std::nullopt;
}

// A scenario argument may be a shipped name, a file path, or a name under the
// user scenario directory.
RuntimeScenario resolve_scenario_arg(const std::string& arg, const std::string& dir_flag) {
  if (fs::path(arg).extension() == ".toml" && fs::exists(arg)) return load_scenario(arg);
  if (const auto dir = user_scenario_dir(dir_flag)) {
    const fs::path candidate = fs::path(*dir) / (arg + ".toml");
    if (fs::exists(candidate)) return load_scenario(candidate.string());
  }
  return load_embedded_scenario(arg);
}

void print_metrics(const SimulationTrace& trace) {
  const Metrics& m = trace.metrics;
  std::printf("  %-10s %-20s %s\n", trace.mode_label.c_str(), "collision:",
              m.collision_occurred ? "yes" : "no");
  if (std::isfinite(m.min_gap)) {
    std::printf("  %-10s %-20s %.2f m\n", "", "min gap:", m.min_gap);
  } else {
    std::printf("  %-10s %-20s none\n", "", "min gap:");
  }
  std::printf("  %-10s %-20s %.2f m/s^2\n", "", "max lateral accel:", m.max_lateral_accel);
  if (m.time_to_stop) {
    std::printf("  %-10s %-20s %.2f s\n", "", "time to stop:", *m.time_to_stop);
  }
}

std::pair<std::string, std::string> write_outputs(const SimulationTrace& trace,
                                                  const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::string base =
      (fs::path(out_dir) / (trace.scenario_name + "-" + trace.mode_label)).string();
  write_trace_csv(trace, base + ".csv");
  write_trace_json(trace, base + ".json");
  return {base + ".csv", base + ".json"};
}

int cmd_list(const std::string& dir_flag) {
  for (const ScenarioListing& entry : list_embedded_scenarios()) {
    std::printf("%-12s %s\n", entry.name.c_str(), entry.description.c_str());
  }
  if (const auto dir = user_scenario_dir(dir_flag)) {
    std::error_code ec;
    fs::directory_iterator it(*dir, ec);
    if (ec) {
      std::fprintf(stderr, "warning: cannot read scenario directory %s: %s\n", dir->c_str(),
                   ec.message().c_str());
      return kExitOk;
    }
    for (const auto& file : it) {
      if (file.path().extension() != ".toml") continue;
      std::string description = "(user scenario)";
      try {
        description = load_scenario(file.path().string()).config.description;
      } catch (const Error&) {
        description = "(invalid scenario file)";
      }
      std::printf("%-12s %s [%s]\n", file.path().stem().string().c_str(), description.c_str(),
                  file.path().string().c_str());
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative collision avoidance scenario harness"};
  app.require_subcommand(1);

  std::string scenarios_dir;
  app.add_option("--scenarios", scenarios_dir,
                 "Directory with additional scenario files (or env CCA_SCENARIOS)");

  auto* list = app.add_subcommand("list", "List available scenarios");

  std::string name;
  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("scenario", name, "Scenario name or .toml path")->required();

  std::string v2x = "on";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  std::string preset;
  bool keep_going = false;
  std::string frame_log;
  std::string udp;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write trace files");
  run_cmd->add_option("scenario", name, "Scenario name or .toml path")->required();
  run_cmd->add_option("--v2x", v2x, "V2X mode: on (default) or off")
      ->check(CLI::IsMember({"on", "off"}));
  run_cmd->add_option("--seed", seed, "Override the bus RNG seed")
      ->each([&](const std::string&) { seed_set = true; });
  run_cmd->add_option("--out", out_dir, "Output directory (default: .)");
  run_cmd->add_option("--preset", preset, "Tuning preset override: default, fast or smooth");
  run_cmd->add_flag("--continue-after-collision", keep_going,
                    "Keep simulating after a collision");
  run_cmd->add_option("--frame-log", frame_log, "Write raw BSM frames to this file");
  run_cmd->add_option("--udp", udp, "Mirror BSM frames to host:port as UDP datagrams");

  auto* compare = app.add_subcommand("compare", "Run with and without V2X and compare");
  compare->add_option("scenario", name, "Scenario name or .toml path")->required();
  compare->add_option("--seed", seed, "Override the bus RNG seed")
      ->each([&](const std::string&) { seed_set = true; });
  compare->add_option("--out", out_dir, "Output directory (default: .)");
  compare->add_option("--preset", preset, "Tuning preset override");

  std::string trace_path;
  std::string kind;
  std::string plot_out;
  auto* plot = app.add_subcommand("plotdata", "Extract plot-ready CSV from a trace");
  plot->add_option("trace", trace_path, "Trace CSV written by run/compare")->required();
  plot->add_option("--kind", kind, "displacement-time or path-xy")->required();
  plot->add_option("--out", plot_out, "Output CSV (default: <trace>-<kind>.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (list->parsed()) return cmd_list(scenarios_dir);

    if (validate->parsed()) {
      const RuntimeScenario sc = resolve_scenario_arg(name, scenarios_dir);
      std::printf("%s: ok (%zu vehicles, %.1f s)\n", sc.config.name.c_str(),
                  sc.remotes.size() + 1, sc.config.duration_s);
      return kExitOk;
    }

    if (run_cmd->parsed()) {
      const RuntimeScenario sc = resolve_scenario_arg(name, scenarios_dir);
      RunOptions options;
      options.drop_override = v2x == "off" ? std::optional<double>(1.0) : std::optional<double>(0.0);
      if (seed_set) options.seed_override = seed;
      if (!preset.empty()) options.preset_override = preset;
      options.continue_after_collision = keep_going;
      if (!frame_log.empty()) options.frame_log_path = frame_log;
      if (!udp.empty()) options.udp_endpoint = udp;
      const SimulationTrace trace = run(sc, options);
      const auto [csv, json] = write_outputs(trace, out_dir);
      std::printf("%s (%s)\n", sc.config.name.c_str(), trace.mode_label.c_str());
      print_metrics(trace);
      std::printf("  trace: %s\n  sidecar: %s\n", csv.c_str(), json.c_str());
      return trace.metrics.collision_occurred ? kExitCollision : kExitOk;
    }

    if (compare->parsed()) {
      const RuntimeScenario sc = resolve_scenario_arg(name, scenarios_dir);
      RunOptions options;
      if (seed_set) options.seed_override = seed;
      if (!preset.empty()) options.preset_override = preset;
      const ComparePair pair = compare_modes(sc, options);
      write_outputs(pair.with_v2x, out_dir);
      write_outputs(pair.without_v2x, out_dir);
      std::printf("%s\n", sc.config.name.c_str());
      print_metrics(pair.with_v2x);
      print_metrics(pair.without_v2x);
      return pair.with_v2x.metrics.collision_occurred ? kExitCollision : kExitOk;
    }

    if (plot->parsed()) {
      if (plot_out.empty()) {
        const fs::path p(trace_path);
        plot_out = (p.parent_path() / (p.stem().string() + "-" + kind + ".csv")).string();
      }
      write_plot_data(trace_path, kind, plot_out);
      std::printf("wrote %s\n", plot_out.c_str());
      return kExitOk;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
