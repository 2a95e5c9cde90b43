#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <tbb/global_control.h>

#include "eagle/checks/check.hpp"
#include "eagle/errors.hpp"
#include "eagle/harness/io.hpp"
#include "eagle/harness/metrics.hpp"
#include "eagle/harness/runs.hpp"
#include "eagle/harness/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;

// EAGLE_THREADS caps TBB parallelism for the whole process.
std::unique_ptr<tbb::global_control> thread_limit() {
  const char* env = std::getenv("EAGLE_THREADS");
  if (env == nullptr || *env == '\0') return nullptr;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw eagle::ParameterError("EAGLE_THREADS must be a positive integer, got '" + std::string(env) + "'");
  return std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(n));
}

// Schema errors get the file name prepended.
template <class Parse>
auto load(const std::string& path, Parse parse) {
  const std::string text = eagle::harness::read_file(path);
  try {
    return parse(text);
  } catch (const eagle::SchemaError& e) {
    throw eagle::SchemaError(path + ": " + e.what());
  }
}

eagle::harness::Scenario load_scenario(const std::string& path) {
  return load(path, [](const std::string& t) { return eagle::harness::scenario_from_json(t); });
}

eagle::harness::TrackFile load_track(const std::string& path) {
  return load(path, [](const std::string& t) { return eagle::harness::track_from_json(t); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual query localization on synthetic feature videos"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string preset, out, scenario_path, config_path, track_path, filter;
  bool metrics_3d = false, json = false;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic scenario");
  gen->add_option("--seed", seed, "Random seed")->required();
  gen->add_option("--preset", preset, "identity | drift | distractor | absence | geo")->required();
  gen->add_option("--out", out, "Output scenario file")->required();

  auto* run2d = app.add_subcommand("run2d", "Track the query through the scenario frames");
  run2d->add_option("--scenario", scenario_path)->required();
  run2d->add_option("--config", config_path, "Pipeline config (defaults when omitted)");
  run2d->add_option("--out", out, "Output track file")->required();

  auto* run3d = app.add_subcommand("run3d", "Lift a 2D track to a world point and displacements");
  run3d->add_option("--scenario", scenario_path)->required();
  run3d->add_option("--track", track_path)->required();
  run3d->add_option("--out", out, "Output track file")->required();

  auto* eval = app.add_subcommand("eval", "Score a track against the scenario ground truth");
  eval->add_option("--scenario", scenario_path)->required();
  eval->add_option("--track", track_path)->required();
  eval->add_flag("--metrics-3d", metrics_3d, "Report 3D metrics instead of 2D");
  eval->add_flag("--json", json, "Machine-readable report");

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the oracle checks and acceptance criteria");
  selfcheck->add_option("--filter", filter, "Only checks whose name contains this string");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  namespace h = eagle::harness;
  try {
    const auto limit = thread_limit();
    if (*gen) {
      const auto p = h::parse_preset(preset);
      if (!p) throw eagle::ParameterError("unknown preset '" + preset + "'");
      h::write_file_atomic(out, h::scenario_to_json(h::gen_scenario(seed, *p)));
    } else if (*run2d) {
      const auto s = load_scenario(scenario_path);
      const auto cfg = config_path.empty() ? eagle::PipelineConfig{} : load(config_path, [](const std::string& t) { return h::config_from_json(t); });
      h::write_file_atomic(out, h::run2d(s, cfg));
    } else if (*run3d) {
      const auto s = load_scenario(scenario_path);
      const auto t = load_track(track_path);
      h::write_file_atomic(out, h::run3d(s, t));
    } else if (*eval) {
      const auto s = load_scenario(scenario_path);
      const auto t = load_track(track_path);
      if (metrics_3d) {
        const auto r = h::eval_3d(t.track, s);
        std::cout << (json ? h::report_to_json(r) : h::report_to_text(r));
      } else {
        const auto r = h::eval_2d(t.track, s);
        std::cout << (json ? h::report_to_json(r) : h::report_to_text(r));
      }
    } else if (*selfcheck) {
      auto checks = eagle::checks::derived_checks();
      for (auto& c : eagle::checks::acceptance_checks()) checks.push_back(std::move(c));
      const auto sum = eagle::checks::run_checks(checks, filter, std::cout);
      std::cout << sum.passed << " passed, " << sum.failed << " failed\n";
      if (sum.passed + sum.failed == 0) {
        std::cerr << "error: no check matches '" << filter << "'\n";
        return kExitValidation;
      }
      return sum.failed == 0 ? kExitOk : kExitInternal;
    }
  } catch (const eagle::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const eagle::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const eagle::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const eagle::EmptyInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const eagle::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
