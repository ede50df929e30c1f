#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dmca/harness/experiment.hpp"
#include "dmca/util/errors.hpp"

namespace {

int dispatch(const std::string& cmd, const dmca::harness::ExperimentConfig& cfg,
             const dmca::harness::Paths& paths) {
  using namespace dmca::harness;
  if (cmd == "gen-trace") return cmd_gen_trace(cfg, paths);
  if (cmd == "pretrain-cpm") return cmd_pretrain(cfg, paths);
  if (cmd == "train") return cmd_train(cfg, paths);
  if (cmd == "eval") return cmd_eval(cfg, paths);
  if (cmd == "compare") return cmd_compare(cfg, paths);
  if (cmd == "converge") return cmd_converge(cfg, paths);
  throw dmca::ConfigError("unknown subcommand: " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale laboratory for dynamic multi-channel access"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed_override = -1;

  for (const char* name : {"gen-trace", "pretrain-cpm", "train", "eval",
                           "compare", "converge"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--seed", seed_override, "override the configured seed");
    sub->add_option("--out", out_dir, "override the output directory");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    dmca::harness::ExperimentConfig cfg =
        dmca::harness::load_config(config_path);
    if (seed_override >= 0) {
      cfg.run.seed = static_cast<std::uint64_t>(seed_override);
      cfg.env.seed = cfg.run.seed;
    }
    if (!out_dir.empty()) cfg.run.out_dir = out_dir;

    dmca::harness::Paths paths{cfg.run.out_dir};
    std::filesystem::create_directories(paths.out);
    return dispatch(app.get_subcommands().front()->get_name(), cfg, paths);
  } catch (const dmca::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dmca::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dmca::MissingArtifactError& e) {
    std::cerr << "missing artifact: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
