// rtbert: command-line driver for the polarity pipeline.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rtbert/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::string log_level = "info";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON pipeline config; defaults apply to omitted keys");
  cmd->add_option("--out-dir", f.out_dir, "Directory for stage artifacts")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master seed; overrides the config value");
  cmd->add_flag("--deterministic", f.deterministic, "Require bit-reproducible output (single-threaded)");
  cmd->add_option("--log-level", f.log_level, "debug, info, warn, error or off")->capture_default_str();
}

rtbert::Pipeline make_pipeline(const CommonFlags& f) {
  rtbert::set_log_level(rtbert::parse_log_level(f.log_level));
  auto cfg = f.config.empty() ? rtbert::PipelineConfig{} : rtbert::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.deterministic) cfg.deterministic = true;
  std::filesystem::create_directories(f.out_dir);
  rtbert::log_info("cli", "config_hash=" + rtbert::config_hash(cfg) + " seed=" + std::to_string(cfg.seed));
  return rtbert::Pipeline(std::move(cfg), f.out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarity estimation from profiles and retweet networks"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string model;
  std::string holdout;

  auto* ingest = app.add_subcommand("ingest", "Load raw users and edges, apply filters");
  auto* graph = app.add_subcommand("build-graph", "Build the weighted retweet graph");
  auto* seed = app.add_subcommand("seed", "Assign hashtag and media pseudo-labels");
  auto* train = app.add_subcommand("train", "Train the profile encoder on retweet neighbors");
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate a model on the seed users");
  auto* predict = app.add_subcommand("predict", "Fit the head and score every user");
  auto* analyze = app.add_subcommand("analyze", "Partition users and report audience distributions");
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus into the output directory");
  auto* run_all = app.add_subcommand("run-all", "ingest, build-graph, seed, train, evaluate, predict, analyze");
  for (auto* cmd : {ingest, graph, seed, train, evaluate, predict, analyze, synth, run_all}) add_common(cmd, flags);
  evaluate->add_option("--model", model, "Model id (default from config)");
  evaluate->add_option("--holdout", holdout, "user_id,polarity file scored after fitting on all seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    auto p = make_pipeline(flags);
    if (*ingest) p.ingest();
    else if (*graph) p.build_graph_stage();
    else if (*seed) p.seed();
    else if (*train) p.train();
    else if (*evaluate) {
      if (!holdout.empty()) holdout = std::filesystem::absolute(holdout).string();
      p.evaluate(model, holdout);
    } else if (*predict) p.predict();
    else if (*analyze) p.analyze();
    else if (*synth) p.synth();
    else if (*run_all) p.run_all();
  } catch (const rtbert::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rtbert::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
