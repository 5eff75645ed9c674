#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  using namespace semnav;
  CLI::App app{"semnav: semantic-guided object navigation simulator"};
  app.require_subcommand(1);

  std::vector<std::string> policy_names;
  for (const auto p : baseline_policies()) policy_names.emplace_back(to_string(p));

  cli::RunOptions run;
  std::string config;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run one episode and write result.json, trace.jsonl, render.ppm");
  run_cmd->add_option("scenario", run.scenario, "Scenario JSON")->required();
  run_cmd->add_option("-c,--config", config, "Run configuration JSON");
  run_cmd->add_option("-o,--out", run.out_dir, "Output directory")->required();
  std::string policy = "full";
  run_cmd->add_option("-p,--policy", policy, "Navigation policy")->check(CLI::IsMember(policy_names));
  auto* seed_opt = run_cmd->add_option("-s,--seed", seed, "Override the scenario seed");

  cli::BatchOptions batch;
  int jobs = 0;
  auto* batch_cmd = app.add_subcommand("batch", "Run a scenario x policy x seed grid");
  batch_cmd->add_option("manifest", batch.manifest, "Manifest JSON")->required();
  batch_cmd->add_option("-o,--out", batch.out_dir, "Output directory")->required();
  auto* jobs_opt = batch_cmd->add_option("-j,--jobs", jobs, "Parallel episodes")->check(CLI::PositiveNumber);

  cli::RenderCmdOptions render;
  int frame = 0;
  auto* render_cmd = app.add_subcommand("render", "Render one trace frame to PPM");
  render_cmd->add_option("trace", render.trace, "Trace JSONL")->required();
  render_cmd->add_option("-o,--out", render.out_image, "Output image (.ppm)")->required();
  auto* frame_opt = render_cmd->add_option("-f,--frame", frame, "Frame index (default: last)");
  render_cmd->add_option("--scale", render.pixels_per_cell, "Pixels per cell")->check(CLI::PositiveNumber);

  cli::GenOptions gen;
  std::string gen_config;
  std::string gen_run_config;
  auto* gen_cmd = app.add_subcommand("gen-scenarios", "Generate rooms-and-corridor scenarios and a manifest");
  gen_cmd->add_option("-o,--out", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("-n,--count", gen.count, "Number of scenarios");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--seeds", gen.seeds, "Episode seeds per scenario in the manifest");
  auto* gen_cfg_opt = gen_cmd->add_option("-g,--generator", gen_config, "Generator parameters JSON");
  auto* gen_run_opt = gen_cmd->add_option("--run-config", gen_run_config, "Run config path recorded in the manifest");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) {
    run.policy = *policy_from_string(policy);
    if (!config.empty()) run.config = config;
    if (*seed_opt) run.seed = seed;
    return cli::cmd_run(run, std::cout, std::cerr);
  }
  if (batch_cmd->parsed()) {
    if (*jobs_opt) batch.jobs = jobs;
    return cli::cmd_batch(batch, std::cout, std::cerr);
  }
  if (render_cmd->parsed()) {
    if (*frame_opt) render.frame = frame;
    return cli::cmd_render(render, std::cout, std::cerr);
  }
  if (gen_cmd->parsed()) {
    if (*gen_cfg_opt) gen.generator_config = gen_config;
    if (*gen_run_opt) gen.run_config = gen_run_config;
    return cli::cmd_gen_scenarios(gen, std::cout, std::cerr);
  }
  return 1;
}
