// emmviscowave: scenario-driven experiments for the anisotropic extended
// Maxwell viscoelastic system on 2-D triangle meshes.
//
//   emmviscowave run <config>... [--out DIR] [--parallel] [--seed N]
//   emmviscowave check-identities [--trials N] [--seed N]
//   emmviscowave mesh gen|validate|refine <args>
//
// Exit codes: 0 all contracts pass, 1 contract failures, 2 config errors.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>

#include "emm/report.hpp"
#include "emm/scenario.hpp"

namespace {

struct RunJob {
  std::string config_path;
  std::string out_dir;
  emm::Scenario scenario;
  std::string hash;
};

int do_run(const std::vector<std::string>& configs, const std::string& out_override,
           bool parallel, std::int64_t seed_override) {
  std::vector<RunJob> jobs;
  for (const auto& path : configs) {
    RunJob job;
    job.config_path = path;
    std::string text;
    try {
      text = emm::read_file(path);
      job.scenario = emm::parse_scenario(text, path);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
    if (seed_override >= 0) job.scenario.seed = static_cast<std::uint64_t>(seed_override);
    job.hash = emm::fnv1a_hex(emm::serialize(job.scenario));
    job.out_dir = job.scenario.out;
    if (const char* env = std::getenv("EMMVISCOWAVE_OUT")) job.out_dir = env;
    if (!out_override.empty()) job.out_dir = out_override;
    if (configs.size() > 1 && job.out_dir != job.scenario.out)
      job.out_dir += "/" + std::filesystem::path(path).stem().string();
    jobs.push_back(std::move(job));
  }

  const auto execute = [](const RunJob& job) {
    return emm::run_scenario(job.scenario, job.out_dir, job.hash);
  };

  std::vector<emm::RunOutcome> outcomes(jobs.size());
  try {
    if (parallel && jobs.size() > 1) {
      std::vector<std::future<emm::RunOutcome>> futures;
      for (const auto& job : jobs)
        futures.push_back(std::async(std::launch::async, execute, std::cref(job)));
      for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = execute(jobs[i]);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  bool all_passed = true;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& o = outcomes[i];
    std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << jobs[i].config_path << " -> "
              << jobs[i].out_dir << "\n";
    for (const auto& f : o.failures) std::cout << "       failed check: " << f << "\n";
    all_passed = all_passed && o.passed;
  }
  return all_passed ? 0 : 1;
}

int do_check_identities(int trials, std::uint64_t seed) {
  const emm::IdentityResult r = emm::run_identity_suite(trials, seed);
  emm::Json j = emm::Json::object();
  j.set("trials", trials);
  j.set("seed", static_cast<double>(seed));
  emm::Json res = emm::Json::object();
  res.set("elimination_identity", r.elimination);
  res.set("resolvent_split", r.resolvent_split);
  res.set("laplace_stress_equality", r.laplace_stress);
  res.set("kelvin_mandel_contraction", r.contraction);
  j.set("max_residual", std::move(res));
  j.set("passed", r.passed);
  std::cout << j.dump();
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic extended Maxwell viscoelasticity laboratory"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run scenarios from config files");
  std::vector<std::string> configs;
  std::string out_override;
  bool parallel = false;
  std::int64_t seed_override = -1;
  run->add_option("config", configs, "scenario config file(s)")->required()->expected(-1);
  run->add_option("--out", out_override, "output directory override");
  run->add_flag("--parallel", parallel, "run independent scenarios concurrently");
  run->add_option("--seed", seed_override, "seed override");

  // check-identities
  auto* check = app.add_subcommand("check-identities", "randomized tensor-identity suite");
  int trials = 1000;
  std::uint64_t seed = 1;
  check->add_option("--trials", trials, "instances per identity family");
  check->add_option("--seed", seed, "random seed");

  // mesh
  auto* mesh = app.add_subcommand("mesh", "mesh generation and validation");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("gen", "generate a rectangle mesh");
  int nx = 8, ny = 8;
  std::string dirichlet = "left", mesh_out = "mesh.txt";
  gen->add_option("--nx", nx, "cells in x");
  gen->add_option("--ny", ny, "cells in y");
  gen->add_option("--dirichlet", dirichlet, "Dirichlet sides (left right bottom top all)");
  gen->add_option("out", mesh_out, "output file")->required();
  auto* val = mesh->add_subcommand("validate", "validate a mesh file");
  std::string mesh_in;
  val->add_option("file", mesh_in, "mesh file")->required();
  auto* refine = mesh->add_subcommand("refine", "uniform quadrisection of a mesh file");
  std::string refine_in, refine_out;
  refine->add_option("in", refine_in, "input mesh")->required();
  refine->add_option("out", refine_out, "output mesh")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(configs, out_override, parallel, seed_override);
    if (*check) return do_check_identities(trials, seed);
    if (*gen) {
      emm::MeshSpec spec;
      spec.nx = nx;
      spec.ny = ny;
      spec.dirichlet_sides.clear();
      std::istringstream in(dirichlet);
      std::string side;
      while (in >> side) spec.dirichlet_sides.push_back(side);
      emm::save_mesh(emm::make_mesh(spec), mesh_out);
      std::cout << "wrote " << mesh_out << "\n";
      return 0;
    }
    if (*val) {
      emm::load_mesh(mesh_in);
      std::cout << mesh_in << ": ok\n";
      return 0;
    }
    if (*refine) {
      emm::save_mesh(emm::refine4(emm::load_mesh(refine_in)), refine_out);
      std::cout << "wrote " << refine_out << "\n";
      return 0;
    }
  } catch (const emm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
