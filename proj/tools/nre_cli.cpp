// Command-line front end for the NRE library.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nre/circuit.hpp"
#include "nre/errors.hpp"
#include "nre/harness.hpp"
#include "nre/resampling.hpp"
#include "nre/simulator.hpp"

namespace {

nre::ExperimentConfig read_config(const std::string& path) {
  if (path.empty()) {
    std::istringstream empty("{}");
    return nre::load_config(empty);
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return nre::load_config(in);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.imbue(std::locale::classic());
  return out;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
  } else {
    open_output(path) << text << '\n';
  }
}

nre::CountsGrid load_counts(const std::vector<std::string>& paths, const nre::LambdaGrid& grid, std::size_t groups) {
  nre::CountsGrid out(grid.size(), std::vector<nre::CountsTable>(groups));
  std::vector<std::vector<bool>> seen(grid.size(), std::vector<bool>(groups, false));
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open counts file '" + path + "'");
    nre::CountsTable t = nre::read_counts(in);
    std::size_t i = grid.size();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (std::abs(grid[k] - t.lambda) <= 1e-9 * (1.0 + std::abs(t.lambda))) i = k;
    }
    if (i == grid.size()) throw std::runtime_error(path + ": lambda not on the requested grid");
    if (t.group < 0 || static_cast<std::size_t>(t.group) >= groups) throw std::runtime_error(path + ": unknown group");
    const auto g = static_cast<std::size_t>(t.group);
    if (seen[i][g]) throw std::runtime_error(path + ": duplicate (lambda, group) coordinate");
    seen[i][g] = true;
    out[i][g] = std::move(t);
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t g = 0; g < groups; ++g)
      if (!seen[i][g]) throw std::runtime_error("missing counts for lambda " + std::to_string(grid[i]) + ", group " + std::to_string(g));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::locale::global(std::locale::classic());
  CLI::App app{"Noise-robust estimation for noisy quantum circuits"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path;

  auto* run = app.add_subcommand("run", "Simulate, sample and mitigate at every configured noise rate");
  run->add_option("-c,--config", config_path, "Experiment config (JSON)");
  run->add_option("-o,--out", out_path, "Report JSON path (default stdout)");
  run->add_option("--csv", csv_path, "Per-lambda CSV path");

  int repetitions = 25;
  auto* sweep = app.add_subcommand("sweep-overhead", "Sampling overhead versus noise rate");
  sweep->add_option("-c,--config", config_path, "Experiment config (JSON)");
  sweep->add_option("-k,--repetitions", repetitions, "Seeded runs per noise rate")->check(CLI::Range(5, 100000));
  sweep->add_option("-o,--out", out_path, "Overhead CSV path (default stdout)");

  std::vector<std::string> target_files, ncc_files;
  std::vector<double> lambdas;
  std::string topology = "star-5";
  double g = 2.0, ncc_noiseless = 0.0;
  int bootstraps = 200, resamples = 40000;
  std::uint64_t seed = 1;
  bool baseline_only = false;
  auto* mitigate = app.add_subcommand("mitigate-counts", "Run the NRE pipeline on measured counts");
  mitigate->add_option("--target", target_files, "Target-circuit counts files")->required();
  mitigate->add_option("--ncc", ncc_files, "Noise-canceling-circuit counts files")->required();
  mitigate->add_option("--lambdas", lambdas, "Noise scale factors")->required();
  mitigate->add_option("--ncc-noiseless", ncc_noiseless, "Noiseless NCC expectation")->required();
  mitigate->add_option("--topology", topology, "Topology defining the measured Hamiltonian");
  mitigate->add_option("--g", g, "Transverse field");
  mitigate->add_option("-B,--bootstraps", bootstraps);
  mitigate->add_option("-R,--resamples", resamples);
  mitigate->add_option("--seed", seed, "Seed (NRE_SEED overrides)");
  mitigate->add_flag("--baseline-only", baseline_only, "Skip the dispersion regression");
  mitigate->add_option("-o,--out", out_path, "Report JSON path (default stdout)");

  int layers = 4;
  bool as_ncc = false;
  double fold = 1.0;
  auto* emit_circuit = app.add_subcommand("emit-circuit", "Write a QAOA circuit in the text format");
  emit_circuit->add_option("-c,--config", config_path, "Experiment config supplying the circuit");
  emit_circuit->add_flag("--ncc", as_ncc, "Emit the noise-canceling circuit");
  emit_circuit->add_option("--fold", fold, "Global folding scale factor")->check(CLI::PositiveNumber);
  emit_circuit->add_option("-o,--out", out_path, "Circuit path (default stdout)");

  auto* optimize = app.add_subcommand("optimize-qaoa", "Noiseless QAOA angle optimisation");
  optimize->add_option("--topology", topology);
  optimize->add_option("--g", g);
  optimize->add_option("--layers", layers);
  optimize->add_option("--seed", seed);
  int restarts = 1;
  optimize->add_option("--restarts", restarts)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto config = read_config(config_path);
      const auto report = nre::run_compare(config);
      emit(out_path, nre::report_to_json(report));
      if (!csv_path.empty()) {
        auto csv = open_output(csv_path);
        nre::write_lambda_csv(csv, report);
      }
    } else if (sweep->parsed()) {
      const auto config = read_config(config_path);
      const auto table = nre::sweep_overhead(config, repetitions);
      if (out_path.empty() || out_path == "-") {
        std::cout.imbue(std::locale::classic());
        nre::write_overhead_csv(std::cout, table);
      } else {
        auto csv = open_output(out_path);
        nre::write_overhead_csv(csv, table);
      }
    } else if (mitigate->parsed()) {
      if (const char* env = std::getenv("NRE_SEED"); env != nullptr && *env != '\0') seed = std::stoull(env);
      nre::PipelineInput input;
      input.grid = nre::LambdaGrid(lambdas);
      const auto groups = nre::tfim_measurement_groups(nre::parse_topology(topology), g);
      input.groups.assign(groups.begin(), groups.end());
      input.target = load_counts(target_files, input.grid, input.groups.size());
      input.ncc = load_counts(ncc_files, input.grid, input.groups.size());
      input.ncc_noiseless = ncc_noiseless;
      nre::PipelineConfig pc;
      pc.bootstraps = bootstraps;
      pc.resamples = resamples;
      pc.seed = seed;
      pc.baseline_only = baseline_only;
      const auto result = nre::run_nre_pipeline(input, pc);
      emit(out_path, nre::pipeline_report_json(result, input.grid, pc));
    } else if (emit_circuit->parsed()) {
      const auto config = read_config(config_path);
      nre::Circuit c = nre::build_tfim_qaoa(nre::parse_topology(config.topology), config.g, config.qaoa);
      if (as_ncc) c = nre::to_noise_canceling(c);
      if (fold != 1.0) c = nre::fold_global(c, fold);
      if (out_path.empty() || out_path == "-") {
        nre::write_circuit(std::cout, c);
      } else {
        auto out = open_output(out_path);
        nre::write_circuit(out, c);
      }
    } else if (optimize->parsed()) {
      const auto p = nre::optimize_qaoa(nre::parse_topology(topology), g, layers, seed, restarts);
      std::cout.precision(17);
      std::cout << "gammas";
      for (double v : p.gammas) std::cout << ' ' << v;
      std::cout << "\nbetas";
      for (double v : p.betas) std::cout << ' ' << v;
      std::cout << '\n';
      const auto topo = nre::parse_topology(topology);
      const auto groups = nre::tfim_measurement_groups(topo, g);
      const nre::Circuit c = nre::build_tfim_qaoa(topo, g, p);
      double e = 0.0, e_ncc = 0.0;
      const auto rho = nre::simulate_density(c, {}, 1.0);
      const auto rho_ncc = nre::simulate_density(nre::to_noise_canceling(c), {}, 1.0);
      for (const auto& grp : groups) {
        e += nre::exact_expectation(rho, grp);
        e_ncc += nre::exact_expectation(rho_ncc, grp);
      }
      std::cout << "energy " << e << "\nground " << nre::exact_ground_energy(topo, g) << "\nncc " << e_ncc
                << "\nclifford_distance " << nre::clifford_distance(c) << '\n';
    }
  } catch (const nre::SignViolationError& e) {
    std::cerr << "sign violation: " << e.what() << '\n';
    return 3;
  } catch (const nre::DegenerateDispersionError& e) {
    std::cerr << "degenerate dispersion: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
