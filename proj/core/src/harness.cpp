#include "nre/harness.hpp"

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nre/errors.hpp"
#include "nre/statistics.hpp"

namespace nre {

namespace {

// Observed over noiseless value; NaN when the noiseless value vanishes.
double ratio(double observed, double noiseless) {
  return std::abs(noiseless) > 1e-12 ? observed / noiseless : std::numeric_limits<double>::quiet_NaN();
}

using nlohmann::json;

enum StreamTag : std::uint64_t { kSampleStream = 11, kZneBootstrapStream = 12, kSweepStream = 13, kRawStream = 14 };

double energy(const DensityMatrix& rho, std::span<const MeasurementGroup> groups) {
  double e = 0.0;
  for (const auto& g : groups) e += exact_expectation(rho, g);
  return e;
}

CountsTable merge_counts(const CountsTable& a, const CountsTable& b) {
  CountsTable m = a;
  m.shots += b.shots;
  for (const auto& [index, count] : b.counts) m.counts[index] += count;
  return m;
}

std::vector<MeasurementGroup> groups_for(const Topology& topology, double g) {
  auto arr = tfim_measurement_groups(topology, g);
  return {arr.begin(), arr.end()};
}

// Shortest round-trip text, independent of the global locale.
std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

json method_json(const MethodResult& r) {
  json j{{"ok", r.ok}};
  if (r.ok) {
    j["estimate"] = r.estimate;
    j["std"] = r.stddev;
    j["relative_bias"] = r.relative_bias;
  } else {
    j["error"] = r.error;
  }
  return j;
}

template <typename Fn>
MethodResult guarded(double truth, Fn&& fn) {
  MethodResult r;
  try {
    std::tie(r.estimate, r.stddev) = fn();
    r.relative_bias = relative_bias(r.estimate, truth);
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::Nre: return "nre";
    case Method::NreBaseline: return "nre-baseline";
    case Method::Zne: return "zne";
    case Method::Richardson: return "richardson";
    case Method::Urbanek: return "urbanek";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::Nre, Method::NreBaseline, Method::Zne, Method::Richardson,
                                           Method::Urbanek};
  return methods;
}

QaoaParameters default_qaoa_parameters() {
  return {{-0.085029758690073592, -0.1186331669942926, -0.17574166272326705, -0.14345077387557637},
          {-0.47675570439975656, -0.43853424133013585, -0.25115491492423447, -0.098998010514286444}};
}

void ExperimentConfig::validate() const {
  const Topology topo = parse_topology(topology);
  topo.validate();
  if (topo.edges.empty()) throw std::invalid_argument("topology needs at least one edge");
  if (!std::isfinite(g)) throw std::invalid_argument("g must be finite");
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (qaoa.gammas.size() != static_cast<std::size_t>(layers) || qaoa.betas.size() != static_cast<std::size_t>(layers)) {
    throw std::invalid_argument("QAOA parameter vectors must have one entry per layer");
  }
  const LambdaGrid lambda_grid(lambdas);
  if (mode == AmplificationMode::FoldedCircuit && lambda_grid.first() < 1.0) {
    throw std::invalid_argument("folding needs scale factors >= 1");
  }
  if (mode == AmplificationMode::Perturbed && spacing.size() + 1 != lambdas.size()) {
    throw std::invalid_argument("perturbed mode needs one implemented spacing per lambda gap");
  }
  const auto actual = implemented_lambdas();
  const double lambda_max = *std::max_element(actual.begin(), actual.end());
  if (f_values.empty()) throw std::invalid_argument("f_values is empty");
  for (double f : f_values) {
    if (!(f >= 0.0 && f < 1.0)) throw std::invalid_argument("each f must lie in [0, 1)");
    const double worst = mode == AmplificationMode::FoldedCircuit ? f : f * lambda_max;
    if (!(worst < 1.0)) throw std::invalid_argument("f * lambda_max must be < 1");
  }
  if (bootstraps < 2 || resamples < 2) throw std::invalid_argument("bootstraps and resamples must be >= 2");
  if (total_shots < static_cast<std::uint64_t>(bootstraps)) throw std::invalid_argument("total shots must be >= bootstraps");
  const std::uint64_t coordinates = 2 * lambdas.size() * 2;
  if (total_shots < coordinates) throw std::invalid_argument("shot budget too small to give every coordinate one shot");
  if (methods.empty()) throw std::invalid_argument("no methods requested");
  if (std::find(methods.begin(), methods.end(), Method::Nre) != methods.end() && lambdas.size() < 3) {
    throw std::invalid_argument("NRE's dispersion regression needs at least 3 noise scale factors");
  }
  if (!(weight_floor > 0.0)) throw std::invalid_argument("weight floor must be positive");
}

std::vector<double> ExperimentConfig::implemented_lambdas() const {
  if (mode != AmplificationMode::Perturbed) return lambdas;
  std::vector<double> actual{lambdas.front()};
  for (double t : spacing) actual.push_back(actual.back() + t);
  return actual;
}

ExperimentConfig load_config(std::istream& in) {
  const json j = json::parse(in);
  ExperimentConfig c;
  c.topology = j.value("topology", c.topology);
  c.g = j.value("g", c.g);
  c.layers = j.value("layers", c.layers);
  if (j.contains("gammas") || j.contains("betas")) {
    c.qaoa.gammas = j.at("gammas").get<std::vector<double>>();
    c.qaoa.betas = j.at("betas").get<std::vector<double>>();
  }
  if (j.contains("lambdas")) {
    c.lambdas = j.at("lambdas").get<std::vector<double>>();
  } else if (j.contains("lambda_grid")) {
    const auto& lg = j.at("lambda_grid");
    const auto grid = LambdaGrid::uniform(lg.at("first").get<double>(), lg.at("h").get<double>(), lg.at("points").get<int>());
    c.lambdas.assign(grid.values().begin(), grid.values().end());
  }
  c.f_values = j.value("f_values", c.f_values);
  c.total_shots = j.value("total_shots", c.total_shots);
  c.bootstraps = j.value("bootstraps", c.bootstraps);
  c.resamples = j.value("resamples", c.resamples);
  c.weight_floor = j.value("weight_floor", c.weight_floor);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("amplification_mode")) c.mode = parse_amplification_mode(j.at("amplification_mode").get<std::string>());
  c.spacing = j.value("spacing", c.spacing);
  c.seed = j.value("seed", c.seed);
  c.zne_offset = j.value("zne_offset", c.zne_offset);
  if (j.contains("urbanek_fit")) {
    const auto kind = j.at("urbanek_fit").get<std::string>();
    if (kind == "linear") c.urbanek_fit = FitKind::Linear;
    else if (kind == "exponential") c.urbanek_fit = FitKind::Exponential;
    else throw std::invalid_argument("urbanek_fit must be 'linear' or 'exponential'");
  }
  c.pooled_per_bootstrap = j.value("pooled_per_bootstrap", c.pooled_per_bootstrap);
  c.max_qubits = j.value("max_qubits", c.max_qubits);

  if (const char* env = std::getenv("NRE_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw std::invalid_argument("NRE_SEED must be an unsigned integer");
    c.seed = seed;
  }
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  json j{{"topology", c.topology},
         {"g", c.g},
         {"layers", c.layers},
         {"gammas", c.qaoa.gammas},
         {"betas", c.qaoa.betas},
         {"lambdas", c.lambdas},
         {"f_values", c.f_values},
         {"total_shots", c.total_shots},
         {"bootstraps", c.bootstraps},
         {"resamples", c.resamples},
         {"weight_floor", c.weight_floor},
         {"methods", methods},
         {"amplification_mode", to_string(c.mode)},
         {"spacing", c.spacing},
         {"seed", c.seed},
         {"zne_offset", c.zne_offset},
         {"urbanek_fit", c.urbanek_fit == FitKind::Linear ? "linear" : "exponential"},
         {"pooled_per_bootstrap", c.pooled_per_bootstrap},
         {"max_qubits", c.max_qubits}};
  return j.dump(2);
}

std::uint64_t ShotAllocation::total() const {
  std::uint64_t t = 0;
  for (const auto& role : shots)
    for (const auto& lam : role)
      for (auto s : lam) t += s;
  return t;
}

ShotAllocation allocate_shots(std::uint64_t total, std::size_t lambdas, std::size_t groups) {
  const std::uint64_t coords = 2 * lambdas * groups;
  if (coords == 0 || total < coords) throw std::invalid_argument("shot budget too small to give every coordinate one shot");
  const std::uint64_t base = total / coords;
  std::uint64_t extra = total % coords;
  ShotAllocation a;
  a.shots.assign(2, std::vector<std::vector<std::uint64_t>>(lambdas, std::vector<std::uint64_t>(groups, base)));
  for (auto& role : a.shots)
    for (auto& lam : role)
      for (auto& s : lam)
        if (extra > 0) {
          ++s;
          --extra;
        }
  return a;
}

double relative_bias(double estimate, double truth) {
  if (truth == 0.0) throw std::invalid_argument("relative bias undefined for a zero reference value");
  return std::abs(estimate - truth) / std::abs(truth);
}

CompareResult run_compare_single(const ExperimentConfig& config, double f, std::uint64_t seed) {
  config.validate();
  const Topology topology = parse_topology(config.topology);
  const auto groups = groups_for(topology, config.g);
  const Circuit target = build_tfim_qaoa(topology, config.g, config.qaoa);
  const Circuit ncc = to_noise_canceling(target);
  const LambdaGrid grid = config.grid();
  const auto actual = config.implemented_lambdas();
  const std::size_t m = grid.size();
  const std::size_t ng = groups.size();

  CompareResult out;
  out.f = f;
  out.seed = seed;
  out.target_counts = gate_counts(target);
  const NoiseSpec noiseless{0.0, AmplificationMode::RateScaled, {}};
  out.truth = energy(simulate_density(target, noiseless, 1.0, config.max_qubits), groups);
  out.ncc_noiseless = energy(simulate_density(ncc, noiseless, 1.0, config.max_qubits), groups);
  out.ground_energy = exact_ground_energy(topology, config.g);

  NoiseSpec noise{f, config.mode == AmplificationMode::FoldedCircuit ? AmplificationMode::FoldedCircuit
                                                                      : AmplificationMode::RateScaled, {}};
  const ShotAllocation alloc = allocate_shots(config.total_shots, m, ng);

  PipelineInput input;
  input.grid = grid;
  input.groups = groups;
  input.ncc_noiseless = out.ncc_noiseless;
  input.target.assign(m, {});
  input.ncc.assign(m, {});
  CountsGrid zne_counts(m);

  for (std::size_t i = 0; i < m; ++i) {
    DensityMatrix rho_t, rho_n;
    if (config.mode == AmplificationMode::FoldedCircuit) {
      rho_t = simulate_density(fold_global(target, actual[i]), noise, 1.0, config.max_qubits);
      rho_n = simulate_density(fold_global(ncc, actual[i]), noise, 1.0, config.max_qubits);
    } else {
      rho_t = simulate_density(target, noise, actual[i], config.max_qubits);
      rho_n = simulate_density(ncc, noise, actual[i], config.max_qubits);
    }
    LambdaPoint p;
    p.lambda = grid[i];
    p.implemented_lambda = actual[i];
    p.target_exact = energy(rho_t, groups);
    p.ncc_exact = energy(rho_n, groups);

    for (std::size_t g = 0; g < ng; ++g) {
      Rng rt = make_rng(seed, {kSampleStream, 0, i, g});
      Rng rn = make_rng(seed, {kSampleStream, 1, i, g});
      Rng rz = make_rng(seed, {kSampleStream, 2, i, g});
      CountsTable ct = sample_counts(rho_t, groups[g], alloc.shots[0][i][g], rt);
      CountsTable cn = sample_counts(rho_n, groups[g], alloc.shots[1][i][g], rn);
      // ZNE spends the ncc share of the budget on extra target shots.
      CountsTable cz = sample_counts(rho_t, groups[g], alloc.shots[1][i][g], rz);
      for (CountsTable* c : {&ct, &cn, &cz}) {
        c->group = static_cast<int>(g);
        c->lambda = grid[i];
      }
      ct.circuit = cz.circuit = target.label();
      cn.circuit = ncc.label();
      zne_counts[i].push_back(merge_counts(ct, cz));
      input.target[i].push_back(std::move(ct));
      input.ncc[i].push_back(std::move(cn));
    }
    p.target_observed = aggregate_expectation(input.target[i], groups);
    p.ncc_observed = aggregate_expectation(input.ncc[i], groups);
    p.target_ratio = ratio(p.target_observed, out.truth);
    p.ncc_ratio = ratio(p.ncc_observed, out.ncc_noiseless);
    out.points.push_back(p);
  }

  auto wants = [&](Method method) {
    return std::find(config.methods.begin(), config.methods.end(), method) != config.methods.end();
  };

  LambdaSeries target_series{grid, {}, CircuitRole::Target};
  LambdaSeries ncc_series{grid, {}, CircuitRole::NoiseCanceling};
  LambdaSeries zne_series{grid, {}, CircuitRole::Target};
  for (std::size_t i = 0; i < m; ++i) {
    target_series.values.push_back(out.points[i].target_observed);
    ncc_series.values.push_back(out.points[i].ncc_observed);
    zne_series.values.push_back(aggregate_expectation(zne_counts[i], groups));
  }

  const BootstrapSet boot = bootstrap_expectations(input, config.bootstraps, seed);

  if (wants(Method::Nre) || wants(Method::NreBaseline)) {
    PipelineConfig pc;
    pc.bootstraps = config.bootstraps;
    pc.resamples = config.resamples;
    pc.weight_floor = config.weight_floor;
    pc.seed = seed;
    pc.baseline_only = !wants(Method::Nre);
    pc.pooled_per_bootstrap = config.pooled_per_bootstrap;
    try {
      PipelineResult pr = run_nre_on_bootstraps(boot, grid, out.ncc_noiseless, pc);
      out.baseline_mean = pr.baseline_estimates.mean;
      out.baseline_std = pr.baseline_estimates.stddev;
      out.discard_rate = pr.discard_rate;
      out.pooled = std::move(pr.pooled);
      if (wants(Method::Nre)) {
        out.methods[Method::Nre] = guarded(out.truth, [&] {
          return std::pair{pr.final_estimates.mean, pr.final_estimates.stddev};
        });
      }
      if (wants(Method::NreBaseline)) {
        out.methods[Method::NreBaseline] = guarded(out.truth, [&] {
          return std::pair{pr.baseline_estimates.mean, pr.baseline_estimates.stddev};
        });
      }
    } catch (const std::exception& e) {
      for (Method method : {Method::Nre, Method::NreBaseline}) {
        if (wants(method)) out.methods[method] = MethodResult{0, 0, 0, false, e.what()};
      }
    }
  }

  // Comparator spread: the same estimator on every bootstrap replicate.
  auto bootstrap_spread = [&](const std::vector<std::vector<double>>& samples, auto&& estimator) {
    std::vector<double> values;
    for (int s = 0; s < config.bootstraps; ++s) {
      LambdaSeries series{grid, {}, CircuitRole::Target};
      for (std::size_t i = 0; i < m; ++i) series.values.push_back(samples[i][static_cast<std::size_t>(s)]);
      values.push_back(estimator(series, s));
    }
    return sample_std(values);
  };

  if (wants(Method::Zne) || wants(Method::Richardson)) {
    const auto zne_boot = bootstrap_observable(zne_counts, groups, config.bootstraps, seed, kZneBootstrapStream);
    if (wants(Method::Zne)) {
      out.methods[Method::Zne] = guarded(out.truth, [&] {
        const double est = exponential_fit_zne(zne_series, config.zne_offset).value;
        const double sd = bootstrap_spread(zne_boot, [&](const LambdaSeries& s, int) {
          return exponential_fit_zne(s, config.zne_offset).value;
        });
        return std::pair{est, sd};
      });
    }
    if (wants(Method::Richardson)) {
      out.methods[Method::Richardson] = guarded(out.truth, [&] {
        const double sd = bootstrap_spread(zne_boot, [](const LambdaSeries& s, int) { return richardson_zne(s); });
        return std::pair{richardson_zne(zne_series), sd};
      });
    }
  }

  if (wants(Method::Urbanek)) {
    out.methods[Method::Urbanek] = guarded(out.truth, [&] {
      const double est = urbanek_estimate(target_series, ncc_series, out.ncc_noiseless, config.urbanek_fit).value;
      const double sd = bootstrap_spread(boot.target, [&](const LambdaSeries& s, int b) {
        LambdaSeries n{grid, {}, CircuitRole::NoiseCanceling};
        for (std::size_t i = 0; i < m; ++i) n.values.push_back(boot.ncc[i][static_cast<std::size_t>(b)]);
        return urbanek_estimate(s, n, out.ncc_noiseless, config.urbanek_fit).value;
      });
      return std::pair{est, sd};
    });
  }
  return out;
}

RunReport run_compare(const ExperimentConfig& config) {
  config.validate();
  RunReport report;
  report.config = config;
  for (double f : config.f_values) report.runs.push_back(run_compare_single(config, f, config.seed));
  return report;
}

OverheadFit fit_overhead(const std::vector<double>& nf, const std::vector<double>& c_em) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < nf.size(); ++i) {
    if (c_em[i] > 0.0 && std::isfinite(c_em[i])) {
      x.push_back(nf[i]);
      y.push_back(std::log(c_em[i]));
    }
  }
  OverheadFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const std::vector<double> ones(x.size(), 1.0);
  const FitResult line = weighted_line_fit(x, y, ones);
  fit.alpha = std::exp(line.parameters[0]);
  fit.beta = line.parameters[1];
  return fit;
}

OverheadTable sweep_overhead(const ExperimentConfig& config, int repetitions) {
  config.validate();
  if (repetitions < 5) throw std::invalid_argument("overhead sweep needs at least 5 repetitions");
  const Topology topology = parse_topology(config.topology);
  const auto groups = groups_for(topology, config.g);
  const Circuit target = build_tfim_qaoa(topology, config.g, config.qaoa);
  const double lambda1 = config.implemented_lambdas().front();

  OverheadTable table;
  table.noisy_operations = static_cast<double>(gate_counts(target).two_qubit);
  std::map<Method, std::pair<std::vector<double>, std::vector<double>>> fit_points;

  for (double f : config.f_values) {
    std::map<Method, std::vector<double>> estimates;
    std::map<Method, bool> failed;
    for (int k = 0; k < repetitions; ++k) {
      const std::uint64_t seed = derive_seed(config.seed, {kSweepStream, static_cast<std::uint64_t>(k)});
      CompareResult run = run_compare_single(config, f, seed);
      for (const auto& [method, result] : run.methods) {
        if (result.ok) estimates[method].push_back(result.estimate);
        else failed[method] = true;
      }
      table.runs.push_back(std::move(run));
    }

    // Raw estimator: whole budget on the target at lambda_1, split over groups.
    const NoiseSpec noise{f, config.mode == AmplificationMode::FoldedCircuit ? AmplificationMode::FoldedCircuit
                                                                              : AmplificationMode::RateScaled, {}};
    const DensityMatrix rho = config.mode == AmplificationMode::FoldedCircuit
                                  ? simulate_density(fold_global(target, lambda1), noise, 1.0, config.max_qubits)
                                  : simulate_density(target, noise, lambda1, config.max_qubits);
    std::vector<double> raw;
    for (int k = 0; k < repetitions; ++k) {
      const std::uint64_t seed = derive_seed(config.seed, {kSweepStream, static_cast<std::uint64_t>(k)});
      double e = 0.0;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        Rng rng = make_rng(seed, {kRawStream, g});
        std::uint64_t shots = config.total_shots / groups.size() + (g < config.total_shots % groups.size() ? 1 : 0);
        e += expectation_from_counts(sample_counts(rho, groups[g], shots, rng), groups[g]);
      }
      raw.push_back(e);
    }
    const double raw_var = sample_variance(raw);

    for (Method method : config.methods) {
      OverheadRow row;
      row.f = f;
      row.method = method;
      row.raw_variance = raw_var;
      const auto& est = estimates[method];
      row.valid = !failed[method] && est.size() >= 2 && raw_var > 0.0;
      row.variance = est.size() >= 2 ? sample_variance(est) : 0.0;
      row.c_em = raw_var > 0.0 ? row.variance / raw_var : 0.0;
      if (row.variance <= 0.0) row.valid = false;
      if (row.valid) {
        fit_points[method].first.push_back(table.noisy_operations * f);
        fit_points[method].second.push_back(row.c_em);
      }
      table.rows.push_back(row);
    }
  }
  for (const auto& [method, pts] : fit_points) table.fits[method] = fit_overhead(pts.first, pts.second);
  return table;
}

std::string report_to_json(const RunReport& report) {
  json runs = json::array();
  for (const auto& r : report.runs) {
    json points = json::array();
    for (const auto& p : r.points) {
      points.push_back({{"lambda", p.lambda},
                        {"implemented_lambda", p.implemented_lambda},
                        {"target_exact", p.target_exact},
                        {"ncc_exact", p.ncc_exact},
                        {"target_observed", p.target_observed},
                        {"ncc_observed", p.ncc_observed},
                        {"target_ratio", p.target_ratio},
                        {"ncc_ratio", p.ncc_ratio}});
    }
    json methods = json::object();
    for (const auto& [m, res] : r.methods) methods[to_string(m)] = method_json(res);
    runs.push_back({{"f", r.f},
                    {"seed", r.seed},
                    {"truth", r.truth},
                    {"ncc_noiseless", r.ncc_noiseless},
                    {"ground_energy", r.ground_energy},
                    {"gate_counts",
                     {{"total", r.target_counts.total}, {"two_qubit", r.target_counts.two_qubit}, {"depth", r.target_counts.depth}}},
                    {"per_lambda", points},
                    {"methods", methods},
                    {"baseline_mean", r.baseline_mean},
                    {"baseline_std", r.baseline_std},
                    {"discard_rate", r.discard_rate}});
  }
  const json config = json::parse(config_to_json(report.config));
  const auto hash = std::hash<std::string>{}(config.dump());
  json j{{"config", config}, {"provenance", {{"seed", report.config.seed}, {"config_hash", hash}}}, {"runs", runs}};
  return j.dump(2);
}

void write_lambda_csv(std::ostream& out, const RunReport& report) {
  out << "f,lambda,implemented_lambda,target_exact,ncc_exact,target_observed,ncc_observed,target_ratio,ncc_ratio\n";
  for (const auto& r : report.runs) {
    for (const auto& p : r.points) {
      out << format_double(r.f) << ',' << format_double(p.lambda) << ',' << format_double(p.implemented_lambda) << ','
          << format_double(p.target_exact) << ',' << format_double(p.ncc_exact) << ','
          << format_double(p.target_observed) << ',' << format_double(p.ncc_observed) << ','
          << format_double(p.target_ratio) << ',' << format_double(p.ncc_ratio) << '\n';
    }
  }
}

void write_overhead_csv(std::ostream& out, const OverheadTable& table) {
  out << "f,method,C_EM,alpha,beta\n";
  for (const auto& row : table.rows) {
    const auto it = table.fits.find(row.method);
    const OverheadFit fit = it != table.fits.end() ? it->second : OverheadFit{};
    out << format_double(row.f) << ',' << to_string(row.method) << ','
        << (row.valid ? format_double(row.c_em) : std::string("nan")) << ',' << format_double(fit.alpha) << ','
        << format_double(fit.beta) << '\n';
  }
}

std::string pipeline_report_json(const PipelineResult& result, const LambdaGrid& grid, const PipelineConfig& config) {
  json per_lambda = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    per_lambda.push_back({{"lambda", grid[i]}, {"target", result.target_observed.at(i)}, {"ncc", result.ncc_observed.at(i)}});
  }
  json j{{"final_mean", result.final_estimates.mean},
         {"final_std", result.final_estimates.stddev},
         {"baseline_mean", result.baseline_estimates.mean},
         {"baseline_std", result.baseline_estimates.stddev},
         {"discard_rate", result.discard_rate},
         {"B", config.bootstraps},
         {"R", config.resamples},
         {"lambda_grid", std::vector<double>(grid.values().begin(), grid.values().end())},
         {"per_lambda_expectations", per_lambda}};
  return j.dump(2);
}

namespace {

struct QaoaObjective {
  Topology topology;
  double g;
  int layers;
  std::vector<MeasurementGroup> groups;
};

double qaoa_energy(const gsl_vector* x, void* params) {
  const auto* obj = static_cast<const QaoaObjective*>(params);
  QaoaParameters p;
  for (int k = 0; k < obj->layers; ++k) {
    p.gammas.push_back(gsl_vector_get(x, static_cast<std::size_t>(k)));
    p.betas.push_back(gsl_vector_get(x, static_cast<std::size_t>(obj->layers + k)));
  }
  const Circuit c = build_tfim_qaoa(obj->topology, obj->g, p);
  return energy(simulate_density(c, NoiseSpec{}, 1.0), obj->groups);
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

}  // namespace

QaoaParameters optimize_qaoa(const Topology& topology, double g, int layers, std::uint64_t seed, int restarts,
                             double tolerance) {
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  QaoaObjective obj{topology, g, layers, groups_for(topology, g)};
  const auto dim = static_cast<std::size_t>(2 * layers);
  gsl_multimin_function fn{qaoa_energy, dim, &obj};

  struct Candidate {
    QaoaParameters params;
    double energy;
  };
  std::vector<Candidate> optima;
  std::uniform_real_distribution<double> start(0.05, 0.4);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(seed + static_cast<std::uint64_t>(r));
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(dim), gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(dim), gsl_vector_free);
    for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x.get(), i, start(rng));
    gsl_vector_set_all(step.get(), 0.1);

    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
    gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());
    for (int iter = 0; iter < 20000; ++iter) {
      if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(minimizer.get()), 1e-10) == GSL_SUCCESS) break;
    }
    Candidate c;
    const gsl_vector* best = gsl_multimin_fminimizer_x(minimizer.get());
    for (int k = 0; k < layers; ++k) {
      c.params.gammas.push_back(gsl_vector_get(best, static_cast<std::size_t>(k)));
      c.params.betas.push_back(gsl_vector_get(best, static_cast<std::size_t>(layers + k)));
    }
    c.energy = gsl_multimin_fminimizer_minimum(minimizer.get());
    optima.push_back(c);
    for (double& v : c.params.gammas) v = -v;
    for (double& v : c.params.betas) v = -v;
    optima.push_back(c);
  }

  double lowest = optima.front().energy;
  for (const auto& c : optima) lowest = std::min(lowest, c.energy);
  const Candidate* chosen = nullptr;
  double chosen_distance = 0.0;
  for (const auto& c : optima) {
    if (c.energy > lowest + tolerance) continue;
    const double d = clifford_distance(build_tfim_qaoa(topology, g, c.params));
    if (chosen == nullptr || d < chosen_distance) {
      chosen = &c;
      chosen_distance = d;
    }
  }
  return chosen->params;
}

}  // namespace nre
