#include "nre/resampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nre/errors.hpp"
#include "nre/estimators.hpp"
#include "nre/statistics.hpp"
#include "parallel.hpp"

namespace nre {

namespace {

enum StreamTag : std::uint64_t { kBootstrapStream = 1, kResampleStream = 2 };

// Observed outcomes of one table with their multinomial probabilities.
struct Empirical {
  std::vector<std::uint64_t> outcomes;
  std::vector<double> probabilities;
  std::uint64_t shots = 0;
};

Empirical empirical(const CountsTable& counts) {
  if (counts.shots < 1) throw std::invalid_argument("cannot bootstrap a counts table with zero shots");
  Empirical e;
  e.shots = counts.shots;
  for (const auto& [index, count] : counts.counts) {
    e.outcomes.push_back(index);
    e.probabilities.push_back(static_cast<double>(count) / static_cast<double>(counts.shots));
  }
  return e;
}

// Multinomial draw by sequential conditional binomials; writes counts per outcome.
void multinomial(const Empirical& e, Rng& rng, std::vector<std::uint64_t>& out) {
  out.assign(e.outcomes.size(), 0);
  std::uint64_t remaining = e.shots;
  double mass = 1.0;
  for (std::size_t i = 0; i < e.outcomes.size() && remaining > 0; ++i) {
    if (i + 1 == e.outcomes.size() || e.probabilities[i] >= mass) {
      out[i] = remaining;
      break;
    }
    std::binomial_distribution<std::uint64_t> draw(remaining, std::clamp(e.probabilities[i] / mass, 0.0, 1.0));
    out[i] = draw(rng);
    remaining -= out[i];
    mass -= e.probabilities[i];
  }
}

// Per-outcome value sum_terms c (-1)^{popcount(o & support)}.
std::vector<double> outcome_values(const Empirical& e, const MeasurementGroup& group) {
  std::vector<double> v(e.outcomes.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (const PauliTerm& t : group.terms) {
      v[i] += (std::popcount(e.outcomes[i] & t.support) & 1) ? -t.coefficient : t.coefficient;
    }
  }
  return v;
}

}  // namespace

std::vector<CountsTable> bootstrap_counts(const CountsTable& counts, int replicates, Rng& rng) {
  if (replicates < 1) throw std::invalid_argument("bootstrap replicate count must be positive");
  const Empirical e = empirical(counts);
  std::vector<CountsTable> out;
  out.reserve(static_cast<std::size_t>(replicates));
  std::vector<std::uint64_t> k;
  for (int s = 0; s < replicates; ++s) {
    multinomial(e, rng, k);
    CountsTable rep;
    rep.qubits = counts.qubits;
    rep.shots = counts.shots;
    rep.circuit = counts.circuit;
    rep.group = counts.group;
    rep.lambda = counts.lambda;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i] > 0) rep.counts[e.outcomes[i]] = k[i];
    }
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<double> gaussian_resample(double mean, double stddev, int count, Rng& rng) {
  if (!(stddev >= 0.0)) throw std::invalid_argument("resampling standard deviation must be >= 0");
  if (count < 0) throw std::invalid_argument("resample count must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(count), mean);
  if (stddev == 0.0) return out;
  std::normal_distribution<double> normal(mean, stddev);
  for (double& v : out) v = normal(rng);
  return out;
}

void PipelineConfig::validate() const {
  if (bootstraps < 2) throw std::invalid_argument("pipeline needs at least 2 bootstraps");
  if (resamples < 2) throw std::invalid_argument("pipeline needs at least 2 resamples per bootstrap");
  if (!(weight_floor > 0.0)) throw std::invalid_argument("weight floor must be positive");
  if (!(max_discard_fraction >= 0.0 && max_discard_fraction <= 1.0)) {
    throw std::invalid_argument("max discard fraction must lie in [0, 1]");
  }
}

void PipelineInput::validate() const {
  const std::size_t m = grid.size();
  if (target.size() != m || ncc.size() != m) throw std::invalid_argument("counts grid does not match lambda grid");
  for (std::size_t i = 0; i < m; ++i) {
    if (target[i].size() != groups.size() || ncc[i].size() != groups.size()) {
      throw std::invalid_argument("counts grid does not match measurement groups");
    }
  }
  if (ncc_noiseless == 0.0 || !std::isfinite(ncc_noiseless)) {
    throw std::invalid_argument("noiseless ncc value must be finite and nonzero");
  }
}

BootstrapSet BootstrapSet::constant(std::span<const double> target, std::span<const double> ncc, int replicates) {
  if (target.size() != ncc.size()) throw std::invalid_argument("target and ncc lengths differ");
  BootstrapSet b;
  b.replicates = replicates;
  for (std::size_t i = 0; i < target.size(); ++i) {
    b.target.emplace_back(static_cast<std::size_t>(replicates), target[i]);
    b.ncc.emplace_back(static_cast<std::size_t>(replicates), ncc[i]);
  }
  b.target_observed.assign(target.begin(), target.end());
  b.ncc_observed.assign(ncc.begin(), ncc.end());
  b.compute_std();
  return b;
}

void BootstrapSet::compute_std() {
  target_std.clear();
  ncc_std.clear();
  for (const auto& s : target) target_std.push_back(sample_std(s));
  for (const auto& s : ncc) ncc_std.push_back(sample_std(s));
}

double aggregate_expectation(std::span<const CountsTable> per_group, std::span<const MeasurementGroup> groups) {
  if (per_group.size() != groups.size()) throw std::invalid_argument("one counts table per group expected");
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) total += expectation_from_counts(per_group[g], groups[g]);
  return total;
}

std::vector<std::vector<double>> bootstrap_observable(const CountsGrid& counts, std::span<const MeasurementGroup> groups,
                                                      int bootstraps, std::uint64_t seed, std::uint64_t stream) {
  if (bootstraps < 1) throw std::invalid_argument("bootstrap count must be positive");
  const std::size_t m = counts.size();
  const std::size_t ng = groups.size();
  const auto b = static_cast<std::size_t>(bootstraps);

  // One work unit per (lambda, group); contributions are summed afterwards in
  // a fixed order so the result does not depend on scheduling.
  const std::size_t units = m * ng;
  std::vector<std::vector<double>> contributions(units);
  detail::parallel_for(units, [&](std::size_t u) {
    const std::size_t i = u / ng;
    const std::size_t g = u % ng;
    if (counts[i].size() != ng) throw std::invalid_argument("counts grid does not match measurement groups");
    const CountsTable& table = counts[i][g];
    if (table.qubits != groups[g].width) throw std::invalid_argument("counts width does not match group");
    const Empirical e = empirical(table);
    const auto values = outcome_values(e, groups[g]);
    Rng rng = make_rng(seed, {kBootstrapStream, stream, i, g});
    std::vector<std::uint64_t> k;
    auto& out = contributions[u];
    out.resize(b);
    const double inv = 1.0 / static_cast<double>(e.shots);
    for (std::size_t s = 0; s < b; ++s) {
      multinomial(e, rng, k);
      double acc = 0.0;
      for (std::size_t o = 0; o < k.size(); ++o) acc += static_cast<double>(k[o]) * values[o];
      out[s] = acc * inv;
    }
  });
  std::vector<std::vector<double>> result(m, std::vector<double>(b, 0.0));
  for (std::size_t u = 0; u < units; ++u) {
    auto& dest = result[u / ng];
    for (std::size_t s = 0; s < b; ++s) dest[s] += contributions[u][s];
  }
  return result;
}

BootstrapSet bootstrap_expectations(const PipelineInput& input, int bootstraps, std::uint64_t seed) {
  input.validate();
  BootstrapSet set;
  set.replicates = bootstraps;
  set.target = bootstrap_observable(input.target, input.groups, bootstraps, seed, 0);
  set.ncc = bootstrap_observable(input.ncc, input.groups, bootstraps, seed, 1);
  for (std::size_t i = 0; i < input.grid.size(); ++i) {
    set.target_observed.push_back(aggregate_expectation(input.target[i], input.groups));
    set.ncc_observed.push_back(aggregate_expectation(input.ncc[i], input.groups));
  }
  set.compute_std();
  return set;
}

EstimateDistribution EstimateDistribution::from_samples(std::vector<double> samples) {
  EstimateDistribution d;
  d.samples = std::move(samples);
  if (!d.samples.empty()) {
    d.mean = nre::mean(d.samples);
    d.stddev = sample_std(d.samples);
  }
  return d;
}

PipelineResult run_nre_on_bootstraps(const BootstrapSet& boot, const LambdaGrid& grid, double ncc_noiseless,
                                     const PipelineConfig& config) {
  config.validate();
  const std::size_t m = grid.size();
  if (boot.target.size() != m || boot.ncc.size() != m) throw std::invalid_argument("bootstrap set does not match grid");
  if (!config.baseline_only && m < 3) {
    throw std::invalid_argument("the dispersion regression needs at least 3 noise scale factors");
  }
  const auto b = static_cast<std::size_t>(boot.replicates);
  const auto r = static_cast<std::size_t>(config.resamples);
  const auto weights = taylor_weights(fd_coefficients(grid), grid.first());

  std::vector<double> finals(b), baselines(b);
  std::vector<std::uint64_t> discarded(b, 0);
  std::vector<std::vector<DispersionSample>> pooled(b);

  detail::parallel_for(b, [&](std::size_t s) {
    Rng rng = make_rng(config.seed, {kResampleStream, s});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> dispersion, estimate;
    dispersion.reserve(r);
    estimate.reserve(r);
    std::vector<double> t(m), n(m);
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t i = 0; i < m; ++i) {
        t[i] = boot.target[i][s] + boot.target_std[i] * normal(rng);
        n[i] = boot.ncc[i][s] + boot.ncc_std[i] * normal(rng);
      }
      const BaselineOutcome out = evaluate_baseline(t, n, ncc_noiseless, weights);
      if (out.status == BaselineStatus::SignViolation) {
        ++discarded[s];
        continue;
      }
      if (out.status == BaselineStatus::DegenerateDispersion) {
        throw DegenerateDispersionError("bootstrap " + std::to_string(s) +
                                        ": target series has zero dispersion while the auxiliary series varies");
      }
      dispersion.push_back(out.result.dispersion);
      estimate.push_back(out.result.estimate);
    }
    if (static_cast<double>(discarded[s]) > config.max_discard_fraction * static_cast<double>(r) || estimate.size() < 2) {
      throw SignViolationError("bootstrap " + std::to_string(s) + ": " + std::to_string(discarded[s]) + " of " +
                               std::to_string(r) +
                               " resamples put the noisy ncc value on the other side of zero; the constant-sign "
                               "assumption behind the log-ratio term fails");
    }
    baselines[s] = median(estimate);
    finals[s] = config.baseline_only ? baselines[s]
                                     : weighted_linear_extrapolation(dispersion, estimate, config.weight_floor).value;
    const std::size_t keep = std::min(config.pooled_per_bootstrap, estimate.size());
    pooled[s].reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) pooled[s].push_back({dispersion[k], estimate[k]});
  });

  PipelineResult result;
  result.final_estimates = EstimateDistribution::from_samples(std::move(finals));
  result.baseline_estimates = EstimateDistribution::from_samples(std::move(baselines));
  result.baseline_evaluations = static_cast<std::uint64_t>(b) * r;
  for (auto d : discarded) result.discarded += d;
  result.discard_rate = static_cast<double>(result.discarded) / static_cast<double>(result.baseline_evaluations);
  for (auto& p : pooled) result.pooled.insert(result.pooled.end(), p.begin(), p.end());
  result.target_observed = boot.target_observed;
  result.ncc_observed = boot.ncc_observed;
  return result;
}

PipelineResult run_nre_pipeline(const PipelineInput& input, const PipelineConfig& config) {
  config.validate();
  input.validate();
  const BootstrapSet boot = bootstrap_expectations(input, config.bootstraps, config.seed);
  return run_nre_on_bootstraps(boot, input.grid, input.ncc_noiseless, config);
}

}  // namespace nre
