#include "fwm/counting.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <nlohmann/json.hpp>

#include "fwm/error.hpp"
#include "fwm/parallel.hpp"
#include "fwm/random.hpp"

namespace fwm {

void SourceState::validate() const {
  if (schmidt_lambdas.empty()) throw DomainError("source needs at least one Schmidt coefficient");
  double sum = 0.0;
  for (double l : schmidt_lambdas) {
    if (!(l >= 0.0)) throw DomainError("Schmidt coefficients must be non-negative");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw DomainError(fmt::format("Schmidt coefficients sum to {}, not 1", sum));
  if (!(gain >= 0.0) || !std::isfinite(gain)) throw DomainError("gain r0 must be non-negative");
}

double SourceState::mean_pairs() const {
  double mean = 0.0;
  for (double l : schmidt_lambdas) {
    const double s = std::sinh(gain * std::sqrt(l));
    mean += s * s;
  }
  return mean;
}

PairDistribution pair_number_distribution(const SourceState& state) {
  state.validate();
  const std::size_t len = state.n_max + 1;
  std::vector<double> total(len, 0.0);
  total[0] = 1.0;
  std::vector<double> next(len);
  for (double lambda : state.schmidt_lambdas) {
    const double t = std::pow(std::tanh(state.gain * std::sqrt(lambda)), 2);
    if (t == 0.0) continue;
    // convolve with (1 - t) t^k
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t n = 0; n < len; ++n) {
      double geo = 1.0 - t;
      for (std::size_t k = 0; k <= n; ++k) {
        next[n] += total[n - k] * geo;
        geo *= t;
      }
    }
    total.swap(next);
  }
  double mass = 0.0;
  for (double p : total) mass += p;
  const double deficit = std::max(0.0, 1.0 - mass);
  if (deficit > kTruncationTolerance) {
    throw TruncationError(fmt::format("n_max = {} keeps only {:.9f} of the pair distribution; raise n_max",
                                      state.n_max, mass));
  }
  return PairDistribution{std::move(total), deficit};
}

void DetectorModel::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw DomainError("detector efficiency must lie in [0, 1]");
  if (!(dark_click_prob >= 0.0 && dark_click_prob <= 1.0)) throw DomainError("dark-click probability must lie in [0, 1]");
}

double click_prob_given_n(const DetectorModel& detector, std::size_t n) {
  detector.validate();
  return 1.0 - (1.0 - detector.dark_click_prob) * std::pow(1.0 - detector.efficiency, static_cast<double>(n));
}

void TmdModel::validate() const {
  if (n_bins == 0 || n_bins > kMaxTmdBins) throw DomainError(fmt::format("TMD needs 1..{} bins", kMaxTmdBins));
  if (!(bin_efficiency >= 0.0 && bin_efficiency <= 1.0)) throw DomainError("bin efficiency must lie in [0, 1]");
  if (!bin_probabilities.empty()) {
    if (bin_probabilities.size() != n_bins) throw DomainError("bin_probabilities length must equal n_bins");
    double sum = 0.0;
    for (double p : bin_probabilities) {
      if (!(p >= 0.0)) throw DomainError("bin probabilities must be non-negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError(fmt::format("bin probabilities sum to {}, not 1", sum));
  }
}

std::vector<double> TmdModel::routing() const {
  if (!bin_probabilities.empty()) return bin_probabilities;
  return std::vector<double>(n_bins, 1.0 / static_cast<double>(n_bins));
}

namespace {

// Applies per-bin dark clicks to a distribution over occupied-bin subsets
// and reduces it to a click-count distribution.
std::vector<double> clicks_from_subsets(const std::vector<double>& subsets, std::size_t bins, double dark) {
  std::vector<double> out(bins + 1, 0.0);
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    if (subsets[s] == 0.0) continue;
    const auto lit = static_cast<std::size_t>(std::popcount(s));
    const std::size_t free = bins - lit;
    // binomial(free, dark)
    double coef = 1.0;
    for (std::size_t extra = 0; extra <= free; ++extra) {
      const double p = coef * std::pow(dark, static_cast<double>(extra)) *
                       std::pow(1.0 - dark, static_cast<double>(free - extra));
      out[lit + extra] += subsets[s] * p;
      coef = coef * static_cast<double>(free - extra) / static_cast<double>(extra + 1);
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> tmd_click_table(const TmdModel& tmd, const DetectorModel& detector,
                                                 std::size_t n_max) {
  tmd.validate();
  detector.validate();
  const std::size_t bins = tmd.n_bins;
  const auto route = tmd.routing();
  const double survive = detector.efficiency * tmd.bin_efficiency;
  std::vector<double> subsets(std::size_t{1} << bins, 0.0);
  subsets[0] = 1.0;
  std::vector<double> next(subsets.size());
  std::vector<std::vector<double>> table;
  table.reserve(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    table.push_back(clicks_from_subsets(subsets, bins, detector.dark_click_prob));
    if (n == n_max) break;
    for (std::size_t s = 0; s < subsets.size(); ++s) next[s] = subsets[s] * (1.0 - survive);
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      if (subsets[s] == 0.0) continue;
      for (std::size_t b = 0; b < bins; ++b) next[s | (std::size_t{1} << b)] += subsets[s] * survive * route[b];
    }
    subsets.swap(next);
  }
  return table;
}

std::vector<double> tmd_click_distribution(const TmdModel& tmd, const DetectorModel& detector, std::size_t n) {
  return tmd_click_table(tmd, detector, n).back();
}

std::vector<std::vector<double>> joint_click_distribution(const SourceState& state, const DetectionChains& chains) {
  const auto pairs = pair_number_distribution(state);
  const auto table = tmd_click_table(chains.signal_tmd, chains.signal_detector, state.n_max);
  const std::size_t bins = chains.signal_tmd.n_bins;
  std::vector<std::vector<double>> joint(bins + 1, std::vector<double>(2, 0.0));
  for (std::size_t n = 0; n <= state.n_max; ++n) {
    const double idler = click_prob_given_n(chains.idler_detector, n);
    for (std::size_t m = 0; m <= bins; ++m) {
      const double p = pairs.probabilities[n] * table[n][m];
      joint[m][1] += p * idler;
      joint[m][0] += p * (1.0 - idler);
    }
  }
  return joint;
}

double conditional_idler_click_prob(const SourceState& state, const DetectionChains& chains, std::size_t m) {
  if (m > chains.signal_tmd.n_bins) {
    throw ConditionError(fmt::format("cannot condition on {} clicks with {} bins", m, chains.signal_tmd.n_bins));
  }
  const auto pairs = pair_number_distribution(state);
  const auto table = tmd_click_table(chains.signal_tmd, chains.signal_detector, state.n_max);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n <= state.n_max; ++n) {
    const double w = pairs.probabilities[n] * table[n][m];
    den += w;
    num += w * click_prob_given_n(chains.idler_detector, n);
  }
  if (!(den > 0.0)) throw ConditionError(fmt::format("probability of {} signal clicks is zero", m));
  return num / den;
}

double signal_click_probability(const SourceState& state, const DetectionChains& chains, std::size_t clicks) {
  if (clicks > chains.signal_tmd.n_bins) return 0.0;
  const auto pairs = pair_number_distribution(state);
  const auto table = tmd_click_table(chains.signal_tmd, chains.signal_detector, state.n_max);
  double p = 0.0;
  for (std::size_t n = 0; n <= state.n_max; ++n) p += pairs.probabilities[n] * table[n][clicks];
  return p;
}

namespace {

struct ShotModel {
  std::vector<double> pair_cdf;
  std::vector<double> route_cdf;
  double signal_survive;
  double signal_dark;
  double idler_eff;
  double idler_dark;
  std::size_t bins;
};

ShotModel make_shot_model(const SourceState& state, const DetectionChains& chains) {
  chains.signal_tmd.validate();
  chains.signal_detector.validate();
  chains.idler_detector.validate();
  const auto pairs = pair_number_distribution(state);
  ShotModel model;
  double acc = 0.0;
  for (double p : pairs.probabilities) {
    acc += p;
    model.pair_cdf.push_back(acc);
  }
  acc = 0.0;
  for (double p : chains.signal_tmd.routing()) {
    acc += p;
    model.route_cdf.push_back(acc);
  }
  model.signal_survive = chains.signal_detector.efficiency * chains.signal_tmd.bin_efficiency;
  model.signal_dark = chains.signal_detector.dark_click_prob;
  model.idler_eff = chains.idler_detector.efficiency;
  model.idler_dark = chains.idler_detector.dark_click_prob;
  model.bins = chains.signal_tmd.n_bins;
  return model;
}

std::size_t pick(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
}

struct ShotOutcome {
  std::size_t signal_clicks;
  bool idler_click;
};

ShotOutcome simulate_shot(const ShotModel& model, std::uint64_t seed, std::uint64_t shot) {
  ShotRng rng(seed, shot);
  const std::size_t n = pick(model.pair_cdf, rng.uniform());
  std::uint32_t lit = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (rng.uniform() < model.signal_survive) lit |= 1u << pick(model.route_cdf, rng.uniform());
  }
  for (std::size_t b = 0; b < model.bins; ++b) {
    if (!(lit & (1u << b)) && rng.uniform() < model.signal_dark) lit |= 1u << b;
  }
  bool idler = rng.uniform() < model.idler_dark;
  for (std::size_t k = 0; k < n && !idler; ++k) idler = rng.uniform() < model.idler_eff;
  return {static_cast<std::size_t>(std::popcount(lit)), idler};
}

Tally empty_tally(const ShotModel& model, std::uint64_t shots, std::uint64_t seed) {
  return Tally{shots, seed, std::vector<std::vector<std::uint64_t>>(model.bins + 1, std::vector<std::uint64_t>(2, 0))};
}

}  // namespace

Tally monte_carlo_run(const SourceState& state, const DetectionChains& chains, std::uint64_t shots,
                      std::uint64_t seed, int threads) {
  if (shots == 0) throw DomainError("Monte Carlo needs at least one shot");
  const ShotModel model = make_shot_model(state, chains);
  Tally tally = empty_tally(model, shots, seed);
  const std::size_t cells = (model.bins + 1) * 2;
  const int workers = resolve_threads(threads);
  std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(workers), std::vector<std::uint64_t>(cells, 0));
  const auto total = static_cast<std::int64_t>(shots);
#pragma omp parallel num_threads(workers)
  {
    auto& local = partial[static_cast<std::size_t>(current_thread())];
#pragma omp for schedule(static)
    for (std::int64_t s = 0; s < total; ++s) {
      const auto out = simulate_shot(model, seed, static_cast<std::uint64_t>(s));
      ++local[out.signal_clicks * 2 + (out.idler_click ? 1 : 0)];
    }
  }
  for (const auto& local : partial) {
    for (std::size_t c = 0; c < cells; ++c) tally.counts[c / 2][c % 2] += local[c];
  }
  return tally;
}

Tally monte_carlo_run_serial(const SourceState& state, const DetectionChains& chains, std::uint64_t shots,
                             std::uint64_t seed) {
  if (shots == 0) throw DomainError("Monte Carlo needs at least one shot");
  const ShotModel model = make_shot_model(state, chains);
  Tally tally = empty_tally(model, shots, seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const auto out = simulate_shot(model, seed, s);
    ++tally.counts[out.signal_clicks][out.idler_click ? 1 : 0];
  }
  return tally;
}

std::string tally_json(const Tally& tally) {
  nlohmann::json j;
  j["shots"] = tally.shots;
  j["seed"] = tally.seed;
  j["counts"] = tally.counts;
  return j.dump(2) + "\n";
}

double calibrate_gain(const SourceState& shape, const DetectionChains& chains, std::size_t clicks,
                      double target_probability) {
  if (!(target_probability > 0.0 && target_probability < 1.0)) throw DomainError("target probability must lie in (0, 1)");
  auto prob = [&](double r0) {
    SourceState s = shape;
    s.gain = r0;
    return signal_click_probability(s, chains, clicks);
  };
  double lo = 0.0;
  double hi = 0.05;
  // walk up the rising branch until the target is bracketed
  double prev = prob(lo);
  while (true) {
    double p = 0.0;
    try {
      p = prob(hi);
    } catch (const TruncationError&) {
      throw NotFoundError("target click probability not reached before the photon-number truncation");
    }
    if (p >= target_probability) break;
    if (p < prev) throw NotFoundError("target click probability exceeds the branch maximum");
    prev = p;
    lo = hi;
    hi *= 1.5;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (prob(mid) < target_probability ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double accidental_rate(double signal_rate, double idler_rate, double repetition_rate) {
  if (signal_rate < 0.0 || idler_rate < 0.0 || !(repetition_rate > 0.0)) {
    throw DomainError("accidental rate needs non-negative count rates and a positive repetition rate");
  }
  return signal_rate * idler_rate / repetition_rate;
}

double detection_efficiency(double coincidence_rate, double other_rate) {
  if (coincidence_rate < 0.0 || !(other_rate > 0.0)) throw DomainError("detection efficiency needs a positive singles rate");
  return coincidence_rate / other_rate;
}

HeraldingEfficiency heralding_efficiency(double coincidence_rate, double signal_rate, double detector_efficiency) {
  if (coincidence_rate < 0.0 || !(signal_rate > 0.0) || !(detector_efficiency > 0.0 && detector_efficiency <= 1.0)) {
    throw DomainError("heralding efficiency needs positive rates and detector efficiency in (0, 1]");
  }
  const double value = coincidence_rate / (signal_rate * detector_efficiency);
  return {value, value > 1.0};
}

RateReport rate_report(const RateInputs& in) {
  RateReport r{in, 0.0, 0.0, 0.0, 0.0, {0.0, false}};
  r.accidentals = accidental_rate(in.signal_rate, in.idler_rate, in.repetition_rate);
  r.corrected_coincidences = in.raw_coincidence_rate - r.accidentals;
  r.signal_efficiency = detection_efficiency(r.corrected_coincidences, in.idler_rate);
  r.idler_efficiency = detection_efficiency(r.corrected_coincidences, in.signal_rate);
  r.heralding = heralding_efficiency(r.corrected_coincidences, in.signal_rate, in.idler_detector_efficiency);
  return r;
}

std::string rate_report_json(const RateReport& r) {
  nlohmann::json j;
  j["inputs"] = {{"signal_rate", r.inputs.signal_rate},
                 {"idler_rate", r.inputs.idler_rate},
                 {"raw_coincidence_rate", r.inputs.raw_coincidence_rate},
                 {"repetition_rate", r.inputs.repetition_rate},
                 {"idler_detector_efficiency", r.inputs.idler_detector_efficiency}};
  j["accidentals"] = r.accidentals;
  j["corrected_coincidences"] = r.corrected_coincidences;
  j["signal_efficiency"] = r.signal_efficiency;
  j["idler_efficiency"] = r.idler_efficiency;
  j["heralding_efficiency"] = r.heralding.value;
  j["heralding_inconsistent"] = r.heralding.inconsistent;
  return j.dump(2) + "\n";
}

}  // namespace fwm
