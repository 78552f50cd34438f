#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fwm {

inline constexpr std::size_t kDefaultMaxPairs = 30;
inline constexpr double kTruncationTolerance = 1e-6;

/// Multimode two-mode-squeezed source: mode n has squeezing r0 * sqrt(lambda_n)
/// and contributes an independent thermal pair number.
struct SourceState {
  std::vector<double> schmidt_lambdas{1.0};
  double gain = 0.0;  // r0
  std::size_t n_max = kDefaultMaxPairs;

  void validate() const;
  /// sum_n sinh^2(r0 sqrt(lambda_n))
  double mean_pairs() const;
};

struct PairDistribution {
  std::vector<double> probabilities;  // P_0 .. P_nmax, not renormalized
  double truncation_deficit = 0.0;    // 1 - sum P_n
};

/// Distribution of the total pair number, by convolution of per-mode
/// geometric distributions. Throws TruncationError if more than 1e-6 of the
/// mass lies above n_max.
PairDistribution pair_number_distribution(const SourceState& state);

struct DetectorModel {
  double efficiency = 1.0;
  double dark_click_prob = 0.0;  // per gate

  void validate() const;
};

/// Binary detector: 1 - (1 - d)(1 - eta)^n.
double click_prob_given_n(const DetectorModel& detector, std::size_t n);

/// Time-multiplexing detector: photons are routed into n_bins time bins, each
/// read out as a binary click.
struct TmdModel {
  std::size_t n_bins = 8;
  std::vector<double> bin_probabilities;  // empty means uniform
  double bin_efficiency = 1.0;

  void validate() const;
  std::vector<double> routing() const;
};

inline constexpr std::size_t kMaxTmdBins = 16;

/// P(c clicks | n photons) for c = 0..n_bins. Each photon survives with
/// probability eta * bin_efficiency and lands in bin b with probability
/// bin_probabilities[b]; each unlit bin fires a dark click with probability d.
std::vector<double> tmd_click_distribution(const TmdModel& tmd, const DetectorModel& detector, std::size_t n);

/// Rows n = 0..n_max of tmd_click_distribution, computed in one pass.
std::vector<std::vector<double>> tmd_click_table(const TmdModel& tmd, const DetectorModel& detector,
                                                 std::size_t n_max);

struct DetectionChains {
  TmdModel signal_tmd;
  DetectorModel signal_detector;
  DetectorModel idler_detector;
};

/// P(idler click | m signal clicks), by exact conditioning on the truncated
/// pair distribution. Throws ConditionError when P(m clicks) is zero.
double conditional_idler_click_prob(const SourceState& state, const DetectionChains& chains, std::size_t m);

/// Joint probabilities [signal clicks][idler flag] over the truncated
/// distribution. Entries sum to 1 - truncation deficit.
std::vector<std::vector<double>> joint_click_distribution(const SourceState& state, const DetectionChains& chains);

/// Probability of exactly `clicks` signal clicks per pulse.
double signal_click_probability(const SourceState& state, const DetectionChains& chains, std::size_t clicks);

struct Tally {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  // counts[signal clicks][idler flag]
  std::vector<std::vector<std::uint64_t>> counts;
};

/// Monte Carlo over shots. Every shot draws from its own counter-based stream
/// keyed by (seed, shot index), so tallies do not depend on `threads`
/// (0 = OpenMP default).
Tally monte_carlo_run(const SourceState& state, const DetectionChains& chains, std::uint64_t shots,
                      std::uint64_t seed, int threads = 0);
/// Single-threaded reference for monte_carlo_run.
Tally monte_carlo_run_serial(const SourceState& state, const DetectionChains& chains, std::uint64_t shots,
                             std::uint64_t seed);

std::string tally_json(const Tally& tally);

/// r0 at which exactly `clicks` signal clicks occur with probability
/// `target_probability`, on the rising branch. Throws NotFoundError if the
/// target is not reachable.
double calibrate_gain(const SourceState& shape, const DetectionChains& chains, std::size_t clicks,
                      double target_probability);

// Rate bookkeeping -----------------------------------------------------------

/// Accidental coincidences between uncorrelated detections: Rs * Ri / f.
double accidental_rate(double signal_rate, double idler_rate, double repetition_rate);

/// Efficiency of the arm opposite `other_rate`: Rc / R_other.
double detection_efficiency(double coincidence_rate, double other_rate);

struct HeraldingEfficiency {
  double value;
  bool inconsistent;  // value > 1: rates and detector efficiency disagree
};

/// eta_h = Rc / (Rs * eta_detector).
HeraldingEfficiency heralding_efficiency(double coincidence_rate, double signal_rate, double detector_efficiency);

struct RateInputs {
  double signal_rate = 16500.0;
  double idler_rate = 6000.0;
  double raw_coincidence_rate = 1300.0;
  double repetition_rate = 1e6;
  double idler_detector_efficiency = 0.25;
};

struct RateReport {
  RateInputs inputs;
  double accidentals;
  double corrected_coincidences;
  double signal_efficiency;  // Rc / Ri
  double idler_efficiency;   // Rc / Rs
  HeraldingEfficiency heralding;
};

RateReport rate_report(const RateInputs& inputs);
std::string rate_report_json(const RateReport& report);

}  // namespace fwm
