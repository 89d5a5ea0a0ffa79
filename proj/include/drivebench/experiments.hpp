#pragma once

#include <string>
#include <vector>

#include "drivebench/localization.hpp"
#include "drivebench/runner.hpp"

namespace drivebench {

/// Seeds 0..n-1.
std::vector<int> seed_range(int n);

/// P(X ≥ k) for X ~ Binomial(n, 1/2).
double binomial_upper_tail(int k, int n);

// --- Conditioning ------------------------------------------------------------

struct ConditioningAblation {
  BenchmarkReport shortcut;
  BenchmarkReport nc;
};

ConditioningAblation run_conditioning_ablation(const std::vector<int>& seeds, int jobs = 1);

struct TurnCutResult {
  int seeds{0};
  int far_tp_crossings{0};   ///< runs whose lateral offset exceeded the opposing-lane boundary
  int near_tp_crossings{0};
};

TurnCutResult run_turn_cut(const std::vector<int>& seeds);

// --- Output representation -----------------------------------------------------

struct OutputAblation {
  BenchmarkReport weighted;
  BenchmarkReport argmax;
  int seeds_argmax_worse{0};   ///< seeds where argmax had more vehicle collisions
  int seeds_weighted_worse{0};
  double sign_test_p{1.0};     ///< one-sided exact sign test over the non-tied seeds
};

/// Uncertainty suite with the path + speed controller in weighted and argmax mode.
OutputAblation run_output_ablation(const std::vector<int>& seeds, int jobs = 1);

struct ThresholdPoint {
  double threshold{0.5};
  BenchmarkReport report;
};

std::vector<ThresholdPoint> run_brake_threshold_sweep(const std::vector<double>& thresholds,
                                                      const std::vector<int>& seeds, int jobs = 1);

// --- Stop-sign buffer ----------------------------------------------------------

struct StopBufferAblation {
  BenchmarkReport without_buffer;
  BenchmarkReport with_buffer;
};

StopBufferAblation run_stop_buffer_ablation(const std::vector<int>& seeds, int jobs = 1);

// --- Localization --------------------------------------------------------------

/**
 * 60 s expert drive on an urban loop. The filter sees the nominal commands;
 * the true vehicle receives them with small random actuation errors.
 */
std::vector<FilterSample> ukf_fixture(std::uint64_t seed, double gnss_sigma = 0.5585, double duration = 60.0);

struct UkfEvaluation {
  std::vector<double> raw;       ///< per-seed mean raw GNSS error
  std::vector<double> filtered;  ///< per-seed mean filtered error
  double raw_mean{0.0};
  double filtered_mean{0.0};
};

UkfEvaluation evaluate_ukf(const UkfParams& params, const std::vector<int>& seeds, double gnss_sigma = 0.5585);

struct UkfTuning {
  UkfParams best;
  double best_error{0.0};
};

/// Grid search over diagonal process noise scales on the fixture trajectories.
UkfTuning tune_ukf(const std::vector<int>& seeds, double gnss_sigma = 0.5585);

// --- Data generation -----------------------------------------------------------

struct DatagenOutput {
  std::vector<ScoredEpisode> episodes;  ///< all recorded episodes with scorecards
  std::vector<FrameRecord> records;     ///< kept routes: clean frames and their augmented counterparts
};

/// Expert rollouts, DS-100 filter, augmentation of every kept frame.
DatagenOutput generate_dataset(const std::vector<Scenario>& scenarios, const std::vector<int>& seeds,
                               const AugmentationConfig& aug = {});

// --- Reporting -----------------------------------------------------------------

/// Side-by-side table of report means, one row per label.
std::string comparison_table(const std::vector<std::pair<std::string, const BenchmarkReport*>>& rows);

}  // namespace drivebench
