#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "robustcalib/loss.hpp"
#include "robustcalib/model.hpp"

namespace robustcalib {

struct TwonormSplit {
  Datasetd train;
  Datasetd test;
  double scale = 1.0;  // every raw point was divided by this
};

// Balanced two-Gaussian data at +-(2, 2) with identity covariance, rescaled jointly into the unit ball.
TwonormSplit gen_twonorm(int n_train, int n_test, std::uint64_t seed);

struct TrainConfig {
  LossSpec loss;
  double gamma = 0.2;
  double lr = 0.1;
  int steps = 200;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

struct StepRecord {
  double train_surrogate;
  double test_surrogate;
  double test_robust;
  double test_zero_one;
};

struct Trajectory {
  TrainConfig config;
  std::vector<StepRecord> records;  // steps + 1 entries, initial state first
  std::vector<Eigen::VectorXd> parameters;  // [weights; bias] matching each record
  LinearModeld final_model;
};

// Seeded point on the unit sphere of R^(dim+1), split into weights and bias.
LinearModeld initial_model(Eigen::Index dim, std::uint64_t seed);

// Gradient of the mean surrogate loss in [weights; bias], averaging one-sided derivatives at kinks.
Eigen::VectorXd surrogate_gradient(const LossSpec& loss, const LinearModeld& model,
                                   const Datasetd& data);

// Full-batch subgradient descent with renormalization of [weights; bias] after every step.
Trajectory train(const TrainConfig& config, const Datasetd& train_data, const Datasetd& test_data);

struct ExcessProxies {
  Eigen::VectorXd surrogate;
  Eigen::VectorXd target;
};

// Subtracts the per-trajectory minimum of the test surrogate and test robust risks.
ExcessProxies excess_proxies(const Trajectory& traj);

struct LoadedDataset {
  Datasetd data;
  double scale = 1.0;
  bool rescaled = false;
};

// Rows `label,feat1,...,featd`; blank lines and lines starting with '#' are skipped.
LoadedDataset load_csv(const std::string& path);
LoadedDataset parse_dataset_csv(const std::string& text);

inline constexpr const char* trajectory_header =
    "step,train_surrogate,test_surrogate,test_robust,test_zero_one";

std::string trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
std::vector<StepRecord> parse_trajectory_csv(const std::string& text);

// One-sided sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2). Ties are dropped by the caller.
double sign_test_p_value(int wins, int losses);

struct SweepConfig {
  std::vector<LossFamily> losses;
  double beta = 0.2;
  double gamma = 0.2;
  double lr = 0.1;
  int steps = 200;
  int seeds = 50;
  std::uint64_t seed_base = 0;
  int n_train = 800;
  int n_test = 200;
  unsigned threads = 0;
};

struct SweepResult {
  SweepConfig config;
  // runs[l][s]: loss index l, seed index s; every loss sees the same data and start for a given seed.
  std::vector<std::vector<Trajectory>> runs;
  // Test sets per seed, kept for post-hoc metrics such as vulnerable fractions.
  std::vector<Datasetd> test_sets;
};

SweepResult run_sweep(const SweepConfig& config);

struct SweepSummary {
  LossFamily loss;
  int runs;
  double mean_final_surrogate_excess;
  double se_final_surrogate_excess;
  double mean_final_target_excess;
  double se_final_target_excess;
};

std::vector<SweepSummary> summarize(const SweepResult& result);
std::string summary_csv(const std::vector<SweepSummary>& rows);

}  // namespace robustcalib
