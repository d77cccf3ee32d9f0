#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pct/cover_core.hpp"
#include "pct/mtmdp.hpp"
#include "pct/task_space.hpp"

namespace pct {

struct CommitteeMember {
  Policy policy;
  TaskParams center;                     // cluster representative
  TaskParams trained_theta;              // parameters the policy was planned for
  std::vector<std::string> cluster_tasks;  // training task ids in this cluster
};

struct PolicyCommittee {
  std::vector<CommitteeMember> members;

  int size() const { return static_cast<int>(members.size()); }

  std::string to_json_string(int indent = 2) const;
  static PolicyCommittee from_json_file(const std::string& path);
  void save_json(const std::string& path) const;
};

enum class TrainMode { kRepresentative, kClusterSum };

TrainMode train_mode_from_string(const std::string& s);
std::string to_string(TrainMode mode);

/// One exact policy per cover center. Representative mode plans for the
/// center's theta; cluster-sum mode plans for the mean theta of the
/// cluster's members, which optimizes the summed reward because rewards are
/// linear in theta (empty clusters fall back to the center). Members train
/// independently; `threads` > 1 parallelizes across them.
PolicyCommittee train_committee(const DynamicEnvironment& env, const TaskSet& training_tasks,
                                const CoverSolution& cover, TrainMode mode, int threads = 1);

/// Exact best member value on a task: (max over members of policy_value,
/// argmax index, ties to the lowest index).
std::pair<double, int> committee_value(const PolicyCommittee& committee,
                                       const DynamicEnvironment& env, const MdpTask& task);

struct TaskOutcome {
  std::string id;
  double v_star = 0.0;
  double v_committee = 0.0;
  int best_member = -1;
  bool covered = false;
};

/// Per-task optimal versus committee values; a task counts covered when
/// v_committee >= v_star - epsilon_value.
struct CoverReport {
  double epsilon_value = 0.0;
  double delta_hat = 0.0;
  std::vector<TaskOutcome> per_task;

  std::string to_json_string(int indent = 2) const;
  void save_json(const std::string& path) const;
  /// CSV columns: task_id, v_star, v_committee, best_member, covered.
  void save_csv(const std::string& path) const;
};

CoverReport evaluate_cover(const PolicyCommittee& committee, const DynamicEnvironment& env,
                           const TaskSet& tasks, double epsilon_value, int threads = 1);

/// Evaluates on m tasks sampled fresh from the mixture.
CoverReport evaluate_cover(const PolicyCommittee& committee, const DynamicEnvironment& env,
                           const GmmSpec& gmm, int m, std::uint64_t seed,
                           double epsilon_value, int threads = 1);

struct FewShotConfig {
  int episodes_per_policy = 1;  // p
  double span_bound = 0.0;      // H, reward units
  double alpha = 0.1;
  double beta = 0.1;
  std::uint64_t seed = 0;
  /// Member m's episode e is seeded base_seed + m*p + e, so members see
  /// independent randomness. Set this for common random numbers instead.
  bool common_random_numbers = false;
};

struct FewShotResult {
  int chosen_index = -1;
  std::vector<double> empirical_means;
};

/// Runs p seeded episodes per member on the task and picks the best
/// empirical mean return (ties to the lowest index). p*K episodes total.
FewShotResult fewshot_select(const PolicyCommittee& committee, const DynamicEnvironment& env,
                             const MdpTask& task, const FewShotConfig& cfg, int threads = 1);

/// Smallest integer p with p >= 32 h (H+1)^2 ln(4/alpha) / (beta - 2H)^2.
/// Requires beta > 2H (the selection margin must exceed twice the bias
/// span) and 0 < alpha < 1.
int required_episode_count(int horizon, double span_bound, double alpha, double beta);

}  // namespace pct
