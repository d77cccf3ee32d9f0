#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pct/task_space.hpp"

namespace pct {

/// Finite shared environment: states, actions, horizon h (rewards accrue at
/// steps t = 0..h), discount in (0,1], initial state distribution, one
/// stochastic transition matrix per action, and reward features
/// phi(s,a) in [0,1]^d shared by all tasks.
struct DynamicEnvironment {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  double discount = 1.0;
  std::vector<double> initial_dist;                        // [s]
  std::vector<std::vector<std::vector<double>>> transitions;  // [s][a][s']
  std::vector<std::vector<std::vector<double>>> features;     // [s][a][d]

  int feature_dim() const;
  /// Transition rows and the initial distribution sum to 1 within 1e-12,
  /// probabilities nonnegative, features within [0,1].
  void validate() const;

  static DynamicEnvironment from_json_file(const std::string& path);
  std::string to_json_string(int indent = 2) const;
  void save_json(const std::string& path) const;
};

/// A task over a shared environment; reward(s,a) = theta . phi(s,a), which
/// is Lipschitz in the sup norm with constant max_{s,a} ||phi(s,a)||_1.
struct MdpTask {
  TaskParams theta;

  double reward(const DynamicEnvironment& env, int s, int a) const;
};

/// Deterministic time-indexed policy with the exact value table computed at
/// planning time: values[t][s] is the optimal remaining return from state s
/// at step t.
struct Policy {
  std::vector<std::vector<int>> actions;    // [t][s], t = 0..h
  std::vector<std::vector<double>> values;  // [t][s]

  /// Expected value from the initial distribution.
  double initial_value(const DynamicEnvironment& env) const;
};

/// Finite-horizon backward induction; argmax ties go to the lowest action
/// index. The returned values table is exact.
Policy value_iteration(const DynamicEnvironment& env, const MdpTask& task);

/// Exact evaluation of an arbitrary policy on a task by forward dynamic
/// programming over the state occupancy.
double policy_value(const DynamicEnvironment& env, const MdpTask& task, const Policy& policy);

/// One sampled episode return; bit-reproducible given the seed.
double rollout(const DynamicEnvironment& env, const MdpTask& task, const Policy& policy,
               std::uint64_t seed);

/// max over (s,a) of ||phi(s,a)||_1.
double lipschitz_constant(const DynamicEnvironment& env);

/// Worst-case value loss when planning for a task whose parameters are
/// within epsilon of the true ones: 2 L sum_{t=0..h} gamma^t epsilon for
/// gamma < 1, and 2 L h epsilon for gamma = 1.
double value_gap_bound(const DynamicEnvironment& env, double epsilon);

/// Random instance for property suites: Dirichlet(1) transition rows and
/// initial distribution, uniform [0,1] features.
DynamicEnvironment make_random_env(std::uint64_t seed, int num_states, int num_actions,
                                   int horizon, double discount, int feature_dim);

}  // namespace pct
