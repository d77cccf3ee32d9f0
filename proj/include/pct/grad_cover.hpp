#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pct/cover_core.hpp"
#include "pct/task_space.hpp"

namespace pct {

/// Decision variables of the relaxed coverage objective: K centers plus one
/// row of assignment logits per task, normalized by a row-wise softmax.
struct RelaxState {
  std::vector<std::vector<double>> centers;  // K x d
  std::vector<std::vector<double>> logits;   // n x K
  double objective = 0.0;

  int num_centers() const { return static_cast<int>(centers.size()); }
};

struct RelaxGradient {
  std::vector<std::vector<double>> centers;  // K x d
  std::vector<std::vector<double>> logits;   // n x K
};

enum class CoverInit { kGea, kGia, kRandom, kExplicit };
enum class StepSchedule { kFixed, kInvSqrt };

struct OptimizerConfig {
  /// 0 means 0.05 times the sup-norm diameter of the data.
  double step_size = 0.0;
  int max_iters = 2000;
  /// Stop when the objective change between accepted iterations is below
  /// this.
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
  CoverInit init = CoverInit::kGea;
  std::vector<TaskParams> explicit_centers;  // for init == kExplicit
  /// Monotone mode: backtrack until the step does not increase the
  /// objective.
  bool line_search = false;
  StepSchedule schedule = StepSchedule::kInvSqrt;
  /// Softmax temperature; 1 is the plain objective.
  double softmax_temperature = 1.0;
  /// Initial logit placed on the init cover's assigned center; uncovered
  /// tasks start from a uniform row.
  double assignment_logit = 4.0;
  /// Optional per-iteration trace CSV: iteration, soft_objective,
  /// hard_covered_count.
  std::string trace_path;
  int trace_every = 1;
  GiaOptions gia_options;
};

/// Sum over tasks of ReLU(sum_k softmax(w_i)_k * ||theta_k - theta_i||_inf
/// - epsilon). Nonnegative by construction.
double relax_objective(const RelaxState& state, const TaskSet& tasks, double epsilon);

/// Exact subgradient. The sup-norm term contributes through its largest
/// magnitude coordinate (lowest index on ties); the hinge contributes zero
/// at exactly zero; softmax Jacobian applied analytically.
RelaxGradient relax_gradient(const RelaxState& state, const TaskSet& tasks, double epsilon,
                             double temperature = 1.0);

struct OptimizeResult {
  CoverSolution cover;          // hard criterion on the final centers
  double soft_objective = 0.0;  // relaxed objective at the final iterate
  int iterations = 0;
  bool converged = false;
  /// Count of 50-iteration windows without objective decrease (fixed-step,
  /// no line search only).
  int flat_windows = 0;
  RelaxState state;
};

/// Subgradient descent on the relaxed objective. The returned cover is
/// always recomputed from scratch on the final centers under the hard
/// criterion; the soft objective is reported alongside. Deterministic given
/// the config. Throws DivergenceError on a non-finite objective.
OptimizeResult optimize_cover_detailed(const TaskSet& tasks, double epsilon, int k,
                                       const OptimizerConfig& cfg);

CoverSolution optimize_cover(const TaskSet& tasks, double epsilon, int k,
                             const OptimizerConfig& cfg);

}  // namespace pct
