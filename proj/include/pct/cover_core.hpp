#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pct/task_space.hpp"

namespace pct {

enum class CoverAlgorithm { kGea, kGia, kGrad, kOracle };

std::string to_string(CoverAlgorithm a);
CoverAlgorithm cover_algorithm_from_string(const std::string& s);

/// Chosen representatives plus the induced assignment. A task is assigned
/// iff it lies within epsilon (sup norm, non-strict) of its center; among
/// covering centers the nearest wins, ties to the lowest center index.
struct CoverSolution {
  double epsilon = 0.0;
  CoverAlgorithm algorithm = CoverAlgorithm::kOracle;
  std::vector<TaskParams> centers;
  std::vector<std::optional<int>> assignment;  // per task; nullopt = uncovered
  int covered_count = 0;
  double miss_rate = 1.0;

  std::string to_json_string(int indent = 2) const;
  static CoverSolution from_json_string(const std::string& text);
  static CoverSolution from_json_file(const std::string& path);
  void save_json(const std::string& path) const;

  /// Task indices assigned to center k.
  std::vector<int> cluster(int k) const;
};

/// Exact assignment of every task to its nearest covering center.
/// Empty centers is legal: everything uncovered, miss_rate 1.
CoverSolution coverage_stats(const TaskSet& tasks, const std::vector<TaskParams>& centers,
                             double epsilon, CoverAlgorithm tag = CoverAlgorithm::kOracle);

/// Greedy elimination. Each round anchors a candidate group at a task point:
/// remaining tasks are absorbed in index order while the group still fits in
/// a 2*epsilon window on every dimension, the anchor with the largest group
/// wins (ties to the lowest anchor index), and the group's per-dimension
/// midpoint is emitted as the center. Cheap and heuristic; no approximation
/// guarantee.
CoverSolution gea(const TaskSet& tasks, double epsilon, int k);

/// Maximal per-dimension candidate lists for one dimension: each list holds
/// the task indices whose coordinates fit in a single window of width
/// 2*epsilon, anchored at a sorted coordinate; lists that are subsets of
/// another list are dropped. Indices are ascending.
std::vector<std::vector<int>> build_dimension_lists(const TaskSet& tasks, double epsilon,
                                                    int dim);

struct GiaOptions {
  /// Upper bound on visited nodes in the cross-dimension list search.
  std::int64_t node_budget = 2'000'000;
};

/// Greedy intersection. Each round picks one list per dimension maximizing
/// the intersection cardinality (depth-first with pruning), emits the
/// per-dimension midpoint of the covered points, and removes them. Round 1
/// is an exact max single-center cover. Throws CapacityError when the
/// pruned search exceeds the node budget.
CoverSolution gia(const TaskSet& tasks, double epsilon, int k, const GiaOptions& opts = {});

struct OracleOptions {
  std::int64_t candidate_budget = 4'000'000;
  std::int64_t combo_budget = 40'000'000;
};

struct SingleCover {
  TaskParams center;
  std::vector<int> covered;
};

/// Exhaustive max single-center cover. Candidate centers take coordinate s
/// from {x_{i,s} + epsilon}: a maximum cover can be translated until each
/// lower face touches a covered point, so these candidates suffice.
/// Intended for small instances; throws CapacityError over budget.
SingleCover max_1_cover_oracle(const TaskSet& tasks, double epsilon,
                               const OracleOptions& opts = {});

struct KCoverResult {
  double delta_star = 1.0;
  int covered_count = 0;
  std::vector<TaskParams> centers;
};

/// Exact minimum miss rate over K-tuples of candidate centers (same
/// candidate grid as max_1_cover_oracle, deduplicated and dominated
/// coverage sets dropped). Tiny instances only.
KCoverResult max_k_cover_oracle(const TaskSet& tasks, double epsilon, int k,
                                const OracleOptions& opts = {});

}  // namespace pct
