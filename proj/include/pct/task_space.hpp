#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pct {

/// A task parameter vector theta in R^d. All entries must be finite.
struct TaskParams {
  std::vector<double> theta;

  int dim() const { return static_cast<int>(theta.size()); }
  double operator[](int i) const { return theta[i]; }
};

/// Max over coordinates of |a_i - b_i|. Throws ValidationError on dimension
/// mismatch.
double linf_distance(const TaskParams& a, const TaskParams& b);

/// An ordered collection of task parameter vectors with unique string ids.
/// Immutable after construction.
class TaskSet {
 public:
  TaskSet() = default;
  /// Validates: nonempty ids are unique, all tasks share one dimension >= 1,
  /// all entries finite.
  TaskSet(std::vector<TaskParams> tasks, std::vector<std::string> ids);

  int size() const { return static_cast<int>(tasks_.size()); }
  int dim() const { return dim_; }
  const TaskParams& task(int i) const { return tasks_[i]; }
  const std::string& id(int i) const { return ids_[i]; }
  const std::vector<TaskParams>& tasks() const { return tasks_; }
  const std::vector<std::string>& ids() const { return ids_; }

  double coord(int i, int d) const { return tasks_[i].theta[d]; }

  /// Subset in the given index order; ids carried over.
  TaskSet subset(const std::vector<int>& indices) const;

  /// Max over dimensions of (max coordinate - min coordinate); the diameter
  /// of the set in the sup norm. 0 for n <= 1.
  double linf_diameter() const;

 private:
  std::vector<TaskParams> tasks_;
  std::vector<std::string> ids_;
  int dim_ = 0;
};

struct GmmComponent {
  double weight = 0.0;
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Diagonal-covariance Gaussian mixture over task parameters.
struct GmmSpec {
  std::vector<GmmComponent> components;

  int dim() const;
  /// Weights sum to 1 within 1e-9, all stddev > 0, shapes agree.
  void validate() const;

  static GmmSpec from_json_file(const std::string& path);
  std::string to_json_string(int indent = 2) const;
};

/// Draws n tasks i.i.d.: component by weight, then an independent Gaussian
/// per dimension. Bitwise reproducible given (gmm, n, seed).
TaskSet sample_tasks(const GmmSpec& gmm, int n, std::uint64_t seed);

enum class TaskFileFormat { kCsv, kJson };

/// CSV: header "id,x0,...,x{d-1}", one row per task. JSON: array of
/// {"id": string, "theta": [numbers]}. Row order preserved; missing ids are
/// synthesized from row indices. Parse failures name the row.
TaskSet load_task_set(const std::string& path, TaskFileFormat format);

/// Numbers rendered with 17 significant digits so a reload is bit-exact.
void save_task_set(const TaskSet& tasks, const std::string& path,
                   TaskFileFormat format = TaskFileFormat::kCsv);

/// Smallest integer n with n >= 9 ln(5/alpha) / (2 beta^2).
/// Requires 0 < alpha < 1 and 0 < beta < 1.
int required_sample_size(double alpha, double beta);

/// Per-dimension standardization (x - mean) / stddev. Dimensions with zero
/// spread map to 0. Off by default everywhere; raw vectors are the norm.
TaskSet standardize(const TaskSet& tasks);

}  // namespace pct
