#include "pct/grad_cover.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "pct/errors.hpp"
#include "pct/rng.hpp"

namespace pct {

namespace {

void check_state(const RelaxState& state, const TaskSet& tasks) {
  const int k = state.num_centers();
  if (k < 1) throw ValidationError("RelaxState: no centers");
  for (const auto& c : state.centers) {
    if (static_cast<int>(c.size()) != tasks.dim()) {
      throw ValidationError("RelaxState: center dimension mismatch");
    }
  }
  if (static_cast<int>(state.logits.size()) != tasks.size()) {
    throw ValidationError("RelaxState: logits row count mismatch");
  }
  for (const auto& row : state.logits) {
    if (static_cast<int>(row.size()) != k) {
      throw ValidationError("RelaxState: logits column count mismatch");
    }
  }
}

std::vector<double> softmax_row(const std::vector<double>& logits, double temperature) {
  std::vector<double> p(logits.size());
  double hi = -std::numeric_limits<double>::infinity();
  for (double w : logits) hi = std::max(hi, w / temperature);
  double total = 0.0;
  for (size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] / temperature - hi);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

double center_distance(const std::vector<double>& center, const TaskParams& task) {
  double best = 0.0;
  for (size_t s = 0; s < center.size(); ++s) {
    best = std::max(best, std::abs(center[s] - task.theta[s]));
  }
  return best;
}

// Largest magnitude coordinate of center - theta, lowest index on ties.
int arg_linf(const std::vector<double>& center, const TaskParams& task) {
  int arg = 0;
  double best = -1.0;
  for (size_t s = 0; s < center.size(); ++s) {
    const double mag = std::abs(center[s] - task.theta[s]);
    if (mag > best) {
      best = mag;
      arg = static_cast<int>(s);
    }
  }
  return arg;
}

double evaluate(const RelaxState& state, const TaskSet& tasks, double epsilon,
                double temperature) {
  const int k = state.num_centers();
  double total = 0.0;
  for (int i = 0; i < tasks.size(); ++i) {
    const auto p = softmax_row(state.logits[i], temperature);
    double mixed = 0.0;
    for (int c = 0; c < k; ++c) {
      mixed += p[c] * center_distance(state.centers[c], tasks.task(i));
    }
    const double hinge = mixed - epsilon;
    if (hinge > 0.0) total += hinge;
  }
  return total;
}

}  // namespace

double relax_objective(const RelaxState& state, const TaskSet& tasks, double epsilon) {
  check_state(state, tasks);
  return evaluate(state, tasks, epsilon, 1.0);
}

RelaxGradient relax_gradient(const RelaxState& state, const TaskSet& tasks, double epsilon,
                             double temperature) {
  check_state(state, tasks);
  const int k = state.num_centers();
  const int d = tasks.dim();
  RelaxGradient g;
  g.centers.assign(k, std::vector<double>(d, 0.0));
  g.logits.assign(tasks.size(), std::vector<double>(k, 0.0));

  for (int i = 0; i < tasks.size(); ++i) {
    const auto p = softmax_row(state.logits[i], temperature);
    std::vector<double> dist(k);
    double mixed = 0.0;
    for (int c = 0; c < k; ++c) {
      dist[c] = center_distance(state.centers[c], tasks.task(i));
      mixed += p[c] * dist[c];
    }
    if (mixed - epsilon <= 0.0) continue;  // hinge inactive; zero at the kink
    for (int c = 0; c < k; ++c) {
      const int s = arg_linf(state.centers[c], tasks.task(i));
      const double diff = state.centers[c][s] - tasks.task(i).theta[s];
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      g.centers[c][s] += p[c] * sign;
      g.logits[i][c] = p[c] * (dist[c] - mixed) / temperature;
    }
  }
  return g;
}

namespace {

struct InitResult {
  std::vector<std::vector<double>> centers;
  std::vector<std::optional<int>> assignment;  // empty when no cover is behind the init
};

InitResult initialize(const TaskSet& tasks, double epsilon, int k,
                      const OptimizerConfig& cfg) {
  InitResult init;
  switch (cfg.init) {
    case CoverInit::kGea: {
      const CoverSolution sol = gea(tasks, epsilon, k);
      for (const auto& c : sol.centers) init.centers.push_back(c.theta);
      init.assignment = sol.assignment;
      break;
    }
    case CoverInit::kGia: {
      const CoverSolution sol = gia(tasks, epsilon, k, cfg.gia_options);
      for (const auto& c : sol.centers) init.centers.push_back(c.theta);
      init.assignment = sol.assignment;
      break;
    }
    case CoverInit::kRandom: {
      Rng rng(cfg.seed);
      const int d = tasks.dim();
      std::vector<double> lo(d), hi(d);
      for (int s = 0; s < d; ++s) {
        lo[s] = hi[s] = tasks.coord(0, s);
        for (int i = 1; i < tasks.size(); ++i) {
          lo[s] = std::min(lo[s], tasks.coord(i, s));
          hi[s] = std::max(hi[s], tasks.coord(i, s));
        }
      }
      for (int c = 0; c < k; ++c) {
        std::vector<double> center(d);
        for (int s = 0; s < d; ++s) center[s] = rng.uniform(lo[s], hi[s]);
        init.centers.push_back(std::move(center));
      }
      break;
    }
    case CoverInit::kExplicit: {
      if (cfg.explicit_centers.empty()) {
        throw ValidationError("optimize_cover: init=explicit requires explicit_centers");
      }
      const CoverSolution sol =
          coverage_stats(tasks, cfg.explicit_centers, epsilon, CoverAlgorithm::kGrad);
      for (const auto& c : cfg.explicit_centers) init.centers.push_back(c.theta);
      init.assignment = sol.assignment;
      break;
    }
  }
  return init;
}

void axpy(std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& g,
          double alpha) {
  for (size_t r = 0; r < x.size(); ++r) {
    for (size_t c = 0; c < x[r].size(); ++c) x[r][c] += alpha * g[r][c];
  }
}

double l2_norm(const RelaxGradient& g) {
  double total = 0.0;
  for (const auto& row : g.centers) {
    for (double v : row) total += v * v;
  }
  for (const auto& row : g.logits) {
    for (double v : row) total += v * v;
  }
  return std::sqrt(total);
}

std::vector<TaskParams> to_task_params(const std::vector<std::vector<double>>& centers) {
  std::vector<TaskParams> out;
  out.reserve(centers.size());
  for (const auto& c : centers) out.push_back(TaskParams{c});
  return out;
}

}  // namespace

OptimizeResult optimize_cover_detailed(const TaskSet& tasks, double epsilon, int k,
                                       const OptimizerConfig& cfg) {
  if (k < 1) throw ValidationError("optimize_cover: K must be >= 1");
  if (cfg.max_iters < 1) throw ValidationError("optimize_cover: max_iters must be >= 1");
  if (cfg.step_size < 0.0) throw ValidationError("optimize_cover: step_size must be > 0");
  if (!(cfg.softmax_temperature > 0.0)) {
    throw ValidationError("optimize_cover: temperature must be > 0");
  }

  const InitResult init = initialize(tasks, epsilon, k, cfg);
  const int k_actual = static_cast<int>(init.centers.size());

  RelaxState state;
  state.centers = init.centers;
  state.logits.assign(tasks.size(), std::vector<double>(k_actual, 0.0));
  if (!init.assignment.empty() && cfg.assignment_logit != 0.0) {
    for (int i = 0; i < tasks.size(); ++i) {
      if (init.assignment[i]) state.logits[i][*init.assignment[i]] = cfg.assignment_logit;
    }
  }

  double step0 = cfg.step_size;
  if (step0 == 0.0) {
    const double diameter = tasks.linf_diameter();
    step0 = 0.05 * (diameter > 0.0 ? diameter : 1.0);
  }

  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path, std::ios::binary);
    if (!trace) {
      throw ValidationError("optimize_cover: cannot write trace '" + cfg.trace_path + "'");
    }
    trace << "iteration,soft_objective,hard_covered_count\n";
  }
  int last_traced = -1;
  const auto trace_row = [&](int iter, double f, bool force = false) {
    if (!trace.is_open() || iter == last_traced) return;
    if (!force && iter % cfg.trace_every != 0) return;
    const CoverSolution hard =
        coverage_stats(tasks, to_task_params(state.centers), epsilon, CoverAlgorithm::kGrad);
    trace << iter << "," << f << "," << hard.covered_count << "\n";
    last_traced = iter;
  };

  OptimizeResult result;
  double f = evaluate(state, tasks, epsilon, cfg.softmax_temperature);
  std::vector<double> history;
  history.push_back(f);

  int updates = 0;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (!std::isfinite(f)) {
      throw DivergenceError("optimize_cover: non-finite objective at iteration " +
                                std::to_string(updates) + "; reduce the step size",
                            updates);
    }
    trace_row(updates, f);
    if (f == 0.0) {
      result.converged = true;
      break;
    }
    const RelaxGradient g =
        relax_gradient(state, tasks, epsilon, cfg.softmax_temperature);
    const double gnorm = l2_norm(g);
    if (gnorm == 0.0) {
      result.converged = true;  // stationary for the chosen subgradient
      break;
    }

    double alpha = cfg.schedule == StepSchedule::kInvSqrt
                       ? step0 / std::sqrt(static_cast<double>(iter))
                       : step0;
    const RelaxState prev = state;
    double f_new;
    while (true) {
      state = prev;
      axpy(state.centers, g.centers, -alpha / gnorm);
      axpy(state.logits, g.logits, -alpha / gnorm);
      f_new = evaluate(state, tasks, epsilon, cfg.softmax_temperature);
      if (!cfg.line_search || f_new <= f || alpha < 1e-14 * step0) break;
      alpha *= 0.5;
    }
    if (cfg.line_search && f_new > f) {
      state = prev;  // no acceptable step; keep the iterate and move on
      f_new = f;
    }
    ++updates;

    const double change = std::abs(f - f_new);
    f = f_new;
    history.push_back(f);
    if (!std::isfinite(f)) {
      throw DivergenceError("optimize_cover: non-finite objective at iteration " +
                                std::to_string(updates) + "; reduce the step size",
                            updates);
    }
    if (change < cfg.tolerance && f > 0.0) break;
  }
  result.iterations = updates;
  if (f == 0.0) result.converged = true;

  if (cfg.schedule == StepSchedule::kFixed && !cfg.line_search) {
    for (size_t t = 0; t + 50 < history.size(); ++t) {
      if (history[t + 50] >= history[t]) ++result.flat_windows;
    }
  }

  trace_row(result.iterations, f, /*force=*/true);
  result.soft_objective = f;
  result.state = state;
  result.state.objective = f;
  result.cover =
      coverage_stats(tasks, to_task_params(state.centers), epsilon, CoverAlgorithm::kGrad);
  return result;
}

CoverSolution optimize_cover(const TaskSet& tasks, double epsilon, int k,
                             const OptimizerConfig& cfg) {
  return optimize_cover_detailed(tasks, epsilon, k, cfg).cover;
}

}  // namespace pct
