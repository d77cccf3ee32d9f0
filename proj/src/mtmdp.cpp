#include "pct/mtmdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "pct/errors.hpp"
#include "pct/rng.hpp"

namespace pct {

int DynamicEnvironment::feature_dim() const {
  if (features.empty() || features[0].empty()) return 0;
  return static_cast<int>(features[0][0].size());
}

void DynamicEnvironment::validate() const {
  if (num_states < 1) throw ValidationError("env: num_states must be >= 1");
  if (num_actions < 1) throw ValidationError("env: num_actions must be >= 1");
  if (horizon < 0) throw ValidationError("env: horizon must be >= 0");
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw ValidationError("env: discount must be in (0,1]");
  }
  if (static_cast<int>(initial_dist.size()) != num_states) {
    throw ValidationError("env: initial_dist has wrong length");
  }
  double rho_total = 0.0;
  for (double p : initial_dist) {
    if (p < 0.0 || !std::isfinite(p)) throw ValidationError("env: negative initial probability");
    rho_total += p;
  }
  if (std::abs(rho_total - 1.0) > 1e-12) {
    throw ValidationError("env: initial_dist sums to " + std::to_string(rho_total));
  }
  if (static_cast<int>(transitions.size()) != num_states ||
      static_cast<int>(features.size()) != num_states) {
    throw ValidationError("env: transitions/features must have one entry per state");
  }
  const int d = feature_dim();
  if (d < 1) throw ValidationError("env: feature dimension must be >= 1");
  for (int s = 0; s < num_states; ++s) {
    if (static_cast<int>(transitions[s].size()) != num_actions ||
        static_cast<int>(features[s].size()) != num_actions) {
      throw ValidationError("env: state " + std::to_string(s) +
                            " must have one row per action");
    }
    for (int a = 0; a < num_actions; ++a) {
      if (static_cast<int>(transitions[s][a].size()) != num_states) {
        throw ValidationError("env: transition row (" + std::to_string(s) + "," +
                              std::to_string(a) + ") has wrong length");
      }
      double row_total = 0.0;
      for (double p : transitions[s][a]) {
        if (p < 0.0 || !std::isfinite(p)) {
          throw ValidationError("env: negative transition probability");
        }
        row_total += p;
      }
      if (std::abs(row_total - 1.0) > 1e-12) {
        throw ValidationError("env: transition row (" + std::to_string(s) + "," +
                              std::to_string(a) + ") sums to " + std::to_string(row_total));
      }
      if (static_cast<int>(features[s][a].size()) != d) {
        throw ValidationError("env: feature vector (" + std::to_string(s) + "," +
                              std::to_string(a) + ") has wrong length");
      }
      for (double v : features[s][a]) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw ValidationError("env: features must lie in [0,1]");
        }
      }
    }
  }
}

double MdpTask::reward(const DynamicEnvironment& env, int s, int a) const {
  const auto& phi = env.features[s][a];
  double r = 0.0;
  for (size_t i = 0; i < phi.size(); ++i) r += theta.theta[i] * phi[i];
  return r;
}

double Policy::initial_value(const DynamicEnvironment& env) const {
  double v = 0.0;
  for (int s = 0; s < env.num_states; ++s) v += env.initial_dist[s] * values[0][s];
  return v;
}

Policy value_iteration(const DynamicEnvironment& env, const MdpTask& task) {
  if (task.theta.dim() != env.feature_dim()) {
    throw ValidationError("value_iteration: theta dimension does not match features");
  }
  const int h = env.horizon;
  Policy policy;
  policy.actions.assign(h + 1, std::vector<int>(env.num_states, 0));
  policy.values.assign(h + 1, std::vector<double>(env.num_states, 0.0));

  std::vector<double> next(env.num_states, 0.0);
  for (int t = h; t >= 0; --t) {
    for (int s = 0; s < env.num_states; ++s) {
      double best_q = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < env.num_actions; ++a) {
        double q = task.reward(env, s, a);
        if (t < h) {
          double future = 0.0;
          for (int sp = 0; sp < env.num_states; ++sp) {
            future += env.transitions[s][a][sp] * next[sp];
          }
          q += env.discount * future;
        }
        if (q > best_q) {
          best_q = q;
          best_a = a;
        }
      }
      policy.values[t][s] = best_q;
      policy.actions[t][s] = best_a;
    }
    next = policy.values[t];
  }
  return policy;
}

double policy_value(const DynamicEnvironment& env, const MdpTask& task,
                    const Policy& policy) {
  if (task.theta.dim() != env.feature_dim()) {
    throw ValidationError("policy_value: theta dimension does not match features");
  }
  if (static_cast<int>(policy.actions.size()) != env.horizon + 1) {
    throw ValidationError("policy_value: policy horizon does not match environment");
  }
  for (const auto& row : policy.actions) {
    if (static_cast<int>(row.size()) != env.num_states) {
      throw ValidationError("policy_value: policy state count does not match environment");
    }
    for (int a : row) {
      if (a < 0 || a >= env.num_actions) {
        throw ValidationError("policy_value: action index out of range");
      }
    }
  }

  std::vector<double> occupancy = env.initial_dist;
  std::vector<double> next(env.num_states, 0.0);
  double total = 0.0;
  double g = 1.0;
  for (int t = 0; t <= env.horizon; ++t) {
    double step_reward = 0.0;
    for (int s = 0; s < env.num_states; ++s) {
      if (occupancy[s] == 0.0) continue;
      step_reward += occupancy[s] * task.reward(env, s, policy.actions[t][s]);
    }
    total += g * step_reward;
    if (t < env.horizon) {
      std::fill(next.begin(), next.end(), 0.0);
      for (int s = 0; s < env.num_states; ++s) {
        if (occupancy[s] == 0.0) continue;
        const auto& row = env.transitions[s][policy.actions[t][s]];
        for (int sp = 0; sp < env.num_states; ++sp) next[sp] += occupancy[s] * row[sp];
      }
      occupancy = next;
    }
    g *= env.discount;
  }
  return total;
}

double rollout(const DynamicEnvironment& env, const MdpTask& task, const Policy& policy,
               std::uint64_t seed) {
  Rng rng(seed);
  int s = rng.categorical(env.initial_dist);
  double total = 0.0;
  double g = 1.0;
  for (int t = 0; t <= env.horizon; ++t) {
    const int a = policy.actions[t][s];
    total += g * task.reward(env, s, a);
    if (t < env.horizon) s = rng.categorical(env.transitions[s][a]);
    g *= env.discount;
  }
  return total;
}

double lipschitz_constant(const DynamicEnvironment& env) {
  double best = 0.0;
  for (int s = 0; s < env.num_states; ++s) {
    for (int a = 0; a < env.num_actions; ++a) {
      double l1 = 0.0;
      for (double v : env.features[s][a]) l1 += std::abs(v);
      best = std::max(best, l1);
    }
  }
  return best;
}

double value_gap_bound(const DynamicEnvironment& env, double epsilon) {
  const double l = lipschitz_constant(env);
  if (env.discount == 1.0) return 2.0 * l * env.horizon * epsilon;
  const double geo =
      (1.0 - std::pow(env.discount, env.horizon + 1)) / (1.0 - env.discount);
  return 2.0 * l * geo * epsilon;
}

DynamicEnvironment make_random_env(std::uint64_t seed, int num_states, int num_actions,
                                   int horizon, double discount, int feature_dim) {
  Rng rng(seed);
  DynamicEnvironment env;
  env.num_states = num_states;
  env.num_actions = num_actions;
  env.horizon = horizon;
  env.discount = discount;

  const auto dirichlet_row = [&](int len) {
    std::vector<double> row(len);
    double total = 0.0;
    for (double& v : row) {
      v = rng.exponential();
      total += v;
    }
    for (double& v : row) v /= total;
    // Renormalize the largest entry so the row sums to 1 exactly.
    double sum = 0.0;
    int arg = 0;
    for (int i = 0; i < len; ++i) {
      sum += row[i];
      if (row[i] > row[arg]) arg = i;
    }
    row[arg] += 1.0 - sum;
    return row;
  };

  env.initial_dist = dirichlet_row(num_states);
  env.transitions.resize(num_states);
  env.features.resize(num_states);
  for (int s = 0; s < num_states; ++s) {
    env.transitions[s].resize(num_actions);
    env.features[s].resize(num_actions);
    for (int a = 0; a < num_actions; ++a) {
      env.transitions[s][a] = dirichlet_row(num_states);
      env.features[s][a].resize(feature_dim);
      for (double& v : env.features[s][a]) v = rng.uniform();
    }
  }
  env.validate();
  return env;
}

DynamicEnvironment DynamicEnvironment::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("env: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("env: '" + path + "': " + e.what());
  }
  DynamicEnvironment env;
  try {
    env.num_states = j.at("num_states").get<int>();
    env.num_actions = j.at("num_actions").get<int>();
    env.horizon = j.at("horizon").get<int>();
    env.discount = j.at("discount").get<double>();
    env.initial_dist = j.at("initial_dist").get<std::vector<double>>();
    env.transitions =
        j.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
    env.features = j.at("features").get<std::vector<std::vector<std::vector<double>>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("env: '" + path + "': " + e.what());
  }
  env.validate();
  return env;
}

std::string DynamicEnvironment::to_json_string(int indent) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["num_states"] = num_states;
  j["num_actions"] = num_actions;
  j["horizon"] = horizon;
  j["discount"] = discount;
  j["initial_dist"] = initial_dist;
  j["transitions"] = transitions;
  j["features"] = features;
  return j.dump(indent);
}

void DynamicEnvironment::save_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("env: cannot write '" + path + "'");
  out << to_json_string() << "\n";
}

}  // namespace pct
