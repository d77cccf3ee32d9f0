#include "pct/committee.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"
#include "pct/errors.hpp"

namespace pct {

namespace {

// Deterministic parallel map: worker w handles indices w, w+threads, ...
// and writes only to its own slots.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += threads) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "representative") return TrainMode::kRepresentative;
  if (s == "cluster_sum") return TrainMode::kClusterSum;
  throw ValidationError("unknown train mode '" + s + "'");
}

std::string to_string(TrainMode mode) {
  return mode == TrainMode::kRepresentative ? "representative" : "cluster_sum";
}

PolicyCommittee train_committee(const DynamicEnvironment& env, const TaskSet& training_tasks,
                                const CoverSolution& cover, TrainMode mode, int threads) {
  if (static_cast<int>(cover.assignment.size()) != training_tasks.size()) {
    throw ValidationError("train_committee: cover does not match the task set");
  }
  if (training_tasks.dim() != env.feature_dim()) {
    throw ValidationError("train_committee: task dimension does not match env features");
  }
  if (cover.centers.empty()) {
    throw ValidationError("train_committee: cover has no centers");
  }

  const int k = static_cast<int>(cover.centers.size());
  PolicyCommittee committee;
  committee.members.resize(k);

  parallel_for(k, threads, [&](int m) {
    CommitteeMember member;
    member.center = cover.centers[m];

    const std::vector<int> cluster = cover.cluster(m);
    for (int i : cluster) member.cluster_tasks.push_back(training_tasks.id(i));

    if (mode == TrainMode::kClusterSum && !cluster.empty()) {
      TaskParams mean;
      mean.theta.assign(training_tasks.dim(), 0.0);
      for (int i : cluster) {
        for (int s = 0; s < training_tasks.dim(); ++s) {
          mean.theta[s] += training_tasks.coord(i, s);
        }
      }
      for (double& v : mean.theta) v /= cluster.size();
      member.trained_theta = mean;
    } else {
      member.trained_theta = member.center;
    }
    member.policy = value_iteration(env, MdpTask{member.trained_theta});
    committee.members[m] = std::move(member);
  });
  return committee;
}

std::pair<double, int> committee_value(const PolicyCommittee& committee,
                                       const DynamicEnvironment& env, const MdpTask& task) {
  if (committee.members.empty()) {
    throw ValidationError("committee_value: empty committee");
  }
  double best = -std::numeric_limits<double>::infinity();
  int best_m = -1;
  for (int m = 0; m < committee.size(); ++m) {
    const double v = policy_value(env, task, committee.members[m].policy);
    if (v > best) {
      best = v;
      best_m = m;
    }
  }
  return {best, best_m};
}

CoverReport evaluate_cover(const PolicyCommittee& committee, const DynamicEnvironment& env,
                           const TaskSet& tasks, double epsilon_value, int threads) {
  if (epsilon_value < 0.0) {
    throw ValidationError("evaluate_cover: epsilon_value must be >= 0");
  }
  CoverReport report;
  report.epsilon_value = epsilon_value;
  report.per_task.resize(tasks.size());
  parallel_for(tasks.size(), threads, [&](int i) {
    const MdpTask task{tasks.task(i)};
    TaskOutcome outcome;
    outcome.id = tasks.id(i);
    outcome.v_star = value_iteration(env, task).initial_value(env);
    const auto [value, member] = committee_value(committee, env, task);
    outcome.v_committee = value;
    outcome.best_member = member;
    outcome.covered = value >= outcome.v_star - epsilon_value;
    report.per_task[i] = std::move(outcome);
  });
  int missed = 0;
  for (const auto& o : report.per_task) missed += o.covered ? 0 : 1;
  report.delta_hat = static_cast<double>(missed) / tasks.size();
  return report;
}

CoverReport evaluate_cover(const PolicyCommittee& committee, const DynamicEnvironment& env,
                           const GmmSpec& gmm, int m, std::uint64_t seed,
                           double epsilon_value, int threads) {
  return evaluate_cover(committee, env, sample_tasks(gmm, m, seed), epsilon_value, threads);
}

FewShotResult fewshot_select(const PolicyCommittee& committee, const DynamicEnvironment& env,
                             const MdpTask& task, const FewShotConfig& cfg, int threads) {
  if (committee.members.empty()) {
    throw ValidationError("fewshot_select: empty committee");
  }
  if (cfg.episodes_per_policy < 1) {
    throw ValidationError("fewshot_select: episodes_per_policy must be >= 1");
  }
  const int k = committee.size();
  const std::int64_t p = cfg.episodes_per_policy;

  FewShotResult result;
  result.empirical_means.assign(k, 0.0);
  parallel_for(k, threads, [&](int m) {
    double total = 0.0;
    for (std::int64_t e = 0; e < p; ++e) {
      const std::uint64_t seed =
          cfg.common_random_numbers ? cfg.seed + e : cfg.seed + m * p + e;
      total += rollout(env, task, committee.members[m].policy, seed);
    }
    result.empirical_means[m] = total / static_cast<double>(p);
  });

  int best = 0;
  for (int m = 1; m < k; ++m) {
    if (result.empirical_means[m] > result.empirical_means[best]) best = m;
  }
  result.chosen_index = best;
  return result;
}

int required_episode_count(int horizon, double span_bound, double alpha, double beta) {
  if (horizon < 1) throw ValidationError("required_episode_count: horizon must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("required_episode_count: alpha must be in (0,1)");
  }
  if (span_bound < 0.0) {
    throw ValidationError("required_episode_count: span bound must be >= 0");
  }
  if (!(beta > 2.0 * span_bound)) {
    throw ValidationError(
        "required_episode_count: beta must exceed twice the span bound, otherwise the "
        "episode bound's denominator (beta - 2H)^2 is not positive");
  }
  const double margin = beta - 2.0 * span_bound;
  const double raw = 32.0 * horizon * (span_bound + 1.0) * (span_bound + 1.0) *
                     std::log(4.0 / alpha) / (margin * margin);
  return std::max(1, static_cast<int>(std::ceil(raw)));
}

namespace {

nlohmann::json policy_to_json(const Policy& p) {
  return {{"actions", p.actions}, {"values", p.values}};
}

Policy policy_from_json(const nlohmann::json& j) {
  Policy p;
  p.actions = j.at("actions").get<std::vector<std::vector<int>>>();
  p.values = j.at("values").get<std::vector<std::vector<double>>>();
  return p;
}

}  // namespace

std::string PolicyCommittee::to_json_string(int indent) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["members"] = nlohmann::json::array();
  for (const auto& m : members) {
    j["members"].push_back({{"center", m.center.theta},
                            {"trained_theta", m.trained_theta.theta},
                            {"cluster_tasks", m.cluster_tasks},
                            {"policy", policy_to_json(m.policy)}});
  }
  return j.dump(indent);
}

PolicyCommittee PolicyCommittee::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("PolicyCommittee: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("PolicyCommittee: '" + path + "': " + e.what());
  }
  PolicyCommittee committee;
  try {
    for (const auto& jm : j.at("members")) {
      CommitteeMember m;
      m.center.theta = jm.at("center").get<std::vector<double>>();
      m.trained_theta.theta = jm.at("trained_theta").get<std::vector<double>>();
      m.cluster_tasks = jm.at("cluster_tasks").get<std::vector<std::string>>();
      m.policy = policy_from_json(jm.at("policy"));
      committee.members.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("PolicyCommittee: '" + path + "': " + e.what());
  }
  return committee;
}

void PolicyCommittee::save_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("PolicyCommittee: cannot write '" + path + "'");
  out << to_json_string() << "\n";
}

std::string CoverReport::to_json_string(int indent) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["epsilon_value"] = epsilon_value;
  j["delta_hat"] = delta_hat;
  j["per_task"] = nlohmann::json::array();
  for (const auto& o : per_task) {
    j["per_task"].push_back({{"id", o.id},
                             {"v_star", o.v_star},
                             {"v_committee", o.v_committee},
                             {"best_member", o.best_member},
                             {"covered", o.covered}});
  }
  return j.dump(indent);
}

void CoverReport::save_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("CoverReport: cannot write '" + path + "'");
  out << to_json_string() << "\n";
}

void CoverReport::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("CoverReport: cannot write '" + path + "'");
  out << "task_id,v_star,v_committee,best_member,covered\n";
  char buf[64];
  for (const auto& o : per_task) {
    out << o.id << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", o.v_star);
    out << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", o.v_committee);
    out << buf << "," << o.best_member << "," << (o.covered ? 1 : 0) << "\n";
  }
}

}  // namespace pct
