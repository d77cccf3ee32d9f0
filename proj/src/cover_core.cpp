#include "pct/cover_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "pct/errors.hpp"

namespace pct {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("epsilon must be a finite nonnegative real");
  }
}

void check_k(int k) {
  if (k < 1) throw ValidationError("K must be >= 1");
}

TaskParams midpoint_center(const TaskSet& tasks, const std::vector<int>& group) {
  const int d = tasks.dim();
  TaskParams center;
  center.theta.resize(d);
  for (int s = 0; s < d; ++s) {
    double lo = tasks.coord(group[0], s);
    double hi = lo;
    for (int i : group) {
      lo = std::min(lo, tasks.coord(i, s));
      hi = std::max(hi, tasks.coord(i, s));
    }
    center.theta[s] = 0.5 * (lo + hi);
  }
  return center;
}

// Fixed-width bitset over task indices for intersection counting.
class Bitset {
 public:
  explicit Bitset(int n) : n_(n), words_((n + 63) / 64, 0) {}

  void set(int i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

  int intersect_into(const Bitset& other, Bitset& out) const {
    int count = 0;
    for (size_t w = 0; w < words_.size(); ++w) {
      out.words_[w] = words_[w] & other.words_[w];
      count += std::popcount(out.words_[w]);
    }
    return count;
  }

  int count() const {
    int c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
  }

  std::vector<int> indices() const {
    std::vector<int> out;
    for (int i = 0; i < n_; ++i) {
      if (words_[i >> 6] >> (i & 63) & 1) out.push_back(i);
    }
    return out;
  }

  bool subset_of(const Bitset& other) const {
    for (size_t w = 0; w < words_.size(); ++w) {
      if (words_[w] & ~other.words_[w]) return false;
    }
    return true;
  }

  bool operator==(const Bitset& other) const { return words_ == other.words_; }

  void union_with(const Bitset& other) {
    for (size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  }

 private:
  int n_;
  std::vector<std::uint64_t> words_;
};

}  // namespace

std::string to_string(CoverAlgorithm a) {
  switch (a) {
    case CoverAlgorithm::kGea: return "gea";
    case CoverAlgorithm::kGia: return "gia";
    case CoverAlgorithm::kGrad: return "grad";
    case CoverAlgorithm::kOracle: return "oracle";
  }
  return "oracle";
}

CoverAlgorithm cover_algorithm_from_string(const std::string& s) {
  if (s == "gea") return CoverAlgorithm::kGea;
  if (s == "gia") return CoverAlgorithm::kGia;
  if (s == "grad") return CoverAlgorithm::kGrad;
  if (s == "oracle") return CoverAlgorithm::kOracle;
  throw ValidationError("unknown cover algorithm '" + s + "'");
}

std::vector<int> CoverSolution::cluster(int k) const {
  std::vector<int> out;
  for (size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] && *assignment[i] == k) out.push_back(static_cast<int>(i));
  }
  return out;
}

CoverSolution coverage_stats(const TaskSet& tasks, const std::vector<TaskParams>& centers,
                             double epsilon, CoverAlgorithm tag) {
  check_epsilon(epsilon);
  for (const auto& c : centers) {
    if (c.dim() != tasks.dim()) {
      throw ValidationError("coverage_stats: center dimension mismatch");
    }
  }
  CoverSolution sol;
  sol.epsilon = epsilon;
  sol.algorithm = tag;
  sol.centers = centers;
  sol.assignment.assign(tasks.size(), std::nullopt);
  for (int i = 0; i < tasks.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_k = -1;
    for (int k = 0; k < static_cast<int>(centers.size()); ++k) {
      const double dist = linf_distance(tasks.task(i), centers[k]);
      if (dist <= epsilon && dist < best) {
        best = dist;
        best_k = k;
      }
    }
    if (best_k >= 0) {
      sol.assignment[i] = best_k;
      ++sol.covered_count;
    }
  }
  sol.miss_rate = 1.0 - static_cast<double>(sol.covered_count) / tasks.size();
  return sol;
}

CoverSolution gea(const TaskSet& tasks, double epsilon, int k) {
  check_epsilon(epsilon);
  check_k(k);
  const int n = tasks.size();
  const int d = tasks.dim();
  const double window = 2.0 * epsilon;

  std::vector<int> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<TaskParams> centers;

  for (int round = 0; round < k && !remaining.empty(); ++round) {
    std::vector<int> best_group;
    for (int anchor : remaining) {
      std::vector<int> group{anchor};
      std::vector<double> lo(d), hi(d);
      for (int s = 0; s < d; ++s) lo[s] = hi[s] = tasks.coord(anchor, s);
      for (int q : remaining) {
        if (q == anchor) continue;
        bool fits = true;
        for (int s = 0; s < d; ++s) {
          const double x = tasks.coord(q, s);
          if (std::max(hi[s], x) - std::min(lo[s], x) > window) {
            fits = false;
            break;
          }
        }
        if (fits) {
          group.push_back(q);
          for (int s = 0; s < d; ++s) {
            lo[s] = std::min(lo[s], tasks.coord(q, s));
            hi[s] = std::max(hi[s], tasks.coord(q, s));
          }
        }
      }
      if (group.size() > best_group.size()) best_group = std::move(group);
    }
    centers.push_back(midpoint_center(tasks, best_group));
    std::vector<int> next;
    for (int i : remaining) {
      if (std::find(best_group.begin(), best_group.end(), i) == best_group.end()) {
        next.push_back(i);
      }
    }
    remaining = std::move(next);
  }
  return coverage_stats(tasks, centers, epsilon, CoverAlgorithm::kGea);
}

std::vector<std::vector<int>> build_dimension_lists(const TaskSet& tasks, double epsilon,
                                                    int dim) {
  check_epsilon(epsilon);
  if (dim < 0 || dim >= tasks.dim()) {
    throw ValidationError("build_dimension_lists: dimension index out of range");
  }
  const int n = tasks.size();
  const double window = 2.0 * epsilon;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return tasks.coord(a, dim) < tasks.coord(b, dim);
  });

  // The list anchored at sorted position i covers positions [first_i, i].
  std::vector<int> first(n);
  for (int i = 0; i < n; ++i) {
    int j = i;
    while (j > 0 && tasks.coord(order[i], dim) <= tasks.coord(order[j - 1], dim) + window) {
      --j;
    }
    first[i] = j;
  }

  // Keep maximal ranges only: [first_i, i] is contained in [first_j, j]
  // whenever j > i and first_j <= first_i.
  std::vector<std::vector<int>> lists;
  int suffix_min = n;
  std::vector<bool> keep(n, false);
  for (int i = n - 1; i >= 0; --i) {
    if (first[i] < suffix_min) {
      keep[i] = true;
      suffix_min = first[i];
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    std::vector<int> list(order.begin() + first[i], order.begin() + i + 1);
    std::sort(list.begin(), list.end());
    lists.push_back(std::move(list));
  }
  return lists;
}

namespace {

struct GiaSearch {
  const std::vector<std::vector<Bitset>>& masks;  // per dimension
  std::int64_t budget;
  std::int64_t nodes = 0;
  int best_count = 0;
  Bitset best;
  std::vector<Bitset> scratch;

  GiaSearch(const std::vector<std::vector<Bitset>>& masks, int n, std::int64_t budget)
      : masks(masks), budget(budget), best(n) {
    scratch.assign(masks.size(), Bitset(n));
  }

  void run(int depth, const Bitset& running) {
    for (const Bitset& mask : masks[depth]) {
      if (++nodes > budget) {
        throw CapacityError(
            "gia: cross-dimension search exceeded its node budget; "
            "use the gradient-based cover for this instance");
      }
      Bitset& inter = scratch[depth];
      int count;
      if (depth == 0) {
        inter = mask;
        count = inter.count();
      } else {
        count = running.intersect_into(mask, inter);
      }
      // The running intersection only shrinks, so anything not strictly
      // better than the incumbent is dead.
      if (count <= best_count) continue;
      if (depth + 1 == static_cast<int>(masks.size())) {
        best = inter;
        best_count = count;
      } else {
        run(depth + 1, inter);
      }
    }
  }
};

}  // namespace

CoverSolution gia(const TaskSet& tasks, double epsilon, int k, const GiaOptions& opts) {
  check_epsilon(epsilon);
  check_k(k);
  const int n = tasks.size();
  const int d = tasks.dim();

  std::vector<int> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<TaskParams> centers;
  std::int64_t nodes_used = 0;

  for (int round = 0; round < k && !remaining.empty(); ++round) {
    const TaskSet sub = tasks.subset(remaining);
    const int m = sub.size();

    std::vector<std::vector<Bitset>> masks(d);
    for (int s = 0; s < d; ++s) {
      for (const auto& list : build_dimension_lists(sub, epsilon, s)) {
        Bitset b(m);
        for (int i : list) b.set(i);
        masks[s].push_back(std::move(b));
      }
    }

    GiaSearch search(masks, m, opts.node_budget - nodes_used);
    search.run(0, Bitset(m));
    nodes_used += search.nodes;

    const std::vector<int> local = search.best.indices();
    std::vector<int> group;
    group.reserve(local.size());
    for (int i : local) group.push_back(remaining[i]);

    centers.push_back(midpoint_center(tasks, group));
    std::vector<int> next;
    for (int i : remaining) {
      if (std::find(group.begin(), group.end(), i) == group.end()) next.push_back(i);
    }
    remaining = std::move(next);
  }
  return coverage_stats(tasks, centers, epsilon, CoverAlgorithm::kGia);
}

namespace {

// Candidate center coordinates per dimension: each sorted unique task
// coordinate shifted up by epsilon.
std::vector<std::vector<double>> anchored_candidates(const TaskSet& tasks, double epsilon) {
  std::vector<std::vector<double>> values(tasks.dim());
  for (int s = 0; s < tasks.dim(); ++s) {
    for (int i = 0; i < tasks.size(); ++i) values[s].push_back(tasks.coord(i, s) + epsilon);
    std::sort(values[s].begin(), values[s].end());
    values[s].erase(std::unique(values[s].begin(), values[s].end()), values[s].end());
  }
  return values;
}

std::int64_t candidate_count(const std::vector<std::vector<double>>& values,
                             std::int64_t budget) {
  std::int64_t total = 1;
  for (const auto& v : values) {
    total *= static_cast<std::int64_t>(v.size());
    if (total > budget) return -1;
  }
  return total;
}

template <typename Visit>
void for_each_candidate(const std::vector<std::vector<double>>& values, Visit visit) {
  const int d = static_cast<int>(values.size());
  std::vector<int> idx(d, 0);
  TaskParams center;
  center.theta.resize(d);
  while (true) {
    for (int s = 0; s < d; ++s) center.theta[s] = values[s][idx[s]];
    visit(center);
    int s = d - 1;
    while (s >= 0 && ++idx[s] == static_cast<int>(values[s].size())) {
      idx[s] = 0;
      --s;
    }
    if (s < 0) break;
  }
}

}  // namespace

SingleCover max_1_cover_oracle(const TaskSet& tasks, double epsilon,
                               const OracleOptions& opts) {
  check_epsilon(epsilon);
  const auto values = anchored_candidates(tasks, epsilon);
  if (candidate_count(values, opts.candidate_budget) < 0) {
    throw CapacityError("max_1_cover_oracle: candidate grid exceeds budget");
  }
  SingleCover best;
  for_each_candidate(values, [&](const TaskParams& center) {
    std::vector<int> covered;
    for (int i = 0; i < tasks.size(); ++i) {
      if (linf_distance(tasks.task(i), center) <= epsilon) covered.push_back(i);
    }
    if (covered.size() > best.covered.size()) {
      best.center = center;
      best.covered = std::move(covered);
    }
  });
  return best;
}

KCoverResult max_k_cover_oracle(const TaskSet& tasks, double epsilon, int k,
                                const OracleOptions& opts) {
  check_epsilon(epsilon);
  check_k(k);
  const int n = tasks.size();
  const auto values = anchored_candidates(tasks, epsilon);
  if (candidate_count(values, opts.candidate_budget) < 0) {
    throw CapacityError("max_k_cover_oracle: candidate grid exceeds budget");
  }

  // Distinct, non-dominated coverage sets with a representative center each.
  std::vector<Bitset> masks;
  std::vector<TaskParams> reps;
  for_each_candidate(values, [&](const TaskParams& center) {
    Bitset mask(n);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      if (linf_distance(tasks.task(i), center) <= epsilon) {
        mask.set(i);
        any = true;
      }
    }
    if (!any) return;
    for (const auto& m : masks) {
      if (mask.subset_of(m)) return;
    }
    std::vector<Bitset> kept_masks;
    std::vector<TaskParams> kept_reps;
    for (size_t j = 0; j < masks.size(); ++j) {
      if (!masks[j].subset_of(mask)) {
        kept_masks.push_back(masks[j]);
        kept_reps.push_back(reps[j]);
      }
    }
    kept_masks.push_back(mask);
    kept_reps.push_back(center);
    masks = std::move(kept_masks);
    reps = std::move(kept_reps);
  });

  const int m = static_cast<int>(masks.size());
  KCoverResult result;
  if (m == 0) return result;

  if (k >= m) {
    Bitset all(n);
    for (const auto& mask : masks) all.union_with(mask);
    result.covered_count = all.count();
    result.delta_star = 1.0 - static_cast<double>(result.covered_count) / n;
    result.centers = reps;
    return result;
  }

  // C(m, k) combinations, lexicographic; guard the budget first.
  double combos = 1.0;
  for (int i = 0; i < k; ++i) combos = combos * (m - i) / (i + 1);
  if (combos > static_cast<double>(opts.combo_budget)) {
    throw CapacityError("max_k_cover_oracle: " + std::to_string(combos) +
                        " center combinations exceed budget");
  }

  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  int best_count = -1;
  std::vector<int> best_idx;
  while (true) {
    Bitset uni(n);
    for (int j : idx) uni.union_with(masks[j]);
    const int count = uni.count();
    if (count > best_count) {
      best_count = count;
      best_idx = idx;
      if (best_count == n) break;
    }
    int s = k - 1;
    while (s >= 0 && idx[s] == m - k + s) --s;
    if (s < 0) break;
    ++idx[s];
    for (int j = s + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }

  result.covered_count = best_count;
  result.delta_star = 1.0 - static_cast<double>(best_count) / n;
  for (int j : best_idx) result.centers.push_back(reps[j]);
  return result;
}

std::string CoverSolution::to_json_string(int indent) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["epsilon"] = epsilon;
  j["algorithm"] = to_string(algorithm);
  j["centers"] = nlohmann::json::array();
  for (const auto& c : centers) j["centers"].push_back(c.theta);
  j["assignment"] = nlohmann::json::array();
  for (const auto& a : assignment) {
    if (a) {
      j["assignment"].push_back(*a);
    } else {
      j["assignment"].push_back(nullptr);
    }
  }
  j["covered_count"] = covered_count;
  j["miss_rate"] = miss_rate;
  return j.dump(indent);
}

CoverSolution CoverSolution::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("CoverSolution: ") + e.what());
  }
  CoverSolution sol;
  try {
    sol.epsilon = j.at("epsilon").get<double>();
    sol.algorithm = cover_algorithm_from_string(j.at("algorithm").get<std::string>());
    for (const auto& c : j.at("centers")) {
      TaskParams p;
      p.theta = c.get<std::vector<double>>();
      sol.centers.push_back(std::move(p));
    }
    for (const auto& a : j.at("assignment")) {
      if (a.is_null()) {
        sol.assignment.push_back(std::nullopt);
      } else {
        sol.assignment.push_back(a.get<int>());
      }
    }
    sol.covered_count = j.at("covered_count").get<int>();
    sol.miss_rate = j.at("miss_rate").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("CoverSolution: ") + e.what());
  }
  return sol;
}

CoverSolution CoverSolution::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("CoverSolution: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

void CoverSolution::save_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("CoverSolution: cannot write '" + path + "'");
  out << to_json_string() << "\n";
}

}  // namespace pct
