#include "pct/task_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pct/errors.hpp"
#include "pct/rng.hpp"

namespace pct {

namespace {

void check_finite(const TaskParams& p, const std::string& context) {
  for (double v : p.theta) {
    if (!std::isfinite(v)) {
      throw ValidationError(context + ": non-finite task coordinate");
    }
  }
}

// Locale-independent double parse; decimal point only, full-token match.
double parse_double(const std::string& token, const std::string& context) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(context + ": not a number: '" + token + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(context + ": non-finite value: '" + token + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

double linf_distance(const TaskParams& a, const TaskParams& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("linf_distance: dimension mismatch (" +
                          std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
  double best = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    best = std::max(best, std::abs(a.theta[i] - b.theta[i]));
  }
  return best;
}

TaskSet::TaskSet(std::vector<TaskParams> tasks, std::vector<std::string> ids)
    : tasks_(std::move(tasks)), ids_(std::move(ids)) {
  if (tasks_.empty()) {
    throw ValidationError("TaskSet: empty task list");
  }
  if (ids_.size() != tasks_.size()) {
    throw ValidationError("TaskSet: ids/tasks length mismatch");
  }
  dim_ = tasks_[0].dim();
  if (dim_ < 1) {
    throw ValidationError("TaskSet: dimension must be >= 1");
  }
  for (size_t i = 0; i < tasks_.size(); ++i) {
    if (tasks_[i].dim() != dim_) {
      throw ValidationError("TaskSet: task " + std::to_string(i) + " has dimension " +
                            std::to_string(tasks_[i].dim()) + ", expected " +
                            std::to_string(dim_));
    }
    check_finite(tasks_[i], "TaskSet: task " + std::to_string(i));
  }
  std::set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) {
      throw ValidationError("TaskSet: duplicate id '" + id + "'");
    }
  }
}

TaskSet TaskSet::subset(const std::vector<int>& indices) const {
  std::vector<TaskParams> tasks;
  std::vector<std::string> ids;
  tasks.reserve(indices.size());
  ids.reserve(indices.size());
  for (int i : indices) {
    tasks.push_back(tasks_[i]);
    ids.push_back(ids_[i]);
  }
  return TaskSet(std::move(tasks), std::move(ids));
}

double TaskSet::linf_diameter() const {
  double diameter = 0.0;
  for (int d = 0; d < dim_; ++d) {
    double lo = tasks_[0].theta[d];
    double hi = lo;
    for (const auto& t : tasks_) {
      lo = std::min(lo, t.theta[d]);
      hi = std::max(hi, t.theta[d]);
    }
    diameter = std::max(diameter, hi - lo);
  }
  return diameter;
}

int GmmSpec::dim() const {
  return components.empty() ? 0 : static_cast<int>(components[0].mean.size());
}

void GmmSpec::validate() const {
  if (components.empty()) {
    throw ValidationError("GmmSpec: no components");
  }
  const int d = dim();
  if (d < 1) {
    throw ValidationError("GmmSpec: components[0].mean is empty");
  }
  double total = 0.0;
  for (size_t c = 0; c < components.size(); ++c) {
    const auto& comp = components[c];
    const std::string where = "GmmSpec: components[" + std::to_string(c) + "]";
    if (comp.weight < 0.0 || !std::isfinite(comp.weight)) {
      throw ValidationError(where + ".weight must be a probability");
    }
    total += comp.weight;
    if (static_cast<int>(comp.mean.size()) != d) {
      throw ValidationError(where + ".mean has wrong dimension");
    }
    if (static_cast<int>(comp.stddev.size()) != d) {
      throw ValidationError(where + ".stddev has wrong dimension");
    }
    for (double m : comp.mean) {
      if (!std::isfinite(m)) throw ValidationError(where + ".mean has non-finite entry");
    }
    for (double s : comp.stddev) {
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw ValidationError(where + ".stddev entries must be > 0");
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("GmmSpec: component weights sum to " + format_double(total) +
                          ", expected 1");
  }
}

GmmSpec GmmSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("GmmSpec: cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("GmmSpec: '" + path + "': " + e.what());
  }
  if (!j.contains("components") || !j["components"].is_array()) {
    throw ParseError("GmmSpec: '" + path + "': missing 'components' array");
  }
  GmmSpec spec;
  for (size_t c = 0; c < j["components"].size(); ++c) {
    const auto& jc = j["components"][c];
    const std::string where = "GmmSpec: '" + path + "': components[" + std::to_string(c) + "]";
    GmmComponent comp;
    try {
      comp.weight = jc.at("weight").get<double>();
      comp.mean = jc.at("mean").get<std::vector<double>>();
      comp.stddev = jc.at("stddev").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    spec.components.push_back(std::move(comp));
  }
  spec.validate();
  return spec;
}

std::string GmmSpec::to_json_string(int indent) const {
  nlohmann::json j;
  j["components"] = nlohmann::json::array();
  for (const auto& c : components) {
    j["components"].push_back({{"weight", c.weight}, {"mean", c.mean}, {"stddev", c.stddev}});
  }
  return j.dump(indent);
}

TaskSet sample_tasks(const GmmSpec& gmm, int n, std::uint64_t seed) {
  gmm.validate();
  if (n < 1) {
    throw ValidationError("sample_tasks: n must be >= 1");
  }
  std::vector<double> weights;
  weights.reserve(gmm.components.size());
  for (const auto& c : gmm.components) weights.push_back(c.weight);

  Rng rng(seed);
  const int d = gmm.dim();
  std::vector<TaskParams> tasks;
  std::vector<std::string> ids;
  tasks.reserve(n);
  ids.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int c = rng.categorical(weights);
    TaskParams p;
    p.theta.resize(d);
    for (int k = 0; k < d; ++k) {
      p.theta[k] = rng.normal(gmm.components[c].mean[k], gmm.components[c].stddev[k]);
    }
    tasks.push_back(std::move(p));
    ids.push_back("t" + std::to_string(i));
  }
  return TaskSet(std::move(tasks), std::move(ids));
}

namespace {

TaskSet load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("load_task_set: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("load_task_set: '" + path + "': empty file");
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "id") {
    throw ParseError("load_task_set: '" + path + "': header must start with 'id'");
  }
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1) {
    throw ParseError("load_task_set: '" + path + "': no coordinate columns");
  }
  std::vector<TaskParams> tasks;
  std::vector<std::string> ids;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "load_task_set: '" + path + "': row " + std::to_string(row);
    if (static_cast<int>(fields.size()) != d + 1) {
      throw ParseError(where + ": expected " + std::to_string(d + 1) + " fields, got " +
                       std::to_string(fields.size()));
    }
    TaskParams p;
    p.theta.reserve(d);
    for (int k = 0; k < d; ++k) {
      p.theta.push_back(parse_double(fields[k + 1], where));
    }
    ids.push_back(fields[0].empty() ? std::to_string(row - 1) : fields[0]);
    tasks.push_back(std::move(p));
  }
  if (tasks.empty()) {
    throw ParseError("load_task_set: '" + path + "': no data rows");
  }
  return TaskSet(std::move(tasks), std::move(ids));
}

TaskSet load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("load_task_set: cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_task_set: '" + path + "': " + e.what());
  }
  if (!j.is_array() || j.empty()) {
    throw ParseError("load_task_set: '" + path + "': expected a nonempty array");
  }
  std::vector<TaskParams> tasks;
  std::vector<std::string> ids;
  int expected_dim = -1;
  for (size_t r = 0; r < j.size(); ++r) {
    const std::string where = "load_task_set: '" + path + "': record " + std::to_string(r);
    const auto& rec = j[r];
    if (!rec.is_object() || !rec.contains("theta") || !rec["theta"].is_array()) {
      throw ParseError(where + ": expected an object with a 'theta' array");
    }
    TaskParams p;
    for (const auto& v : rec["theta"]) {
      if (!v.is_number()) throw ParseError(where + ": non-numeric theta entry");
      p.theta.push_back(v.get<double>());
    }
    if (expected_dim < 0) expected_dim = p.dim();
    if (p.dim() != expected_dim) {
      throw ParseError(where + ": theta has length " + std::to_string(p.dim()) +
                       ", expected " + std::to_string(expected_dim));
    }
    ids.push_back(rec.contains("id") ? rec["id"].get<std::string>() : std::to_string(r));
    tasks.push_back(std::move(p));
  }
  return TaskSet(std::move(tasks), std::move(ids));
}

}  // namespace

TaskSet load_task_set(const std::string& path, TaskFileFormat format) {
  return format == TaskFileFormat::kCsv ? load_csv(path) : load_json(path);
}

void save_task_set(const TaskSet& tasks, const std::string& path, TaskFileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("save_task_set: cannot write '" + path + "'");
  }
  if (format == TaskFileFormat::kCsv) {
    out << "id";
    for (int d = 0; d < tasks.dim(); ++d) out << ",x" << d;
    out << "\n";
    for (int i = 0; i < tasks.size(); ++i) {
      out << tasks.id(i);
      for (int d = 0; d < tasks.dim(); ++d) out << "," << format_double(tasks.coord(i, d));
      out << "\n";
    }
  } else {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < tasks.size(); ++i) {
      j.push_back({{"id", tasks.id(i)}, {"theta", tasks.task(i).theta}});
    }
    out << j.dump(2) << "\n";
  }
}

int required_sample_size(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("required_sample_size: alpha must be in (0,1)");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ValidationError("required_sample_size: beta must be in (0,1)");
  }
  const double raw = 9.0 * std::log(5.0 / alpha) / (2.0 * beta * beta);
  return static_cast<int>(std::ceil(raw));
}

TaskSet standardize(const TaskSet& tasks) {
  const int n = tasks.size();
  const int d = tasks.dim();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) mean[k] += tasks.coord(i, k);
  }
  for (int k = 0; k < d; ++k) mean[k] /= n;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const double delta = tasks.coord(i, k) - mean[k];
      sd[k] += delta * delta;
    }
  }
  for (int k = 0; k < d; ++k) sd[k] = std::sqrt(sd[k] / n);

  std::vector<TaskParams> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].theta.resize(d);
    for (int k = 0; k < d; ++k) {
      out[i].theta[k] = sd[k] > 0.0 ? (tasks.coord(i, k) - mean[k]) / sd[k] : 0.0;
    }
  }
  return TaskSet(std::move(out), tasks.ids());
}

}  // namespace pct
