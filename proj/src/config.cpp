#include "arx/config.hpp"

#include "arx/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace arx {

bool OutputOptions::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

class KeyValues {
 public:
  explicit KeyValues(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string stripped = trim(line);
      if (stripped.empty()) continue;
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      std::string key = trim(std::string_view(stripped).substr(0, eq));
      std::string value = trim(std::string_view(stripped).substr(eq + 1));
      if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
      if (!values_.emplace(key, value).second) {
        throw ConfigError(key + ": duplicate key (line " + std::to_string(line_no) + ")");
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key + ": missing required key");
    used_.insert(key);
    return it->second;
  }

  std::optional<std::string> maybe(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get(key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) throw ConfigError(key + ": unknown key");
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected a real number, got '" + value + "'");
  }
  return out;
}

bool parse_switch(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError(key + ": expected on/off, got '" + value + "'");
}

Matrix parse_matrix_field(const std::string& key, const std::string& value, Eigen::Index rows,
                          Eigen::Index cols) {
  Matrix m;
  try {
    m = linalg::parse_matrix(value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(key + ": expected " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  }
  return m;
}

template <typename T>
T positive(const std::string& key, T value) {
  if (value < 1) throw ConfigError(key + ": must be at least 1");
  return value;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  KeyValues kv(text);
  const int d = positive("model.d", parse_integer<int>("model.d", kv.get("model.d")));
  const int p = positive("model.p", parse_integer<int>("model.p", kv.get("model.p")));
  const int q = positive("model.q", parse_integer<int>("model.q", kv.get("model.q")));
  MatrixList a;
  MatrixList b;
  for (int i = 1; i <= p; ++i) {
    const std::string key = "model.A" + std::to_string(i);
    a.push_back(parse_matrix_field(key, kv.get(key), d, d));
  }
  for (int j = 1; j <= q; ++j) {
    const std::string key = "model.B" + std::to_string(j);
    b.push_back(parse_matrix_field(key, kv.get(key), d, d));
  }
  Matrix gamma = parse_matrix_field("model.Gamma", kv.get("model.Gamma"), d, d);
  Matrix delta = parse_matrix_field("model.Delta", kv.get("model.Delta"), d, d);

  ExperimentConfig config{ArxModel(std::move(a), std::move(b), std::move(gamma),
                                   std::move(delta))};

  if (auto v = kv.maybe("run.N")) {
    config.horizon = parse_integer<std::int64_t>("run.N", *v);
    if (config.horizon < 0) throw ConfigError("run.N: must be nonnegative");
  }
  if (auto v = kv.maybe("run.M")) config.runs = positive("run.M", parse_integer<int>("run.M", *v));
  if (auto v = kv.maybe("run.seed")) config.seed = parse_integer<std::uint64_t>("run.seed", *v);
  if (auto v = kv.maybe("run.estimator")) {
    if (*v == "ls") {
      config.estimator.mode = WeightMode::ls;
    } else if (*v == "wls") {
      config.estimator.mode = WeightMode::wls;
    } else {
      throw ConfigError("run.estimator: expected 'ls' or 'wls', got '" + *v + "'");
    }
  }
  if (auto v = kv.maybe("run.gamma")) {
    config.estimator.gamma = parse_real("run.gamma", *v);
    if (!(config.estimator.gamma > 0.0)) throw ConfigError("run.gamma: must be positive");
  }
  if (auto v = kv.maybe("run.trajectory")) {
    if (*v == "zero") {
      config.trajectory.kind = TrajectoryKind::zero;
    } else if (*v == "decaying") {
      config.trajectory.kind = TrajectoryKind::decaying;
    } else {
      throw ConfigError("run.trajectory: expected 'zero' or 'decaying', got '" + *v + "'");
    }
  }
  if (auto v = kv.maybe("run.trajectory_scale")) {
    config.trajectory.scale = parse_real("run.trajectory_scale", *v);
  }
  if (auto v = kv.maybe("run.excitation")) config.excitation_on = parse_switch("run.excitation", *v);
  if (auto v = kv.maybe("run.record_stride")) {
    config.record_stride =
        positive("run.record_stride", parse_integer<int>("run.record_stride", *v));
  }
  if (auto v = kv.maybe("run.workers")) {
    config.workers = positive("run.workers", parse_integer<int>("run.workers", *v));
  }
  if (auto v = kv.maybe("run.theta0")) {
    config.theta0 = parse_matrix_field("run.theta0", *v, d * (p + q), d);
  }
  if (auto v = kv.maybe("output.directory")) config.output.directory = *v;
  if (auto v = kv.maybe("output.formats")) {
    config.output.formats.clear();
    std::string list = *v;
    std::replace(list.begin(), list.end(), ',', ' ');
    std::istringstream in(list);
    std::string token;
    while (in >> token) {
      if (token != "csv" && token != "json") {
        throw ConfigError("output.formats: unknown format '" + token + "'");
      }
      config.output.formats.push_back(token);
    }
  }
  kv.reject_unknown();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string echo_config(const ExperimentConfig& c) {
  using linalg::format_double;
  using linalg::format_matrix;
  const auto& m = c.model;
  std::ostringstream out;
  out << "model.d = " << m.d() << '\n';
  out << "model.p = " << m.p() << '\n';
  out << "model.q = " << m.q() << '\n';
  for (int i = 1; i <= m.p(); ++i) out << "model.A" << i << " = " << format_matrix(m.a(i)) << '\n';
  for (int j = 1; j <= m.q(); ++j) out << "model.B" << j << " = " << format_matrix(m.b(j)) << '\n';
  out << "model.Gamma = " << format_matrix(m.gamma()) << '\n';
  out << "model.Delta = " << format_matrix(m.delta()) << '\n';
  out << "run.N = " << c.horizon << '\n';
  out << "run.M = " << c.runs << '\n';
  out << "run.seed = " << c.seed << '\n';
  out << "run.estimator = " << (c.estimator.mode == WeightMode::ls ? "ls" : "wls") << '\n';
  out << "run.gamma = " << format_double(c.estimator.gamma) << '\n';
  out << "run.trajectory = "
      << (c.trajectory.kind == TrajectoryKind::zero ? "zero" : "decaying") << '\n';
  out << "run.trajectory_scale = " << format_double(c.trajectory.scale) << '\n';
  out << "run.excitation = " << (c.excitation_on ? "on" : "off") << '\n';
  out << "run.record_stride = " << c.record_stride << '\n';
  out << "run.workers = " << c.workers << '\n';
  if (c.theta0) out << "run.theta0 = " << format_matrix(*c.theta0) << '\n';
  out << "output.directory = " << c.output.directory << '\n';
  out << "output.formats =";
  for (const auto& f : c.output.formats) out << ' ' << f;
  out << '\n';
  return out.str();
}

std::string config_digest(const ExperimentConfig& config) {
  // Worker count and output location do not influence results.
  ExperimentConfig canonical = config;
  canonical.workers = 1;
  canonical.output = OutputOptions{};
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char ch : echo_config(canonical)) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

SimConfig to_sim_config(const ExperimentConfig& c) {
  SimConfig sim{c.model};
  sim.horizon = c.horizon;
  sim.trajectory = c.trajectory;
  sim.excitation_on = c.excitation_on;
  sim.seed = c.seed;
  sim.estimator = c.estimator;
  sim.theta0 = c.theta0;
  sim.record_stride = c.record_stride;
  return sim;
}

mc::EnsembleConfig to_ensemble_config(const ExperimentConfig& c) {
  mc::EnsembleConfig e{to_sim_config(c)};
  e.runs = c.runs;
  e.base_seed = c.seed;
  e.workers = c.workers;
  return e;
}

}  // namespace arx
