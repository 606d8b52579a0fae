#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "so3track/harness.hpp"

namespace so3track {

namespace {

using FlatConfig = std::map<std::string, YAML::Node>;

// Grouping mappings (e.g. `gains:` or `initial:`) are flattened into one
// namespace of keys.
void flatten(const YAML::Node& node, FlatConfig& out) {
  for (const auto& entry : node) {
    const std::string key = entry.first.as<std::string>();
    if (entry.second.IsMap()) {
      flatten(entry.second, out);
      continue;
    }
    if (!out.emplace(key, entry.second).second) {
      throw ConfigError("duplicate key '" + key + "'");
    }
  }
}

class Reader {
 public:
  explicit Reader(FlatConfig config) : config_(std::move(config)) {}

  bool has(const std::string& key) const { return config_.count(key) != 0; }

  double number(const std::string& key, double fallback) {
    const auto it = find(key);
    if (it == config_.end()) return fallback;
    try {
      return it->second.as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'" + key + "' must be a number");
    }
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const auto it = find(key);
    if (it == config_.end()) return fallback;
    try {
      return it->second.as<std::string>();
    } catch (const YAML::Exception&) {
      throw ConfigError("'" + key + "' must be a string");
    }
  }

  std::vector<double> numbers(const std::string& key, std::size_t count) {
    const auto it = find(key);
    if (it == config_.end()) {
      throw ConfigError("missing key '" + key + "'");
    }
    std::vector<double> values;
    bool ok = it->second.IsSequence();
    if (ok) {
      try {
        values = it->second.as<std::vector<double>>();
      } catch (const YAML::Exception&) {
        ok = false;
      }
    }
    if (!ok) {
      throw ConfigError("'" + key + "' must be a list of numbers");
    }
    if (values.size() != count) {
      std::ostringstream msg;
      msg << "'" << key << "' needs " << count << " values, got " << values.size();
      throw ConfigError(msg.str());
    }
    return values;
  }

  Vector3 vector3(const std::string& key, const Vector3& fallback) {
    if (!has(key)) return fallback;
    const auto v = numbers(key, 3);
    return {v[0], v[1], v[2]};
  }

  Vector3 unit_vector(const std::string& key, const Vector3& fallback) {
    const Vector3 v = vector3(key, fallback);
    if (!(v.norm() > 0.0) || !v.allFinite()) {
      throw ConfigError("'" + key + "' must be a nonzero vector");
    }
    return v.normalized();
  }

  Rotation rotation(const std::string& key) {
    const auto v = numbers(key, 9);
    Matrix3 m;
    m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    try {
      return Rotation(m);
    } catch (const NotARotation& e) {
      throw ConfigError("'" + key + "': " + e.what());
    }
  }

  void reject_unused() const {
    for (const auto& [key, node] : config_) {
      if (!used_.count(key)) {
        throw ConfigError("unknown configuration key '" + key + "'");
      }
    }
  }

 private:
  FlatConfig::const_iterator find(const std::string& key) {
    used_.insert(key);
    return config_.find(key);
  }

  FlatConfig config_;
  std::set<std::string> used_;
};

}  // namespace

Scenario parse_scenario(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed scenario file: ") + e.what());
  }
  if (!root.IsMap()) {
    throw ConfigError("scenario file must be a key-value mapping");
  }
  FlatConfig flat;
  flatten(root, flat);
  Reader in(std::move(flat));

  Scenario s;
  s.name = in.text("name", s.name);
  const std::string mode_name = in.text("controller", "");
  const auto mode = parse_controller_mode(mode_name);
  if (!mode) {
    throw ConfigError("'controller' must be one of AGTS, GTS, aAGTS, aGTS (got '" +
                      mode_name + "')");
  }
  s.mode = *mode;
  s.inertia_diagonal = in.vector3("inertia", s.inertia_diagonal);

  const std::string ref = in.text("reference", "benchmark");
  if (ref == "benchmark") {
    s.reference = ReferenceKind::kBenchmark;
  } else if (ref == "constant") {
    s.reference = ReferenceKind::kConstant;
  } else if (ref == "fixed-axis") {
    s.reference = ReferenceKind::kFixedAxis;
  } else {
    throw ConfigError("'reference' must be benchmark, constant or fixed-axis");
  }
  if (in.has("reference_attitude")) {
    s.reference_attitude = in.rotation("reference_attitude");
  }
  s.reference_axis = in.unit_vector("reference_axis", s.reference_axis);
  s.reference_rate = in.number("reference_rate", s.reference_rate);

  if (in.has("r0")) {
    if (in.has("theta0") || in.has("axis")) {
      throw ConfigError("give either 'r0' or 'theta0'/'axis', not both");
    }
    s.r0 = in.rotation("r0");
  } else {
    const double theta0 = in.number("theta0", 0.0);
    const Vector3 axis = in.unit_vector("axis", Vector3::UnitY());
    s.r0 = initial_attitude_about(s, theta0, axis);
  }
  s.omega0 = in.vector3("omega0", s.omega0);

  s.disturbance = in.vector3("disturbance", s.disturbance);
  s.delta_max = in.number("delta_max", s.delta_max);

  const double k_r = in.number("k_r", 9.0);
  const double k_omega = in.number("k_omega", 4.2);
  const double epsilon = in.number("epsilon", 0.9);
  const double k_delta = in.number("k_delta", 0.0);
  s.gains = GainSet::recipe(k_r, k_omega, epsilon, k_delta, s.delta_max);
  s.gains.a = in.number("a", s.gains.a);
  s.gains.mu = in.has("mu") ? in.number("mu", 0.0)
                            : mu_upper_bound(k_r, k_omega, s.gains.a) * epsilon;

  s.t_final = in.number("t_final", s.t_final);
  s.h = in.number("h", s.h);
  const double record_every = in.number("record_every", s.record_every);
  if (record_every != static_cast<int>(record_every)) {
    throw ConfigError("'record_every' must be an integer");
  }
  s.record_every = static_cast<int>(record_every);

  in.reject_unused();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw ConfigError("cannot open scenario file '" + path + "'");
  }
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace so3track
