#include "nlsis/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "nlsis/error.hpp"
#include "nlsis/io.hpp"

namespace nlsis {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw Error(ErrorCode::config_invalid, field + ": " + message);
}

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) invalid(where, "expected an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) invalid(where + "." + item.key(), "unknown field");
  }
}

double number(const json& obj, const std::string& where, const char* key,
              std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    invalid(where + "." + key, "required number is missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) invalid(where + "." + key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(where + "." + key, "must be finite");
  return x;
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) invalid(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) invalid(where + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

RateSpec parse_rate(const json& v, const std::string& where) {
  if (v.is_number()) return ConstantRate{v.get<double>()};
  if (!v.is_object() || !v.contains("type") || !v.at("type").is_string()) {
    invalid(where, "expected a number or an object with a string \"type\"");
  }
  const std::string type = v.at("type").get<std::string>();
  if (type == "constant") {
    allow_keys(v, where, {"type", "value"});
    return ConstantRate{number(v, where, "value")};
  }
  if (type == "cosine") {
    allow_keys(v, where, {"type", "base", "amplitude", "frequency"});
    return CosineRate{number(v, where, "base"), number(v, where, "amplitude"),
                      number(v, where, "frequency", 1.0)};
  }
  if (type == "gaussian-bump") {
    allow_keys(v, where, {"type", "base", "height", "width", "center"});
    GaussianBumpRate g{number(v, where, "base"), number(v, where, "height"),
                       number(v, where, "width"), number(v, where, "center", 0.0)};
    if (!(g.width > 0)) invalid(where + ".width", "must be > 0");
    return g;
  }
  if (type == "table") {
    allow_keys(v, where, {"type", "values", "x"});
    if (!v.contains("values")) invalid(where + ".values", "required array is missing");
    TableRate t;
    t.values = number_list(v.at("values"), where + ".values");
    if (v.contains("x")) t.x = number_list(v.at("x"), where + ".x");
    if (t.values.size() < 2) invalid(where + ".values", "need at least 2 entries");
    if (!t.x.empty()) {
      if (t.x.size() != t.values.size()) invalid(where + ".x", "length differs from values");
      for (std::size_t i = 1; i < t.x.size(); ++i) {
        if (!(t.x[i] > t.x[i - 1])) invalid(where + ".x", "positions must be strictly increasing");
      }
    }
    return t;
  }
  invalid(where + ".type", "unknown rate type \"" + type + "\"");
}

json emit_rate(const RateSpec& spec) {
  return std::visit(
      [](const auto& r) -> json {
        using R = std::decay_t<decltype(r)>;
        json j;
        if constexpr (std::is_same_v<R, ConstantRate>) {
          j["type"] = "constant";
          j["value"] = r.value;
        } else if constexpr (std::is_same_v<R, CosineRate>) {
          j["type"] = "cosine";
          j["base"] = r.base;
          j["amplitude"] = r.amplitude;
          j["frequency"] = r.frequency;
        } else if constexpr (std::is_same_v<R, GaussianBumpRate>) {
          j["type"] = "gaussian-bump";
          j["base"] = r.base;
          j["height"] = r.height;
          j["width"] = r.width;
          j["center"] = r.center;
        } else {
          j["type"] = "table";
          j["values"] = r.values;
          if (!r.x.empty()) j["x"] = r.x;
        }
        return j;
      },
      spec);
}

KernelSpec parse_kernel(const json& v) {
  if (!v.is_object() || !v.contains("family") || !v.at("family").is_string()) {
    invalid("kernel", "expected an object with a string \"family\"");
  }
  const std::string family = v.at("family").get<std::string>();
  if (family == "triangle") {
    allow_keys(v, "kernel", {"family", "delta"});
    const double delta = number(v, "kernel", "delta");
    if (!(delta > 0)) invalid("kernel.delta", "must be > 0");
    return TriangleKernel{delta};
  }
  if (family == "gaussian") {
    allow_keys(v, "kernel", {"family", "sigma", "cutoff"});
    const double sigma = number(v, "kernel", "sigma");
    const double cutoff = number(v, "kernel", "cutoff");
    if (!(sigma > 0)) invalid("kernel.sigma", "must be > 0");
    if (!(cutoff > 0)) invalid("kernel.cutoff", "must be > 0");
    return GaussianKernel{sigma, cutoff};
  }
  invalid("kernel.family", "unknown kernel family \"" + family + "\"");
}

json emit_kernel(const KernelSpec& spec) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        json j;
        if constexpr (std::is_same_v<K, TriangleKernel>) {
          j["family"] = "triangle";
          j["delta"] = k.delta;
        } else {
          j["family"] = "gaussian";
          j["sigma"] = k.sigma;
          j["cutoff"] = k.cutoff;
        }
        return j;
      },
      spec);
}

Task parse_task(const json& v) {
  if (!v.is_string()) invalid("task", "expected a string");
  const std::string s = v.get<std::string>();
  for (Task t : {Task::spectrum, Task::equilibrium, Task::simulate, Task::sweep, Task::limits}) {
    if (s == to_string(t)) return t;
  }
  invalid("task", "unknown task \"" + s + "\"");
}

GridSpec parse_grid(const json& v, const std::string& where) {
  allow_keys(v, where, {"values", "logspace"});
  GridSpec g;
  if (v.contains("values") == v.contains("logspace")) {
    invalid(where, "give exactly one of \"values\" or \"logspace\"");
  }
  if (v.contains("values")) {
    g.values = number_list(v.at("values"), where + ".values");
  } else {
    const auto ls = number_list(v.at("logspace"), where + ".logspace");
    if (ls.size() != 3) invalid(where + ".logspace", "expected [lo_exponent, hi_exponent, count]");
    if (ls[2] < 1 || std::floor(ls[2]) != ls[2]) invalid(where + ".logspace", "count must be a positive integer");
    g.logspace = std::array<double, 3>{ls[0], ls[1], ls[2]};
  }
  const auto resolved = g.resolve();
  if (resolved.empty()) invalid(where, "grid is empty");
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    if (!(resolved[i] > 0)) invalid(where, "grid values must be > 0");
    if (i > 0 && !(resolved[i] > resolved[i - 1])) invalid(where, "grid must be strictly increasing");
  }
  return g;
}

json emit_grid(const GridSpec& g) {
  json j;
  if (g.logspace) {
    j["logspace"] = {(*g.logspace)[0], (*g.logspace)[1], (*g.logspace)[2]};
  } else {
    j["values"] = g.values;
  }
  return j;
}

InitialSpec parse_initial(const json& v) {
  const std::string where = "simulate.initial";
  allow_keys(v, where, {"type", "seed", "infected_fraction", "center", "width"});
  InitialSpec s;
  if (v.contains("type")) {
    if (!v.at("type").is_string()) invalid(where + ".type", "expected a string");
    s.type = v.at("type").get<std::string>();
  }
  if (s.type != "random" && s.type != "constant" && s.type != "bump") {
    invalid(where + ".type", "expected random, constant or bump");
  }
  if (v.contains("seed")) {
    if (!v.at("seed").is_number_unsigned()) invalid(where + ".seed", "expected a nonnegative integer");
    s.seed = v.at("seed").get<std::uint64_t>();
  }
  s.infected_fraction = number(v, where, "infected_fraction", s.infected_fraction);
  if (!(s.infected_fraction > 0) || !(s.infected_fraction < 1)) {
    invalid(where + ".infected_fraction", "must lie in (0, 1)");
  }
  s.center = number(v, where, "center", s.center);
  s.width = number(v, where, "width", s.width);
  if (!(s.width > 0)) invalid(where + ".width", "must be > 0");
  return s;
}

}  // namespace

const char* to_string(Task task) {
  switch (task) {
    case Task::spectrum: return "spectrum";
    case Task::equilibrium: return "equilibrium";
    case Task::simulate: return "simulate";
    case Task::sweep: return "sweep";
    case Task::limits: return "limits";
  }
  return "spectrum";
}

std::vector<double> GridSpec::resolve() const {
  if (!logspace) return values;
  const auto [lo, hi, count_d] = *logspace;
  const int count = static_cast<int>(count_d);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double e = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

Field evaluate_rate(const RateSpec& spec, const Mesh& mesh, const char* name) {
  const Field& x = mesh.nodes();
  Field out = std::visit(
      [&](const auto& r) -> Field {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ConstantRate>) {
          return Field::Constant(mesh.size(), r.value);
        } else if constexpr (std::is_same_v<R, CosineRate>) {
          return (r.base + r.amplitude * (r.frequency * std::numbers::pi * x.array()).cos()).matrix();
        } else if constexpr (std::is_same_v<R, GaussianBumpRate>) {
          return (r.base +
                  r.height * (-((x.array() - r.center) / r.width).square()).exp())
              .matrix();
        } else {
          const std::size_t m = r.values.size();
          if (m < 2) invalid(name, "table needs at least 2 entries");
          if (static_cast<int>(m) == mesh.size() && r.x.empty()) {
            return Eigen::Map<const Field>(r.values.data(), mesh.size());
          }
          std::vector<double> pos = r.x;
          if (pos.empty()) {
            for (std::size_t j = 0; j < m; ++j) {
              pos.push_back(mesh.a() + mesh.length() * static_cast<double>(j) / (m - 1));
            }
          }
          Field f(mesh.size());
          for (int i = 0; i < mesh.size(); ++i) {
            const double xi = x[i];
            if (xi < pos.front() || xi > pos.back()) {
              invalid(name, "mesh node " + io::format_number(xi) + " lies outside the table range");
            }
            const auto it = std::upper_bound(pos.begin(), pos.end(), xi);
            const std::size_t hi = std::min<std::size_t>(it - pos.begin(), m - 1);
            const std::size_t lo = hi - 1;
            const double w = (xi - pos[lo]) / (pos[hi] - pos[lo]);
            f[i] = (1.0 - w) * r.values[lo] + w * r.values[hi];
          }
          return f;
        }
      },
      spec);
  if (!(out.array() > 0).all()) invalid(name, "rate must be strictly positive at every mesh node");
  return out;
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> checks = {"sign_relation", "route_agreement",
                                                  "mass_conservation", "k_constant",
                                                  "monotonicity"};
  return checks;
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid("<document>", e.what());
  }
  allow_keys(root, "<root>",
             {"mesh", "kernel", "beta", "gamma", "d_S", "d_I", "N", "task", "sweep", "simulate",
              "limits", "checks", "workers"});
  ScenarioConfig c;

  if (root.contains("mesh")) {
    const json& m = root.at("mesh");
    allow_keys(m, "mesh", {"a", "b", "n"});
    c.a = number(m, "mesh", "a", c.a);
    c.b = number(m, "mesh", "b", c.b);
    if (m.contains("n")) {
      if (!m.at("n").is_number_integer()) invalid("mesh.n", "expected an integer");
      c.n = m.at("n").get<int>();
    }
  }
  if (!(c.b > c.a)) invalid("mesh", "need b > a");
  if (c.n < 2) invalid("mesh.n", "need at least 2 nodes");

  if (root.contains("kernel")) c.kernel = parse_kernel(root.at("kernel"));
  if (root.contains("beta")) c.beta = parse_rate(root.at("beta"), "beta");
  if (root.contains("gamma")) c.gamma = parse_rate(root.at("gamma"), "gamma");
  c.d_S = number(root, "<root>", "d_S", c.d_S);
  c.d_I = number(root, "<root>", "d_I", c.d_I);
  c.N = number(root, "<root>", "N", c.N);
  if (!(c.d_S > 0)) invalid("d_S", "must be > 0");
  if (!(c.d_I > 0)) invalid("d_I", "must be > 0");
  if (!(c.N > 0)) invalid("N", "must be > 0");
  if (root.contains("task")) c.task = parse_task(root.at("task"));

  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    allow_keys(s, "sweep", {"parameter", "grid"});
    if (s.contains("parameter")) {
      if (!s.at("parameter").is_string()) invalid("sweep.parameter", "expected a string");
      c.sweep.parameter = s.at("parameter").get<std::string>();
    }
    if (c.sweep.parameter != "d_I" && c.sweep.parameter != "d_S") {
      invalid("sweep.parameter", "expected \"d_I\" or \"d_S\"");
    }
    if (s.contains("grid")) c.sweep.grid = parse_grid(s.at("grid"), "sweep.grid");
  }
  if (c.task == Task::sweep && c.sweep.grid.resolve().empty()) invalid("sweep.grid", "required for task sweep");

  if (root.contains("simulate")) {
    const json& s = root.at("simulate");
    allow_keys(s, "simulate", {"t_end", "dt", "initial", "snapshots"});
    c.simulate.t_end = number(s, "simulate", "t_end", c.simulate.t_end);
    if (!(c.simulate.t_end > 0)) invalid("simulate.t_end", "must be > 0");
    if (s.contains("dt")) {
      c.simulate.dt = number(s, "simulate", "dt");
      if (!(*c.simulate.dt > 0)) invalid("simulate.dt", "must be > 0");
    }
    if (s.contains("initial")) c.simulate.initial = parse_initial(s.at("initial"));
    if (s.contains("snapshots")) {
      if (!s.at("snapshots").is_boolean()) invalid("simulate.snapshots", "expected a boolean");
      c.simulate.snapshots = s.at("snapshots").get<bool>();
    }
  }

  if (root.contains("limits")) {
    const json& l = root.at("limits");
    allow_keys(l, "limits", {"diffusivities"});
    if (l.contains("diffusivities")) {
      c.limits.diffusivities = number_list(l.at("diffusivities"), "limits.diffusivities");
      for (double d : c.limits.diffusivities) {
        if (!(d > 0)) invalid("limits.diffusivities", "values must be > 0");
      }
    }
  }

  if (root.contains("checks")) {
    const json& ch = root.at("checks");
    if (!ch.is_array()) invalid("checks", "expected an array of strings");
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const std::string where = "checks[" + std::to_string(i) + "]";
      if (!ch[i].is_string()) invalid(where, "expected a string");
      const std::string name = ch[i].get<std::string>();
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        invalid(where, "unknown check \"" + name + "\"");
      }
      c.checks.push_back(name);
    }
  }
  if (root.contains("workers")) {
    if (!root.at("workers").is_number_integer() || root.at("workers").get<int>() < 1) {
      invalid("workers", "expected a positive integer");
    }
    c.workers = root.at("workers").get<int>();
  }

  // Rates must be positive on the configured mesh; kernel width is checked here too.
  try {
    const Mesh mesh = build_mesh(c.a, c.b, c.n);
    evaluate_rate(c.beta, mesh, "beta");
    evaluate_rate(c.gamma, mesh, "gamma");
    if (kernel_effective_support(c.kernel) < 2.0 * mesh.weight()) {
      invalid("kernel", "support is below two cell widths for this mesh");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_invalid) throw;
    invalid("mesh", e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_text(path));
}

std::string emit_config(const ScenarioConfig& c) {
  json root;
  root["mesh"] = {{"a", c.a}, {"b", c.b}, {"n", c.n}};
  root["kernel"] = emit_kernel(c.kernel);
  root["beta"] = emit_rate(c.beta);
  root["gamma"] = emit_rate(c.gamma);
  root["d_S"] = c.d_S;
  root["d_I"] = c.d_I;
  root["N"] = c.N;
  root["task"] = to_string(c.task);
  json sweep;
  sweep["parameter"] = c.sweep.parameter;
  if (c.sweep.grid.logspace || !c.sweep.grid.values.empty()) sweep["grid"] = emit_grid(c.sweep.grid);
  root["sweep"] = sweep;
  json sim;
  sim["t_end"] = c.simulate.t_end;
  if (c.simulate.dt) sim["dt"] = *c.simulate.dt;
  sim["initial"] = {{"type", c.simulate.initial.type},
                    {"seed", c.simulate.initial.seed},
                    {"infected_fraction", c.simulate.initial.infected_fraction},
                    {"center", c.simulate.initial.center},
                    {"width", c.simulate.initial.width}};
  sim["snapshots"] = c.simulate.snapshots;
  root["simulate"] = sim;
  root["limits"] = {{"diffusivities", c.limits.diffusivities}};
  root["checks"] = c.checks;
  if (c.workers) root["workers"] = *c.workers;
  return root.dump(2) + "\n";
}

}  // namespace nlsis
