#include "cellid/config_io.hpp"

#include <fstream>

#include <json.hpp>

namespace cellid {

using nlohmann::json;

namespace {

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open: " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& ex) {
    throw ValidationError(path.string() + ": " + ex.what());
  }
}

const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(path + "." + key + ": missing");
  return j.at(key);
}

double get_number(const json& j, const std::string& path, const char* key) {
  const json& v = member(j, path, key);
  if (!v.is_number()) throw ValidationError(path + "." + key + ": must be a number");
  return v.get<double>();
}

double get_number_or(const json& j, const std::string& path, const char* key,
                     double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_number(j, path, key);
}

std::string get_string(const json& j, const std::string& path, const char* key) {
  const json& v = member(j, path, key);
  if (!v.is_string()) throw ValidationError(path + "." + key + ": must be a string");
  return v.get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& path,
                                     const char* key) {
  const json& v = member(j, path, key);
  if (!v.is_array()) throw ValidationError(path + "." + key + ": must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ValidationError(path + "." + key + ": entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

OcpCurve parse_ocp(const json& j, const std::string& path) {
  const std::string kind = get_string(j, path, "kind");
  if (kind == "analytic") {
    const auto coeffs = get_number_array(j, path, "coeffs");
    if (coeffs.size() != OcpCurve::analytic_coeff_count)
      throw ValidationError(path + ".coeffs: expected " +
                            std::to_string(OcpCurve::analytic_coeff_count) + " values");
    std::array<double, OcpCurve::analytic_coeff_count> c{};
    std::copy(coeffs.begin(), coeffs.end(), c.begin());
    return OcpCurve::analytic(c);
  }
  if (kind == "table") {
    return OcpCurve::table(get_number_array(j, path, "theta"),
                           get_number_array(j, path, "potential"));
  }
  throw ValidationError(path + ".kind: expected \"analytic\" or \"table\"");
}

} // namespace

CellParameters load_cell_parameters(const std::filesystem::path& path) {
  const json j = load_json(path);
  const std::string root = path.filename().string();

  CellParameters p;
  const json& est = member(j, root, "estimands");
  const std::string est_path = root + ".estimands";
  Vector11d v;
  for (int i = 0; i < EstimandVector::size; ++i)
    v[i] = get_number(est, est_path, EstimandVector::names()[i]);
  p.estimands = EstimandVector::from_vector(v);

  const json& fx = member(j, root, "fixed");
  const std::string fx_path = root + ".fixed";
  p.fixed.r_s_n = get_number(fx, fx_path, "r_s_n");
  p.fixed.r_s_p = get_number(fx, fx_path, "r_s_p");
  p.fixed.a_n = get_number(fx, fx_path, "a_n");
  p.fixed.a_p = get_number(fx, fx_path, "a_p");
  p.fixed.l_n = get_number(fx, fx_path, "l_n");
  p.fixed.l_p = get_number(fx, fx_path, "l_p");
  p.fixed.c_e = get_number(fx, fx_path, "c_e");
  p.fixed.temperature = get_number(fx, fx_path, "temperature");
  p.fixed.nominal_capacity_ah = get_number(fx, fx_path, "nominal_capacity_ah");
  p.fixed.v_min = get_number(fx, fx_path, "v_min");
  p.fixed.v_max = get_number(fx, fx_path, "v_max");

  p.ocp_n = parse_ocp(member(j, root, "ocp_n"), root + ".ocp_n");
  p.ocp_p = parse_ocp(member(j, root, "ocp_p"), root + ".ocp_p");

  p.validate();
  return p;
}

DstTemplate load_dst_template(const std::filesystem::path& path) {
  const json j = load_json(path);
  const std::string root = path.filename().string();
  const json& steps = member(j, root, "steps");
  if (!steps.is_array()) throw ValidationError(root + ".steps: must be an array");
  DstTemplate tpl;
  int k = 0;
  for (const auto& s : steps) {
    const std::string sp = root + ".steps[" + std::to_string(k++) + "]";
    DstStep step;
    step.duration_s = get_number(s, sp, "duration_s");
    step.c_rate_fraction = get_number(s, sp, "c_rate_fraction");
    tpl.steps.push_back(step);
  }
  tpl.validate();
  return tpl;
}

SuiteSpec load_suite_spec(const std::filesystem::path& path) {
  const json j = load_json(path);
  const std::string root = path.filename().string();

  SuiteSpec spec;
  spec.dt = get_number(j, root, "dt_s");
  spec.c_rates = get_number_array(j, root, "c_rates");
  spec.fitting_c_rate = get_number(j, root, "fitting_c_rate");
  spec.window_margin = get_number(j, root, "window_margin");
  spec.dst_repetitions = static_cast<int>(get_number(j, root, "dst_repetitions"));
  if (j.contains("dst_template")) {
    const std::string file = get_string(j, root, "dst_template");
    spec.dst = load_dst_template(path.parent_path() / file);
  }
  spec.validate();
  return spec;
}

OptimizerSettings load_optimizer_settings(const std::filesystem::path& path) {
  const json j = load_json(path);
  const std::string root = path.filename().string();

  OptimizerSettings s;
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    s.lo_factor = get_number(b, root + ".bounds", "lo_factor");
    s.hi_factor = get_number(b, root + ".bounds", "hi_factor");
  }
  if (j.contains("objective")) {
    const json& o = j.at("objective");
    s.penalty_voltage = get_number_or(o, root + ".objective", "penalty_voltage", 10.0);
    if (o.contains("validation_pooling")) {
      const std::string pooling = get_string(o, root + ".objective", "validation_pooling");
      if (pooling == "pooled")
        s.pooling = ValidationPooling::pooled;
      else if (pooling == "per_trace_mean")
        s.pooling = ValidationPooling::per_trace_mean;
      else
        throw ValidationError(root + ".objective.validation_pooling: expected "
                              "\"pooled\" or \"per_trace_mean\"");
    }
  }
  if (j.contains("ls")) {
    const json& c = j.at("ls");
    const std::string p = root + ".ls";
    s.ls.max_iterations = static_cast<int>(get_number_or(c, p, "max_iterations", 200));
    s.ls.cost_tolerance = get_number_or(c, p, "cost_tolerance", 1e-8);
    s.ls.step_tolerance = get_number_or(c, p, "step_tolerance", 1e-8);
    s.ls.gradient_tolerance = get_number_or(c, p, "gradient_tolerance", 1e-8);
    s.ls.fd_rel_step = get_number_or(c, p, "fd_rel_step", 1e-6);
    s.ls.validate();
  }
  if (j.contains("pso")) {
    const json& c = j.at("pso");
    const std::string p = root + ".pso";
    s.pso.swarm_size = static_cast<int>(get_number_or(c, p, "swarm_size", 40));
    s.pso.max_iterations = static_cast<int>(get_number_or(c, p, "max_iterations", 100));
    s.pso.min_func_tolerance = get_number_or(c, p, "min_func_tolerance", 1e-8);
    s.pso.inertia = get_number_or(c, p, "inertia", 0.72984);
    s.pso.cognitive = get_number_or(c, p, "cognitive", 1.49618);
    s.pso.social = get_number_or(c, p, "social", 1.49618);
    s.pso.seed = static_cast<std::uint64_t>(get_number_or(c, p, "seed", 0));
    s.pso.validate();
  }
  if (j.contains("ga")) {
    const json& c = j.at("ga");
    const std::string p = root + ".ga";
    s.ga.generations = static_cast<int>(get_number_or(c, p, "generations", 300));
    s.ga.parents_mating = static_cast<int>(get_number_or(c, p, "parents_mating", 4));
    s.ga.population = static_cast<int>(get_number_or(c, p, "population", 50));
    s.ga.genes = static_cast<int>(get_number_or(c, p, "genes", 11));
    s.ga.mutation_rate = get_number_or(c, p, "mutation_rate", 0.1);
    s.ga.elitism = static_cast<int>(get_number_or(c, p, "elitism", 1));
    s.ga.seed = static_cast<std::uint64_t>(get_number_or(c, p, "seed", 0));
    s.ga.validate();
  }
  if (!(s.lo_factor > 0.0) || !(s.lo_factor < s.hi_factor))
    throw ValidationError(root + ".bounds: need 0 < lo_factor < hi_factor");
  if (!(s.penalty_voltage > 0.0))
    throw ValidationError(root + ".objective.penalty_voltage: must be > 0");
  return s;
}

ConfigBundle load_config_dir(const std::filesystem::path& dir) {
  ConfigBundle bundle;
  bundle.cell = load_cell_parameters(dir / "reference_cell.json");
  bundle.suite = load_suite_spec(dir / "protocol.json");
  bundle.optimizer = load_optimizer_settings(dir / "optimizers.json");
  return bundle;
}

void write_suite(const DatasetSuite& suite, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  json manifest;
  manifest["dt_s"] = suite.fitting.dt;
  json profiles = json::array();

  auto add = [&](const Trace& t, const char* role) {
    const std::string file = t.profile_name + ".csv";
    write_trace(t, dir / file);
    json entry;
    entry["file"] = file;
    entry["name"] = t.profile_name;
    entry["role"] = role;
    entry["termination"] = to_string(t.termination);
    profiles.push_back(entry);
  };
  add(suite.fitting, "fitting");
  for (const Trace& t : suite.validation) add(t, "validation");
  manifest["profiles"] = profiles;

  const auto manifest_path = dir / "manifest.json";
  std::ofstream mf(manifest_path);
  if (!mf) throw IoError("cannot open for writing: " + manifest_path.string());
  mf << manifest.dump(2) << '\n';
  if (!mf.good()) throw IoError("write failed: " + manifest_path.string());
}

DatasetSuite read_suite(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const json manifest = load_json(manifest_path);
  const std::string root = "manifest.json";
  const json& profiles = member(manifest, root, "profiles");
  if (!profiles.is_array() || profiles.empty())
    throw ValidationError(root + ".profiles: must be a non-empty array");

  DatasetSuite suite;
  bool have_fitting = false;
  int k = 0;
  for (const auto& entry : profiles) {
    const std::string ep = root + ".profiles[" + std::to_string(k++) + "]";
    const std::string file = get_string(entry, ep, "file");
    const std::string role = get_string(entry, ep, "role");
    Trace t = read_trace(dir / file);
    if (role == "fitting") {
      if (have_fitting) throw ValidationError(root + ": more than one fitting trace");
      suite.fitting = std::move(t);
      have_fitting = true;
    } else if (role == "validation") {
      suite.validation.push_back(std::move(t));
    } else {
      throw ValidationError(ep + ".role: expected \"fitting\" or \"validation\"");
    }
  }
  if (!have_fitting) throw ValidationError(root + ": no fitting trace");
  return suite;
}

} // namespace cellid
