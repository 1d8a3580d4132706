#include "geocurve/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geocurve/errors.hpp"

namespace geocurve {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& msg) {
  throw InvalidArgument(origin + ": " + (path.empty() ? "" : path + ": ") + msg);
}

// Strict object reader: every key must be consumed through one of the
// get_* calls; leftovers are reported with their dotted paths.
class Obj {
 public:
  Obj(const json& j, std::string path, const std::string& origin)
      : j_(j), path_(std::move(path)), origin_(origin) {
    if (!j_.is_object()) fail(origin_, path_, "expected an object");
  }

  ~Obj() = default;

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(origin_, join(it.key()), "unknown key");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const json* v = take(key);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      fail(origin_, join(key), "wrong type");
    }
  }

  void get_size(const std::string& key, std::size_t& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      fail(origin_, join(key), "expected a nonnegative integer");
    out = v->get<std::size_t>();
  }

  void get_index_list(const std::string& key, std::vector<std::size_t>& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_array()) fail(origin_, join(key), "expected an array of indices");
    out.clear();
    for (const auto& e : *v) {
      if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<long long>() >= 0))
        fail(origin_, join(key), "expected nonnegative integers");
      out.push_back(e.get<std::size_t>());
    }
  }

  Obj child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return Obj(json::object(), join(key), origin_);
    return Obj(*it, join(key), origin_);
  }

  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  json j_;
  std::string path_;
  const std::string& origin_;
  std::set<std::string> seen_;
};

void parse_simulation(Obj sim, ExperimentConfig& cfg) {
  sim.get_size("n", cfg.generator.n);
  sim.get_size("nodes", cfg.sim_nodes);
  sim.get("t_end", cfg.sim_t_end);
  sim.get("kappa", cfg.generator.kappa);
  sim.get("seed", cfg.generator.seed);
  {
    const json* v = sim.take("u1_range");
    if (v) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
        fail("config", sim.join("u1_range"), "expected [lo, hi]");
      cfg.generator.u1_range = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }
  {
    Obj a = sim.child("arima");
    a.get("ar", cfg.generator.arima.ar);
    a.get_size("i", cfg.generator.arima.i);
    a.get("ma", cfg.generator.arima.ma);
    a.get("noise_sd", cfg.generator.arima.noise_sd);
    a.finish();
  }
  {
    Obj s = sim.child("sde");
    s.get("mu", cfg.generator.sde.mu);
    s.get("x0", cfg.generator.sde.x0);
    s.get("correlated_components", cfg.generator.sde.correlated_components);
    s.get("component_corr", cfg.generator.sde.component_corr);
    s.get("antithetic", cfg.generator.sde.antithetic);
    s.finish();
  }
  {
    Obj p = sim.child("polar");
    p.get("identity", cfg.generator.identity_polar);
    p.get("a0", cfg.generator.a0);
    p.get("a1", cfg.generator.a1);
    p.get("b0", cfg.generator.b0);
    p.get("b1", cfg.generator.b1);
    p.finish();
  }
  sim.finish();
}

void parse_model(Obj mod, ExperimentConfig& cfg) {
  mod.get_size("m", cfg.m);
  mod.get("lag_threshold", cfg.lag_threshold);
  mod.get_size("working_resolution", cfg.fit.working_resolution);
  mod.get("ridge_scale", cfg.fit.ridge_scale);
  mod.get("rel_cutoff", cfg.fit.rel_cutoff);
  mod.get("kernel_exponent", cfg.fit.kernel_exponent);
  mod.get("kernel_rel_cutoff", cfg.fit.kernel_rel_cutoff);
  {
    Obj k = mod.child("karcher");
    std::size_t iters = static_cast<std::size_t>(cfg.fit.karcher.max_iters);
    k.get_size("max_iters", iters);
    cfg.fit.karcher.max_iters = static_cast<int>(iters);
    k.get("tol", cfg.fit.karcher.tol);
    k.get("step", cfg.fit.karcher.step);
    k.finish();
  }
  mod.finish();
}

void parse_predict(Obj pre, ExperimentConfig& cfg) {
  pre.get("use_all_regressors", cfg.predict.use_all_regressors);
  pre.get("max_sweeps", cfg.predict.max_sweeps);
  pre.get("init_step", cfg.predict.init_step);
  pre.get("min_step", cfg.predict.min_step);
  pre.get("coord_cap", cfg.predict.coord_cap);
  pre.get_size("query_index", cfg.query_index);
  pre.finish();
}

void parse_selection(Obj sel, ExperimentConfig& cfg) {
  sel.get_size("k_nn", cfg.selection.k_nn);
  sel.get("weight_quantile", cfg.selection.weight_quantile);
  sel.get_index_list("candidate_times", cfg.selection.candidate_times);
  sel.get_index_list("response_times", cfg.selection.response_times);
  sel.get_index_list("prediction_times", cfg.prediction_times);
  sel.get("scenario1", cfg.scenario1);
  sel.get("scenario2", cfg.scenario2);
  sel.finish();
}

void parse_io(Obj io, ExperimentConfig& cfg) {
  io.get("input_dir", cfg.input_dir);
  io.get("output_dir", cfg.output_dir);
  io.get("plots", cfg.plots);
  io.finish();
}

}  // namespace

ExperimentConfig default_config() { return {}; }

ExperimentConfig parse_config_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(origin + ": " + e.what());
  }
  ExperimentConfig cfg;
  Obj root(doc, "", origin);
  parse_simulation(root.child("simulation"), cfg);
  parse_model(root.child("model"), cfg);
  parse_predict(root.child("predict"), cfg);
  parse_selection(root.child("selection"), cfg);
  parse_io(root.child("io"), cfg);
  root.finish();

  if (cfg.sim_nodes < 2) throw InvalidArgument(origin + ": simulation.nodes must be >= 2");
  if (!(cfg.sim_t_end > 0.0)) throw InvalidArgument(origin + ": simulation.t_end must be > 0");
  if (!(cfg.lag_threshold > 0.0 && cfg.lag_threshold < 1.0))
    throw InvalidArgument(origin + ": model.lag_threshold must lie in (0, 1)");
  return cfg;
}

namespace {

json set_by_path(json doc, const std::string& spec, const std::string& origin) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidArgument(origin + ": --set expects key.path=value, got '" + spec + "'");
  const std::string keypath = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // bare strings stay strings
  }
  json* cur = &doc;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = keypath.find('.', pos);
    const std::string key = keypath.substr(pos, dot - pos);
    if (key.empty())
      throw InvalidArgument(origin + ": empty key segment in '" + keypath + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      break;
    }
    if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
    cur = &(*cur)[key];
    pos = dot + 1;
  }
  return doc;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  json doc = json::object();
  std::string origin = "config";
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    origin = path.string();
    try {
      doc = json::parse(buf.str());
    } catch (const json::exception& e) {
      throw InvalidArgument(origin + ": " + e.what());
    }
  }
  for (const auto& s : overrides) doc = set_by_path(std::move(doc), s, origin);
  return parse_config_json(doc.dump(), origin);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["simulation"] = {
      {"n", cfg.generator.n},
      {"nodes", cfg.sim_nodes},
      {"t_end", cfg.sim_t_end},
      {"kappa", cfg.generator.kappa},
      {"seed", cfg.generator.seed},
      {"u1_range", {cfg.generator.u1_range[0], cfg.generator.u1_range[1]}},
      {"arima",
       {{"ar", cfg.generator.arima.ar},
        {"i", cfg.generator.arima.i},
        {"ma", cfg.generator.arima.ma},
        {"noise_sd", cfg.generator.arima.noise_sd}}},
      {"sde",
       {{"mu", cfg.generator.sde.mu},
        {"x0", cfg.generator.sde.x0},
        {"correlated_components", cfg.generator.sde.correlated_components},
        {"component_corr", cfg.generator.sde.component_corr},
        {"antithetic", cfg.generator.sde.antithetic}}},
      {"polar",
       {{"identity", cfg.generator.identity_polar},
        {"a0", cfg.generator.a0},
        {"a1", cfg.generator.a1},
        {"b0", cfg.generator.b0},
        {"b1", cfg.generator.b1}}}};
  doc["model"] = {{"m", cfg.m},
                  {"lag_threshold", cfg.lag_threshold},
                  {"working_resolution", cfg.fit.working_resolution},
                  {"ridge_scale", cfg.fit.ridge_scale},
                  {"rel_cutoff", cfg.fit.rel_cutoff},
                  {"kernel_exponent", cfg.fit.kernel_exponent},
                  {"kernel_rel_cutoff", cfg.fit.kernel_rel_cutoff},
                  {"karcher",
                   {{"max_iters", cfg.fit.karcher.max_iters},
                    {"tol", cfg.fit.karcher.tol},
                    {"step", cfg.fit.karcher.step}}}};
  doc["predict"] = {{"use_all_regressors", cfg.predict.use_all_regressors},
                    {"max_sweeps", cfg.predict.max_sweeps},
                    {"init_step", cfg.predict.init_step},
                    {"min_step", cfg.predict.min_step},
                    {"coord_cap", cfg.predict.coord_cap},
                    {"query_index", cfg.query_index}};
  doc["selection"] = {{"k_nn", cfg.selection.k_nn},
                      {"weight_quantile", cfg.selection.weight_quantile},
                      {"candidate_times", cfg.selection.candidate_times},
                      {"response_times", cfg.selection.response_times},
                      {"prediction_times", cfg.prediction_times},
                      {"scenario1", cfg.scenario1},
                      {"scenario2", cfg.scenario2}};
  doc["io"] = {{"input_dir", cfg.input_dir},
               {"output_dir", cfg.output_dir},
               {"plots", cfg.plots}};
  return doc.dump(2);
}

}  // namespace geocurve
