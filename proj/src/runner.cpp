#include "fracpath/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fracpath/branch_io.hpp"
#include "fracpath/errors.hpp"
#include "fracpath/plot.hpp"

namespace fracpath {

namespace {

using nlohmann::json;

const std::set<std::string> kModels = {"allen_cahn", "swift_hohenberg",
                                       "schnakenberg"};

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where,
                         std::vector<std::string>& errs) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (known.count(it.key()) == 0)
      errs.push_back(where + ": unknown key '" + it.key() + "'");
}

bool take_double(const json& obj, const char* key, double& dst,
                 const std::string& where, std::vector<std::string>& errs) {
  auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (!it->is_number()) {
    errs.push_back(where + ": '" + key + "' must be a number");
    return false;
  }
  dst = it->get<double>();
  return true;
}

bool take_int(const json& obj, const char* key, int& dst,
              const std::string& where, std::vector<std::string>& errs) {
  auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (!it->is_number_integer()) {
    errs.push_back(where + ": '" + key + "' must be an integer");
    return false;
  }
  dst = it->get<int>();
  return true;
}

bool take_bool(const json& obj, const char* key, bool& dst,
               const std::string& where, std::vector<std::string>& errs) {
  auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (!it->is_boolean()) {
    errs.push_back(where + ": '" + key + "' must be a boolean");
    return false;
  }
  dst = it->get<bool>();
  return true;
}

const std::set<std::string> kSettingsKeys = {
    "ds0",         "ds_min",        "ds_max",        "max_steps",
    "newton_max_iter", "newton_tol", "xi",           "direction",
    "mu_min",      "mu_max",        "norm_max",      "compute_stability",
    "n_eigs",      "arnoldi_subspace", "dense_eig_limit", "event_tol",
    "stop_after_folds", "detect_revisit", "revisit_tol", "seed"};

void apply_settings(const json& obj, ContinuationSettings& st,
                    const std::string& where, std::vector<std::string>& errs) {
  if (!obj.is_object()) {
    errs.push_back(where + ": must be an object");
    return;
  }
  reject_unknown_keys(obj, kSettingsKeys, where, errs);
  take_double(obj, "ds0", st.ds0, where, errs);
  take_double(obj, "ds_min", st.ds_min, where, errs);
  take_double(obj, "ds_max", st.ds_max, where, errs);
  take_int(obj, "max_steps", st.max_steps, where, errs);
  take_int(obj, "newton_max_iter", st.newton_max_iter, where, errs);
  take_double(obj, "newton_tol", st.newton_tol, where, errs);
  take_double(obj, "xi", st.xi, where, errs);
  take_int(obj, "direction", st.direction, where, errs);
  take_double(obj, "mu_min", st.mu_min, where, errs);
  take_double(obj, "mu_max", st.mu_max, where, errs);
  take_double(obj, "norm_max", st.norm_max, where, errs);
  take_bool(obj, "compute_stability", st.compute_stability, where, errs);
  take_int(obj, "n_eigs", st.n_eigs, where, errs);
  take_int(obj, "arnoldi_subspace", st.arnoldi_subspace, where, errs);
  take_int(obj, "dense_eig_limit", st.dense_eig_limit, where, errs);
  take_double(obj, "event_tol", st.event_tol, where, errs);
  take_int(obj, "stop_after_folds", st.stop_after_folds, where, errs);
  take_bool(obj, "detect_revisit", st.detect_revisit, where, errs);
  take_double(obj, "revisit_tol", st.revisit_tol, where, errs);
  int seed = -1;
  if (take_int(obj, "seed", seed, where, errs) && seed >= 0)
    st.seed = static_cast<unsigned>(seed);
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(origin + ": top level must be an object");

  std::vector<std::string> errs;
  RunConfig cfg;

  reject_unknown_keys(j,
                      {"model", "s", "np", "params", "domain", "bc",
                       "continuation", "tasks", "output_dir", "plot", "seed"},
                      "config", errs);

  // model
  if (!j.contains("model") || !j["model"].is_string() ||
      kModels.count(j["model"].get<std::string>()) == 0) {
    errs.push_back("config: 'model' must be one of allen_cahn, swift_hohenberg, schnakenberg");
  } else {
    cfg.model = j["model"].get<std::string>();
  }

  // fractional order
  if (!j.contains("s") || !j["s"].is_number()) {
    errs.push_back("config: 's' is required and must be a number");
  } else {
    cfg.s = j["s"].get<double>();
    if (cfg.s <= 0.0 || cfg.s >= 1.0) errs.push_back("s must lie in (0,1)");
  }

  // mesh size
  if (!j.contains("np") || !j["np"].is_number_integer()) {
    errs.push_back("config: 'np' is required and must be an integer");
  } else {
    cfg.np = j["np"].get<int>();
    if (cfg.np < 3) errs.push_back("config: 'np' must be at least 3");
  }

  // model parameters
  if (j.contains("params")) {
    const json& p = j["params"];
    if (!p.is_object()) {
      errs.push_back("params: must be an object");
    } else if (cfg.model == "allen_cahn") {
      reject_unknown_keys(p, {"gamma"}, "params", errs);
      take_double(p, "gamma", cfg.gamma, "params", errs);
    } else if (cfg.model == "swift_hohenberg") {
      reject_unknown_keys(p, {"nu"}, "params", errs);
      take_double(p, "nu", cfg.nu, "params", errs);
    } else if (cfg.model == "schnakenberg") {
      reject_unknown_keys(p, {"d", "sigma"}, "params", errs);
      take_double(p, "d", cfg.d, "params", errs);
      take_double(p, "sigma", cfg.sigma, "params", errs);
    }
  }

  // domain: explicit interval or tuned multiple of the critical wavelength
  if (!j.contains("domain") || !j["domain"].is_object()) {
    errs.push_back("config: 'domain' object is required");
  } else {
    const json& dom = j["domain"];
    if (dom.contains("tuned_m")) {
      reject_unknown_keys(dom, {"tuned_m"}, "domain", errs);
      if (cfg.model != "schnakenberg")
        errs.push_back("domain: tuned_m is only available for schnakenberg");
      if (take_int(dom, "tuned_m", cfg.tuned_m, "domain", errs)) {
        if (cfg.tuned_m < 1)
          errs.push_back("domain: tuned_m must be at least 1");
        else
          cfg.tuned = true;
      }
    } else {
      reject_unknown_keys(dom, {"a", "b"}, "domain", errs);
      const bool got_a = take_double(dom, "a", cfg.a, "domain", errs);
      const bool got_b = take_double(dom, "b", cfg.b, "domain", errs);
      if (!got_a || !got_b)
        errs.push_back("domain: needs either {a, b} or {tuned_m}");
      else if (cfg.a >= cfg.b)
        errs.push_back("domain: a must be smaller than b");
    }
  }

  // boundary conditions are fixed per model; an explicit key must agree
  if (j.contains("bc")) {
    const std::string want = cfg.model == "schnakenberg" ? "neumann" : "dirichlet";
    if (!j["bc"].is_string() || (j["bc"] != "dirichlet" && j["bc"] != "neumann"))
      errs.push_back("config: 'bc' must be 'dirichlet' or 'neumann'");
    else if (!cfg.model.empty() && j["bc"] != want)
      errs.push_back("config: model '" + cfg.model + "' requires bc '" + want + "'");
  }

  if (j.contains("continuation"))
    apply_settings(j["continuation"], cfg.settings, "continuation", errs);

  // tasks
  if (!j.contains("tasks") || !j["tasks"].is_array() || j["tasks"].empty()) {
    errs.push_back("config: 'tasks' must be a non-empty array");
  } else {
    std::set<std::string> names;
    int idx = 0;
    for (const json& tj : j["tasks"]) {
      const std::string where = "tasks[" + std::to_string(idx) + "]";
      ++idx;
      if (!tj.is_object()) {
        errs.push_back(where + ": must be an object");
        continue;
      }
      TaskSpec task;
      task.settings = cfg.settings;
      if (!tj.contains("type") || !tj["type"].is_string()) {
        errs.push_back(where + ": 'type' is required");
        continue;
      }
      task.type = tj["type"].get<std::string>();
      if (!tj.contains("name") || !tj["name"].is_string() ||
          tj["name"].get<std::string>().empty())
        errs.push_back(where + ": 'name' is required");
      else
        task.name = tj["name"].get<std::string>();
      if (!task.name.empty() && !names.insert(task.name).second)
        errs.push_back(where + ": duplicate task name '" + task.name + "'");

      if (task.type == "trivial_branch") {
        reject_unknown_keys(tj, {"type", "name", "mu0", "continuation"}, where, errs);
        if (!take_double(tj, "mu0", task.mu0, where, errs))
          errs.push_back(where + ": 'mu0' is required");
      } else if (task.type == "switch_continue") {
        reject_unknown_keys(tj, {"type", "name", "from", "branch_point",
                                 "amplitude", "continuation"},
                            where, errs);
        if (!tj.contains("from") || !tj["from"].is_string())
          errs.push_back(where + ": 'from' is required");
        else {
          task.from = tj["from"].get<std::string>();
          if (names.count(task.from) == 0 || task.from == task.name)
            errs.push_back(where + ": 'from' must name an earlier task");
        }
        take_int(tj, "branch_point", task.branch_point, where, errs);
        if (task.branch_point < 1)
          errs.push_back(where + ": 'branch_point' must be at least 1");
        take_double(tj, "amplitude", task.amplitude, where, errs);
        if (task.amplitude <= 0.0)
          errs.push_back(where + ": 'amplitude' must be positive");
      } else {
        errs.push_back(where + ": unknown task type '" + task.type + "'");
        continue;
      }
      if (tj.contains("continuation"))
        apply_settings(tj["continuation"], task.settings, where + ".continuation", errs);
      cfg.tasks.push_back(std::move(task));
    }
  }

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string())
      errs.push_back("config: 'output_dir' must be a string");
    else
      cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("plot")) {
    const json& p = j["plot"];
    if (!p.is_object()) {
      errs.push_back("plot: must be an object");
    } else {
      reject_unknown_keys(p, {"diagram", "profiles"}, "plot", errs);
      take_bool(p, "diagram", cfg.plot_diagram, "plot", errs);
      take_bool(p, "profiles", cfg.plot_profiles, "plot", errs);
    }
  }
  if (j.contains("seed")) {
    int seed = 0;
    if (take_int(j, "seed", seed, "config", errs) && seed >= 0) {
      cfg.seed = static_cast<unsigned>(seed);
      cfg.settings.seed = cfg.seed;
      for (auto& t : cfg.tasks) t.settings.seed = cfg.seed;
    }
  }

  if (!errs.empty()) {
    std::string msg = "invalid config " + origin + ":";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ValidationError(msg);
  }

  // resolve the tuned domain and note the rounding
  if (cfg.tuned) {
    const Mesh mesh = schnak_tuned_mesh(cfg.tuned_m, cfg.s, cfg.np);
    cfg.a = mesh.a;
    cfg.b = mesh.b;
    char note[96];
    std::snprintf(note, sizeof(note), "tuned m=%d: domain length %.4f*pi",
                  cfg.tuned_m, mesh.length() / M_PI);
    cfg.domain_note = note;
  }

  // hash over the semantic fields only (drop plumbing keys)
  json canon = j;
  canon.erase("output_dir");
  canon.erase("plot");
  canon.erase("seed");
  cfg.config_hash = fnv1a(canon.dump());
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::unique_ptr<Model> build_model(const RunConfig& cfg) {
  const Mesh mesh = make_mesh(cfg.a, cfg.b, cfg.np);
  const Bc bc = cfg.model == "schnakenberg" ? Bc::neumann : Bc::dirichlet;
  auto op = std::make_shared<FracOperator>(assemble_fem(mesh, bc), cfg.s);
  if (cfg.model == "allen_cahn") return make_allen_cahn(op, cfg.gamma);
  if (cfg.model == "swift_hohenberg") return make_swift_hohenberg(op, cfg.nu);
  if (cfg.model == "schnakenberg") return make_schnakenberg(op, cfg.d, cfg.sigma);
  throw InvalidParameter("unknown model '" + cfg.model + "'");
}

namespace {

json manifest_json(const RunConfig& cfg, const TaskSpec& task, const Branch& br,
                   double wall_s) {
  json m;
  m["config_hash"] = hash_hex(cfg.config_hash);
  m["model"] = cfg.model;
  m["s"] = cfg.s;
  m["n_p"] = cfg.np;
  m["wall_time"] = wall_s;
  m["task"] = task.name;
  m["stop_reason"] = br.stop_reason;
  m["n_records"] = br.records.size();
  m["n_folds"] = br.n_folds;
  m["seed"] = cfg.seed;
  m["domain"] = {{"a", cfg.a}, {"b", cfg.b}};
  if (!cfg.domain_note.empty()) m["domain_note"] = cfg.domain_note;
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f.flush()) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

int run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::path outdir = cfg.output_dir;
  if (const char* env = std::getenv("FRACPATH_OUT"); env && *env) outdir = env;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create output dir '%s': %s\n",
                 outdir.string().c_str(), ec.message().c_str());
    return 1;
  }

  std::unique_ptr<Model> model;
  try {
    model = build_model(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "model setup failed: %s\n", e.what());
    return 1;
  }

  std::map<std::string, Branch> finished;
  std::vector<fs::path> branch_files;
  std::vector<fs::path> snapshot_files;

  for (const TaskSpec& task : cfg.tasks) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Branch br;
      if (task.type == "trivial_branch") {
        const Vec u0 = model->homogeneous_state(task.mu0);
        br = continue_branch(*model, u0, task.mu0, task.settings);
      } else {
        const Branch& parent = finished.at(task.from);
        const auto bps = parent.event_indices(EventType::branch_point);
        if (static_cast<int>(bps.size()) < task.branch_point)
          throw InvalidParameter(
              "branch '" + task.from + "' has only " +
              std::to_string(bps.size()) + " branch points, need " +
              std::to_string(task.branch_point));
        const BranchRecord& rec = parent.records[bps[task.branch_point - 1]];
        const SwitchResult sw =
            switch_branch(*model, rec.u, rec.mu, task.amplitude, task.settings);
        br = continue_branch(*model, sw.u, sw.mu, task.settings, &rec.u, rec.mu);
      }
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();

      const fs::path csv = outdir / (task.name + ".csv");
      write_branch_csv(br, csv);
      branch_files.push_back(csv);
      write_text(outdir / (task.name + ".manifest.json"),
                 manifest_json(cfg, task, br, wall).dump(2) + "\n");
      for (const auto& rec : br.records) {
        if (rec.event == EventType::none) continue;
        const fs::path snap =
            outdir / (task.name + "_snap" + std::to_string(rec.index) + ".csv");
        write_snapshot_csv(*model, rec.u, snap);
        snapshot_files.push_back(snap);
      }
      finished[task.name] = std::move(br);
    } catch (const std::exception& e) {
      json m;
      m["task"] = task.name;
      m["error"] = e.what();
      m["config_hash"] = hash_hex(cfg.config_hash);
      try {
        write_text(outdir / (task.name + ".manifest.json.partial"),
                   m.dump(2) + "\n");
      } catch (const std::exception&) {
        // reporting the original failure matters more
      }
      std::fprintf(stderr, "task '%s' failed: %s\n", task.name.c_str(), e.what());
      return 1;
    }
  }

  try {
    if (cfg.plot_diagram && !branch_files.empty())
      emit_plot(branch_files, PlotKind::diagram, outdir / "diagram.svg");
    if (cfg.plot_profiles) {
      for (const auto& snap : snapshot_files) {
        fs::path out = snap;
        out.replace_extension(".svg");
        emit_plot({snap}, PlotKind::profile, out);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "plotting failed: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace fracpath
