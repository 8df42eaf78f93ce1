#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fracpath/branch_io.hpp"
#include "fracpath/errors.hpp"
#include "fracpath/plot.hpp"
#include "fracpath/runner.hpp"

using namespace fracpath;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / ("fracpath_tests_" + leaf);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  REQUIRE(f.good());
  f << text;
}

constexpr const char* kTinyAcConfig = R"json({
  "model": "allen_cahn",
  "s": 0.5,
  "np": 41,
  "domain": {"a": -5.0, "b": 5.0},
  "continuation": {"ds0": 0.02, "ds_max": 0.05, "mu_max": 0.4, "max_steps": 200},
  "tasks": [
    {"type": "trivial_branch", "name": "triv", "mu0": 0.0},
    {"type": "switch_continue", "name": "sw", "from": "triv",
     "continuation": {"stop_after_folds": 1, "mu_max": 0.45}}
  ]
})json";

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& cmd) {
  CliResult r;
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  char buf[512];
  while (fgets(buf, sizeof(buf), p)) r.out += buf;
  const int status = pclose(p);
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

}  // namespace

TEST_CASE("g17 formatting round-trips doubles exactly") {
  for (double v : {1.0 / 3.0, 0.1, -2.5e307, 4.9e-324, 0.0, -123.456789012345678}) {
    const std::string s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("fnv1a matches the reference vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("hello") != fnv1a("hellp"));
}

TEST_CASE("branch CSV round-trip preserves every field") {
  const fs::path dir = fresh_dir("branch_io");
  Branch br;
  br.model_name = "allen_cahn";
  const EventType evs[4] = {EventType::none, EventType::fold,
                            EventType::branch_point, EventType::hopf};
  for (int i = 0; i < 4; ++i) {
    BranchRecord r;
    r.index = i;
    r.mu = 0.1 * i + 1.0 / 3.0;
    r.norm2 = std::sqrt(2.0) * i;
    r.norm8 = 0.01 * i;
    r.stab.total = i;
    r.event = evs[i];
    r.tangent_mu = 1.0 - 0.5 * i;
    r.step_used = 0.02;
    br.records.push_back(r);
  }
  const fs::path csv = dir / "b.csv";
  write_branch_csv(br, csv);

  const Branch rd = read_branch_csv(csv);
  REQUIRE(rd.records.size() == br.records.size());
  for (size_t i = 0; i < rd.records.size(); ++i) {
    CHECK(rd.records[i].index == br.records[i].index);
    CHECK(rd.records[i].mu == br.records[i].mu);
    CHECK(rd.records[i].norm2 == br.records[i].norm2);
    CHECK(rd.records[i].norm8 == br.records[i].norm8);
    CHECK(rd.records[i].stab.total == br.records[i].stab.total);
    CHECK(rd.records[i].event == br.records[i].event);
    CHECK(rd.records[i].tangent_mu == br.records[i].tangent_mu);
    CHECK(rd.records[i].step_used == br.records[i].step_used);
  }
  CHECK(rd.n_folds == 1);

  // a rewrite of the parsed branch is byte-identical
  const fs::path csv2 = dir / "b2.csv";
  write_branch_csv(rd, csv2);
  CHECK(slurp(csv) == slurp(csv2));
}

TEST_CASE("branch CSV parser rejects malformed input") {
  const fs::path dir = fresh_dir("branch_io_bad");
  spit(dir / "h.csv", "mu,norm\n");
  CHECK_THROWS_AS(read_branch_csv(dir / "h.csv"), ParseError);

  const std::string header =
      "index,mu,norm2,norm8,n_unstable,event,tangent_mu,step_used\n";
  spit(dir / "f.csv", header + "0,1.0,2.0\n");
  CHECK_THROWS_AS(read_branch_csv(dir / "f.csv"), ParseError);
  spit(dir / "n.csv", header + "0,abc,0,0,0,none,0,0\n");
  CHECK_THROWS_AS(read_branch_csv(dir / "n.csv"), ParseError);
  spit(dir / "e.csv", header + "0,0,0,0,0,bogus,0,0\n");
  CHECK_THROWS_AS(read_branch_csv(dir / "e.csv"), ParseError);
  CHECK_THROWS_AS(read_branch_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("snapshot CSV round-trip") {
  const fs::path dir = fresh_dir("snap_io");
  RunConfig cfg = parse_config_text(kTinyAcConfig, "test");
  const auto model = build_model(cfg);
  Vec u(model->dim());
  for (int i = 0; i < u.size(); ++i) u[i] = std::sin(0.21 * i);

  const fs::path p = dir / "s.csv";
  write_snapshot_csv(*model, u, p);
  const Snapshot snap = read_snapshot_csv(p);
  REQUIRE(snap.x.size() == 41);
  REQUIRE(snap.u.cols() == 1);
  CHECK(snap.x[0] == -5.0);
  CHECK(snap.x[snap.x.size() - 1] == 5.0);
  CHECK(snap.u(0, 0) == 0.0);  // Dirichlet boundary value
  const Vec full = model->fem().prolong(u);
  for (int i = 0; i < snap.x.size(); ++i) CHECK(snap.u(i, 0) == full[i]);
}

TEST_CASE("minimal config gets defaults filled in") {
  const RunConfig cfg = parse_config_text(kTinyAcConfig, "test");
  CHECK(cfg.model == "allen_cahn");
  CHECK(cfg.s == 0.5);
  CHECK(cfg.np == 41);
  CHECK(cfg.gamma == 1.0);
  CHECK(cfg.a == -5.0);
  CHECK(cfg.b == 5.0);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.settings.ds0 == 0.02);      // from the config
  CHECK(cfg.settings.newton_tol == 1e-8);  // library default
  REQUIRE(cfg.tasks.size() == 2);
  CHECK(cfg.tasks[0].type == "trivial_branch");
  CHECK(cfg.tasks[0].mu0 == 0.0);
  CHECK(cfg.tasks[1].from == "triv");
  CHECK(cfg.tasks[1].branch_point == 1);
  CHECK(cfg.tasks[1].amplitude == 0.1);
  // task-level override applies on top of the global block
  CHECK(cfg.tasks[1].settings.stop_after_folds == 1);
  CHECK(cfg.tasks[1].settings.ds0 == 0.02);
  CHECK(cfg.tasks[0].settings.stop_after_folds == 0);
  CHECK(cfg.config_hash != 0);
}

TEST_CASE("config validation collects every violation at once") {
  const std::string bad = R"json({
    "model": "allen_cahn",
    "s": 1.2,
    "np": 2,
    "domain": {"a": -5.0, "b": 5.0},
    "frobnicate": 1,
    "tasks": []
  })json";
  try {
    parse_config_text(bad, "bad.json");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("invalid config bad.json:") == 0);
    CHECK(msg.find("s must lie in (0,1)") != std::string::npos);
    CHECK(msg.find("'np' must be at least 3") != std::string::npos);
    CHECK(msg.find("unknown key 'frobnicate'") != std::string::npos);
    CHECK(msg.find("'tasks' must be a non-empty array") != std::string::npos);
  }
}

TEST_CASE("config task cross-references are checked") {
  const std::string fwd = R"json({
    "model": "allen_cahn", "s": 0.5, "np": 11,
    "domain": {"a": 0.0, "b": 1.0},
    "tasks": [
      {"type": "switch_continue", "name": "sw", "from": "later"},
      {"type": "trivial_branch", "name": "later", "mu0": 0.0},
      {"type": "trivial_branch", "name": "later", "mu0": 0.0},
      {"type": "switch_continue", "name": "bp0", "from": "later", "branch_point": 0}
    ]
  })json";
  try {
    parse_config_text(fwd, "t.json");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("tasks[0]: 'from' must name an earlier task") != std::string::npos);
    CHECK(msg.find("duplicate task name 'later'") != std::string::npos);
    CHECK(msg.find("'branch_point' must be at least 1") != std::string::npos);
  }
}

TEST_CASE("config boundary-condition key must match the model") {
  const std::string bc = R"json({
    "model": "allen_cahn", "s": 0.5, "np": 11,
    "domain": {"a": 0.0, "b": 1.0}, "bc": "neumann",
    "tasks": [{"type": "trivial_branch", "name": "t", "mu0": 0.0}]
  })json";
  CHECK_THROWS_WITH_AS(parse_config_text(bc, "t.json"),
                       doctest::Contains("requires bc 'dirichlet'"),
                       ValidationError);
}

TEST_CASE("tuned domains are restricted to schnakenberg and resolved") {
  const std::string ac_tuned = R"json({
    "model": "allen_cahn", "s": 0.5, "np": 11,
    "domain": {"tuned_m": 2},
    "tasks": [{"type": "trivial_branch", "name": "t", "mu0": 0.0}]
  })json";
  CHECK_THROWS_WITH_AS(parse_config_text(ac_tuned, "t.json"),
                       doctest::Contains("tuned_m is only available for schnakenberg"),
                       ValidationError);

  const std::string sk = R"json({
    "model": "schnakenberg", "s": 0.9, "np": 121,
    "domain": {"tuned_m": 2},
    "tasks": [{"type": "trivial_branch", "name": "t", "mu0": 3.3}]
  })json";
  const RunConfig cfg = parse_config_text(sk, "t.json");
  CHECK(cfg.tuned);
  CHECK(cfg.b == -cfg.a);
  CHECK((cfg.b - cfg.a) / M_PI == doctest::Approx(6.527).epsilon(1e-3));
  CHECK(cfg.domain_note.find("tuned m=2") != std::string::npos);
}

TEST_CASE("config hash tracks semantics, not plumbing") {
  nlohmann::json base = nlohmann::json::parse(kTinyAcConfig);
  const RunConfig a = parse_config_text(base.dump(), "a");

  nlohmann::json plumbed = base;
  plumbed["output_dir"] = "elsewhere";
  plumbed["plot"] = {{"diagram", true}};
  plumbed["seed"] = 7;
  const RunConfig b = parse_config_text(plumbed.dump(), "b");
  CHECK(a.config_hash == b.config_hash);
  CHECK(b.seed == 7);
  CHECK(b.settings.seed == 7);
  CHECK(b.tasks[1].settings.seed == 7);

  nlohmann::json changed = base;
  changed["s"] = 0.6;
  const RunConfig c = parse_config_text(changed.dump(), "c");
  CHECK(a.config_hash != c.config_hash);
}

TEST_CASE("malformed JSON raises ParseError") {
  CHECK_THROWS_AS(parse_config_text("{not json", "x"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[1, 2]", "x"), ParseError);
  CHECK_THROWS_AS(parse_config(fs::path("/nonexistent/cfg.json")), IoError);
}

TEST_CASE("runner executes a two-task pipeline end to end") {
  const fs::path out1 = fresh_dir("run_e2e_a");
  RunConfig cfg = parse_config_text(kTinyAcConfig, "test");

  ::setenv("FRACPATH_OUT", out1.c_str(), 1);
  const int rc = run(cfg);
  ::unsetenv("FRACPATH_OUT");
  REQUIRE(rc == 0);

  REQUIRE(fs::exists(out1 / "triv.csv"));
  REQUIRE(fs::exists(out1 / "triv.manifest.json"));
  REQUIRE(fs::exists(out1 / "sw.csv"));
  REQUIRE(fs::exists(out1 / "sw.manifest.json"));

  const Branch triv = read_branch_csv(out1 / "triv.csv");
  const auto bps = triv.event_indices(EventType::branch_point);
  REQUIRE(bps.size() == 1);
  // np = 41 keeps the pipeline quick; the operator is only a few percent
  // accurate at that resolution, which is all this check needs
  CHECK(triv.records[bps[0]].mu == doctest::Approx(0.3141593).epsilon(0.1));
  // every event record gets a profile snapshot
  CHECK(fs::exists(out1 / ("triv_snap" + std::to_string(bps[0]) + ".csv")));

  const Branch sw = read_branch_csv(out1 / "sw.csv");
  CHECK(sw.n_folds == 1);
  CHECK(!sw.records.empty());

  const nlohmann::json man =
      nlohmann::json::parse(slurp(out1 / "triv.manifest.json"));
  CHECK(man.at("model") == "allen_cahn");
  CHECK(man.at("s") == 0.5);
  CHECK(man.at("n_p") == 41);
  CHECK(man.at("stop_reason") == "mu bound reached");
  CHECK(man.at("wall_time").get<double>() >= 0.0);
  CHECK(man.at("config_hash").get<std::string>().size() == 16);
  CHECK(man.at("n_records").get<int>() ==
        static_cast<int>(triv.records.size()));

  SUBCASE("reruns are byte-identical") {
    const fs::path out2 = fresh_dir("run_e2e_b");
    ::setenv("FRACPATH_OUT", out2.c_str(), 1);
    REQUIRE(run(cfg) == 0);
    ::unsetenv("FRACPATH_OUT");
    CHECK(slurp(out1 / "triv.csv") == slurp(out2 / "triv.csv"));
    CHECK(slurp(out1 / "sw.csv") == slurp(out2 / "sw.csv"));
  }

  SUBCASE("diagram and profile figures render from the outputs") {
    const fs::path svg = out1 / "diagram.svg";
    emit_plot({out1 / "triv.csv", out1 / "sw.csv"}, PlotKind::diagram, svg);
    const std::string body = slurp(svg);
    CHECK(body.find("<svg") != std::string::npos);
    CHECK(body.find("<polyline") != std::string::npos);
    CHECK(fs::exists(out1 / "diagram.gp"));

    const fs::path psvg = out1 / "prof.svg";
    emit_plot({out1 / ("triv_snap" + std::to_string(bps[0]) + ".csv")},
              PlotKind::profile, psvg);
    CHECK(slurp(psvg).find("<polyline") != std::string::npos);
  }

  SUBCASE("empty inputs are rejected") {
    spit(out1 / "empty.csv",
         "index,mu,norm2,norm8,n_unstable,event,tangent_mu,step_used\n");
    CHECK_THROWS_AS(
        emit_plot({out1 / "empty.csv"}, PlotKind::diagram, out1 / "e.svg"),
        EmptyBranch);
    CHECK_THROWS_AS(emit_plot({}, PlotKind::diagram, out1 / "e.svg"), EmptyBranch);
  }
}

TEST_CASE("runner reports task failure via partial manifest") {
  const fs::path out = fresh_dir("run_fail");
  RunConfig cfg = parse_config_text(kTinyAcConfig, "test");
  cfg.tasks[1].branch_point = 5;  // the window only contains one branch point

  ::setenv("FRACPATH_OUT", out.c_str(), 1);
  const int rc = run(cfg);
  ::unsetenv("FRACPATH_OUT");
  CHECK(rc == 1);
  CHECK(fs::exists(out / "triv.csv"));
  CHECK(!fs::exists(out / "sw.csv"));
  REQUIRE(fs::exists(out / "sw.manifest.json.partial"));
  const nlohmann::json m =
      nlohmann::json::parse(slurp(out / "sw.manifest.json.partial"));
  CHECK(m.at("task") == "sw");
  CHECK(m.at("error").get<std::string>().find("branch points") != std::string::npos);
}

TEST_CASE("command line interface") {
  const char* cli = std::getenv("FRACPATH_CLI");
  if (!cli || !*cli) {
    MESSAGE("FRACPATH_CLI not set, skipping CLI subprocess checks");
    return;
  }
  const std::string exe = cli;
  const fs::path dir = fresh_dir("cli");

  SUBCASE("operator study prints a convergence table and summary") {
    const CliResult r =
        run_cli(exe + " operator --s 0.5 --np-list 30,45 --ne 4");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("n_p,h,err") != std::string::npos);
    CHECK(r.out.find("\"slope\"") != std::string::npos);
  }

  SUBCASE("unknown flags exit with the usage code") {
    CHECK(run_cli(exe + " operator --s 0.5 --bogus").exit_code == 2);
    CHECK(run_cli(exe).exit_code == 2);  // a subcommand is required
  }

  SUBCASE("runtime failures exit with code 1") {
    CHECK(run_cli(exe + " plot --in " + (dir / "none.csv").string() +
                  " --out " + (dir / "o.svg").string())
              .exit_code == 1);
    spit(dir / "bad.json", "{broken");
    CHECK(run_cli(exe + " continue --config " + (dir / "bad.json").string())
              .exit_code == 1);
  }

  SUBCASE("continue runs a config file") {
    spit(dir / "cfg.json", kTinyAcConfig);
    const fs::path out = dir / "out";
    const CliResult r = run_cli("FRACPATH_OUT=" + out.string() + " " + exe +
                                " continue --config " + (dir / "cfg.json").string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out / "triv.csv"));
    CHECK(fs::exists(out / "sw.csv"));
  }
}
