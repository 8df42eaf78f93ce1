#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "fracpath/branch_io.hpp"
#include "fracpath/errors.hpp"
#include "fracpath/fractional.hpp"
#include "fracpath/plot.hpp"
#include "fracpath/runner.hpp"

namespace {

using namespace fracpath;

void write_convergence_csv(std::ostream& os, const std::vector<int>& np,
                           const std::vector<double>& h,
                           const std::vector<double>& err) {
  os << "n_p,h,err\n";
  for (size_t i = 0; i < np.size(); ++i)
    os << np[i] << ',' << format_g17(h[i]) << ',' << format_g17(err[i]) << "\n";
}

void emit_report(const std::string& out, const std::vector<int>& np,
                 const std::vector<double>& h, const std::vector<double>& err,
                 const std::string& summary) {
  if (out.empty()) {
    write_convergence_csv(std::cout, np, h, err);
    std::cout << summary << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw IoError("cannot open '" + out + "' for writing");
  write_convergence_csv(f, np, h, err);
  if (!f.flush()) throw IoError("write to '" + out + "' failed");
  std::filesystem::path jpath(out);
  jpath.replace_extension(".json");
  std::ofstream jf(jpath);
  if (!jf) throw IoError("cannot open '" + jpath.string() + "' for writing");
  jf << summary << "\n";
  if (!jf.flush()) throw IoError("write to '" + jpath.string() + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracpath: fractional reaction-diffusion continuation"};
  app.require_subcommand(1);

  int seed = 0;
  int threads = 1;
  app.add_option("--seed", seed,
                 "recorded in outputs; all algorithms are deterministic");
  app.add_option("--threads", threads, "cap internal parallelism");

  auto* op_cmd =
      app.add_subcommand("operator", "fractional eigenvalue convergence study");
  std::string op_bc = "neumann";
  double op_s = 0.5;
  std::vector<int> op_np = {50, 100, 150, 200, 250};
  int op_ne = 40;
  std::string op_out;
  op_cmd->add_option("--bc", op_bc, "boundary conditions")
      ->check(CLI::IsMember({"dirichlet", "neumann"}));
  op_cmd->add_option("--s", op_s, "fractional order")->required();
  op_cmd->add_option("--np-list", op_np, "mesh sizes")->delimiter(',');
  op_cmd->add_option("--ne", op_ne, "number of eigenvalues compared");
  op_cmd->add_option("--out", op_out, "CSV output path (JSON summary beside it)");

  auto* po_cmd =
      app.add_subcommand("poisson", "fractional Poisson self-convergence");
  double po_s = 0.75;
  int po_np = 250;
  std::string po_out;
  po_cmd->add_option("--s", po_s, "fractional order")->required();
  po_cmd->add_option("--np", po_np, "finest mesh size");
  po_cmd->add_option("--out", po_out, "CSV output path (JSON summary beside it)");

  auto* co_cmd = app.add_subcommand("continue", "run a continuation config");
  std::string co_config;
  co_cmd->add_option("--config", co_config, "JSON run configuration")
      ->required();

  auto* pl_cmd = app.add_subcommand("plot", "render branch or snapshot CSVs");
  std::string pl_kind = "diagram";
  std::vector<std::string> pl_in;
  std::string pl_out;
  pl_cmd->add_option("--kind", pl_kind, "figure kind")
      ->check(CLI::IsMember({"diagram", "profile"}));
  pl_cmd->add_option("--in", pl_in, "input CSV files")->required();
  pl_cmd->add_option("--out", pl_out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Eigen::setNbThreads(std::max(1, threads));

    if (*op_cmd) {
      const Bc bc = op_bc == "dirichlet" ? Bc::dirichlet : Bc::neumann;
      const ConvergenceReport rep =
          eigen_convergence_report(op_s, bc, op_np, op_ne);
      char summary[160];
      std::snprintf(summary, sizeof(summary),
                    "{\"slope\": %.6g, \"s\": %.6g, \"bc\": \"%s\", \"seed\": %d}",
                    rep.slope, rep.s, op_bc.c_str(), seed);
      emit_report(op_out, rep.np, rep.h, rep.err, summary);
      return 0;
    }

    if (*po_cmd) {
      std::vector<int> np_list{po_np};
      while (np_list.back() > 40) np_list.push_back(np_list.back() / 2);
      std::reverse(np_list.begin(), np_list.end());
      const PoissonReport rep = poisson_convergence_report(po_s, np_list, 500);
      char summary[160];
      std::snprintf(summary, sizeof(summary),
                    "{\"slope\": %.6g, \"s\": %.6g, \"ref_np\": %d, \"seed\": %d}",
                    rep.slope, rep.s, rep.ref_np, seed);
      emit_report(po_out, rep.np, rep.h, rep.err, summary);
      return 0;
    }

    if (*co_cmd) {
      RunConfig cfg = parse_config(co_config);
      if (app.count("--seed") > 0) {
        cfg.seed = static_cast<unsigned>(std::max(0, seed));
        cfg.settings.seed = cfg.seed;
        for (auto& t : cfg.tasks) t.settings.seed = cfg.seed;
      }
      return run(cfg);
    }

    if (*pl_cmd) {
      std::vector<std::filesystem::path> inputs(pl_in.begin(), pl_in.end());
      const PlotKind kind =
          pl_kind == "diagram" ? PlotKind::diagram : PlotKind::profile;
      emit_plot(inputs, kind, pl_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
