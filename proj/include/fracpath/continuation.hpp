#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fracpath/models.hpp"

namespace fracpath {

struct ContinuationSettings {
  double ds0 = 0.01;     // initial arclength step
  double ds_min = 1e-8;  // give up below this
  double ds_max = 0.1;
  int max_steps = 1000;
  int newton_max_iter = 10;
  double newton_tol = 1e-8;
  double xi = 0.5;  // weight of the state block in the arclength metric
  int direction = 1;  // sign of the initial mu tangent
  double mu_min = -std::numeric_limits<double>::infinity();
  double mu_max = std::numeric_limits<double>::infinity();
  double norm_max = std::numeric_limits<double>::infinity();  // stop above this norm2
  bool compute_stability = true;
  int n_eigs = 24;            // eigenvalues requested from the iterative path
  int arnoldi_subspace = 160;
  int dense_eig_limit = 600;  // pencil size handled by the dense solver
  double event_tol = 1e-6;    // mu width of the event bisection
  int stop_after_folds = 0;   // 0 = unlimited
  bool detect_revisit = true;
  double revisit_tol = 1e-6;
  unsigned seed = 0;  // phase of the deterministic Arnoldi start vector
};

enum class EventType { none, fold, branch_point, hopf };
std::string event_name(EventType e);

struct StabilityCount {
  int total = -1;  // -1 = not computed
  int real = -1;
  int cplx = -1;
};

struct BranchRecord {
  int index = 0;
  double mu = 0.0;
  double norm2 = 0.0;
  double norm8 = 0.0;
  StabilityCount stab;
  EventType event = EventType::none;
  double tangent_mu = 0.0;
  double step_used = 0.0;
  Vec u;
};

struct Branch {
  std::string model_name;
  std::vector<BranchRecord> records;
  std::string stop_reason;
  int n_folds = 0;

  std::vector<int> event_indices(EventType e) const;
};

struct NewtonReport {
  Vec u;
  double mu = 0.0;
  bool converged = false;
  int iters = 0;
  double resid = 0.0;
};

/// Newton for G(u, mu) = 0 at fixed mu.
NewtonReport newton_fixed_mu(const Model& model, const Vec& u0, double mu,
                             const ContinuationSettings& st);

/// Unstable eigenvalue counts of the linearization pencil at (u, mu).
/// Dense QR iteration up to dense_eig_limit, shift-invert Arnoldi above.
StabilityCount count_unstable(const Model& model, const Vec& u, double mu,
                              const ContinuationSettings& st);

/// Pseudo-arclength continuation from (u0, mu0); the start is corrected at
/// fixed mu first (StartNotConverged on failure). When u_prev is given the
/// first tangent is the secant from (u_prev, mu_prev), otherwise it comes
/// from the mu-bordered tangent system oriented by settings.direction.
Branch continue_branch(const Model& model, const Vec& u0, double mu0,
                       const ContinuationSettings& st,
                       const Vec* u_prev = nullptr, double mu_prev = 0.0);

struct SwitchResult {
  Vec u;           // converged point on the bifurcating branch
  double mu = 0.0;
  Vec kernel;      // normalized null vector at the branch point
  int mode = 0;    // wave index identified from the kernel sign changes
};

/// Branch switching at a located branch point via the kernel direction.
SwitchResult switch_branch(const Model& model, const Vec& u_bp, double mu_bp,
                           double amplitude, const ContinuationSettings& st);

}  // namespace fracpath
