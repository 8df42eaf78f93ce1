#include "fracpath/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fracpath/errors.hpp"
#include "fracpath/linalg.hpp"

namespace fracpath {

namespace {

constexpr double kUnstableRe = 1e-8;
constexpr double kComplexIm = 1e-6;

struct Tangent {
  Vec u;
  double mu = 0.0;
};

// Scaled arclength metric: xi <du1, du2>/n + (1 - xi) dmu1 dmu2.
double metric_dot(const ContinuationSettings& st, const Vec& du1, double dmu1,
                  const Vec& du2, double dmu2) {
  const double n = static_cast<double>(du1.size());
  return st.xi * du1.dot(du2) / n + (1.0 - st.xi) * dmu1 * dmu2;
}

double metric_norm(const ContinuationSettings& st, const Vec& du, double dmu) {
  return std::sqrt(metric_dot(st, du, dmu, du, dmu));
}

// Bordered Jacobian [[G_u, G_mu], [plane normal]] at (u, mu).
Mat bordered_matrix(const Model& model, const Vec& u, double mu,
                    const ContinuationSettings& st, const Tangent& normal) {
  const int n = model.dim();
  Mat b(n + 1, n + 1);
  b.topLeftCorner(n, n) = model.jacobian_u(u, mu);
  b.col(n).head(n) = model.jacobian_mu(u, mu);
  b.row(n).head(n) = (st.xi / n) * normal.u.transpose();
  b(n, n) = (1.0 - st.xi) * normal.mu;
  return b;
}

// Normalized tangent from the bordered system, oriented along `prev`.
Tangent compute_tangent(const Model& model, const Vec& u, double mu,
                        const ContinuationSettings& st, const Tangent& prev) {
  const int n = model.dim();
  Mat b = bordered_matrix(model, u, mu, st, prev);
  Vec rhs = Vec::Zero(n + 1);
  rhs[n] = 1.0;
  Eigen::PartialPivLU<Mat> lu(b);
  Vec t = lu.solve(rhs);
  Tangent out{t.head(n), t[n]};
  const double nrm = metric_norm(st, out.u, out.mu);
  if (!t.allFinite() || nrm < 1e-14)
    throw SingularJacobian("tangent system is singular");
  out.u /= nrm;
  out.mu /= nrm;
  if (metric_dot(st, out.u, out.mu, prev.u, prev.mu) < 0.0) {
    out.u = -out.u;
    out.mu = -out.mu;
  }
  return out;
}

struct StepResult {
  Vec u;
  double mu = 0.0;
  bool ok = false;
  int iters = 0;
  double resid = 0.0;
};

// Newton correction on G(u, mu) = 0 plus the plane through (up, mup) with
// normal t, starting at the predictor itself.
StepResult correct_step(const Model& model, const Vec& up, double mup,
                        const Tangent& t, const ContinuationSettings& st) {
  const int n = model.dim();
  StepResult out;
  Vec u = up;
  double mu = mup;
  for (int it = 0; it <= st.newton_max_iter; ++it) {
    Vec g = model.residual(u, mu);
    const double c = metric_dot(st, u - up, mu - mup, t.u, t.mu);
    const double res = std::max(g.lpNorm<Eigen::Infinity>(), std::abs(c));
    if (!std::isfinite(res)) return out;
    if (res < st.newton_tol) {
      out.u = u;
      out.mu = mu;
      out.ok = true;
      out.iters = it;
      out.resid = res;
      return out;
    }
    if (it == st.newton_max_iter) break;
    Mat b = bordered_matrix(model, u, mu, st, t);
    Vec rhs(n + 1);
    rhs.head(n) = g;
    rhs[n] = c;
    Eigen::PartialPivLU<Mat> lu(b);
    Vec delta = lu.solve(rhs);
    if (!delta.allFinite()) return out;
    u -= delta.head(n);
    mu -= delta[n];
  }
  return out;
}

BranchRecord make_record(const Model& model, const Vec& u, double mu,
                         double tangent_mu, double step, EventType ev,
                         const StabilityCount& stab) {
  BranchRecord r;
  r.mu = mu;
  r.u = u;
  r.tangent_mu = tangent_mu;
  r.step_used = step;
  r.event = ev;
  r.stab = stab;
  const Vec c0 = model.component(u, 0);
  r.norm2 = norm_lp(model.fem(), c0, 2);
  r.norm8 = norm_lp(model.fem(), c0, 8);
  return r;
}

StabilityCount maybe_stability(const Model& model, const Vec& u, double mu,
                               const ContinuationSettings& st) {
  if (!st.compute_stability) return {};
  return count_unstable(model, u, mu, st);
}

StabilityCount count_from_values(const CVec& vals) {
  StabilityCount c{0, 0, 0};
  for (int i = 0; i < vals.size(); ++i) {
    if (vals[i].real() <= kUnstableRe) continue;
    ++c.total;
    if (std::abs(vals[i].imag()) > kComplexIm)
      ++c.cplx;
    else
      ++c.real;
  }
  return c;
}

// Newton on G(u, mu) = 0 with the kernel amplitude pinned,
// phi . (u - u_bp) / phi . phi = amp, letting mu float. Near a pitchfork the
// fixed-mu Jacobian is almost singular while this bordered system is regular
// on the transverse branch.
StepResult amplitude_newton(const Model& model, const Vec& u_bp, double mu_bp,
                            const Vec& phi, double amp,
                            const ContinuationSettings& st) {
  const int n = model.dim();
  const double phi2 = phi.squaredNorm();
  StepResult out;
  Vec u = u_bp + amp * phi;
  double mu = mu_bp;
  for (int it = 0; it <= st.newton_max_iter; ++it) {
    Vec g;
    try {
      g = model.residual(u, mu);
    } catch (const DomainError&) {
      return out;
    }
    const double c = phi.dot(u - u_bp) / phi2 - amp;
    const double res = std::max(g.lpNorm<Eigen::Infinity>(), std::abs(c));
    if (!std::isfinite(res)) return out;
    if (res < st.newton_tol) {
      out.u = u;
      out.mu = mu;
      out.ok = true;
      out.iters = it;
      out.resid = res;
      return out;
    }
    if (it == st.newton_max_iter) break;
    Mat b(n + 1, n + 1);
    try {
      b.topLeftCorner(n, n) = model.jacobian_u(u, mu);
      b.col(n).head(n) = model.jacobian_mu(u, mu);
    } catch (const DomainError&) {
      return out;
    }
    b.row(n).head(n) = phi.transpose() / phi2;
    b(n, n) = 0.0;
    Vec rhs(n + 1);
    rhs.head(n) = g;
    rhs[n] = c;
    Eigen::PartialPivLU<Mat> lu(b);
    Vec delta = lu.solve(rhs);
    if (!delta.allFinite()) return out;
    u -= delta.head(n);
    mu -= delta[n];
  }
  return out;
}

// Localized event point between an accepted pair of records.
struct EventPoint {
  double alpha = 1.0;
  Vec u;
  double mu = 0.0;
  EventType type = EventType::none;
  int past_val = 0;  // detector state just past the crossing
};

// Bisection on the step fraction over [alpha0, 1]; `classify` maps a corrected
// point to the integer detector state that differs across the event.
EventPoint localize_event(const Model& model, const Vec& u0, double mu0,
                          const Tangent& t0, double ds, EventType type,
                          int lo_val, int hi_val, double alpha0,
                          const Vec& u1, double mu1,
                          const ContinuationSettings& st,
                          const std::function<int(const Vec&, double)>& classify) {
  EventPoint ev;
  ev.type = type;
  ev.alpha = 1.0;
  ev.u = u1;
  ev.mu = mu1;
  ev.past_val = hi_val;
  double alpha_lo = alpha0, alpha_hi = 1.0;
  double mu_lo = mu0, mu_hi = mu1;
  for (int it = 0; it < 30; ++it) {
    if (std::abs(mu_hi - mu_lo) <= st.event_tol * (1.0 + std::abs(mu_hi))) break;
    if (alpha_hi - alpha_lo <= 1e-4) break;
    const double am = 0.5 * (alpha_lo + alpha_hi);
    const Vec up = u0 + (am * ds) * t0.u;
    const double mup = mu0 + (am * ds) * t0.mu;
    StepResult sr;
    try {
      sr = correct_step(model, up, mup, t0, st);
    } catch (const DomainError&) {
      sr.ok = false;
    }
    if (!sr.ok) break;  // keep the best bracket found so far
    int v;
    try {
      v = classify(sr.u, sr.mu);
    } catch (const Error&) {
      break;
    }
    if (v == lo_val) {
      alpha_lo = am;
      mu_lo = sr.mu;
    } else {
      alpha_hi = am;
      mu_hi = sr.mu;
      ev.alpha = am;
      ev.u = sr.u;
      ev.mu = sr.mu;
      ev.past_val = v;
    }
  }
  return ev;
}

}  // namespace

std::string event_name(EventType e) {
  switch (e) {
    case EventType::fold: return "fold";
    case EventType::branch_point: return "branch_point";
    case EventType::hopf: return "hopf";
    case EventType::none: break;
  }
  return "none";
}

std::vector<int> Branch::event_indices(EventType e) const {
  std::vector<int> out;
  for (const auto& r : records)
    if (r.event == e) out.push_back(r.index);
  return out;
}

NewtonReport newton_fixed_mu(const Model& model, const Vec& u0, double mu,
                             const ContinuationSettings& st) {
  NewtonReport rep;
  rep.mu = mu;
  Vec u = u0;
  for (int it = 0; it <= st.newton_max_iter; ++it) {
    Vec g = model.residual(u, mu);
    const double res = g.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res)) return rep;
    rep.resid = res;
    rep.iters = it;
    if (res < st.newton_tol) {
      rep.u = u;
      rep.converged = true;
      return rep;
    }
    if (it == st.newton_max_iter) break;
    Mat gu = model.jacobian_u(u, mu);
    Eigen::PartialPivLU<Mat> lu(gu);
    Vec delta = lu.solve(g);
    if (!delta.allFinite()) return rep;
    u -= delta;
  }
  rep.u = u;
  return rep;
}

StabilityCount count_unstable(const Model& model, const Vec& u, double mu,
                              const ContinuationSettings& st) {
  Mat a, b;
  model.stability_pencil(u, mu, a, b);
  const int n = static_cast<int>(a.rows());

  if (n <= st.dense_eig_limit) {
    Eigen::LLT<Mat> llt(b);
    if (llt.info() == Eigen::Success) {
      // Similarity transform with the Cholesky factor keeps the spectrum and
      // hands a standard problem to the QR iteration.
      Mat x = llt.matrixL().solve(a);
      Mat c = llt.matrixL().solve(x.transpose()).transpose();
      Eigen::EigenSolver<Mat> es(c, /*computeEigenvectors=*/false);
      if (es.info() != Eigen::Success)
        throw EigFailure("dense eigenvalue iteration failed");
      return count_from_values(es.eigenvalues());
    }
    return count_from_values(generalized_eigs(a, b, n, EigWhich::largest_real).values);
  }

  // Iterative path: shift-invert Arnoldi at sigma = 0 captures the spectrum
  // nearest the imaginary axis, which is where instabilities live here.
  Mat shifted = a;
  Eigen::PartialPivLU<Eigen::Ref<Mat>> lu(shifted);
  auto apply = [&](const Vec& x) -> Vec { return lu.solve(b * x); };
  int sub = std::min(st.arnoldi_subspace, n);
  int k = std::min(st.n_eigs, sub - 2);
  ShiftInvertEigs r = eigs_shift_invert(apply, n, 0.0, sub, k);
  StabilityCount c = count_from_values(r.values);
  if (c.total == static_cast<int>(r.values.size()) && k < n - 2) {
    // every returned mode unstable: the window may be truncated, widen once
    sub = std::min(n, sub + 120);
    k = std::min(2 * k, sub - 2);
    r = eigs_shift_invert(apply, n, 0.0, sub, k);
    c = count_from_values(r.values);
  }
  return c;
}

Branch continue_branch(const Model& model, const Vec& u0, double mu0,
                       const ContinuationSettings& st, const Vec* u_prev,
                       double mu_prev) {
  if (st.ds0 <= 0.0 || st.ds_min <= 0.0 || st.ds_max < st.ds0)
    throw InvalidParameter("inconsistent step size settings");
  if (st.xi <= 0.0 || st.xi >= 1.0)
    throw InvalidParameter("arclength weight xi must lie in (0, 1)");

  NewtonReport start = newton_fixed_mu(model, u0, mu0, st);
  if (!start.converged)
    throw StartNotConverged("initial point did not converge at fixed mu");

  Branch br;
  br.model_name = model.name();
  const int n = model.dim();

  Tangent t;
  if (u_prev != nullptr) {
    t.u = start.u - *u_prev;
    t.mu = mu0 - mu_prev;
    const double nrm = metric_norm(st, t.u, t.mu);
    if (nrm < 1e-14)
      throw InvalidParameter("secant start requires distinct points");
    t.u /= nrm;
    t.mu /= nrm;
    t = compute_tangent(model, start.u, mu0, st, t);
  } else {
    const Tangent seed{Vec::Zero(n), static_cast<double>(st.direction >= 0 ? 1 : -1)};
    t = compute_tangent(model, start.u, mu0, st, seed);
  }

  StabilityCount stab = maybe_stability(model, start.u, mu0, st);
  br.records.push_back(make_record(model, start.u, mu0, t.mu, 0.0,
                                   EventType::none, stab));
  br.records.back().index = 0;

  Vec u = start.u;
  double mu = mu0;
  double ds = st.ds0;
  int accepted = 0;
  int revisit_hits = 0;

  while (accepted < st.max_steps) {
    // predictor / corrector with step halving
    StepResult sr;
    while (true) {
      const Vec up = u + ds * t.u;
      const double mup = mu + ds * t.mu;
      try {
        sr = correct_step(model, up, mup, t, st);
      } catch (const DomainError&) {
        sr.ok = false;
      }
      if (sr.ok) break;
      ds *= 0.5;
      if (ds < st.ds_min) break;
    }
    if (!sr.ok) {
      br.stop_reason = "step size underflow";
      break;
    }
    const double ds_used = ds;
    ++accepted;

    Tangent t_new = compute_tangent(model, sr.u, sr.mu, st, t);
    StabilityCount stab_new = maybe_stability(model, sr.u, sr.mu, st);

    // event detection against the previous accepted point
    std::vector<EventPoint> events;
    if (t.mu * t_new.mu < 0.0) {
      const int lo = t.mu > 0.0 ? 1 : -1;
      events.push_back(localize_event(
          model, u, mu, t, ds_used, EventType::fold, lo, -lo, 0.0, sr.u,
          sr.mu, st, [&](const Vec& um, double mum) {
            Tangent tm = compute_tangent(model, um, mum, st, t);
            return tm.mu > 0.0 ? 1 : -1;
          }));
    }
    // One step can cross several eigenvalues (near-double branch points sit
    // closer than a step): peel crossings off from the near end until the
    // detector state reaches the far value.
    const auto peel = [&](EventType type, int from, int to,
                          const std::function<int(const Vec&, double)>& cls) {
      int lo = from;
      double a0 = 0.0;
      for (int rounds = 0; lo != to && rounds < 4; ++rounds) {
        EventPoint ev = localize_event(model, u, mu, t, ds_used, type, lo, to,
                                       a0, sr.u, sr.mu, st, cls);
        const int past = ev.past_val;
        const double a1 = ev.alpha;
        events.push_back(std::move(ev));
        if (past == lo || a1 <= a0) break;
        lo = past;
        a0 = a1;
      }
    };
    if (st.compute_stability && stab.real >= 0 && stab_new.real >= 0 &&
        stab.real != stab_new.real) {
      peel(EventType::branch_point, stab.real, stab_new.real,
           [&](const Vec& um, double mum) {
             return count_unstable(model, um, mum, st).real;
           });
    }
    if (st.compute_stability && stab.cplx >= 0 && stab_new.cplx >= 0 &&
        stab.cplx != stab_new.cplx) {
      peel(EventType::hopf, stab.cplx, stab_new.cplx,
           [&](const Vec& um, double mum) {
             return count_unstable(model, um, mum, st).cplx;
           });
    }
    std::sort(events.begin(), events.end(),
              [](const EventPoint& a, const EventPoint& b) { return a.alpha < b.alpha; });

    bool fold_budget_hit = false;
    for (const auto& ev : events) {
      Tangent tev = compute_tangent(model, ev.u, ev.mu, st, t);
      StabilityCount sev = maybe_stability(model, ev.u, ev.mu, st);
      BranchRecord rec = make_record(model, ev.u, ev.mu, tev.mu,
                                     ev.alpha * ds_used, ev.type, sev);
      rec.index = static_cast<int>(br.records.size());
      br.records.push_back(std::move(rec));
      if (ev.type == EventType::fold) {
        ++br.n_folds;
        if (st.stop_after_folds > 0 && br.n_folds >= st.stop_after_folds)
          fold_budget_hit = true;
      }
    }

    BranchRecord rec = make_record(model, sr.u, sr.mu, t_new.mu, ds_used,
                                   EventType::none, stab_new);
    rec.index = static_cast<int>(br.records.size());

    // revisit detection: back on a previously traced part of the diagram
    bool revisit = false;
    if (st.detect_revisit) {
      const int last_ok = static_cast<int>(br.records.size()) - 20;
      for (int i = 0; i + 1 < last_ok; ++i) {
        const auto& a = br.records[i];
        const auto& bnext = br.records[i + 1];
        const double dmu_step =
            std::max(st.revisit_tol, 0.75 * std::abs(bnext.mu - a.mu));
        const double dn_step =
            std::max(st.revisit_tol, 0.75 * std::abs(bnext.norm2 - a.norm2));
        if (std::abs(rec.mu - a.mu) <= dmu_step &&
            std::abs(rec.norm2 - a.norm2) <= dn_step &&
            rec.stab.total == a.stab.total) {
          revisit = true;
          break;
        }
      }
    }
    revisit_hits = revisit ? revisit_hits + 1 : 0;

    br.records.push_back(std::move(rec));

    u = sr.u;
    mu = sr.mu;
    t = t_new;
    stab = stab_new;
    if (sr.iters <= 3) ds = std::min(ds * 1.3, st.ds_max);

    if (fold_budget_hit) {
      br.stop_reason = "fold budget reached";
      break;
    }
    if (mu < st.mu_min || mu > st.mu_max) {
      br.stop_reason = "mu bound reached";
      break;
    }
    if (br.records.back().norm2 > st.norm_max) {
      br.stop_reason = "norm bound reached";
      break;
    }
    if (revisit_hits >= 2) {
      br.stop_reason = "revisited earlier branch segment";
      break;
    }
  }
  if (br.stop_reason.empty()) br.stop_reason = "step budget exhausted";
  return br;
}

SwitchResult switch_branch(const Model& model, const Vec& u_bp, double mu_bp,
                           double amplitude, const ContinuationSettings& st) {
  if (amplitude <= 0.0) throw InvalidParameter("switch amplitude must be positive");
  Mat gu = model.jacobian_u(u_bp, mu_bp);
  Vec phi = near_null_vector(gu);
  const double sup = phi.cwiseAbs().maxCoeff();
  if (sup <= 0.0) throw SwitchFailed("null vector collapsed to zero");
  phi /= sup;

  const Vec phi0 = model.component(phi, 0);
  const int changes = count_sign_changes(phi0);
  const int mode = model.fem().bc == Bc::dirichlet ? changes + 1 : changes;

  for (double sign : {1.0, -1.0}) {
    const StepResult sr =
        amplitude_newton(model, u_bp, mu_bp, sign * phi, amplitude, st);
    if (!sr.ok) continue;
    if ((sr.u - u_bp).lpNorm<Eigen::Infinity>() < 0.3 * amplitude) continue;
    SwitchResult out;
    out.u = sr.u;
    out.mu = sr.mu;
    out.kernel = phi;
    out.mode = mode;
    return out;
  }

  // fallback: plain Newton at frozen mu, retried with small mu shifts
  const double dmu[3] = {0.0, st.ds0, -st.ds0};
  for (double shift : dmu) {
    for (double sign : {1.0, -1.0}) {
      const Vec guess = u_bp + sign * amplitude * phi;
      NewtonReport rep;
      try {
        rep = newton_fixed_mu(model, guess, mu_bp + shift, st);
      } catch (const DomainError&) {
        continue;
      }
      if (!rep.converged) continue;
      const double depart = (rep.u - u_bp).lpNorm<Eigen::Infinity>();
      if (depart < 0.3 * amplitude) continue;  // fell back onto the old branch
      SwitchResult out;
      out.u = rep.u;
      out.mu = mu_bp + shift;
      out.kernel = phi;
      out.mode = mode;
      return out;
    }
  }
  throw SwitchFailed("no converged point off the current branch");
}

}  // namespace fracpath
