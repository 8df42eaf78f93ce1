#include "fracpath/mesh_fem.hpp"

#include <cmath>

namespace fracpath {

Vec Mesh::nodes() const {
  Vec x(np);
  for (int i = 0; i < np; ++i) {
    const double t = static_cast<double>(i) / (np - 1);
    x[i] = a * (1.0 - t) + b * t;
  }
  return x;
}

Mesh make_mesh(double a, double b, int np) {
  if (!(a < b)) throw InvalidMesh("mesh interval requires a < b");
  if (np < 3) throw InvalidMesh("mesh requires at least 3 nodes");
  return Mesh{a, b, np};
}

FemOps assemble_fem(const Mesh& mesh, Bc bc) {
  const int np = mesh.np;
  const double h = mesh.h();
  Mat mass = Mat::Zero(np, np);
  Mat stiff = Mat::Zero(np, np);
  const double m_d = 2.0 * h / 6.0;
  const double m_o = h / 6.0;
  const double k_d = 1.0 / h;
  for (int e = 0; e + 1 < np; ++e) {
    mass(e, e) += m_d;
    mass(e + 1, e + 1) += m_d;
    mass(e, e + 1) += m_o;
    mass(e + 1, e) += m_o;
    stiff(e, e) += k_d;
    stiff(e + 1, e + 1) += k_d;
    stiff(e, e + 1) -= k_d;
    stiff(e + 1, e) -= k_d;
  }
  FemOps fe;
  fe.mesh = mesh;
  fe.bc = bc;
  if (bc == Bc::dirichlet) {
    fe.mass = mass.block(1, 1, np - 2, np - 2);
    fe.stiffness = stiff.block(1, 1, np - 2, np - 2);
  } else {
    fe.mass = std::move(mass);
    fe.stiffness = std::move(stiff);
  }
  return fe;
}

Vec FemOps::prolong(const Vec& u) const {
  if (bc == Bc::neumann) return u;
  Vec full = Vec::Zero(mesh.np);
  full.segment(1, mesh.np - 2) = u;
  return full;
}

Vec FemOps::restrict_active(const Vec& full) const {
  if (bc == Bc::neumann) return full;
  return full.segment(1, mesh.np - 2);
}

double norm_lp(const FemOps& fe, const Vec& u, int p, bool normalized) {
  if (p != 2 && p != 8) throw UnsupportedNorm("norm_lp supports p = 2 and p = 8 only");
  const Vec full = fe.prolong(u);
  const int np = fe.mesh.np;
  double acc = 0.0;
  for (int i = 0; i < np; ++i) {
    const double u2 = full[i] * full[i];
    const double f = (p == 2) ? u2 : ((u2 * u2) * (u2 * u2));
    acc += (i == 0 || i == np - 1) ? 0.5 * f : f;
  }
  acc *= fe.mesh.h();
  if (normalized) acc /= fe.mesh.length();
  return std::pow(acc, 1.0 / p);
}

double laplace_eigenvalue(double length, int j) {
  if (length <= 0.0 || j < 1)
    throw InvalidParameter("laplace_eigenvalue needs length > 0 and j >= 1");
  const double k = j * M_PI / length;
  return k * k;
}

}  // namespace fracpath
