#include "sft/physics.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace sft {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

void ensure_sized(ForceAssembly& a, const TemplateMesh& mesh) {
  if (a.nv == 0) {
    a.nv = mesh.vertex_count();
    a.force = VecX::Zero(3 * a.nv);
  } else if (a.nv != mesh.vertex_count()) {
    throw ShapeMismatch("force assembly built for a different mesh");
  }
}

// Wind drag acts identically on each corner of a face; returns d(force per
// vertex)/dx_j for corner j given the cached face quantities.
Mat3 wind_x_block(const ForceAssembly::WindFace& wf, double rho, const Vec3 d1, const Vec3 d2,
                  int j) {
  Mat3 nj;
  switch (j) {
    case 0: nj = 0.5 * skew(d2 - d1); break;
    case 1: nj = -0.5 * skew(d2); break;
    default: nj = 0.5 * skew(d1); break;
  }
  const double a = wf.area;
  const Vec3 an = wf.area_normal;
  const Vec3 nh = an / a;
  const double cn = wf.rel.dot(an);
  // f = (rho/3) (c . an) an / a
  return (rho / 3.0) *
         (an * (wf.rel.transpose() * nj) / a + cn * nj / a -
          (cn / (a * a)) * an * (nh.transpose() * nj));
}

}  // namespace

PhysicsParams PhysicsParams::defaults() {
  PhysicsParams p;
  p.density = 0.15;
  p.stretch_stiffness = VecX::Constant(elastic::kStretchParams, 20.0);
  p.bend_stiffness = VecX::Constant(elastic::kBendParams, 1e-5);
  return p;
}

void PhysicsParams::clamp_stiffness() {
  stretch_stiffness = stretch_stiffness.cwiseMax(0.0);
  bend_stiffness = bend_stiffness.cwiseMax(0.0);
}

void PhysicsParams::validate(int vertex_count, int frame_count) const {
  if (!(density > 0)) throw NonPositiveDensity("density = " + std::to_string(density));
  if (stretch_stiffness.size() != elastic::kStretchParams)
    throw ShapeMismatch("stretch stiffness must have 24 entries");
  if (bend_stiffness.size() != elastic::kBendParams)
    throw ShapeMismatch("bend stiffness must have 15 entries");
  if (stretch_stiffness.minCoeff() < 0 || bend_stiffness.minCoeff() < 0)
    throw Error("stiffness must be non-negative");
  if (!correctives.empty()) {
    if (static_cast<int>(correctives.size()) != frame_count - 1)
      throw CountMismatch("correctives: expected " + std::to_string(frame_count - 1) +
                          " frames, got " + std::to_string(correctives.size()));
    for (const auto& f : correctives)
      if (f.rows() != vertex_count) throw ShapeMismatch("corrective frame has wrong vertex count");
  }
}

void CollisionObstacle::validate() const {
  if (positions.size() != velocities.size())
    throw CountMismatch("obstacle positions/velocities frame counts differ");
  if (!(thickness > 0)) throw Error("obstacle thickness must be positive");
  for (const auto& p : positions)
    if (p.rows() != positions.front().rows()) throw ShapeMismatch("obstacle topology must be fixed");
}

VecX lumped_vertex_areas(const TemplateMesh& mesh) {
  VecX areas = VecX::Zero(mesh.vertex_count());
  for (int f = 0; f < mesh.face_count(); ++f)
    for (int k = 0; k < 3; ++k) areas[mesh.faces(f, k)] += mesh.rest_areas[f] / 3.0;
  return areas;
}

VecX mass_matrix(const TemplateMesh& mesh, double density) {
  if (!(density > 0)) throw NonPositiveDensity(std::to_string(density));
  const VecX areas = lumped_vertex_areas(mesh);
  VecX diag(3 * mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) diag.segment<3>(3 * i).setConstant(density * areas[i]);
  return diag;
}

void stretching_forces(const SurfaceState& state, const TemplateMesh& mesh,
                       const VecX& stretch_stiffness, ForceAssembly& out) {
  ensure_sized(out, mesh);
  out.face_hessians.assign(mesh.face_count(), Eigen::Matrix<double, 9, 9>::Zero());
  const double* S = stretch_stiffness.data();
  for (int f = 0; f < mesh.face_count(); ++f) {
    Vec3 x[3];
    for (int k = 0; k < 3; ++k) x[k] = state.positions.row(mesh.faces(f, k));
    Eigen::Matrix<double, 9, 1> grad;
    elastic::stretch_grad_hess(mesh.material_frames[f], mesh.rest_areas[f], x, S, grad,
                               out.face_hessians[f]);
    for (int k = 0; k < 3; ++k)
      out.force.segment<3>(3 * mesh.faces(f, k)) -= grad.segment<3>(3 * k);
  }
}

void bending_forces(const SurfaceState& state, const TemplateMesh& mesh,
                    const VecX& bend_stiffness, ForceAssembly& out) {
  ensure_sized(out, mesh);
  out.hinge_hessians.clear();
  out.hinge_edges.clear();
  const double* B = bend_stiffness.data();
  for (size_t e = 0; e < mesh.edges.size(); ++e) {
    const auto& edge = mesh.edges[e];
    if (!edge.interior()) continue;
    elastic::HingeRest rest;
    rest.scale = edge.bend_scale;
    elastic::orientation_weights(edge.orientation, rest.w_bin);
    const int ids[4] = {edge.v0, edge.v1, edge.o0, edge.o1};
    Vec3 x[4];
    for (int k = 0; k < 4; ++k) x[k] = state.positions.row(ids[k]);
    Eigen::Matrix<double, 12, 1> grad;
    Eigen::Matrix<double, 12, 12> hess;
    elastic::bend_grad_hess(rest, x, B, grad, hess);
    for (int k = 0; k < 4; ++k) out.force.segment<3>(3 * ids[k]) -= grad.segment<3>(3 * k);
    out.hinge_hessians.push_back(hess);
    out.hinge_edges.push_back(static_cast<int>(e));
  }
}

void external_forces(const SurfaceState& state, const TemplateMesh& mesh, const Vec3& wind,
                     double air_density, const Vec3& gravity, ForceAssembly& out) {
  ensure_sized(out, mesh);
  out.air_density = air_density;
  out.wind.assign(mesh.face_count(), {});
  for (int f = 0; f < mesh.face_count(); ++f) {
    Vec3 x[3], v[3];
    for (int k = 0; k < 3; ++k) {
      x[k] = state.positions.row(mesh.faces(f, k));
      v[k] = state.velocities.row(mesh.faces(f, k));
    }
    const Vec3 an = 0.5 * (x[1] - x[0]).cross(x[2] - x[0]);
    const double a = an.norm();
    auto& wf = out.wind[f];
    wf.area_normal = an;
    wf.area = a;
    wf.d1 = x[1] - x[0];
    wf.d2 = x[2] - x[0];
    wf.rel = wind - (v[0] + v[1] + v[2]) / 3.0;
    if (a < 1e-12) {
      wf.area = 0;  // collapsed face: no drag
      continue;
    }
    const Vec3 fv = (air_density / 3.0) * wf.rel.dot(an) * an / a;
    for (int k = 0; k < 3; ++k) out.force.segment<3>(3 * mesh.faces(f, k)) += fv;
  }
  if (!gravity.isZero()) {
    if (out.mass_diag.size() != 3 * out.nv)
      throw Error("external_forces: mass matrix required before gravity");
    for (int i = 0; i < out.nv; ++i)
      out.force.segment<3>(3 * i) += out.mass_diag[3 * i] * gravity;
  }
}

ForceAssembly assemble_forces(const SurfaceState& state, const TemplateMesh& mesh,
                              const PhysicsParams& params, const SimConfig& config) {
  if (state.positions.rows() != mesh.vertex_count() ||
      state.velocities.rows() != mesh.vertex_count())
    throw ShapeMismatch("state size != template vertex count");
  ForceAssembly out;
  ensure_sized(out, mesh);
  out.mass_diag = mass_matrix(mesh, params.density);
  stretching_forces(state, mesh, params.stretch_stiffness, out);
  bending_forces(state, mesh, params.bend_stiffness, out);
  external_forces(state, mesh, params.wind, params.air_density, config.gravity, out);
  if (!out.force.allFinite()) throw NaNDetected("force assembly");
  return out;
}

Eigen::SparseMatrix<double> ForceAssembly::jacobian_x(const TemplateMesh& mesh) const {
  std::vector<Eigen::Triplet<double>> trips;
  for (int f = 0; f < static_cast<int>(face_hessians.size()); ++f) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int ia = mesh.faces(f, a), ib = mesh.faces(f, b);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            trips.emplace_back(3 * ia + r, 3 * ib + c, -face_hessians[f](3 * a + r, 3 * b + c));
      }
  }
  for (size_t hi = 0; hi < hinge_hessians.size(); ++hi) {
    const auto& edge = mesh.edges[hinge_edges[hi]];
    const int ids[4] = {edge.v0, edge.v1, edge.o0, edge.o1};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            trips.emplace_back(3 * ids[a] + r, 3 * ids[b] + c,
                               -hinge_hessians[hi](3 * a + r, 3 * b + c));
  }
  for (int f = 0; f < static_cast<int>(wind.size()); ++f) {
    const auto& wf = wind[f];
    if (wf.area <= 0) continue;
    for (int j = 0; j < 3; ++j) {
      const Mat3 block = wind_x_block(wf, air_density, wf.d1, wf.d2, j);
      const int ib = mesh.faces(f, j);
      for (int a = 0; a < 3; ++a) {  // every corner feels the same face force
        const int ia = mesh.faces(f, a);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) trips.emplace_back(3 * ia + r, 3 * ib + c, block(r, c));
      }
    }
  }
  Eigen::SparseMatrix<double> m(3 * nv, 3 * nv);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Eigen::SparseMatrix<double> ForceAssembly::jacobian_v(const TemplateMesh& mesh) const {
  std::vector<Eigen::Triplet<double>> trips;
  for (int f = 0; f < static_cast<int>(wind.size()); ++f) {
    const auto& wf = wind[f];
    if (wf.area <= 0) continue;
    const Vec3 nh = wf.area_normal / wf.area;
    const Mat3 block = -(air_density * wf.area / 9.0) * (nh * nh.transpose());
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int ia = mesh.faces(f, a), ib = mesh.faces(f, b);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) trips.emplace_back(3 * ia + r, 3 * ib + c, block(r, c));
      }
  }
  Eigen::SparseMatrix<double> m(3 * nv, 3 * nv);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Eigen::SparseMatrix<double> ForceAssembly::system_matrix(const TemplateMesh& mesh,
                                                         double h) const {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < 3 * nv; ++i) trips.emplace_back(i, i, mass_diag[i]);
  // -h dfdv (wind drag)
  for (int f = 0; f < static_cast<int>(wind.size()); ++f) {
    const auto& wf = wind[f];
    if (wf.area <= 0) continue;
    const Vec3 nh = wf.area_normal / wf.area;
    const Mat3 block = h * (air_density * wf.area / 9.0) * (nh * nh.transpose());
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int ia = mesh.faces(f, a), ib = mesh.faces(f, b);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) trips.emplace_back(3 * ia + r, 3 * ib + c, block(r, c));
      }
  }
  // -h^2 (dfdx)_elastic = +h^2 hessians
  const double h2 = h * h;
  for (int f = 0; f < static_cast<int>(face_hessians.size()); ++f)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int ia = mesh.faces(f, a), ib = mesh.faces(f, b);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            trips.emplace_back(3 * ia + r, 3 * ib + c, h2 * face_hessians[f](3 * a + r, 3 * b + c));
      }
  for (size_t hi = 0; hi < hinge_hessians.size(); ++hi) {
    const auto& edge = mesh.edges[hinge_edges[hi]];
    const int ids[4] = {edge.v0, edge.v1, edge.o0, edge.o1};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            trips.emplace_back(3 * ids[a] + r, 3 * ids[b] + c,
                               h2 * hinge_hessians[hi](3 * a + r, 3 * b + c));
  }
  Eigen::SparseMatrix<double> m(3 * nv, 3 * nv);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

VecX ForceAssembly::apply_elastic_jx(const TemplateMesh& mesh, const VecX& y) const {
  VecX out = VecX::Zero(3 * nv);
  for (int f = 0; f < static_cast<int>(face_hessians.size()); ++f) {
    Eigen::Matrix<double, 9, 1> yl;
    for (int k = 0; k < 3; ++k) yl.segment<3>(3 * k) = y.segment<3>(3 * mesh.faces(f, k));
    const Eigen::Matrix<double, 9, 1> r = face_hessians[f] * yl;
    for (int k = 0; k < 3; ++k) out.segment<3>(3 * mesh.faces(f, k)) -= r.segment<3>(3 * k);
  }
  for (size_t hi = 0; hi < hinge_hessians.size(); ++hi) {
    const auto& edge = mesh.edges[hinge_edges[hi]];
    const int ids[4] = {edge.v0, edge.v1, edge.o0, edge.o1};
    Eigen::Matrix<double, 12, 1> yl;
    for (int k = 0; k < 4; ++k) yl.segment<3>(3 * k) = y.segment<3>(3 * ids[k]);
    const Eigen::Matrix<double, 12, 1> r = hinge_hessians[hi] * yl;
    for (int k = 0; k < 4; ++k) out.segment<3>(3 * ids[k]) -= r.segment<3>(3 * k);
  }
  return out;
}

namespace {

// Closest point on triangle abc to p (Ericson, Real-Time Collision
// Detection), with barycentric coordinates.
Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                            Vec3& bary) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) {
    bary = {1, 0, 0};
    return a;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) {
    bary = {0, 1, 0};
    return b;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double v = d1 / (d1 - d3);
    bary = {1 - v, v, 0};
    return a + v * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) {
    bary = {0, 0, 1};
    return c;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double w = d2 / (d2 - d6);
    bary = {1 - w, 0, w};
    return a + w * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    bary = {0, 1 - w, w};
    return b + w * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  bary = {1 - v - w, v, w};
  return a + ab * v + ac * w;
}

}  // namespace

std::vector<StepTape::Contact> detect_contacts(const MatX3& positions, const SimConfig& config,
                                               const ObstacleView* obstacle) {
  std::vector<StepTape::Contact> contacts;
  const int nv = static_cast<int>(positions.rows());
  for (int i = 0; i < nv; ++i) {
    if (config.ground_enabled && positions(i, 2) < config.ground_height) {
      StepTape::Contact c;
      c.vertex = i;
      c.normal = Vec3::UnitZ();
      c.pos_target = config.ground_height;
      c.vel_target = 0;
      contacts.push_back(c);
    }
    if (obstacle && obstacle->faces) {
      const Vec3 p = positions.row(i);
      double best = std::numeric_limits<double>::infinity();
      Vec3 best_point = Vec3::Zero(), best_normal = Vec3::UnitZ(), best_bary = Vec3::Zero();
      int best_face = -1;
      for (int f = 0; f < obstacle->faces->rows(); ++f) {
        const Vec3 a = obstacle->positions->row((*obstacle->faces)(f, 0));
        const Vec3 b = obstacle->positions->row((*obstacle->faces)(f, 1));
        const Vec3 cc = obstacle->positions->row((*obstacle->faces)(f, 2));
        Vec3 bary;
        const Vec3 q = closest_point_triangle(p, a, b, cc, bary);
        const double d2 = (p - q).squaredNorm();
        if (d2 < best) {
          best = d2;
          best_point = q;
          best_bary = bary;
          best_face = f;
          best_normal = (b - a).cross(cc - a).normalized();
        }
      }
      if (best_face >= 0) {
        const double signed_dist = (p - best_point).dot(best_normal);
        if (signed_dist < obstacle->thickness) {
          StepTape::Contact c;
          c.vertex = i;
          c.normal = best_normal;
          c.pos_target = best_normal.dot(best_point) + obstacle->thickness;
          Vec3 vobs = Vec3::Zero();
          for (int k = 0; k < 3; ++k)
            vobs += best_bary[k] * obstacle->velocities->row((*obstacle->faces)(best_face, k)).transpose();
          c.vel_target = best_normal.dot(vobs);
          contacts.push_back(c);
        }
      }
    }
  }
  return contacts;
}

void project_contacts(const std::vector<StepTape::Contact>& contacts, MatX3& positions,
                      MatX3& velocities) {
  if (contacts.empty()) return;
  // Compact the constraint matrix onto the touched vertices; the impact
  // zone is solved jointly as one least-norm projection.
  std::vector<int> verts;
  for (const auto& c : contacts) verts.push_back(c.vertex);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  std::vector<int> slot(positions.rows(), -1);
  for (size_t k = 0; k < verts.size(); ++k) slot[verts[k]] = static_cast<int>(k);

  const int m = static_cast<int>(contacts.size());
  const int n = 3 * static_cast<int>(verts.size());
  MatX J = MatX::Zero(m, n);
  VecX rx(m), rv(m);
  for (int r = 0; r < m; ++r) {
    const auto& c = contacts[r];
    J.row(r).segment<3>(3 * slot[c.vertex]) = c.normal.transpose();
    rx[r] = c.pos_target - c.normal.dot(positions.row(c.vertex));
    rv[r] = c.vel_target - c.normal.dot(velocities.row(c.vertex));
  }
  Eigen::CompleteOrthogonalDecomposition<MatX> cod(J);
  const VecX dx = cod.solve(rx);
  const VecX dv = cod.solve(rv);
  for (size_t k = 0; k < verts.size(); ++k) {
    positions.row(verts[k]) += dx.segment<3>(3 * k).transpose();
    velocities.row(verts[k]) += dv.segment<3>(3 * k).transpose();
  }
}

namespace {

struct PinMask {
  std::vector<bool> pinned_dof;
  explicit PinMask(int nv, const std::vector<int>& pins) : pinned_dof(3 * nv, false) {
    for (int p : pins) {
      if (p < 0 || p >= nv) throw IndexOutOfRange("pinned vertex " + std::to_string(p));
      for (int c = 0; c < 3; ++c) pinned_dof[3 * p + c] = true;
    }
  }
  bool any() const {
    return std::any_of(pinned_dof.begin(), pinned_dof.end(), [](bool b) { return b; });
  }
};

Eigen::SparseMatrix<double> apply_pins(const Eigen::SparseMatrix<double>& A, const PinMask& mask) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (mask.pinned_dof[it.row()] || mask.pinned_dof[it.col()]) continue;
      trips.emplace_back(it.row(), it.col(), it.value());
    }
  for (size_t i = 0; i < mask.pinned_dof.size(); ++i)
    if (mask.pinned_dof[i]) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  Eigen::SparseMatrix<double> out(A.rows(), A.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

VecX solve_system(const Eigen::SparseMatrix<double>& A, const VecX& b, const SimConfig& config) {
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(config.solver_tol);
  const int max_iter =
      config.solver_max_iter > 0 ? config.solver_max_iter : 10 * static_cast<int>(A.rows());
  cg.setMaxIterations(max_iter);
  cg.compute(A);
  const VecX z = cg.solve(b);
  if (cg.info() != Eigen::Success)
    throw SolverDiverged("CG residual " + std::to_string(cg.error()) + " after " +
                         std::to_string(cg.iterations()) + " iterations");
  if (!z.allFinite()) throw NaNDetected("linear solve");
  return z;
}

SurfaceState integrate(const MatX3& x0, const MatX3& v0, int time_index,
                       const TemplateMesh& mesh, const PhysicsParams& params,
                       const SimConfig& config, const MatX3* corrective,
                       const std::vector<StepTape::Contact>* frozen_contacts,
                       const ObstacleView* obstacle, StepTape* tape) {
  const int nv = mesh.vertex_count();
  SurfaceState in;
  in.positions = x0;
  in.velocities = v0;
  in.time_index = time_index;
  const ForceAssembly fa = assemble_forces(in, mesh, params, config);
  const double h = config.step;

  const PinMask mask(nv, config.pinned);
  Eigen::SparseMatrix<double> A = fa.system_matrix(mesh, h);
  if (mask.any()) A = apply_pins(A, mask);

  VecX v0f(3 * nv);
  for (int i = 0; i < nv; ++i) v0f.segment<3>(3 * i) = v0.row(i).transpose();

  VecX b = h * (fa.force + h * fa.apply_elastic_jx(mesh, v0f));
  if (mask.any())
    for (int i = 0; i < 3 * nv; ++i)
      if (mask.pinned_dof[i]) b[i] = 0;

  const VecX z = solve_system(A, b, config);

  MatX3 v1 = v0;
  for (int i = 0; i < nv; ++i) v1.row(i) += z.segment<3>(3 * i).transpose();
  if (corrective && corrective->size()) {
    if (corrective->rows() != nv) throw ShapeMismatch("corrective slice has wrong vertex count");
    v1 += *corrective;
  }
  for (int p : config.pinned) v1.row(p).setZero();

  MatX3 x1 = x0 + h * v1;

  std::vector<StepTape::Contact> contacts =
      frozen_contacts ? *frozen_contacts : detect_contacts(x1, config, obstacle);
  project_contacts(contacts, x1, v1);

  if (tape) {
    tape->x0 = x0;
    tape->v0 = v0;
    tape->in_time_index = time_index;
    tape->density = params.density;
    tape->stretch_stiffness = params.stretch_stiffness;
    tape->bend_stiffness = params.bend_stiffness;
    tape->wind = params.wind;
    tape->air_density = params.air_density;
    tape->corrective = corrective ? *corrective : MatX3();
    tape->config = config;
    tape->delta_v = z;
    tape->contacts = contacts;
  }

  SurfaceState out;
  out.positions = std::move(x1);
  out.velocities = std::move(v1);
  out.time_index = time_index + 1;
  return out;
}

}  // namespace

SurfaceState step(const SurfaceState& state, const TemplateMesh& mesh,
                  const PhysicsParams& params, const SimConfig& config,
                  const ObstacleView* obstacle, StepTape* tape) {
  const MatX3* corrective = nullptr;
  if (!params.correctives.empty()) {
    const int idx = state.time_index - 1;
    if (idx < 0 || idx >= static_cast<int>(params.correctives.size()))
      throw IndexOutOfRange("no corrective slice for frame " + std::to_string(state.time_index));
    corrective = &params.correctives[idx];
  }
  return integrate(state.positions, state.velocities, state.time_index, mesh, params, config,
                   corrective, nullptr, obstacle, tape);
}

SurfaceState replay_step(const StepTape& tape, const TemplateMesh& mesh) {
  PhysicsParams params;
  params.density = tape.density;
  params.stretch_stiffness = tape.stretch_stiffness;
  params.bend_stiffness = tape.bend_stiffness;
  params.wind = tape.wind;
  params.air_density = tape.air_density;
  const MatX3* corr = tape.corrective.size() ? &tape.corrective : nullptr;
  return integrate(tape.x0, tape.v0, tape.in_time_index, mesh, params, tape.config, corr,
                   &tape.contacts, nullptr, nullptr);
}

std::vector<SurfaceState> simulate(const TemplateMesh& mesh, const PhysicsParams& params,
                                   const SimConfig& config, int frame_count,
                                   const CollisionObstacle* obstacle,
                                   std::vector<StepTape>* tapes) {
  if (frame_count < 1) throw Error("simulate: frame_count must be >= 1");
  params.validate(mesh.vertex_count(), frame_count);
  if (obstacle) {
    obstacle->validate();
    if (static_cast<int>(obstacle->positions.size()) < frame_count)
      throw CountMismatch("obstacle has fewer frames than the rollout");
  }
  if (tapes) tapes->clear();

  std::vector<SurfaceState> states;
  states.reserve(frame_count);
  states.push_back(initial_state(mesh));
  for (int t = 1; t < frame_count; ++t) {
    ObstacleView view;
    if (obstacle) {
      view.faces = &obstacle->faces;
      view.positions = &obstacle->positions[t];
      view.velocities = &obstacle->velocities[t];
      view.thickness = obstacle->thickness;
    }
    StepTape tape;
    states.push_back(step(states.back(), mesh, params, config, obstacle ? &view : nullptr,
                          tapes ? &tape : nullptr));
    if (tapes) tapes->push_back(std::move(tape));
  }
  return states;
}

}  // namespace sft
