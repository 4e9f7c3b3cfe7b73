#include "sft/adjoint.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/QR>

namespace sft {

namespace {

using D2 = Dual<1, Dual<1, double>>;  // two nested directions (lambda, u)

VecX flatten(const MatX3& m) {
  VecX v(3 * m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) v.segment<3>(3 * i) = m.row(i).transpose();
  return v;
}

// Removes the component inside the row space of the frozen constraint
// matrix: g <- (I - J^+ J) g, the exact Jacobian of the projection.
void project_out_constraints(const std::vector<StepTape::Contact>& contacts, MatX3& g) {
  if (contacts.empty()) return;
  std::vector<int> verts;
  for (const auto& c : contacts) verts.push_back(c.vertex);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  std::vector<int> slot(g.rows(), -1);
  for (size_t k = 0; k < verts.size(); ++k) slot[verts[k]] = static_cast<int>(k);

  const int m = static_cast<int>(contacts.size());
  const int n = 3 * static_cast<int>(verts.size());
  MatX J = MatX::Zero(m, n);
  for (int r = 0; r < m; ++r)
    J.row(r).segment<3>(3 * slot[contacts[r].vertex]) = contacts[r].normal.transpose();

  VecX ga(n);
  for (size_t k = 0; k < verts.size(); ++k) ga.segment<3>(3 * k) = g.row(verts[k]).transpose();
  Eigen::CompleteOrthogonalDecomposition<MatX> cod(J);
  const VecX corr = cod.solve(J * ga);
  for (size_t k = 0; k < verts.size(); ++k) g.row(verts[k]) -= corr.segment<3>(3 * k).transpose();
}

}  // namespace

ParamGradients ParamGradients::zero(int vertex_count, int step_count) {
  ParamGradients g;
  g.stretch = VecX::Zero(elastic::kStretchParams);
  g.bend = VecX::Zero(elastic::kBendParams);
  g.correctives.assign(step_count, MatX3::Zero(vertex_count, 3));
  return g;
}

void ParamGradients::accumulate_shared(const StepGradients& sg) {
  density += sg.density;
  stretch += sg.stretch;
  bend += sg.bend;
  wind += sg.wind;
}

bool ParamGradients::all_finite() const {
  if (!std::isfinite(density) || !stretch.allFinite() || !bend.allFinite() || !wind.allFinite())
    return false;
  for (const auto& f : correctives)
    if (!f.allFinite()) return false;
  return true;
}

StepGradients backward_step(const StepTape& tape, const TemplateMesh& mesh,
                            const MatX3& grad_x_out, const MatX3& grad_v_out) {
  const int nv = mesh.vertex_count();
  if (tape.x0.rows() != nv) throw TapeMismatch("tape recorded for a different mesh");
  if (grad_x_out.rows() != nv || grad_v_out.rows() != nv)
    throw ShapeMismatch("output gradient size");

  const double h = tape.config.step;
  PhysicsParams params;
  params.density = tape.density;
  params.stretch_stiffness = tape.stretch_stiffness;
  params.bend_stiffness = tape.bend_stiffness;
  params.wind = tape.wind;
  params.air_density = tape.air_density;

  SurfaceState in;
  in.positions = tape.x0;
  in.velocities = tape.v0;
  in.time_index = tape.in_time_index;
  const ForceAssembly fa = assemble_forces(in, mesh, params, tape.config);

  // Contact projection backward (frozen active set).
  MatX3 gx1 = grad_x_out, gv1 = grad_v_out;
  project_out_constraints(tape.contacts, gx1);
  project_out_constraints(tape.contacts, gv1);

  StepGradients out;
  out.x_prev = gx1;                 // x1' = x0 + h v1'
  MatX3 v1_bar = gv1 + h * gx1;

  for (int p : tape.config.pinned) v1_bar.row(p).setZero();

  out.corrective = v1_bar;          // v1' = v0 + z + F
  out.v_prev = v1_bar;
  const VecX z_bar = flatten(v1_bar);

  // Adjoint of the linear solve: A is symmetric, reuse the forward system.
  std::vector<bool> pinned_dof(3 * nv, false);
  for (int p : tape.config.pinned)
    for (int c = 0; c < 3; ++c) pinned_dof[3 * p + c] = true;

  Eigen::SparseMatrix<double> A = fa.system_matrix(mesh, h);
  if (!tape.config.pinned.empty()) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
        if (!pinned_dof[it.row()] && !pinned_dof[it.col()])
          trips.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < 3 * nv; ++i)
      if (pinned_dof[i]) trips.emplace_back(i, i, 1.0);
    A.setFromTriplets(trips.begin(), trips.end());
  }

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tape.config.solver_tol);
  cg.setMaxIterations(tape.config.solver_max_iter > 0 ? tape.config.solver_max_iter : 30 * nv);
  cg.compute(A);
  VecX lambda = cg.solve(z_bar);
  if (cg.info() != Eigen::Success) throw SolverDiverged("adjoint solve");
  if (!lambda.allFinite()) throw NaNDetected("adjoint solve");
  for (int i = 0; i < 3 * nv; ++i)
    if (pinned_dof[i]) lambda[i] = 0;

  const VecX& z = tape.delta_v;
  if (z.size() != 3 * nv) throw TapeMismatch("tape missing solve solution");
  const VecX v0f = flatten(tape.v0);
  const VecX u = v0f + z;  // direction hit by the Jacobian differentials

  MatX3 x_bar = MatX3::Zero(nv, 3);
  MatX3 v_bar = MatX3::Zero(nv, 3);

  out.stretch = VecX::Zero(elastic::kStretchParams);
  out.bend = VecX::Zero(elastic::kBendParams);

  // --- elastic terms -------------------------------------------------
  // For each element, one nested-dual evaluation along directions
  // (lambda, u) yields hess*lambda, and the third-derivative vector
  // grad_x(lambda^T hess u) in a single pass.
  {
    const double* S = params.stretch_stiffness.data();
    VecX dSf = VecX::Zero(elastic::kStretchParams), dSJ = VecX::Zero(elastic::kStretchParams);
    for (int f = 0; f < mesh.face_count(); ++f) {
      const int ids[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
      TV3<D2> x[3];
      Vec3 lam[3], ul[3], xp[3];
      for (int k = 0; k < 3; ++k) {
        xp[k] = tape.x0.row(ids[k]);
        lam[k] = Vec3(lambda.segment<3>(3 * ids[k]));
        ul[k] = Vec3(u.segment<3>(3 * ids[k]));
        D2 comps[3];
        for (int c = 0; c < 3; ++c) {
          D2 s;
          s.v.v = xp[k][c];
          s.v.d[0] = ul[k][c];
          s.d[0].v = lam[k][c];
          comps[c] = s;
        }
        x[k] = {comps[0], comps[1], comps[2]};
      }
      TV3<D2> grad[3];
      elastic::stretch_gradient(mesh.material_frames[f], mesh.rest_areas[f], x, S, grad);
      for (int k = 0; k < 3; ++k) {
        const D2* comps[3] = {&grad[k].x, &grad[k].y, &grad[k].z};
        for (int c = 0; c < 3; ++c) {
          const double hess_lam = comps[c]->d[0].v;     // (hess * lambda)_kc
          const double third = comps[c]->d[0].d[0];     // grad(lambda^T hess u)_kc
          x_bar(ids[k], c) += -h * hess_lam - h * h * third;
          v_bar(ids[k], c) += -h * h * hess_lam;
        }
      }
      elastic::stretch_param_contractions(mesh.material_frames[f], mesh.rest_areas[f], xp, S,
                                          lam, ul, dSf.data(), dSJ.data());
    }
    out.stretch = -h * dSf - h * h * dSJ;
  }
  {
    const double* B = params.bend_stiffness.data();
    VecX dBf = VecX::Zero(elastic::kBendParams), dBJ = VecX::Zero(elastic::kBendParams);
    using TB = Dual<12, D2>;
    for (const auto& edge : mesh.edges) {
      if (!edge.interior()) continue;
      elastic::HingeRest rest;
      rest.scale = edge.bend_scale;
      elastic::orientation_weights(edge.orientation, rest.w_bin);
      const int ids[4] = {edge.v0, edge.v1, edge.o0, edge.o1};
      TV3<TB> x[4];
      Vec3 lam[4], ul[4], xp[4];
      for (int k = 0; k < 4; ++k) {
        xp[k] = tape.x0.row(ids[k]);
        lam[k] = Vec3(lambda.segment<3>(3 * ids[k]));
        ul[k] = Vec3(u.segment<3>(3 * ids[k]));
        TB comps[3];
        for (int c = 0; c < 3; ++c) {
          TB s;
          s.v.v.v = xp[k][c];
          s.v.v.d[0] = ul[k][c];
          s.v.d[0].v = lam[k][c];
          s.d[3 * k + c] = D2(1.0);
          comps[c] = s;
        }
        x[k] = {comps[0], comps[1], comps[2]};
      }
      const TB e = elastic::bend_energy(rest, x, B);
      for (int k = 0; k < 4; ++k)
        for (int c = 0; c < 3; ++c) {
          const D2& gi = e.d[3 * k + c];
          const double hess_lam = gi.d[0].v;
          const double third = gi.d[0].d[0];
          x_bar(ids[k], c) += -h * hess_lam - h * h * third;
          v_bar(ids[k], c) += -h * h * hess_lam;
        }
      elastic::bend_param_contractions(rest, xp, lam, ul, dBf.data(), dBJ.data());
    }
    out.bend = -h * dBf - h * h * dBJ;
  }

  // --- wind terms -----------------------------------------------------
  {
    const double rho = params.air_density;
    for (int f = 0; f < static_cast<int>(fa.wind.size()); ++f) {
      const auto& wf = fa.wind[f];
      if (wf.area <= 0) continue;
      const int ids[3] = {mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
      Vec3 Lam = Vec3::Zero(), Z = Vec3::Zero();
      for (int k = 0; k < 3; ++k) {
        Lam += Vec3(lambda.segment<3>(3 * ids[k]));
        Z += Vec3(z.segment<3>(3 * ids[k]));
      }
      const double a = wf.area;
      const Vec3 an = wf.area_normal;
      const Vec3 nh = an / a;

      // dv0: h (dfdv)^T lambda, blocks -(rho a / 9) nh nh^T.
      const Vec3 dv_contrib = -h * (rho * a / 9.0) * nh * (nh.dot(Lam));
      for (int k = 0; k < 3; ++k) v_bar.row(ids[k]) += dv_contrib.transpose();

      // dw: h (dfdw)^T lambda = h (rho a / 3)(nh . Lam) nh.
      out.wind += h * (rho * a / 3.0) * nh.dot(Lam) * nh;

      // dx0: exact wind position Jacobian transposed against lambda, plus
      // the dJv z coupling from the system matrix.
      const double cn = wf.rel.dot(an);
      const Vec3 g1 = wf.rel * (an.dot(Lam)) / a + Lam * cn / a - nh * (cn * an.dot(Lam) / (a * a));
      const Vec3 g2 = Lam * (an.dot(Z)) / a + Z * (an.dot(Lam)) / a -
                      nh * (an.dot(Lam) * an.dot(Z) / (a * a));
      const Vec3 total = h * (rho / 3.0) * g1 - h * (rho / 9.0) * g2;
      // Chain through d(area normal)/dx; transposed skew matrices flip the
      // cross-product order.
      const Vec3 d1 = wf.d1, d2 = wf.d2;
      const Vec3 r0 = 0.5 * total.cross(d2 - d1);
      const Vec3 r1 = 0.5 * d2.cross(total);
      const Vec3 r2 = 0.5 * total.cross(d1);
      x_bar.row(ids[0]) += r0.transpose();
      x_bar.row(ids[1]) += r1.transpose();
      x_bar.row(ids[2]) += r2.transpose();
    }
  }

  // --- density: mass matrix in A and gravity in f ----------------------
  {
    const VecX areas = lumped_vertex_areas(mesh);
    double dd = 0;
    for (int i = 0; i < nv; ++i) {
      const Vec3 li(lambda.segment<3>(3 * i));
      dd -= areas[i] * li.dot(Vec3(z.segment<3>(3 * i)));
      dd += h * areas[i] * li.dot(tape.config.gravity);
    }
    out.density = dd;
  }

  out.x_prev += x_bar;
  out.v_prev += v_bar;
  return out;
}

ParamGradients backward_rollout(const std::vector<StepTape>& tapes, const TemplateMesh& mesh,
                                const std::vector<MatX3>& per_frame_grad_x) {
  const int nv = mesh.vertex_count();
  const int n = static_cast<int>(tapes.size());
  ParamGradients grads = ParamGradients::zero(nv, n);
  if (n == 0) return grads;

  auto frame_grad = [&](int frame_index_1based) -> MatX3 {
    const size_t idx = static_cast<size_t>(frame_index_1based - 1);
    if (idx < per_frame_grad_x.size() && per_frame_grad_x[idx].size())
      return per_frame_grad_x[idx];
    return MatX3::Zero(nv, 3);
  };

  MatX3 gx = frame_grad(n + 1);  // last simulated frame
  MatX3 gv = MatX3::Zero(nv, 3);
  for (int i = n - 1; i >= 0; --i) {
    StepGradients sg = backward_step(tapes[i], mesh, gx, gv);
    grads.accumulate_shared(sg);
    grads.correctives[i] = sg.corrective;
    gx = sg.x_prev;
    gv = sg.v_prev;
    if (i >= 1) gx += frame_grad(i + 1);
  }
  return grads;
}

}  // namespace sft
