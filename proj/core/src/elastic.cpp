#include "sft/elastic.hpp"

namespace sft::elastic {

namespace {

// Maps d-block derivatives (d1, d2) to vertex derivatives (x0, x1, x2).
constexpr double kChain[3][2] = {{-1, -1}, {1, 0}, {0, 1}};

Vec3 to_vec(const TV3<double>& v) { return {v.x, v.y, v.z}; }

}  // namespace

void stretch_grad_hess(const Mat2& dm_inv, double area, const Vec3 x[3], const double* S,
                       Eigen::Matrix<double, 9, 1>& grad, Eigen::Matrix<double, 9, 9>& hess) {
  TV3<double> xt[3];
  for (int i = 0; i < 3; ++i) xt[i] = {x[i].x(), x[i].y(), x[i].z()};
  const StrainState<double> st = strain_state(dm_inv, xt, S);

  double g[3];
  strain_gradient_voigt(st, g);
  const Vec3 f1 = to_vec(st.f1), f2 = to_vec(st.f2);

  const Vec3 u1 = g[0] * f1 + g[2] * f2;
  const Vec3 u2 = g[2] * f1 + g[1] * f2;
  const Vec3 pd[2] = {area * (dm_inv(0, 0) * u1 + dm_inv(0, 1) * u2),
                      area * (dm_inv(1, 0) * u1 + dm_inv(1, 1) * u2)};
  for (int vi = 0; vi < 3; ++vi)
    grad.segment<3>(3 * vi) = kChain[vi][0] * pd[0] + kChain[vi][1] * pd[1];

  // d2W/de2 with the interpolation terms.
  Mat3 K = Mat3::Zero();
  K(0, 0) = st.C[0];
  K(0, 1) = K(1, 0) = st.C[1];
  K(1, 1) = st.C[2];
  K(2, 2) = st.C[3];
  if (st.s > 1e-12) {
    const Vec3 e(st.e[0], st.e[1], st.e[2]);
    const Vec3 De(e[0], e[1], 0.5 * e[2]);
    const Vec3 grad_s = De / st.s;
    const Vec3 Cpe(st.dC[0] * e[0] + st.dC[1] * e[1], st.dC[1] * e[0] + st.dC[2] * e[1],
                   st.dC[3] * e[2]);
    const double psi = st.dC[0] * e[0] * e[0] + 2 * st.dC[1] * e[0] * e[1] +
                       st.dC[2] * e[1] * e[1] + st.dC[3] * e[2] * e[2];
    Mat3 D = Mat3::Zero();
    D.diagonal() << 1, 1, 0.5;
    const Mat3 hess_s = (D - grad_s * grad_s.transpose()) / st.s;
    K += Cpe * grad_s.transpose() + grad_s * Cpe.transpose() + 0.5 * psi * hess_s;
  }

  // de/dd_k as 3x3 row stacks.
  Mat3 E[2];
  for (int k = 0; k < 2; ++k) {
    E[k].row(0) = dm_inv(k, 0) * f1.transpose();
    E[k].row(1) = dm_inv(k, 1) * f2.transpose();
    E[k].row(2) = dm_inv(k, 0) * f2.transpose() + dm_inv(k, 1) * f1.transpose();
  }

  // Constant-curvature (geometric) term: (dm_inv * G * dm_inv^T)_{kl} I3.
  Mat2 G;
  G << g[0], g[2], g[2], g[1];
  const Mat2 Gdd = dm_inv * G * dm_inv.transpose();

  Mat3 Hdd[2][2];
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      Hdd[k][l] = area * (E[k].transpose() * K * E[l] + Gdd(k, l) * Mat3::Identity());

  for (int vi = 0; vi < 3; ++vi)
    for (int vj = 0; vj < 3; ++vj) {
      Mat3 block = Mat3::Zero();
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const double c = kChain[vi][k] * kChain[vj][l];
          if (c != 0) block += c * Hdd[k][l];
        }
      hess.block<3, 3>(3 * vi, 3 * vj) = block;
    }
}

void stretch_param_contractions(const Mat2& dm_inv, double area, const Vec3 x[3],
                                const double* S, const Vec3 lambda[3], const Vec3* u,
                                double* out_f, double* out_J) {
  TV3<double> xt[3];
  for (int i = 0; i < 3; ++i) xt[i] = {x[i].x(), x[i].y(), x[i].z()};
  const StrainState<double> st = strain_state(dm_inv, xt, S);
  const Vec3 f1 = to_vec(st.f1), f2 = to_vec(st.f2);
  const Vec3 e(st.e[0], st.e[1], st.e[2]);

  // Directional strain derivatives along lambda (and u): e_dot = E * dir.
  auto strain_dir = [&](const Vec3 dir[3], Vec3& df1, Vec3& df2) -> Vec3 {
    const Vec3 dd1 = dir[1] - dir[0], dd2 = dir[2] - dir[0];
    df1 = dm_inv(0, 0) * dd1 + dm_inv(1, 0) * dd2;
    df2 = dm_inv(0, 1) * dd1 + dm_inv(1, 1) * dd2;
    return {f1.dot(df1), f2.dot(df2), f1.dot(df2) + f2.dot(df1)};
  };
  Vec3 df1l, df2l, df1u, df2u;
  const Vec3 el = strain_dir(lambda, df1l, df2l);
  Vec3 eu = Vec3::Zero(), edd = Vec3::Zero();
  if (u) {
    eu = strain_dir(u, df1u, df2u);
    // lambda^T (d2e/dx2) u, constant second derivative of the strain.
    edd = {df1l.dot(df1u), df2l.dot(df2u), df1l.dot(df2u) + df2l.dot(df1u)};
  }

  const double m[4] = {e[0] * e[0], 2 * e[0] * e[1], e[1] * e[1], e[2] * e[2]};
  const Vec3 gm[4] = {{2 * e[0], 0, 0}, {2 * e[1], 2 * e[0], 0}, {0, 2 * e[1], 0}, {0, 0, 2 * e[2]}};
  // e_a^T (2 * C_hat_c) e_b per channel.
  const double quad[4] = {2 * el[0] * eu[0], 2 * (el[0] * eu[1] + el[1] * eu[0]),
                          2 * el[1] * eu[1], 2 * el[2] * eu[2]};

  const bool with_s = st.s > 1e-12;
  Vec3 grad_s = Vec3::Zero();
  double sl = 0, su = 0, sd = 0, shs = 0;
  if (with_s) {
    grad_s = Vec3(e[0], e[1], 0.5 * e[2]) / st.s;
    sl = grad_s.dot(el);
    if (u) {
      su = grad_s.dot(eu);
      sd = grad_s.dot(edd);
      shs = ((el[0] * eu[0] + el[1] * eu[1] + 0.5 * el[2] * eu[2]) - sl * su) / st.s;
    }
  }

  const int nodes[2] = {st.seg.j0, st.seg.j1};
  const int node_count = st.seg.j0 == st.seg.j1 ? 1 : 2;
  for (int c = 0; c < kStretchChannels; ++c) {
    for (int ni = 0; ni < node_count; ++ni) {
      const int j = nodes[ni];
      const double w = node_count == 1 ? 1.0 : (ni == 0 ? 1.0 - value_of(st.seg.w1) : value_of(st.seg.w1));
      const double dw = node_count == 1 ? 0.0 : (ni == 0 ? -st.seg.slope : st.seg.slope);
      const int q = c * kStretchSamples + j;
      // p = w_j(s) m_c / 2; grad_e p = (dw m_c grad_s + w gm_c) / 2.
      const double gp_dot_el = 0.5 * ((with_s ? dw * m[c] * sl : 0.0) + w * gm[c].dot(el));
      if (out_f) out_f[q] += area * gp_dot_el;
      if (out_J && u) {
        const double gp_dot_edd = 0.5 * ((with_s ? dw * m[c] * sd : 0.0) + w * gm[c].dot(edd));
        double hp = 0.5 * w * quad[c];
        if (with_s)
          hp += 0.5 * dw * (sl * gm[c].dot(eu) + gm[c].dot(el) * su + m[c] * shs);
        out_J[q] += area * (hp + gp_dot_edd);
      }
    }
  }
}

void orientation_weights(double alpha, double w[3]) {
  const double q = kOrientationBins[1];  // pi/4 bin spacing
  w[0] = w[1] = w[2] = 0;
  if (alpha <= q) {
    w[0] = (q - alpha) / q;
    w[1] = alpha / q;
  } else {
    w[1] = (kOrientationBins[2] - alpha) / q;
    w[2] = (alpha - q) / q;
  }
}

void bend_grad_hess(const HingeRest& rest, const Vec3 x[4], const double* B,
                    Eigen::Matrix<double, 12, 1>& grad, Eigen::Matrix<double, 12, 12>& hess) {
  using T = Dual<12, Dual<12, double>>;
  TV3<T> xt[4];
  for (int i = 0; i < 4; ++i) {
    T comps[3];
    for (int c = 0; c < 3; ++c) {
      T s;
      s.v.v = x[i][c];
      s.v.d[3 * i + c] = 1.0;
      s.d[3 * i + c] = Dual<12, double>(1.0);
      comps[c] = s;
    }
    xt[i] = {comps[0], comps[1], comps[2]};
  }
  const T e = bend_energy(rest, xt, B);
  for (int i = 0; i < 12; ++i) {
    grad[i] = e.v.d[i];
    for (int j = 0; j < 12; ++j) hess(i, j) = e.d[i].d[j];
  }
}

void bend_param_contractions(const HingeRest& rest, const Vec3 x[4], const Vec3 lambda[4],
                             const Vec3* u, double* out_f, double* out_J) {
  using T = Dual<1, Dual<1, double>>;
  TV3<T> xt[4];
  for (int i = 0; i < 4; ++i) {
    T comps[3];
    for (int c = 0; c < 3; ++c) {
      T s;
      s.v.v = x[i][c];
      s.v.d[0] = u ? u[i][c] : 0.0;  // inner direction: u
      s.d[0].v = lambda[i][c];       // outer direction: lambda
      comps[c] = s;
    }
    xt[i] = {comps[0], comps[1], comps[2]};
  }
  const T phi = bend_angle(xt);
  const double phv = phi.v.v;
  const double dphi_u = phi.v.d[0];
  const double dphi_l = phi.d[0].v;
  const double l_hess_u = phi.d[0].d[0];

  const Segment<double> seg = locate(kDihedralKnots, kBendSamples, phv);
  const int nodes[2] = {seg.j0, seg.j1};
  const int node_count = seg.j0 == seg.j1 ? 1 : 2;
  for (int b = 0; b < kBendBins; ++b) {
    if (rest.w_bin[b] == 0) continue;
    for (int ni = 0; ni < node_count; ++ni) {
      const int l = nodes[ni];
      const double w = node_count == 1 ? 1.0 : (ni == 0 ? 1.0 - seg.w1 : seg.w1);
      const double dw = node_count == 1 ? 0.0 : (ni == 0 ? -seg.slope : seg.slope);
      const int q = b * kBendSamples + l;
      // rho(phi) = w_l(phi) phi^2
      const double rho1 = dw * phv * phv + 2 * w * phv;
      const double rho2 = 4 * dw * phv + 2 * w;
      const double cb = rest.scale * rest.w_bin[b];
      if (out_f) out_f[q] += cb * rho1 * dphi_l;
      if (out_J && u) out_J[q] += cb * (rho2 * dphi_l * dphi_u + rho1 * l_hess_u);
    }
  }
}

}  // namespace sft::elastic
