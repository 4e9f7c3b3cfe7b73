#pragma once

#include "sft/autodiff.hpp"
#include "sft/common.hpp"

namespace sft::elastic {

// Membrane model: in-plane stiffness tensor with four independent entries
// (C11, C12, C22, C33 in Voigt order), each sampled at six strain
// magnitudes and interpolated piecewise-linearly with constant
// extrapolation. Parameter vector layout is channel-major: S[c*6 + j].
constexpr int kStretchChannels = 4;
constexpr int kStretchSamples = 6;
constexpr int kStretchParams = kStretchChannels * kStretchSamples;
inline constexpr double kStrainKnots[kStretchSamples] = {0.0, 0.01, 0.02, 0.05, 0.1, 0.2};

// Bending model: stiffness over (edge orientation bin, dihedral deviation
// sample). Bins at 0, 45, 90 degrees to the texture u-axis; deviation
// knots symmetric about flat. Layout is bin-major: B[b*5 + l].
constexpr int kBendBins = 3;
constexpr int kBendSamples = 5;
constexpr int kBendParams = kBendBins * kBendSamples;
inline constexpr double kDihedralKnots[kBendSamples] = {
    -0.7853981633974483, -0.39269908169872414, 0.0, 0.39269908169872414, 0.7853981633974483};
inline constexpr double kOrientationBins[kBendBins] = {0.0, 0.7853981633974483,
                                                       1.5707963267948966};

// Segment lookup for piecewise-linear interpolation at t: the active node
// pair (j0, j1), the hat weight of j1 (carries derivatives when T is a
// dual), and the segment slope (0 when extrapolating).
template <typename T>
struct Segment {
  int j0 = 0, j1 = 0;
  T w1{};
  double slope = 0;
};

template <typename T>
Segment<T> locate(const double* knots, int n, const T& t) {
  Segment<T> seg;
  const double tv = value_of(t);
  if (tv <= knots[0]) {
    seg.j0 = seg.j1 = 0;
    seg.w1 = 0.0;
    return seg;
  }
  if (tv >= knots[n - 1]) {
    seg.j0 = seg.j1 = n - 1;
    seg.w1 = 0.0;
    return seg;
  }
  int j = 0;
  while (j + 2 < n && tv >= knots[j + 1]) ++j;
  seg.j0 = j;
  seg.j1 = j + 1;
  seg.slope = 1.0 / (knots[j + 1] - knots[j]);
  seg.w1 = (t - knots[j]) * seg.slope;
  return seg;
}

template <typename T>
T interp(const Segment<T>& seg, const double* values) {
  return values[seg.j0] + (values[seg.j1] - values[seg.j0]) * seg.w1;
}

// ---------------------------------------------------------------------------
// Stretching element. Local DOF order: (x0, x1, x2).
// Green strain in Voigt form e = (eps11, eps22, 2*eps12) from the
// deformation gradient F = [d1 d2] * dm_inv; interpolation abscissa is the
// Frobenius norm of the strain tensor, s = sqrt(e1^2 + e2^2 + e3^2/2).

template <typename T>
struct StrainState {
  TV3<T> d1, d2;  // edge vectors
  TV3<T> f1, f2;  // deformation gradient columns
  T e[3];
  T s;
  Segment<T> seg;
  T C[4];   // interpolated channels
  double dC[4] = {0, 0, 0, 0};  // channel slopes d/ds at the value point
};

template <typename T>
StrainState<T> strain_state(const Mat2& dm_inv, const TV3<T> x[3], const double* S) {
  StrainState<T> st;
  st.d1 = x[1] - x[0];
  st.d2 = x[2] - x[0];
  st.f1 = st.d1 * dm_inv(0, 0) + st.d2 * dm_inv(1, 0);
  st.f2 = st.d1 * dm_inv(0, 1) + st.d2 * dm_inv(1, 1);
  st.e[0] = 0.5 * (dot(st.f1, st.f1) - 1.0);
  st.e[1] = 0.5 * (dot(st.f2, st.f2) - 1.0);
  st.e[2] = dot(st.f1, st.f2);
  st.s = sqrt(st.e[0] * st.e[0] + st.e[1] * st.e[1] + 0.5 * st.e[2] * st.e[2] + 1e-300);
  st.seg = locate(kStrainKnots, kStretchSamples, st.s);
  for (int c = 0; c < 4; ++c) {
    const double* row = S + c * kStretchSamples;
    st.C[c] = interp(st.seg, row);
    st.dC[c] = (row[st.seg.j1] - row[st.seg.j0]) * st.seg.slope;
  }
  return st;
}

// Energy density W = (C11 e1^2 + 2 C12 e1 e2 + C22 e2^2 + C33 e3^2) / 2.
template <typename T>
T stretch_energy(const Mat2& dm_inv, double area, const TV3<T> x[3], const double* S) {
  const StrainState<T> st = strain_state(dm_inv, x, S);
  const T w = 0.5 * (st.C[0] * st.e[0] * st.e[0] + 2.0 * st.C[1] * st.e[0] * st.e[1] +
                     st.C[2] * st.e[1] * st.e[1] + st.C[3] * st.e[2] * st.e[2]);
  return w * area;
}

// dW/de including the stiffness-interpolation term:
// g = C e + (e' C'(s) e) grad_s / 2, grad_s = D e / s, D = diag(1,1,1/2).
template <typename T>
void strain_gradient_voigt(const StrainState<T>& st, T g[3]) {
  g[0] = st.C[0] * st.e[0] + st.C[1] * st.e[1];
  g[1] = st.C[1] * st.e[0] + st.C[2] * st.e[1];
  g[2] = st.C[3] * st.e[2];
  const T psi = st.dC[0] * st.e[0] * st.e[0] + 2.0 * st.dC[1] * st.e[0] * st.e[1] +
                st.dC[2] * st.e[1] * st.e[1] + st.dC[3] * st.e[2] * st.e[2];
  if (value_of(st.s) > 1e-12) {
    const T f = 0.5 * psi / st.s;
    g[0] += f * st.e[0];
    g[1] += f * st.e[1];
    g[2] += f * (0.5 * st.e[2]);
  }
}

// Analytic gradient of the face energy. Templated so the adjoint can seed
// dual directions through it for exact higher-order contractions.
template <typename T>
void stretch_gradient(const Mat2& dm_inv, double area, const TV3<T> x[3], const double* S,
                      TV3<T> grad[3]) {
  const StrainState<T> st = strain_state(dm_inv, x, S);
  T g[3];
  strain_gradient_voigt(st, g);
  // dW/dDs = F * G * dm_inv^T with G = [[g1, g3], [g3, g2]].
  const TV3<T> u1 = st.f1 * g[0] + st.f2 * g[2];
  const TV3<T> u2 = st.f1 * g[2] + st.f2 * g[1];
  const TV3<T> pd1 = (u1 * dm_inv(0, 0) + u2 * dm_inv(0, 1)) * area;
  const TV3<T> pd2 = (u1 * dm_inv(1, 0) + u2 * dm_inv(1, 1)) * area;
  grad[1] = pd1;
  grad[2] = pd2;
  grad[0] = TV3<T>{} - pd1 - pd2;
}

// Gradient and exact Hessian of the face energy (plain double path used by
// the per-step assembly).
void stretch_grad_hess(const Mat2& dm_inv, double area, const Vec3 x[3], const double* S,
                       Eigen::Matrix<double, 9, 1>& grad, Eigen::Matrix<double, 9, 9>& hess);

// Stiffness-parameter derivatives of the contractions the adjoint needs:
//   out_f[q] += d/dS_q (lambda . grad(energy))
//   out_J[q] += d/dS_q (lambda^T hess(energy) u)        (if u != nullptr)
void stretch_param_contractions(const Mat2& dm_inv, double area, const Vec3 x[3],
                                const double* S, const Vec3 lambda[3], const Vec3* u,
                                double* out_f, double* out_J);

// ---------------------------------------------------------------------------
// Bending element. Local DOF order: (x0, x1) = edge, x2 / x3 = opposite
// vertices of the two incident faces. The angle is the signed deviation
// from flat, zero for coplanar faces.

template <typename T>
T bend_angle(const TV3<T> x[4]) {
  const TV3<T> e = x[1] - x[0];
  const TV3<T> n1 = cross(e, x[2] - x[0]);
  const TV3<T> n2 = cross(x[3] - x[0], e);
  const T c = dot(n1, n2);
  const T s = dot(cross(n1, n2), e) / sqrt(dot(e, e) + 1e-300);
  return atan2(s, c);
}

struct HingeRest {
  double scale = 0;      // |rest edge|^2 / (A0 + A1)
  double w_bin[3] = {0, 0, 0};  // orientation hat weights, two nonzero
};

// Hat weights of the orientation bins at angle alpha in [0, pi/2].
void orientation_weights(double alpha, double w[3]);

template <typename T>
T bend_energy(const HingeRest& rest, const TV3<T> x[4], const double* B) {
  const T phi = bend_angle(x);
  const Segment<T> seg = locate(kDihedralKnots, kBendSamples, phi);
  T k{};
  for (int b = 0; b < kBendBins; ++b) {
    if (rest.w_bin[b] == 0) continue;
    k += rest.w_bin[b] * interp(seg, B + b * kBendSamples);
  }
  return rest.scale * k * phi * phi;
}

void bend_grad_hess(const HingeRest& rest, const Vec3 x[4], const double* B,
                    Eigen::Matrix<double, 12, 1>& grad, Eigen::Matrix<double, 12, 12>& hess);

// Same contractions as the stretch variant, for the 15 bending parameters.
void bend_param_contractions(const HingeRest& rest, const Vec3 x[4], const Vec3 lambda[4],
                             const Vec3* u, double* out_f, double* out_J);

}  // namespace sft::elastic
