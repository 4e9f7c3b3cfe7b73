#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace sft {

// Forward-mode dual number with N derivative directions over scalar T.
// Nesting (Dual<1, Dual<1, double>>) yields exact higher-order directional
// derivatives, which the adjoint uses for Jacobian-vector contractions.
template <int N, typename T = double>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(double c) : v(c) {}  // NOLINT: implicit lift of constants
  template <typename U = T, typename = std::enable_if_t<!std::is_same_v<U, double>>>
  Dual(const T& c) : v(c) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
};

inline double value_of(double x) { return x; }
template <int N, typename T>
double value_of(const Dual<N, T>& x) {
  return value_of(x.v);
}

template <int N, typename T>
Dual<N, T> operator-(const Dual<N, T>& a) {
  Dual<N, T> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}

template <int N, typename T>
Dual<N, T> operator+(Dual<N, T> a, const Dual<N, T>& b) {
  return a += b;
}
template <int N, typename T>
Dual<N, T> operator+(Dual<N, T> a, double b) {
  a.v += b;
  return a;
}
template <int N, typename T>
Dual<N, T> operator+(double a, Dual<N, T> b) {
  b.v += a;
  return b;
}

template <int N, typename T>
Dual<N, T> operator-(Dual<N, T> a, const Dual<N, T>& b) {
  return a -= b;
}
template <int N, typename T>
Dual<N, T> operator-(Dual<N, T> a, double b) {
  a.v -= b;
  return a;
}
template <int N, typename T>
Dual<N, T> operator-(double a, const Dual<N, T>& b) {
  return (-b) + a;
}

template <int N, typename T>
Dual<N, T> operator*(const Dual<N, T>& a, const Dual<N, T>& b) {
  Dual<N, T> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <int N, typename T>
Dual<N, T> operator*(Dual<N, T> a, double b) {
  a.v = a.v * b;
  for (int i = 0; i < N; ++i) a.d[i] = a.d[i] * b;
  return a;
}
template <int N, typename T>
Dual<N, T> operator*(double a, Dual<N, T> b) {
  return b * a;
}

template <int N, typename T>
Dual<N, T> operator/(const Dual<N, T>& a, const Dual<N, T>& b) {
  Dual<N, T> r;
  const T inv = 1.0 / b.v;
  r.v = a.v * inv;
  for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
  return r;
}
template <int N, typename T>
Dual<N, T> operator/(Dual<N, T> a, double b) {
  return a * (1.0 / b);
}
template <int N, typename T>
Dual<N, T> operator/(double a, const Dual<N, T>& b) {
  return Dual<N, T>(a) / b;
}

using std::atan2;
using std::exp;
using std::log;
using std::sqrt;

template <int N, typename T>
Dual<N, T> exp(const Dual<N, T>& a) {
  Dual<N, T> r;
  r.v = exp(a.v);
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * r.v;
  return r;
}

template <int N, typename T>
Dual<N, T> log(const Dual<N, T>& a) {
  Dual<N, T> r;
  r.v = log(a.v);
  const T inv = 1.0 / a.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * inv;
  return r;
}

template <int N, typename T>
Dual<N, T> sqrt(const Dual<N, T>& a) {
  Dual<N, T> r;
  r.v = sqrt(a.v);
  const T half_inv = 0.5 / r.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * half_inv;
  return r;
}

template <int N, typename T>
Dual<N, T> atan2(const Dual<N, T>& y, const Dual<N, T>& x) {
  Dual<N, T> r;
  r.v = atan2(y.v, x.v);
  const T inv_n = 1.0 / (x.v * x.v + y.v * y.v);
  for (int i = 0; i < N; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) * inv_n;
  return r;
}

// Minimal 3-vector over any scalar; keeps the element code readable
// without dragging custom scalars through Eigen.
template <typename T>
struct TV3 {
  T x{}, y{}, z{};

  TV3() = default;
  TV3(T px, T py, T pz) : x(px), y(py), z(pz) {}

  TV3 operator+(const TV3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  TV3 operator-(const TV3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  TV3 operator*(const T& s) const { return {x * s, y * s, z * s}; }
};

template <typename T>
T dot(const TV3<T>& a, const TV3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename T>
TV3<T> cross(const TV3<T>& a, const TV3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

}  // namespace sft
