#pragma once
// Independent reference computations used by the tests. None of these call
// the closed forms they are checked against.

#include <array>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace oracle {

using Vec4 = Eigen::Vector4d;

inline double inner(int k, const Vec4& a, const Vec4& b) {
  return k * a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

template <int N>
using State = Eigen::Matrix<double, N, 1>;

template <int N>
State<N> rk4(const std::function<State<N>(const State<N>&)>& f, State<N> y, double T, int steps) {
  const double h = T / steps;
  for (int i = 0; i < steps; ++i) {
    const State<N> k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

/// Geodesic x and Jacobi field J integrated in the ambient space:
///   x'' = -k <x',x'> x,  J'' = -k (2 <x',J'> x + <x',x'> J).
/// Works for k = 0 in homogeneous coordinates too (both sides vanish).
struct JacobiOde {
  Vec4 x, xp, J, Jp;
};

inline JacobiOde integrate_jacobi(int k, const JacobiOde& init, double T, double h = 1e-3) {
  using S = State<16>;
  S y;
  y << init.x, init.xp, init.J, init.Jp;
  const auto f = [k](const S& s) {
    const Vec4 x = s.segment<4>(0), xp = s.segment<4>(4), J = s.segment<4>(8), Jp = s.segment<4>(12);
    S d;
    d << xp, -k * inner(k, xp, xp) * x, Jp, -k * (2 * inner(k, xp, Jp) * x + inner(k, xp, xp) * J);
    return d;
  };
  const int steps = std::max(1, static_cast<int>(std::lround(std::abs(T) / h)));
  const S out = rk4<16>(f, y, T, steps);
  return {out.segment<4>(0), out.segment<4>(4), out.segment<4>(8), out.segment<4>(12)};
}

/// Parallel transport along a geodesic: X' = -k <X, x'> x.
inline Vec4 integrate_transport(int k, const Vec4& p, const Vec4& v, const Vec4& X0, double T, double h = 1e-3) {
  using S = State<12>;
  S y;
  y << p, v, X0;
  const auto f = [k](const S& s) {
    const Vec4 x = s.segment<4>(0), xp = s.segment<4>(4), X = s.segment<4>(8);
    S d;
    d << xp, -k * inner(k, xp, xp) * x, -k * inner(k, X, xp) * x;
    return d;
  };
  const int steps = std::max(1, static_cast<int>(std::lround(std::abs(T) / h)));
  return rk4<12>(f, y, T, steps).segment<4>(8);
}

/// Hilbert (cross-ratio) distance in the Klein ball.
inline double klein_hilbert_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  const Eigen::Vector3d u = (y - x).normalized();
  const double b = x.dot(u), c = x.squaredNorm() - 1.0;
  const double r = std::sqrt(b * b - c);
  const Eigen::Vector3d a = x + (-b - r) * u, e = x + (-b + r) * u;  // a, x, y, e in order
  return 0.5 * std::log(((e - x).norm() * (y - a).norm()) / ((e - y).norm() * (x - a).norm()));
}

// Arbitrary-precision values (mpmath, 30 digits).
namespace mp {
// Holonomy of the period-4 configuration at r_o = 1/sqrt(2), summed from
// the chord distances of its q-points.
inline constexpr std::array<double, 3> a_values{0.02, 0.05, 0.1};
inline constexpr std::array<double, 3> orbit_holonomy{-0.0029239246119641, -0.0072919846227033, -0.014458247709196};
// The four-term arctanh closed form at the same a.
inline constexpr std::array<double, 3> closed_form_values{0.0053652254234377, 0.01349517016867, 0.027582047727532};
}  // namespace mp

}  // namespace oracle
