#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace fwm::oracle {

inline constexpr long double kC = 299792458.0L;

inline long double omega_of_nm(long double nm) { return 2.0L * std::numbers::pi_v<long double> * kC / (nm * 1e-9L); }
inline long double nm_of_omega(long double w) { return 2.0L * std::numbers::pi_v<long double> * kC / w * 1e9L; }

// Taylor series by explicit powers and factorials in long double.
inline long double taylor_k(const std::vector<double>& beta, long double w0, long double w) {
  long double x = w - w0, sum = 0.0L, xp = 1.0L, fact = 1.0L;
  for (std::size_t m = 0; m < beta.size(); ++m) {
    if (m > 0) {
      xp *= x;
      fact *= static_cast<long double>(m);
    }
    sum += static_cast<long double>(beta[m]) * xp / fact;
  }
  return sum;
}

// Central differences of an arbitrary function.
inline double central_first(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}
inline double central_second(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Plain bisection for a sign change of f on [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, int iterations = 200) {
  double fa = f(a);
  for (int i = 0; i < iterations; ++i) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Real roots of c0 + c1 x + c2 x^2 + c3 x^3 (c3 != 0), closed form
// (trigonometric / Cardano), ascending.
inline std::vector<double> cubic_real_roots(double c0, double c1, double c2, double c3) {
  const long double a = c2 / static_cast<long double>(c3), b = c1 / static_cast<long double>(c3),
                    c = c0 / static_cast<long double>(c3);
  const long double p = b - a * a / 3.0L;
  const long double q = 2.0L * a * a * a / 27.0L - a * b / 3.0L + c;
  const long double disc = q * q / 4.0L + p * p * p / 27.0L;
  std::vector<double> roots;
  const long double shift = -a / 3.0L;
  if (disc > 0) {
    const long double s = std::sqrt(disc);
    roots.push_back(static_cast<double>(std::cbrt(-q / 2.0L + s) + std::cbrt(-q / 2.0L - s) + shift));
  } else {
    const long double r = std::sqrt(-p / 3.0L);
    const long double phi = std::acos(std::clamp(-q / (2.0L * r * r * r), -1.0L, 1.0L));
    for (int k = 0; k < 3; ++k) {
      roots.push_back(static_cast<double>(2.0L * r * std::cos((phi - 2.0L * std::numbers::pi_v<long double> * k) / 3.0L) + shift));
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Sum of independent geometric (thermal) pair numbers by direct convolution.
inline std::vector<double> convolve_geometrics(const std::vector<double>& t_values, std::size_t n_max) {
  std::vector<double> dist(n_max + 1, 0.0);
  dist[0] = 1.0;
  for (double t : t_values) {
    std::vector<double> geo(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) geo[n] = (1.0 - t) * std::pow(t, static_cast<double>(n));
    std::vector<double> out(n_max + 1, 0.0);
    for (std::size_t a = 0; a <= n_max; ++a)
      for (std::size_t b = 0; a + b <= n_max; ++b) out[a + b] += dist[a] * geo[b];
    dist = out;
  }
  return dist;
}

// Exhaustive enumeration of survival and bin assignment of n photons in a
// TMD with uniform bins and no dark clicks. Returns P(c clicks).
inline std::vector<double> tmd_enumerate(std::size_t n, std::size_t bins, double survive) {
  std::vector<double> out(bins + 1, 0.0);
  const std::size_t outcomes_per_photon = bins + 1;  // bin index or lost
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= outcomes_per_photon;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    double p = 1.0;
    std::vector<bool> lit(bins, false);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t o = c % outcomes_per_photon;
      c /= outcomes_per_photon;
      if (o == bins) {
        p *= 1.0 - survive;
      } else {
        p *= survive / static_cast<double>(bins);
        lit[o] = true;
      }
    }
    out[static_cast<std::size_t>(std::count(lit.begin(), lit.end(), true))] += p;
  }
  return out;
}

// Purity of the Gaussian amplitude f = exp(-(A x^2 + 2 C x y + B y^2)),
// Tr(rho^2) from Gaussian integral determinants:
//   int f^2 = pi / sqrt(det M2), int f f f f = pi^2 / sqrt(det M4).
inline double det4(const std::array<std::array<long double, 4>, 4>& m) {
  auto a = m;
  long double det = 1.0L;
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (int r = col + 1; r < 4; ++r) {
      const long double f = a[r][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[r][k] -= f * a[col][k];
    }
  }
  return static_cast<double>(det);
}

inline double gaussian_schmidt_number(double A, double B, double C) {
  const long double det2 = 4.0L * A * B - 4.0L * C * C;  // M2 = [[2A, 2C], [2C, 2B]]
  // variables (x, x', y, y'): exponent of f(x,y) f(x',y) f(x,y') f(x',y')
  std::array<std::array<long double, 4>, 4> m{};
  m[0][0] = m[1][1] = 2.0L * A;
  m[2][2] = m[3][3] = 2.0L * B;
  for (int xi : {0, 1})
    for (int yi : {2, 3}) m[xi][yi] = m[yi][xi] = C;
  const long double numerator = std::numbers::pi_v<long double> * std::numbers::pi_v<long double> / std::sqrt(static_cast<long double>(det4(m)));
  const long double norm = std::numbers::pi_v<long double> / std::sqrt(det2);
  const long double purity = numerator / (norm * norm);
  return static_cast<double>(1.0L / purity);
}

}  // namespace fwm::oracle
