#pragma once
// Independent numeric oracles for the test suite.  Nothing here calls the
// library's solvers: eigenvalues come from a plain cyclic Jacobi sweep and
// wave frequencies from the projected Coriolis operator.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(int n) { return Mat(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0)); }

inline Mat multiply(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c = zeros(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat transpose(const Mat& a) {
  Mat t = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) t[i][j] = a[j][i];
  return t;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> jacobi_eigenvalues(Mat a) {
  const std::size_t n = a.size();
  double total = 0;
  for (const auto& row : a)
    for (double v : row) total += v * v;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off <= 1e-32 * total) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev;
  for (std::size_t i = 0; i < n; ++i) ev.push_back(a[i][i]);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Singular values of a, ascending: the nonnegative half of the spectrum of
/// the symmetric matrix [[0, a], [a^T, 0]] (no squaring, so zeros stay at rounding level).
inline std::vector<double> singular_values(const Mat& a) {
  const std::size_t n = a.size();
  Mat big = zeros(static_cast<int>(2 * n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      big[i][n + j] = a[i][j];
      big[n + j][i] = a[i][j];
    }
  std::vector<double> ev = jacobi_eigenvalues(big);
  std::vector<double> sv(ev.begin() + static_cast<std::ptrdiff_t>(n), ev.end());
  for (double& v : sv) v = std::max(v, 0.0);
  std::sort(sv.begin(), sv.end());
  return sv;
}

/// Block-diagonal rotation matrix with the given rates on planes (1,2), (3,4), ...
inline Mat canonical_rotation(int d, const std::vector<double>& rates) {
  Mat a = zeros(d);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    a[2 * i][2 * i + 1] = rates[i];
    a[2 * i + 1][2 * i] = -rates[i];
  }
  return a;
}

struct WaveSpectrum {
  std::vector<double> positive;  // ascending, with repeats
  int zero_count = 0;            // zero frequencies on the plane normal to k
};

/// Frequencies of -i w u + 2 Lambda u = -i k p, k.u = 0: singular values of
/// P (2 Lambda) P restricted to the complement of k (the k direction itself
/// contributes one spurious zero, removed here).
inline WaveSpectrum wave_spectrum(int d, const std::vector<double>& rates, const std::vector<double>& k, double tol = 1e-9) {
  double kk = 0;
  for (double v : k) kk += v * v;
  Mat p = zeros(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) p[i][j] = (i == j ? 1.0 : 0.0) - k[i] * k[j] / kk;
  Mat c = canonical_rotation(d, rates);
  for (auto& row : c)
    for (double& v : row) v *= 2;
  const std::vector<double> sv = singular_values(multiply(multiply(p, c), p));
  double top = 0;
  for (double v : sv) top = std::max(top, v);
  WaveSpectrum out;
  for (double v : sv) {
    if (v <= tol * std::max(top, 1.0)) {
      ++out.zero_count;
    } else {
      out.positive.push_back(v);
    }
  }
  --out.zero_count;
  return out;
}

inline double e3_frequency(double lambda, double k1, double k2, double k3) {
  return 2 * lambda * std::fabs(k3) / std::sqrt(k1 * k1 + k2 * k2 + k3 * k3);
}

inline double e4_frequency(double l1, double l2, const std::vector<double>& k) {
  const double n2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + k[3] * k[3];
  return 2 * std::sqrt(l2 * l2 * (k[0] * k[0] + k[1] * k[1]) + l1 * l1 * (k[2] * k[2] + k[3] * k[3])) / std::sqrt(n2);
}

/// Signed area of a closed polygon's projection onto axes (p, q) (0-based), shoelace rule.
inline double shoelace(const std::vector<double>& x, int d, int p, int q) {
  const std::size_t n = x.size() / static_cast<std::size_t>(d);
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    s += x[i * d + p] * x[j * d + q] - x[j * d + p] * x[i * d + q];
  }
  return 0.5 * s;
}

}  // namespace oracle
