#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpvi {

using Vec = std::vector<double>;
using ConstSpan = std::span<const double>;

// Error taxonomy: DomainError for precondition violations, NumericError for
// solver non-convergence (carries the residual in the message).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Vec to_vec(ConstSpan s) { return Vec(s.begin(), s.end()); }

inline Vec add(ConstSpan a, ConstSpan b) {
  if (a.size() != b.size()) throw DomainError("add: dimension mismatch");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(ConstSpan a, ConstSpan b) {
  if (a.size() != b.size()) throw DomainError("sub: dimension mismatch");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scaled(ConstSpan a, double s) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

// y += s * x
inline void axpy(double s, ConstSpan x, Vec& y) {
  if (x.size() != y.size()) throw DomainError("axpy: dimension mismatch");
  for (size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

inline double dot(ConstSpan a, ConstSpan b) {
  if (a.size() != b.size()) throw DomainError("dot: dimension mismatch");
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double linf_norm(ConstSpan a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(ConstSpan a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(ConstSpan a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline Vec concat(ConstSpan a, ConstSpan b) {
  Vec r;
  r.reserve(a.size() + b.size());
  r.insert(r.end(), a.begin(), a.end());
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

}  // namespace dpvi
