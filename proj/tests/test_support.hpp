#pragma once

#include <cmath>
#include <vector>

#include "odpo/instance.hpp"
#include "odpo/rng.hpp"

namespace odpo::testing {

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

inline Vector unit(int d, int i) { return Vector::Unit(d, i); }

inline std::vector<DifferenceArm> as_arms(const std::vector<Vector>& vs) {
  std::vector<DifferenceArm> out;
  for (std::size_t l = 0; l < vs.size(); ++l) {
    out.push_back({vs[l], {0, static_cast<int>(l), 0}});
  }
  return out;
}

inline std::vector<DifferenceArm> orthonormal_arms(int d) {
  std::vector<Vector> vs;
  for (int i = 0; i < d; ++i) vs.push_back(unit(d, i));
  return as_arms(vs);
}

inline std::vector<DifferenceArm> random_arms(int count, int d, Rng& rng,
                                              double scale = 2.0) {
  std::vector<Vector> vs;
  for (int l = 0; l < count; ++l) vs.push_back(scale * sample_unit_ball(d, rng));
  return as_arms(vs);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace odpo::testing
