#pragma once

#include "hsrirs/scenario.hpp"

#include <random>
#include <string>

namespace testing {

// A scenario small enough to run the whole solver in well under a second.
inline hsrirs::SystemConfig small_config(int m1 = 4, int n = 16) {
  return hsrirs::load_config(R"({"m1":)" + std::to_string(m1) +
                             R"(,"m2":4,"n1":)" + std::to_string(n) + R"(,"n2":)" +
                             std::to_string(n) +
                             R"(,"n_rand":40,"t_max":4,"sdp_max_iter":80})");
}

inline hsrirs::VectorXcd random_cvec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  hsrirs::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = {g(rng), g(rng)};
  return v;
}

inline hsrirs::MatrixXcd random_cmat(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g(0.0, 1.0);
  hsrirs::MatrixXcd m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = {g(rng), g(rng)};
  return m;
}

inline hsrirs::MatrixXcd random_hermitian(std::mt19937_64& rng, int n) {
  const hsrirs::MatrixXcd a = random_cmat(rng, n, n);
  return 0.5 * (a + a.adjoint());
}

inline hsrirs::VectorXd random_phases(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, hsrirs::kTwoPi);
  hsrirs::VectorXd t(n);
  for (int i = 0; i < n; ++i) t(i) = u(rng);
  return t;
}

}  // namespace testing
