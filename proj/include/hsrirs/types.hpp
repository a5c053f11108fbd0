#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace hsrirs {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::RowVectorXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Uplink carrier: sub-6 GHz or mmWave.
enum class Band : int { sub6 = 0, mmwave = 1 };

inline constexpr std::array<Band, 2> kBands{Band::sub6, Band::mmwave};

constexpr int index(Band b) { return static_cast<int>(b); }

/// Per-band pair, indexed by Band.
template <typename T>
struct PerBand {
  std::array<T, 2> v{};

  T& operator[](Band b) { return v[index(b)]; }
  const T& operator[](Band b) const { return v[index(b)]; }
};

/// Unit-modulus phasor vector e^{j theta}.
inline VectorXcd phasors(const VectorXd& theta) {
  VectorXcd out(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) out(i) = std::polar(1.0, theta(i));
  return out;
}

/// Wraps an angle into [0, 2pi).
inline double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace hsrirs
