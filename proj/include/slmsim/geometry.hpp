#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace slmsim {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Wraps an angle to [0, 2*pi). wrap(x + 2*pi) == wrap(x) exactly for
/// representable inputs because fmod is exact.
inline double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;  // fmod can round up to 2*pi for tiny negatives
  return w;
}

/// Uniform sampling of an ion-plane region. Sample j sits at (j - n/2) * pitch,
/// so the origin is an exact grid point for even n (half-pixel centering).
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  double x(int ix) const { return (ix - nx / 2) * dx; }
  double y(int iy) const { return (iy - ny / 2) * dy; }
  double extent_x() const { return nx * dx; }
  double extent_y() const { return ny * dy; }
};

/// Square power-of-two grid spanning [-half_extent, +half_extent).
inline GridSpec make_square_grid(int n, double half_extent) {
  return GridSpec{n, n, 2.0 * half_extent / n, 2.0 * half_extent / n};
}

class ExtentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndersamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario validation failure carrying every violation found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& e : v) {
      if (!s.empty()) s += "; ";
      s += e;
    }
    return s;
  }
  std::vector<std::string> issues_;
};

}  // namespace slmsim
