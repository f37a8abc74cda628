#ifndef PABF_CORE_HPP
#define PABF_CORE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pabf {

/// Plain 2-vector used for positions, forces and reaction-coordinate values.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  constexpr double operator[](std::size_t i) const { return i == 0 ? x : y; }
  constexpr double &operator[](std::size_t i) { return i == 0 ? x : y; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2 &a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr bool operator==(const Vec2 &, const Vec2 &) = default;
};

constexpr double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2 &a) { return dot(a, a); }

inline bool is_finite(const Vec2 &a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Thrown for arguments outside an operation's mathematical domain
/// (non-positive distances, coincident particles, cosines outside [-1, 1]).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Reaction coordinate whose Gram matrix G is numerically singular.
class DegenerateCoordinateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// NaN or infinity produced while integrating the dynamics.
class UnstableStepError : public std::runtime_error {
public:
  UnstableStepError(std::size_t replica, double time)
      : std::runtime_error("unstable step: non-finite coordinate in replica " +
                           std::to_string(replica) + " at time " + std::to_string(time)),
        replica_(replica), time_(time) {}

  std::size_t replica() const { return replica_; }
  double time() const { return time_; }

private:
  std::size_t replica_;
  double time_;
};

/// Linear solver failed to reach the requested residual.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string &what, double residual)
      : std::runtime_error(what + " (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const { return residual_; }

private:
  double residual_;
};

/// Invalid run configuration or malformed input file.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace pabf

#endif // PABF_CORE_HPP
