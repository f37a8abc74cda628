#ifndef PABF_TOY_HPP
#define PABF_TOY_HPP

// Low-dimensional test systems with the identity reaction coordinate
// xi(x) = (x_1, x_2).
//
//   U(z) = (h/2) (cos 4 pi z1 + cos 4 pi z2) + kappa sin 2 pi z1 sin 2 pi z2
//
// toy_a: V(x1, x2) = U(x1, x2) on the torus [0, 1)^2.
// toy_b: V(x1, x2, x3) = U(x1, x2) + a cos 2 pi x3 + c x1 sin 2 pi x3, with
//        (x1, x2) in the plane (confined by the wall outside [0, 1]^2) and x3
//        on the circle [0, 1). The x3 coupling makes the free energy differ
//        from U.

#include "pabf/core.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <string>

namespace pabf {

enum class ToyKind { toy_a, toy_b };

struct ToySystem {
  ToyKind kind = ToyKind::toy_a;
  double h = 2.0;
  double kappa = 0.5;
  double a = 1.0;
  double c = 1.5;
  double beta = 1.0;

  std::size_t dimension() const { return kind == ToyKind::toy_a ? 2 : 3; }
  /// Whether the reaction coordinate itself lives on the torus.
  bool periodic_coordinate() const { return kind == ToyKind::toy_a; }

  void validate() const {
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    if (!std::isfinite(h) || !std::isfinite(kappa) || !std::isfinite(a) || !std::isfinite(c))
      throw DomainError("toy parameters must be finite");
  }

  double reduced_energy(const Vec2 &z) const {
    using std::numbers::pi;
    return 0.5 * h * (std::cos(4 * pi * z.x) + std::cos(4 * pi * z.y)) +
           kappa * std::sin(2 * pi * z.x) * std::sin(2 * pi * z.y);
  }

  Vec2 reduced_gradient(const Vec2 &z) const {
    using std::numbers::pi;
    const double s1 = std::sin(2 * pi * z.x), c1 = std::cos(2 * pi * z.x);
    const double s2 = std::sin(2 * pi * z.y), c2 = std::cos(2 * pi * z.y);
    return {-2 * pi * h * std::sin(4 * pi * z.x) + 2 * pi * kappa * c1 * s2,
            -2 * pi * h * std::sin(4 * pi * z.y) + 2 * pi * kappa * s1 * c2};
  }

  /// Energy of the orthogonal degree of freedom x3 at reaction coordinate z
  /// (zero for toy_a).
  double orthogonal_energy(double z1, double x3) const {
    using std::numbers::pi;
    if (kind == ToyKind::toy_a) return 0.0;
    return a * std::cos(2 * pi * x3) + c * z1 * std::sin(2 * pi * x3);
  }

  double energy(std::span<const double> x) const {
    const Vec2 z{x[0], x[1]};
    return reduced_energy(z) + (kind == ToyKind::toy_b ? orthogonal_energy(x[0], x[2]) : 0.0);
  }

  void gradient(std::span<const double> x, std::span<double> g) const {
    using std::numbers::pi;
    const Vec2 gz = reduced_gradient({x[0], x[1]});
    g[0] = gz.x;
    g[1] = gz.y;
    if (kind == ToyKind::toy_b) {
      g[0] += c * std::sin(2 * pi * x[2]);
      g[2] = -2 * pi * a * std::sin(2 * pi * x[2]) + 2 * pi * c * x[0] * std::cos(2 * pi * x[2]);
    }
  }
};

inline std::string to_string(ToyKind k) { return k == ToyKind::toy_a ? "toy_a" : "toy_b"; }

} // namespace pabf

#endif // PABF_TOY_HPP
