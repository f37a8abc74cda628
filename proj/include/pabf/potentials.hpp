#ifndef PABF_POTENTIALS_HPP
#define PABF_POTENTIALS_HPP

// Pair and angle potentials of the trimer-in-solvent system. Particles 0, 1
// and 2 form the trimer; every other particle is solvent.
//
//   V(q) = sum_{solvent pairs} V_wca + sum_{trimer-solvent pairs} V_wca
//        + V_s(|q0 q1|) + V_s(|q1 q2|) + V_lj(|q0 q2|) + V_angle(theta)
//
// Trimer particles do not feel WCA among themselves. All distances use the
// minimum-image convention in the periodic box of side L.

#include "pabf/core.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace pabf {

struct PairPotentialParams {
  double sigma = 1.0;
  double epsilon = 1.0;
  double sigma_prime = 1.0;
  double epsilon_prime = 0.1;
  double d1 = std::pow(2.0, 1.0 / 6.0);
  double omega = 2.0;
  double h = 2.0;
  double k_theta = 1.0;
  double cos_theta0 = 1.0 / 3.0;

  /// WCA cutoff, located at the Lennard-Jones minimum.
  double d0() const { return std::pow(2.0, 1.0 / 6.0) * sigma; }

  void validate() const {
    if (!(sigma > 0.0) || !(epsilon > 0.0) || !(omega > 0.0) || !(h > 0.0) || !(k_theta > 0.0))
      throw DomainError("sigma, epsilon, omega, h and k_theta must be strictly positive");
    if (!(sigma_prime > 0.0) || !(epsilon_prime >= 0.0) || !(d1 > 0.0))
      throw DomainError("sigma', d1 must be positive and epsilon' non-negative");
    if (!(cos_theta0 >= -1.0 && cos_theta0 <= 1.0))
      throw DomainError("cos(theta0) must lie in [-1, 1]");
  }
};

/// Positions of N >= 3 particles in a periodic square box of side L.
struct ParticleConfiguration {
  std::vector<Vec2> positions;
  double box_length = 15.0;

  std::size_t size() const { return positions.size(); }
};

inline constexpr double kCoincidentDistance = 1e-12;

inline double wrap_coordinate(double x, double box_length) {
  double w = x - box_length * std::floor(x / box_length);
  // floor can leave w == L for tiny negative x
  if (w >= box_length) w -= box_length;
  return w;
}

inline Vec2 wrap_position(const Vec2 &p, double box_length) {
  return {wrap_coordinate(p.x, box_length), wrap_coordinate(p.y, box_length)};
}

inline Vec2 minimum_image(const Vec2 &d, double box_length) {
  return {d.x - box_length * std::nearbyint(d.x / box_length),
          d.y - box_length * std::nearbyint(d.y / box_length)};
}

/// Displacement b - a under the minimum-image convention.
inline Vec2 separation(const Vec2 &a, const Vec2 &b, double box_length) {
  return minimum_image(b - a, box_length);
}

namespace detail {
inline void require_positive_distance(double d) {
  if (!(d >= kCoincidentDistance))
    throw DomainError("pair distance must be positive (coincident particles?)");
}
} // namespace detail

inline double wca_energy(double d, const PairPotentialParams &p) {
  detail::require_positive_distance(d);
  if (d > p.d0()) return 0.0;
  const double s6 = std::pow(p.sigma / d, 6);
  return p.epsilon + 4.0 * p.epsilon * (s6 * s6 - s6);
}

/// dV_wca/dd.
inline double wca_derivative(double d, const PairPotentialParams &p) {
  detail::require_positive_distance(d);
  if (d > p.d0()) return 0.0;
  const double s6 = std::pow(p.sigma / d, 6);
  return 4.0 * p.epsilon * (-12.0 * s6 * s6 + 6.0 * s6) / d;
}

inline double double_well_energy(double d, const PairPotentialParams &p) {
  detail::require_positive_distance(d);
  const double s = (d - p.d1 - p.omega) / p.omega;
  const double b = 1.0 - s * s;
  return p.h * b * b;
}

inline double double_well_derivative(double d, const PairPotentialParams &p) {
  detail::require_positive_distance(d);
  const double s = (d - p.d1 - p.omega) / p.omega;
  return -4.0 * p.h * s * (1.0 - s * s) / p.omega;
}

inline double lj_energy(double d, const PairPotentialParams &p) {
  detail::require_positive_distance(d);
  const double s6 = std::pow(p.sigma_prime / d, 6);
  return 4.0 * p.epsilon_prime * (s6 * s6 - s6);
}

inline double lj_derivative(double d, const PairPotentialParams &p) {
  detail::require_positive_distance(d);
  const double s6 = std::pow(p.sigma_prime / d, 6);
  return 4.0 * p.epsilon_prime * (-12.0 * s6 * s6 + 6.0 * s6) / d;
}

inline double angle_energy(double cos_theta, const PairPotentialParams &p) {
  if (!(cos_theta >= -1.0 && cos_theta <= 1.0))
    throw DomainError("cosine outside [-1, 1]");
  const double dc = cos_theta - p.cos_theta0;
  return 0.5 * p.k_theta * dc * dc;
}

/// dV_angle/d(cos theta).
inline double angle_derivative(double cos_theta, const PairPotentialParams &p) {
  if (!(cos_theta >= -1.0 && cos_theta <= 1.0))
    throw DomainError("cosine outside [-1, 1]");
  return p.k_theta * (cos_theta - p.cos_theta0);
}

/// Cosine of the angle at q1 between q1->q0 and q1->q2, with its gradient
/// with respect to q0, q1 and q2.
struct TrimerAngle {
  double cos_theta = 0.0;
  Vec2 d_q0;
  Vec2 d_q1;
  Vec2 d_q2;
};

inline TrimerAngle trimer_angle(const Vec2 &q0, const Vec2 &q1, const Vec2 &q2, double box_length) {
  const Vec2 a = separation(q1, q0, box_length);
  const Vec2 b = separation(q1, q2, box_length);
  const double ra = norm(a);
  const double rb = norm(b);
  detail::require_positive_distance(ra);
  detail::require_positive_distance(rb);
  TrimerAngle out;
  // rounding can push |c| a hair above 1 for collinear bonds
  out.cos_theta = std::clamp(dot(a, b) / (ra * rb), -1.0, 1.0);
  const double inv = 1.0 / (ra * rb);
  out.d_q0 = b * inv - a * (out.cos_theta / (ra * ra));
  out.d_q2 = a * inv - b * (out.cos_theta / (rb * rb));
  out.d_q1 = -(out.d_q0 + out.d_q2);
  return out;
}

namespace detail {

inline void require_valid(const ParticleConfiguration &c) {
  if (c.size() < 3) throw DomainError("configuration needs at least the three trimer particles");
  if (!(c.box_length > 0.0)) throw DomainError("box length must be positive");
}

/// Walks every interacting pair once, calling fn(i, j, r_ij, d, dV/dd, V).
template <class Fn>
void for_each_pair_term(const ParticleConfiguration &c, const PairPotentialParams &p,
                        bool want_energy, Fn &&fn) {
  const std::size_t n = c.size();
  const double L = c.box_length;
  const double cut2 = p.d0() * p.d0();
  const auto &q = c.positions;

  // Solvent-solvent and trimer-solvent WCA.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = std::max<std::size_t>(i + 1, 3); j < n; ++j) {
      const Vec2 r = separation(q[i], q[j], L);
      const double d2 = norm2(r);
      if (d2 > cut2) continue;
      const double d = std::sqrt(d2);
      fn(i, j, r, d, wca_derivative(d, p), want_energy ? wca_energy(d, p) : 0.0);
    }
  }

  // Bonds and the q0-q2 Lennard-Jones term.
  for (std::size_t b = 0; b < 2; ++b) {
    const Vec2 r = separation(q[b], q[b + 1], L);
    const double d = norm(r);
    fn(b, b + 1, r, d, double_well_derivative(d, p), want_energy ? double_well_energy(d, p) : 0.0);
  }
  const Vec2 r02 = separation(q[0], q[2], L);
  const double d02 = norm(r02);
  fn(0, 2, r02, d02, lj_derivative(d02, p), want_energy ? lj_energy(d02, p) : 0.0);
}

} // namespace detail

inline double total_energy(const ParticleConfiguration &c, const PairPotentialParams &p) {
  detail::require_valid(c);
  double e = 0.0;
  detail::for_each_pair_term(c, p, true,
                             [&](std::size_t, std::size_t, const Vec2 &, double, double, double v) {
                               e += v;
                             });
  const TrimerAngle ang = trimer_angle(c.positions[0], c.positions[1], c.positions[2], c.box_length);
  return e + angle_energy(ang.cos_theta, p);
}

/// Writes grad V into `gradient` (one entry per particle) and returns V.
inline double energy_and_gradient(const ParticleConfiguration &c, const PairPotentialParams &p,
                                  std::span<Vec2> gradient) {
  detail::require_valid(c);
  if (gradient.size() != c.size()) throw std::invalid_argument("gradient buffer size mismatch");
  for (auto &g : gradient) g = Vec2{};
  double e = 0.0;
  detail::for_each_pair_term(
      c, p, true, [&](std::size_t i, std::size_t j, const Vec2 &r, double d, double dv, double v) {
        // r = q_j - q_i, so grad_{q_j} d = r / d
        const Vec2 g = r * (dv / d);
        gradient[j] += g;
        gradient[i] -= g;
        e += v;
      });
  const TrimerAngle ang = trimer_angle(c.positions[0], c.positions[1], c.positions[2], c.box_length);
  const double dva = angle_derivative(ang.cos_theta, p);
  gradient[0] += ang.d_q0 * dva;
  gradient[1] += ang.d_q1 * dva;
  gradient[2] += ang.d_q2 * dva;
  return e + angle_energy(ang.cos_theta, p);
}

/// -grad V per particle.
inline std::vector<Vec2> total_forces(const ParticleConfiguration &c, const PairPotentialParams &p) {
  std::vector<Vec2> g(c.size());
  energy_and_gradient(c, p, g);
  for (auto &v : g) v = -v;
  return g;
}

} // namespace pabf

#endif // PABF_POTENTIALS_HPP
