#ifndef PABF_REACTION_COORDINATE_HPP
#define PABF_REACTION_COORDINATE_HPP

// Two-dimensional reaction coordinates and the local mean force
//
//   f_i = sum_j Ginv_ij grad xi_j . grad V - (1/beta) div( sum_j Ginv_ij grad xi_j ),
//   G_ij = grad xi_i . grad xi_j.
//
// The trimer coordinate uses the normalized bond lengths
// xi_1 = (|q0 - q1| - d0) / (2 omega), xi_2 = (|q1 - q2| - d0) / (2 omega).
// Both bonds share q1, so G is not diagonal and the full formula is used.

#include "pabf/core.hpp"
#include "pabf/potentials.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace pabf {

enum class ReactionCoordinateKind { identity_first_two, trimer_bond_lengths };

inline constexpr double kDegenerateGramDeterminant = 1e-10;

/// Gradient of one coordinate over the flat degrees of freedom; at most six
/// entries are nonzero (two particles in 2D, or one coordinate).
struct SparseGradient {
  static constexpr std::size_t kCapacity = 6;
  std::array<std::size_t, kCapacity> index{};
  std::array<double, kCapacity> value{};
  std::size_t count = 0;

  void push(std::size_t i, double v) { index[count] = i, value[count] = v, ++count; }

  double dot(std::span<const double> dense) const {
    double s = 0.0;
    for (std::size_t k = 0; k < count; ++k) s += value[k] * dense[index[k]];
    return s;
  }
  double dot(const SparseGradient &o) const {
    double s = 0.0;
    for (std::size_t a = 0; a < count; ++a)
      for (std::size_t b = 0; b < o.count; ++b)
        if (index[a] == o.index[b]) s += value[a] * o.value[b];
    return s;
  }
};

struct LocalMeanForceSample {
  Vec2 z;
  Vec2 f;
};

/// Symmetric 2x2 matrix.
struct Gram2 {
  double g11 = 0.0, g12 = 0.0, g22 = 0.0;
  double det() const { return g11 * g22 - g12 * g12; }
};

/// xi = (x_1, x_2) on a flat coordinate vector.
struct IdentityCoordinate {
  Vec2 value(std::span<const double> x) const { return {x[0], x[1]}; }

  std::array<SparseGradient, 2> gradient(std::span<const double>) const {
    std::array<SparseGradient, 2> g;
    g[0].push(0, 1.0);
    g[1].push(1, 1.0);
    return g;
  }

  Gram2 gram(std::span<const double>) const { return {1.0, 0.0, 1.0}; }

  /// (d_1 V, d_2 V); G is the identity and the divergence term vanishes.
  Vec2 local_mean_force(std::span<const double> grad_v) const { return {grad_v[0], grad_v[1]}; }
};

class TrimerBondCoordinate {
public:
  TrimerBondCoordinate(double d0, double omega) : d0_(d0), omega_(omega) {
    if (!(omega > 0.0)) throw DomainError("omega must be positive");
  }
  explicit TrimerBondCoordinate(const PairPotentialParams &p) : TrimerBondCoordinate(p.d0(), p.omega) {}

  double d0() const { return d0_; }
  double omega() const { return omega_; }

  Vec2 value(const ParticleConfiguration &c) const {
    const Geometry g = geometry(c);
    return {(g.ra - d0_) / (2.0 * omega_), (g.rb - d0_) / (2.0 * omega_)};
  }

  /// Gradients over the flat layout (x0, y0, x1, y1, ...).
  std::array<SparseGradient, 2> gradient(const ParticleConfiguration &c) const {
    const Geometry g = geometry(c);
    const double k = 1.0 / (2.0 * omega_);
    std::array<SparseGradient, 2> out;
    out[0].push(0, k * g.ea.x);
    out[0].push(1, k * g.ea.y);
    out[0].push(2, -k * g.ea.x);
    out[0].push(3, -k * g.ea.y);
    out[1].push(4, k * g.eb.x);
    out[1].push(5, k * g.eb.y);
    out[1].push(2, -k * g.eb.x);
    out[1].push(3, -k * g.eb.y);
    return out;
  }

  /// G_11 = G_22 = 2 / (2 omega)^2 and G_12 = cos(theta) / (2 omega)^2, with
  /// theta the angle at q1.
  Gram2 gram(const ParticleConfiguration &c) const {
    const Geometry g = geometry(c);
    const double k2 = 1.0 / (4.0 * omega_ * omega_);
    return {2.0 * k2, dot(g.ea, g.eb) * k2, 2.0 * k2};
  }

  /// Local mean force given grad V of the trimer particles q0, q1, q2.
  /// beta == infinity drops the divergence term.
  Vec2 local_mean_force(const ParticleConfiguration &c, std::span<const Vec2> grad_v, double beta) const {
    const Geometry g = geometry(c);
    const double k = 1.0 / (2.0 * omega_);
    const double cth = dot(g.ea, g.eb);
    const double k2 = k * k;
    const double det = k2 * k2 * (4.0 - cth * cth);
    if (!(std::abs(det) >= kDegenerateGramDeterminant))
      throw DegenerateCoordinateError("reaction coordinate Gram matrix is singular");

    // grad xi_j . grad V
    const double dv1 = k * (dot(g.ea, grad_v[0]) - dot(g.ea, grad_v[1]));
    const double dv2 = k * (dot(g.eb, grad_v[2]) - dot(g.eb, grad_v[1]));

    // G^{-1} = [[2, -c], [-c, 2]] / (k^2 (4 - c^2)), a function of c = cos(theta) only.
    const double dd = 4.0 - cth * cth;
    const double inv11 = 2.0 / (k2 * dd);
    const double inv12 = -cth / (k2 * dd);
    const double dinv11 = 4.0 * cth / (k2 * dd * dd);
    const double dinv12 = -(4.0 + cth * cth) / (k2 * dd * dd);

    // grad c . grad xi_1 = k (1 - c^2) / r_b and symmetrically for xi_2.
    const double gc1 = k * (1.0 - cth * cth) / g.rb;
    const double gc2 = k * (1.0 - cth * cth) / g.ra;
    // Laplacian of a 2D distance is 1/r per endpoint.
    const double lap1 = 2.0 * k / g.ra;
    const double lap2 = 2.0 * k / g.rb;

    const double div1 = dinv11 * gc1 + dinv12 * gc2 + inv11 * lap1 + inv12 * lap2;
    const double div2 = dinv12 * gc1 + dinv11 * gc2 + inv12 * lap1 + inv11 * lap2;

    const double temp = std::isinf(beta) ? 0.0 : 1.0 / beta;
    return {inv11 * dv1 + inv12 * dv2 - temp * div1, inv12 * dv1 + inv11 * dv2 - temp * div2};
  }

private:
  struct Geometry {
    Vec2 ea, eb; // unit vectors q1->q0 and q1->q2
    double ra = 0.0, rb = 0.0;
  };

  Geometry geometry(const ParticleConfiguration &c) const {
    if (c.size() < 3) throw DomainError("trimer coordinate needs at least three particles");
    const Vec2 a = separation(c.positions[1], c.positions[0], c.box_length);
    const Vec2 b = separation(c.positions[1], c.positions[2], c.box_length);
    Geometry g;
    g.ra = norm(a);
    g.rb = norm(b);
    if (!(g.ra >= kCoincidentDistance) || !(g.rb >= kCoincidentDistance))
      throw DomainError("zero trimer bond length");
    g.ea = a * (1.0 / g.ra);
    g.eb = b * (1.0 / g.rb);
    return g;
  }

  double d0_;
  double omega_;
};

} // namespace pabf

#endif // PABF_REACTION_COORDINATE_HPP
