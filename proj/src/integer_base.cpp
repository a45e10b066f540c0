#include "hgl/integer_base.hpp"

#include <stdexcept>

namespace hgl {

namespace {

bool is_zero(const RationalVector& v) {
  for (const auto& x : v)
    if (!x.is_zero()) return false;
  return true;
}

// Clears denominators and divides by the content; keeps the direction.
LatticeVector to_primitive(const RationalVector& v) {
  std::int64_t l = 1;
  for (const auto& x : v) l = lcm64(l, x.den());
  LatticeVector out(static_cast<int>(v.size()));
  std::int64_t g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Rational scaled = v[i] * Rational(l);
    if (!scaled.is_integer()) throw std::logic_error("to_primitive: scaling failed");
    out[static_cast<int>(i)] = scaled.num();
    g = gcd64(g, scaled.num());
  }
  if (g > 1)
    for (int i = 0; i < out.size(); ++i) out[i] /= g;
  return out;
}

}  // namespace

IntegerBase build_integer_base(const RationalVector& omega) {
  if (omega.empty() || omega.size() % 2 != 0)
    throw std::invalid_argument("build_integer_base: omega must have even positive length");
  if (is_zero(omega)) throw std::invalid_argument("build_integer_base: omega is zero");

  const int dz = static_cast<int>(omega.size());
  const int n = dz / 2;

  // Rational orthogonal base (omega, v^1..v^{2n-1}): Gram-Schmidt with
  // coordinate seeds in index order.
  std::vector<RationalVector> basis;
  basis.push_back(omega);
  for (int seed = 0; seed < dz && static_cast<int>(basis.size()) < dz; ++seed) {
    RationalVector v(dz, Rational(0));
    v[seed] = Rational(1);
    for (const auto& b : basis) {
      const Rational coef = dot(v, b) / dot(b, b);
      for (int i = 0; i < dz; ++i) v[i] -= coef * b[i];
    }
    if (!is_zero(v)) basis.push_back(v);
  }
  if (static_cast<int>(basis.size()) != dz)
    throw std::logic_error("build_integer_base: Gram-Schmidt did not complete");

  IntegerBase base;
  base.n = n;
  base.omega = omega;
  base.k.resize(dz);
  for (int j = 1; j < dz; ++j) base.k[j - 1] = to_primitive(basis[j]);
  base.k[dz - 1] = to_primitive(omega);

  // q_den from the parallel vector; sign chosen along omega.
  {
    int pivot = 0;
    while (omega[pivot].is_zero()) ++pivot;
    Rational q = Rational(base.k[dz - 1][pivot]) / omega[pivot];
    if (q < Rational(0)) {
      base.k[dz - 1] = -base.k[dz - 1];
      q = -q;
    }
    if (!q.is_integer() || q.num() <= 0)
      throw std::logic_error("build_integer_base: parallel vector not an integer multiple");
    base.q_den = q.num();
  }

  if (n == 1) {
    // Two vectors only; orient the transverse one so Theta_21 > 0.
    if (theta_pairing(base.k[1], base.k[0]) < 0) base.k[0] = -base.k[0];
  } else {
    // Make the lexicographically first nonzero transverse pairing positive.
    bool found = false;
    for (int i = 0; i < dz - 1 && !found; ++i) {
      for (int j = i + 1; j < dz - 1 && !found; ++j) {
        const std::int64_t th = theta_pairing(base.k[i], base.k[j]);
        if (th != 0) {
          if (th < 0) std::swap(base.k[i], base.k[j]);
          found = true;
        }
      }
    }
    if (!found)
      throw std::logic_error("build_integer_base: no nonzero transverse pairing for n >= 2");
  }

  base.theta_pairings.resize(dz, dz);
  for (int i = 0; i < dz; ++i)
    for (int j = 0; j < dz; ++j)
      base.theta_pairings(i, j) = theta_pairing(base.k[i], base.k[j]);

  if (n == 1) {
    base.theta = 1;  // vertical periodicity imposed directly in this case
  } else {
    std::int64_t g = 0;
    for (int i = 0; i < dz - 1; ++i)
      for (int j = 0; j < dz - 1; ++j) g = gcd64(g, base.theta_pairings(i, j));
    if (g == 0)
      throw std::logic_error("build_integer_base: vanishing transverse pairings");
    base.theta = g;
  }

  validate_integer_base(base);
  return base;
}

void validate_integer_base(const IntegerBase& base) {
  const int dz = base.dim_z();
  if (static_cast<int>(base.omega.size()) != dz ||
      static_cast<int>(base.k.size()) != dz)
    throw std::logic_error("IntegerBase: inconsistent sizes");

  // Exact orthogonality of the transverse vectors against omega.
  for (int j = 0; j < dz - 1; ++j) {
    Rational s(0);
    for (int i = 0; i < dz; ++i) s += base.omega[i] * Rational(base.k[j][i]);
    if (!s.is_zero())
      throw std::logic_error("IntegerBase: k^" + std::to_string(j + 1) +
                             " not orthogonal to omega");
  }
  // Parallel vector.
  for (int i = 0; i < dz; ++i) {
    const Rational expect = base.omega[i] * Rational(base.q_den);
    if (expect != Rational(base.k[dz - 1][i]))
      throw std::logic_error("IntegerBase: k^{2n} is not q_den * omega");
  }
  // Antisymmetry of the pairing matrix.
  for (int i = 0; i < dz; ++i)
    for (int j = 0; j < dz; ++j)
      if (base.theta_pairings(i, j) != -base.theta_pairings(j, i))
        throw std::logic_error("IntegerBase: pairing matrix not antisymmetric");

  if (base.n == 1) {
    if (base.theta != 1) throw std::logic_error("IntegerBase: theta must be 1 for n=1");
  } else {
    bool some = false;
    for (int i = 0; i < dz - 1; ++i)
      for (int j = 0; j < dz - 1; ++j) {
        const std::int64_t th = base.theta_pairings(i, j);
        if (th != 0) {
          some = true;
          if (th % base.theta != 0)
            throw std::logic_error("IntegerBase: theta does not divide a pairing");
        }
      }
    if (!some) throw std::logic_error("IntegerBase: no transverse pairing for n >= 2");
  }
}

}  // namespace hgl
