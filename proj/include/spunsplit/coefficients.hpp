#pragma once

#include <array>
#include <vector>

#include "spunsplit/rational.hpp"

namespace spunsplit {

// Weights of the routing options J1..J4 = {}, {p}, {q}, {p,q}.
struct MuVector {
  std::array<Rational, 4> values;

  const Rational& operator[](int j) const { return values.at(j); }
  Rational sum() const;
  int nonzero_count() const;
};

// Rows of the parallel combination table. Eight entries in the general case,
// six when the split commodity is p.
struct LambdaVector {
  std::vector<Rational> values;

  const Rational& operator[](int j) const { return values.at(j); }
  std::size_t size() const { return values.size(); }
  Rational sum() const;
  int nonzero_count() const;
};

// Shares must lie in [0,1); throws std::invalid_argument otherwise.
MuVector mu_coefficients(const Rational& z_p, const Rational& z_q);
// Same formulas on the closed interval [0,1].
MuVector mu_coefficients_unchecked(const Rational& z_p, const Rational& z_q);

// z_r is the share of the split commodity in the second child.
LambdaVector lambda_coefficients(const Rational& z_p, const Rational& z_r, const Rational& z_q);

// Split commodity equals p; z_r is its share in the child that also carries q,
// so z_r <= z_p.
LambdaVector lambda_coefficients_p_eq_r(const Rational& z_p, const Rational& z_r,
                                        const Rational& z_q);

}  // namespace spunsplit
