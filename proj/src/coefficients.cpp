#include "spunsplit/coefficients.hpp"

#include <algorithm>
#include <stdexcept>

namespace spunsplit {
namespace {

void require_unit_interval(const Rational& z, bool closed, const char* name) {
  const Rational one(1);
  if (z.is_negative() || z > one || (!closed && z == one)) {
    throw std::invalid_argument(std::string("share ") + name + " = " + z.str() +
                                (closed ? " outside [0,1]" : " outside [0,1)"));
  }
}

int count_nonzero(const auto& values) {
  return static_cast<int>(
      std::count_if(values.begin(), values.end(), [](const Rational& v) { return !v.is_zero(); }));
}

}  // namespace

Rational MuVector::sum() const { return values[0] + values[1] + values[2] + values[3]; }

int MuVector::nonzero_count() const { return count_nonzero(values); }

Rational LambdaVector::sum() const { return sum_of(values); }

int LambdaVector::nonzero_count() const { return count_nonzero(values); }

MuVector mu_coefficients_unchecked(const Rational& z_p, const Rational& z_q) {
  require_unit_interval(z_p, true, "z_p");
  require_unit_interval(z_q, true, "z_q");
  const Rational one(1);
  const Rational not_q = one - z_q;
  return MuVector{{positive_part(not_q - z_p), min_of({z_p, not_q}), one - max_of({z_p, not_q}),
                   positive_part(z_p - not_q)}};
}

MuVector mu_coefficients(const Rational& z_p, const Rational& z_q) {
  require_unit_interval(z_p, false, "z_p");
  require_unit_interval(z_q, false, "z_q");
  return mu_coefficients_unchecked(z_p, z_q);
}

LambdaVector lambda_coefficients(const Rational& z_p, const Rational& z_r, const Rational& z_q) {
  require_unit_interval(z_p, true, "z_p");
  require_unit_interval(z_r, true, "z_r");
  require_unit_interval(z_q, true, "z_q");
  const Rational one(1);
  const Rational not_q = one - z_q;
  const Rational m = second_max({z_p, z_r, not_q});
  return LambdaVector{{
      positive_part(not_q - m),
      positive_part(m - z_p),
      positive_part(m - z_r),
      min_of({z_p, z_r, not_q}),
      one - max_of({z_p, z_r, not_q}),
      positive_part(z_r - m),
      positive_part(z_p - m),
      positive_part(m - not_q),
  }};
}

LambdaVector lambda_coefficients_p_eq_r(const Rational& z_p, const Rational& z_r,
                                        const Rational& z_q) {
  require_unit_interval(z_p, true, "z_p");
  require_unit_interval(z_r, true, "z_r");
  require_unit_interval(z_q, true, "z_q");
  if (z_r > z_p) {
    throw std::invalid_argument("split share " + z_r.str() + " exceeds parent share " + z_p.str());
  }
  const Rational one(1);
  const Rational not_q = one - z_q;
  const Rational m = second_max({z_p, z_r, not_q});
  return LambdaVector{{
      positive_part(not_q - z_p),
      m - z_r,
      min_of({z_r, not_q}),
      one - max_of({z_p, not_q}),
      z_p - m,
      positive_part(z_r - not_q),
  }};
}

}  // namespace spunsplit
