#include "spunsplit/rational.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace spunsplit {
namespace {

bool is_integer_literal(std::string_view text) {
  std::size_t pos = 0;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) pos = 1;
  if (pos == text.size()) return false;
  for (; pos < text.size(); ++pos) {
    if (!std::isdigit(static_cast<unsigned char>(text[pos]))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view text) {
  if (!is_integer_literal(text)) {
    throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
  }
  std::string digits(text);
  if (digits[0] == '+') digits.erase(0, 1);
  return mpz_class(digits, 10);
}

}  // namespace

Rational::Rational(long numerator, long denominator)
    : Rational(mpz_class(numerator), mpz_class(denominator)) {}

Rational::Rational(const mpz_class& numerator, const mpz_class& denominator) {
  if (denominator == 0) throw std::invalid_argument("zero denominator");
  value_ = mpq_class(numerator, denominator);
  value_.canonicalize();
}

Rational::Rational(mpq_class value) : value_(std::move(value)) {
  if (value_.get_den() == 0) throw std::invalid_argument("zero denominator");
  value_.canonicalize();
}

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text));
  const std::string_view den = text.substr(slash + 1);
  if (!den.empty() && (den[0] == '-' || den[0] == '+')) {
    throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
  }
  return Rational(parse_integer(text.substr(0, slash)), parse_integer(den));
}

mpz_class Rational::floor() const {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), value_.get_num_mpz_t(), value_.get_den_mpz_t());
  return q;
}

mpz_class Rational::ceil() const {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), value_.get_num_mpz_t(), value_.get_den_mpz_t());
  return q;
}

std::string Rational::str() const {
  if (is_integer()) return value_.get_num().get_str();
  return value_.get_num().get_str() + "/" + value_.get_den().get_str();
}

Rational& Rational::operator+=(const Rational& other) {
  value_ += other.value_;
  return *this;
}

Rational& Rational::operator-=(const Rational& other) {
  value_ -= other.value_;
  return *this;
}

Rational& Rational::operator*=(const Rational& other) {
  value_ *= other.value_;
  return *this;
}

Rational& Rational::operator/=(const Rational& other) {
  if (other.is_zero()) throw std::domain_error("division by zero");
  value_ /= other.value_;
  return *this;
}

Rational positive_part(const Rational& z) { return z.is_positive() ? z : Rational(0); }

Rational second_max(std::span<const Rational> values) {
  if (values.size() < 2) throw std::invalid_argument("second_max needs at least two values");
  std::vector<Rational> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[sorted.size() - 2];
}

Rational second_max(std::initializer_list<Rational> values) {
  return second_max(std::span<const Rational>(values.begin(), values.size()));
}

Rational min_of(std::initializer_list<Rational> values) { return std::min(values); }

Rational max_of(std::initializer_list<Rational> values) { return std::max(values); }

Rational sum_of(std::span<const Rational> values) {
  Rational total;
  for (const auto& v : values) total += v;
  return total;
}

}  // namespace spunsplit
