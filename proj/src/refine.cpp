#include "spunsplit/refine.hpp"

#include <stdexcept>

namespace spunsplit {
namespace {

Rational checked_sum(std::span<const Rational> values, const char* side) {
  if (values.empty()) throw std::invalid_argument(std::string("empty ") + side + " list");
  Rational total;
  for (const auto& v : values) {
    if (v.is_negative()) throw std::invalid_argument(std::string("negative weight in ") + side);
    total += v;
  }
  return total;
}

}  // namespace

std::vector<RefinedPair> refine_convex(std::span<const Rational> a, std::span<const Rational> b) {
  const Rational sum_a = checked_sum(a, "first");
  const Rational sum_b = checked_sum(b, "second");
  if (sum_a != sum_b) {
    throw std::invalid_argument("weight sums differ: " + sum_a.str() + " vs " + sum_b.str());
  }
  std::vector<RefinedPair> out;
  std::size_t i = 0;
  std::size_t j = 0;
  Rational rest_a = a[0];
  Rational rest_b = b[0];
  while (i < a.size() && j < b.size()) {
    if (rest_a.is_zero()) {
      if (++i < a.size()) rest_a = a[i];
      continue;
    }
    if (rest_b.is_zero()) {
      if (++j < b.size()) rest_b = b[j];
      continue;
    }
    const Rational w = rest_a < rest_b ? rest_a : rest_b;
    out.push_back(RefinedPair{i, j, w});
    rest_a -= w;
    rest_b -= w;
  }
  return out;
}

std::vector<RefinedPair> refine_linear(std::span<const Rational> a, std::span<const Rational> b,
                                       const Rational& total) {
  if (!total.is_positive()) throw std::invalid_argument("target weight must be positive");
  const Rational sum_a = checked_sum(a, "first");
  const Rational sum_b = checked_sum(b, "second");
  if (sum_a.is_zero() || sum_b.is_zero()) {
    throw std::invalid_argument("zero-sum group with positive target weight");
  }
  std::vector<Rational> norm_a;
  std::vector<Rational> norm_b;
  for (const auto& v : a) norm_a.push_back(v / sum_a);
  for (const auto& v : b) norm_b.push_back(v / sum_b);
  auto pairs = refine_convex(norm_a, norm_b);
  for (auto& p : pairs) p.weight *= total;
  return pairs;
}

}  // namespace spunsplit
