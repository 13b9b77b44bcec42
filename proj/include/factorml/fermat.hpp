#pragma once

// Difference-of-squares factorisation and its ratio-scaled extension:
// when u/v approximates p/q, factor u*v*n and recover a factor of n by gcd.

#include <cstdint>
#include <stdexcept>

#include "factorml/numtheory.hpp"

namespace factorml {

inline constexpr std::uint64_t kDefaultFermatMaxIter = 65536;
inline constexpr std::uint64_t kDefaultLawrenceMaxIter = 100000;

struct FermatResult {
  BigInt factor = 1;
  std::uint64_t iterations = 0;  // increments of a; the probe at isqrt(n) is iteration 0
  bool succeeded = false;
};

/// Factor odd n >= 3 by scanning a = isqrt(n), isqrt(n)+1, ... until
/// a^2 - n is a perfect square b^2; then n = (a-b)(a+b). Gives up (factor 1,
/// iterations = max_iter + 1) once max_iter increments are exhausted.
inline FermatResult factor_fermat(const BigInt& n, std::uint64_t max_iter = kDefaultFermatMaxIter) {
  if (n < 3) throw std::domain_error("factor_fermat: domain");
  if ((n & 1) == 0) throw std::domain_error("factor_fermat: even input");

  const BigInt a0 = isqrt(n);
  BigInt b = a0 * a0 - n;
  BigInt step = (a0 << 1) + 1;  // (a+1)^2 - n == b + 2a + 1
  std::uint64_t n_iter = 0;
  while (!is_square(b)) {
    b += step;
    step += 2;
    ++n_iter;
    if (n_iter > max_iter) return {BigInt(1), n_iter, false};
  }
  const BigInt a = a0 + n_iter;
  return {a - isqrt(b), n_iter, true};
}

/// Run factor_fermat on u*v*n for ratio u/v and map the result back through
/// gcd. A gcd of 1 or n is a failure, not an error. If u*v*n would be even
/// the ratio is nudged to the nearest odd/odd neighbor fraction first.
inline FermatResult factor_lawrence(const BigInt& n, const Rational& ratio,
                                    std::uint64_t max_iter = kDefaultLawrenceMaxIter) {
  if (n < 3) throw std::domain_error("factor_lawrence: domain");
  if ((n & 1) == 0) throw std::domain_error("factor_lawrence: even input");
  if (ratio <= 0) throw std::domain_error("factor_lawrence: ratio must be positive");

  Rational uv = ratio;
  if ((numerator(uv) & 1) == 0 || (denominator(uv) & 1) == 0) {
    uv = nearest_odd_odd(uv);
  }
  const BigInt scaled = numerator(uv) * denominator(uv) * n;
  const FermatResult inner = factor_fermat(scaled, max_iter);
  if (!inner.succeeded) return {BigInt(1), inner.iterations, false};

  const BigInt g = gcd(inner.factor, n);
  if (g <= 1 || g >= n) return {BigInt(1), inner.iterations, false};
  return {g, inner.iterations, true};
}

}  // namespace factorml
