#pragma once

// Arbitrary-precision integer/rational primitives: floor square root,
// perfect-square testing, gcd, probabilistic primality, next-prime and
// continued-fraction rational approximation.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace factorml {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Number of bits in n (0 for n == 0). n must be non-negative.
inline int bit_length(const BigInt& n) {
  if (n < 0) throw std::domain_error("bit_length: negative input");
  if (n == 0) return 0;
  return static_cast<int>(boost::multiprecision::msb(n)) + 1;
}

/// Floor integer square root: r with r^2 <= n < (r+1)^2.
inline BigInt isqrt(const BigInt& n) {
  if (n < 0) throw std::domain_error("isqrt: negative input");
  return boost::multiprecision::sqrt(n);
}

namespace detail {

// Quadratic-residue bitmasks used to reject non-squares before isqrt.
inline bool square_residue_ok(const BigInt& n) {
  static const std::uint64_t mask64 = [] {
    std::uint64_t m = 0;
    for (unsigned i = 0; i < 64; ++i) m |= std::uint64_t{1} << (i * i % 64);
    return m;
  }();
  static const auto table = [] {
    struct Tables {
      std::array<bool, 63> m63{};
      std::array<bool, 65> m65{};
      std::array<bool, 11> m11{};
    } t;
    for (unsigned i = 0; i < 63; ++i) t.m63[i * i % 63] = true;
    for (unsigned i = 0; i < 65; ++i) t.m65[i * i % 65] = true;
    for (unsigned i = 0; i < 11; ++i) t.m11[i * i % 11] = true;
    return t;
  }();

  const auto low = static_cast<unsigned>(n & 63);
  if (!(mask64 >> low & 1)) return false;
  // One bignum division covers the three small moduli (63*65*11 = 45045).
  const auto r = static_cast<unsigned>(n % 45045);
  return table.m63[r % 63] && table.m65[r % 65] && table.m11[r % 11];
}

}  // namespace detail

/// True iff n >= 0 and isqrt(n)^2 == n. Negative inputs are never squares.
inline bool is_square(const BigInt& n) {
  if (n < 0) return false;
  if (!detail::square_residue_ok(n)) return false;
  const BigInt r = boost::multiprecision::sqrt(n);
  return r * r == n;
}

inline BigInt gcd(const BigInt& a, const BigInt& b) {
  return boost::multiprecision::gcd(a, b);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<__uint128_t>(a) * b % m);
}

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mulmod_u64(result, base, m);
    base = mulmod_u64(base, base, m);
    exp >>= 1;
  }
  return result;
}

inline const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = [] {
    std::vector<std::uint32_t> out;
    std::array<bool, 1024> sieve{};
    for (std::uint32_t i = 2; i < sieve.size(); ++i) {
      if (sieve[i]) continue;
      out.push_back(i);
      for (std::uint32_t j = i * i; j < sieve.size(); j += i) sieve[j] = true;
    }
    return out;
  }();
  return primes;
}

// Deterministic for all n < 2^64 with the 12-witness set.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint32_t p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u,
                          41u, 43u, 47u, 53u, 59u, 61u}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;
  for (std::uint64_t w : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                          23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod_u64(w % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Witnesses derived from n itself so the test is a pure function.
inline bool miller_rabin_big(const BigInt& n, int rounds) {
  const BigInt n_minus_1 = n - 1;
  BigInt d = n_minus_1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;

  std::uint64_t seed = 0xD6E8FEB86659FD93ull;
  std::vector<std::uint64_t> limbs;
  boost::multiprecision::export_bits(n, std::back_inserter(limbs), 64);
  for (std::uint64_t limb : limbs) {
    seed ^= limb;
    splitmix64(seed);
  }

  const BigInt span = n - 3;  // witnesses in [2, n-2]
  const int span_bits = bit_length(span);
  for (int round = 0; round < rounds; ++round) {
    BigInt w = 0;
    for (int got = 0; got < span_bits; got += 64) {
      w <<= 64;
      w |= splitmix64(seed);
    }
    w = 2 + w % span;  // in [2, n-2]
    BigInt x = boost::multiprecision::powm(w, d, n);
    if (x == 1 || x == n_minus_1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = x * x % n;
      if (x == n_minus_1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace detail

/// Probabilistic primality test. Exact (deterministic witness set) below
/// 2^64; Miller-Rabin with `rounds` derived witnesses above, false-positive
/// probability <= 4^-rounds.
inline bool is_probable_prime(const BigInt& n, int rounds = 40) {
  if (rounds < 1) throw std::invalid_argument("is_probable_prime: rounds must be >= 1");
  if (n < 2) return false;
  if (n <= std::numeric_limits<std::uint64_t>::max()) {
    return detail::is_prime_u64(static_cast<std::uint64_t>(n));
  }
  for (std::uint32_t p : detail::small_primes()) {
    if (n % p == 0) return false;  // n > 2^64, so n != p
  }
  return detail::miller_rabin_big(n, rounds);
}

/// Smallest probable prime strictly greater than n.
inline BigInt next_prime(const BigInt& n) {
  if (n < 2) return 2;
  // Max prime gap below 2^64 is < 1600; stay in the u64 fast path when the
  // scan cannot overflow.
  if (n <= std::numeric_limits<std::uint64_t>::max() - 4000) {
    std::uint64_t c = static_cast<std::uint64_t>(n) + 1;
    if (c % 2 == 0 && c != 2) ++c;
    while (!detail::is_prime_u64(c)) c += 2;
    return BigInt(c);
  }
  BigInt c = n + 1;
  if (c % 2 == 0) ++c;
  while (!is_probable_prime(c)) c += 2;
  return c;
}

/// Smallest-denominator rational within the double-precision representation
/// tolerance of x (relative 2^-53), chosen by continued-fraction convergents.
inline Rational rational_from_real(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_real: non-finite input");
  if (x == 0.0) return Rational(0);
  const bool negative = x < 0;
  const double ax = negative ? -x : x;

  int exp2 = 0;
  const double mant = std::frexp(ax, &exp2);  // ax = mant * 2^exp2, mant in [0.5, 1)
  const auto mant_int = static_cast<std::int64_t>(std::ldexp(mant, 53));
  Rational exact(mant_int);
  exp2 -= 53;
  if (exp2 > 0) {
    exact *= Rational(BigInt(1) << exp2);
  } else if (exp2 < 0) {
    exact /= Rational(BigInt(1) << -exp2);
  }

  const Rational tol = exact / (BigInt(1) << 53);

  // Continued-fraction walk over the exact dyadic value.
  Rational remainder = exact;
  BigInt h_prev = 1, k_prev = 0;
  BigInt h = numerator(exact) / denominator(exact), k = 1;
  Rational conv(h, k);
  while (boost::multiprecision::abs(conv - exact) > tol) {
    remainder = 1 / (remainder - Rational(numerator(remainder) / denominator(remainder)));
    const BigInt a = numerator(remainder) / denominator(remainder);
    const BigInt h_next = a * h + h_prev;
    const BigInt k_next = a * k + k_prev;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
    conv = Rational(h, k);
  }
  return negative ? -conv : conv;
}

namespace detail {

struct ConvergentWalk {
  // Convergents h/k of a non-negative rational, last entry equals the input.
  std::vector<BigInt> h, k;
};

inline ConvergentWalk convergents_of(const Rational& r) {
  ConvergentWalk walk;
  BigInt num = numerator(r), den = denominator(r);
  BigInt h_prev = 1, k_prev = 0, h = 0, k = 1;  // seeded so first step lands on a0/1
  bool first = true;
  while (den != 0) {
    const BigInt a = num / den;
    const BigInt rem = num % den;
    if (first) {
      h = a;
      k = 1;
      first = false;
    } else {
      const BigInt h_next = a * h + h_prev;
      const BigInt k_next = a * k + k_prev;
      h_prev = h;
      k_prev = k;
      h = h_next;
      k = k_next;
    }
    walk.h.push_back(h);
    walk.k.push_back(k);
    num = den;
    den = rem;
  }
  return walk;
}

}  // namespace detail

/// Best rational approximation of r with denominator <= max_den
/// (continued-fraction convergent or final semiconvergent).
inline Rational bounded_denominator_approx(const Rational& r, const BigInt& max_den) {
  if (r < 0) throw std::domain_error("bounded_denominator_approx: negative input");
  if (max_den < 1) throw std::invalid_argument("bounded_denominator_approx: max_den must be >= 1");
  if (denominator(r) <= max_den) return r;

  const auto walk = detail::convergents_of(r);
  std::size_t last = 0;
  while (last + 1 < walk.k.size() && walk.k[last + 1] <= max_den) ++last;

  const Rational conv(walk.h[last], walk.k[last]);
  // Semiconvergent between the last in-bound convergent and its predecessor.
  BigInt h_prev = 1, k_prev = 0;
  if (last >= 1) {
    h_prev = walk.h[last - 1];
    k_prev = walk.k[last - 1];
  }
  const BigInt t = (max_den - k_prev) / walk.k[last];
  if (t >= 1) {
    const Rational semi(h_prev + t * walk.h[last], k_prev + t * walk.k[last]);
    if (boost::multiprecision::abs(semi - r) < boost::multiprecision::abs(conv - r)) return semi;
  }
  return conv;
}

/// Closest fraction to r with odd numerator and odd denominator, drawn from
/// the Stern-Brocot neighbor runs of r. Identity when r is already odd/odd.
/// Result denominator <= 3*den(r); error <= 1/den(r)^2 for den(r) > 1.
inline Rational nearest_odd_odd(const Rational& r) {
  if (r <= 0) throw std::domain_error("nearest_odd_odd: input must be positive");
  const BigInt u = numerator(r), v = denominator(r);
  if ((u & 1) != 0 && (v & 1) != 0) return r;

  const auto walk = detail::convergents_of(r);
  BigInt pp = 1, qq = 0;  // previous convergent (1/0 when r is an integer)
  if (walk.h.size() >= 2) {
    pp = walk.h[walk.h.size() - 2];
    qq = walk.k[walk.k.size() - 2];
  }

  Rational best;
  bool have_best = false;
  auto consider = [&](const BigInt& num, const BigInt& den) {
    if (den <= 0) return;
    if ((num & 1) == 0 || (den & 1) == 0) return;
    const Rational cand(num, den);
    if (!have_best) {
      best = cand;
      have_best = true;
      return;
    }
    const Rational d_new = boost::multiprecision::abs(cand - r);
    const Rational d_old = boost::multiprecision::abs(best - r);
    if (d_new < d_old ||
        (d_new == d_old && (denominator(cand) < denominator(best) ||
                            (denominator(cand) == denominator(best) &&
                             numerator(cand) < numerator(best))))) {
      best = cand;
    }
  };

  // Runs from both Stern-Brocot neighbors of r; at least one member of each
  // {j=1, j=2} pair has odd numerator and denominator (and |cross| = 1 keeps
  // every candidate in lowest terms).
  for (int j = 1; j <= 2; ++j) {
    consider(pp + j * u, qq + j * v);
    consider((u - pp) + j * u, (v - qq) + j * v);
  }
  if (!have_best) throw std::logic_error("nearest_odd_odd: no candidate found");
  return best;
}

/// Parse "num/den", a decimal integer, or a real literal ("1.5") into an
/// exact rational (reals go through rational_from_real).
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_rational: empty string");
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const BigInt num(text.substr(0, slash));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
    return Rational(num, den);
  }
  if (text.find('.') != std::string::npos || text.find('e') != std::string::npos ||
      text.find('E') != std::string::npos) {
    return rational_from_real(std::stod(text));
  }
  return Rational(BigInt(text));
}

inline std::string format_rational(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace factorml
