#pragma once

// Rational-base digit expansion of big integers and assembly of the
// fixed-width feature matrices the classifier trains on.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "factorml/numtheory.hpp"
#include "factorml/semigen.hpp"

namespace factorml {

struct DigitVector {
  std::vector<std::uint32_t> digits;  // most significant first
  Rational base{2};
};

/// Digit expansion of n >= 0 under base num/den > 1: repeatedly emit
/// d = m mod num, m <- floor(m/num) * den. For den == 1 this is the
/// standard positional representation. rat_base(0, b) == [0].
inline DigitVector rat_base(const BigInt& n, const Rational& base) {
  if (base <= 1) throw std::invalid_argument("rat_base: base must be > 1");
  if (n < 0) throw std::invalid_argument("rat_base: n must be >= 0");
  const BigInt num = numerator(base);
  const BigInt den = denominator(base);
  if (num > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("rat_base: base numerator too large for digit type");
  }

  DigitVector dv;
  dv.base = base;
  if (n == 0) {
    dv.digits = {0};
    return dv;
  }
  BigInt m = n;
  while (m > 0) {
    dv.digits.push_back(static_cast<std::uint32_t>(m % num));
    m = m / num * den;
  }
  std::reverse(dv.digits.begin(), dv.digits.end());
  return dv;
}

/// Inverse of rat_base: m <- (m / den) * num + d over the digits, most
/// significant first. m must be divisible by den at every step.
inline BigInt reconstruct(const DigitVector& dv) {
  if (dv.base <= 1) throw std::invalid_argument("reconstruct: base must be > 1");
  const BigInt num = numerator(dv.base);
  const BigInt den = denominator(dv.base);
  BigInt m = 0;
  for (const std::uint32_t d : dv.digits) {
    if (d >= num) throw std::runtime_error("malformed digit vector: digit out of range");
    if (m % den != 0) throw std::runtime_error("malformed digit vector: divisibility violation");
    m = m / den * num + d;
  }
  return m;
}

inline std::vector<std::uint32_t> pad_left(const std::vector<std::uint32_t>& digits,
                                           std::size_t width) {
  if (digits.size() > width) throw std::invalid_argument("pad_left: digits longer than width");
  std::vector<std::uint32_t> out(width - digits.size(), 0);
  out.insert(out.end(), digits.begin(), digits.end());
  return out;
}

struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<float> values;  // row-major, rows x width
  std::vector<std::uint8_t> labels;

  float at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

/// One row per sample: the left-zero-padded digit expansion of n, as
/// single-precision reals. Width is the digit length of the corpus maximum.
/// Digits are kept raw unless `normalize` divides them by num(base)-1.
inline FeatureMatrix build_feature_matrix(const Dataset& ds, const Rational& base,
                                          bool normalize = false) {
  if (ds.samples.empty()) throw std::invalid_argument("build_feature_matrix: empty dataset");
  const BigInt* max_n = &ds.samples.front().n;
  for (const auto& s : ds.samples) {
    if (s.n > *max_n) max_n = &s.n;
  }
  const std::size_t width = rat_base(*max_n, base).digits.size();

  const double scale =
      normalize ? 1.0 / static_cast<double>(numerator(base) - 1) : 1.0;

  FeatureMatrix fm;
  fm.rows = ds.samples.size();
  fm.width = width;
  fm.values.resize(fm.rows * width);
  fm.labels.resize(fm.rows);
  for (std::size_t row = 0; row < fm.rows; ++row) {
    const auto padded = pad_left(rat_base(ds.samples[row].n, base).digits, width);
    for (std::size_t col = 0; col < width; ++col) {
      fm.values[row * width + col] = static_cast<float>(padded[col] * scale);
    }
    fm.labels[row] = static_cast<std::uint8_t>(ds.samples[row].label);
  }
  return fm;
}

}  // namespace factorml
