#pragma once

// Seeded generation of ratio-constrained semiprime corpora: pairs (N = p*q,
// label) where the label records whether p/q falls inside a target ratio
// interval, with negatives drawn from a surrounding band.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "factorml/numtheory.hpp"
#include "factorml/prng.hpp"

namespace factorml {

struct RatioInterval {
  Rational lo{1};
  Rational hi{2};
};

inline void validate_interval(const RatioInterval& iv) {
  if (iv.lo < 1) throw std::invalid_argument("ratio interval: lo must be >= 1");
  if (!(iv.lo < iv.hi)) throw std::invalid_argument("ratio interval: degenerate (lo >= hi)");
}

struct SemiprimeSample {
  BigInt n;
  int label = 0;  // 1 iff min_ratio < p/q < max_ratio
  std::optional<BigInt> p;
  std::optional<BigInt> q;

  bool operator==(const SemiprimeSample& other) const {
    return n == other.n && label == other.label && p == other.p && q == other.q;
  }
};

struct Dataset {
  std::vector<SemiprimeSample> samples;
  int n_bits = 0;
  RatioInterval interval;     // core labelling interval
  Rational delta_scale{1, 2};
  std::uint64_t seed = 0;
};

struct PrimePair {
  BigInt n, p, q;  // n = p*q, p >= q
};

namespace detail {

// Bit position k with 2^(k-1) <= r < 2^k, exact for rational r >= 1.
inline int ratio_bit_length(const Rational& r) {
  return bit_length(numerator(r) / denominator(r));
}

}  // namespace detail

/// Draw a random prime pair whose ratio p/q lies in `interval` before
/// prime-rounding and whose product has exactly n_bits bits. The draw is a
/// rejection loop: ratio r = lo + (hi-lo)*(rn/rd) from two 64-bit draws,
/// q0 uniform in a dyadic window sized from r, p0 = floor(r*q0), both
/// rounded up to the next prime, retried until bitlen(p*q) == n_bits.
inline PrimePair random_prime_pair(int n_bits, const RatioInterval& interval, Prng& rng) {
  if (n_bits < 16) throw std::invalid_argument("random_prime_pair: n_bits must be >= 16");
  validate_interval(interval);

  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::uint64_t rn = rng.uniform_int(std::uint64_t{0}, std::numeric_limits<std::uint64_t>::max());
    std::uint64_t rd = rng.uniform_int(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max());
    if (rn > rd) std::swap(rn, rd);
    const Rational rq(BigInt(rn), BigInt(rd));  // in [0, 1]
    const Rational r = interval.lo + (interval.hi - interval.lo) * rq;

    const int r_nbits = detail::ratio_bit_length(r);
    const int shift = n_bits / 2 - r_nbits / 2;
    if (shift < 1) throw std::invalid_argument("random_prime_pair: interval too wide for n_bits");
    const BigInt rmin = BigInt(1) << (shift - 1);
    const BigInt rmax = BigInt(1) << shift;

    const BigInt q0 = rng.uniform_int(rmin, rmax);
    const BigInt p0 = numerator(r) * q0 / denominator(r);

    BigInt p = next_prime(p0);
    BigInt q = next_prime(q0);
    const BigInt n = p * q;
    if (bit_length(n) != n_bits) continue;
    if (p < q) std::swap(p, q);
    return {n, p, q};
  }
  throw std::runtime_error("random_prime_pair: could not hit requested bit length");
}

namespace detail {

struct GenQuota {
  std::size_t inside = 0;
  std::size_t outside = 0;
};

// Fills exact per-class quotas; duplicates of N are discarded before counting.
inline void generate_block(int n_bits, const Rational& min_ratio, const Rational& max_ratio,
                           const RatioInterval& extended, GenQuota quota, Prng& rng,
                           std::set<BigInt>& seen, std::vector<SemiprimeSample>& out) {
  std::size_t n_inside = 0, n_outside = 0;
  const std::size_t want = quota.inside + quota.outside;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 200 * want + 10000;
  while (n_inside < quota.inside || n_outside < quota.outside) {
    if (++attempts > max_attempts) {
      throw std::runtime_error("generate_training_semiprimes: sample space exhausted");
    }
    const PrimePair pair = random_prime_pair(n_bits, extended, rng);
    if (seen.count(pair.n)) continue;
    const Rational ratio(pair.p, pair.q);
    const bool core = min_ratio < ratio && ratio < max_ratio;
    const bool band = extended.lo < ratio && ratio < extended.hi;
    if (core && n_inside < quota.inside) {
      seen.insert(pair.n);
      out.push_back({pair.n, 1, pair.p, pair.q});
      ++n_inside;
    } else if (!core && band && n_outside < quota.outside) {
      seen.insert(pair.n);
      out.push_back({pair.n, 0, pair.p, pair.q});
      ++n_outside;
    }
  }
}

inline RatioInterval extended_interval(const Rational& min_ratio, const Rational& max_ratio,
                                       const Rational& scale) {
  if (min_ratio < 1 || !(min_ratio < max_ratio)) {
    throw std::invalid_argument("generate_training_semiprimes: need 1 <= min_ratio < max_ratio");
  }
  const Rational diff = (max_ratio - min_ratio) * scale;
  RatioInterval ext{std::max(Rational(1), min_ratio - diff),
                    std::max(Rational(1), max_ratio + diff)};
  if (!(ext.lo < ext.hi)) {
    throw std::invalid_argument("generate_training_semiprimes: degenerate extended interval");
  }
  return ext;
}

}  // namespace detail

/// Balanced labelled corpus: positives with min_ratio < p/q < max_ratio,
/// negatives inside the extended band but outside the core interval.
/// Positives get the ceil share when n_samples is odd. Output order is
/// shuffled by `rng`; identical (arguments, seed) replay byte-identically.
inline Dataset generate_training_semiprimes(int n_bits, const Rational& min_ratio,
                                            const Rational& max_ratio,
                                            const Rational& ratio_diff_scale,
                                            std::size_t n_samples, Prng& rng) {
  const RatioInterval extended = detail::extended_interval(min_ratio, max_ratio, ratio_diff_scale);
  detail::GenQuota quota{(n_samples + 1) / 2, n_samples / 2};

  Dataset ds;
  ds.n_bits = n_bits;
  ds.interval = {min_ratio, max_ratio};
  ds.delta_scale = ratio_diff_scale;
  ds.seed = rng.seed();

  std::set<BigInt> seen;
  detail::generate_block(n_bits, min_ratio, max_ratio, extended, quota, rng, seen, ds.samples);
  rng.shuffle(ds.samples);
  return ds;
}

/// Worker-parallel variant: worker i runs with Prng(seed + i) on an exact
/// quota share, outputs are concatenated in worker order, deduplicated
/// across workers (worker 0's generator tops up any losses) and shuffled by
/// worker 0's generator. Deterministic for fixed (arguments, seed, workers).
inline Dataset generate_training_semiprimes_parallel(int n_bits, const Rational& min_ratio,
                                                     const Rational& max_ratio,
                                                     const Rational& ratio_diff_scale,
                                                     std::size_t n_samples, std::uint64_t seed,
                                                     int workers) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (workers == 1) {
    Prng rng(seed);
    return generate_training_semiprimes(n_bits, min_ratio, max_ratio, ratio_diff_scale,
                                        n_samples, rng);
  }

  const RatioInterval extended = detail::extended_interval(min_ratio, max_ratio, ratio_diff_scale);
  const std::size_t total_inside = (n_samples + 1) / 2;
  const std::size_t total_outside = n_samples / 2;

  const auto w = static_cast<std::size_t>(workers);
  std::vector<Prng> rngs;
  rngs.reserve(w);
  for (std::size_t i = 0; i < w; ++i) rngs.emplace_back(seed + i);

  std::vector<std::vector<SemiprimeSample>> blocks(w);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(w);
  for (std::size_t i = 0; i < w; ++i) {
    detail::GenQuota quota{total_inside / w + (i < total_inside % w ? 1 : 0),
                           total_outside / w + (i < total_outside % w ? 1 : 0)};
    threads.emplace_back([&, i, quota] {
      try {
        std::set<BigInt> local_seen;
        detail::generate_block(n_bits, min_ratio, max_ratio, extended, quota, rngs[i],
                               local_seen, blocks[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  Dataset ds;
  ds.n_bits = n_bits;
  ds.interval = {min_ratio, max_ratio};
  ds.delta_scale = ratio_diff_scale;
  ds.seed = seed;

  std::set<BigInt> seen;
  std::size_t n_inside = 0, n_outside = 0;
  for (const auto& block : blocks) {
    for (const auto& sample : block) {
      if (!seen.insert(sample.n).second) continue;  // cross-worker duplicate
      ds.samples.push_back(sample);
      (sample.label == 1 ? n_inside : n_outside) += 1;
    }
  }
  if (n_inside < total_inside || n_outside < total_outside) {
    detail::GenQuota deficit{total_inside - n_inside, total_outside - n_outside};
    detail::generate_block(n_bits, min_ratio, max_ratio, extended, deficit, rngs[0], seen,
                           ds.samples);
  }
  rngs[0].shuffle(ds.samples);
  return ds;
}

// --- corpus file format -----------------------------------------------------
//
// CSV, UTF-8, header "n,label,p,q"; n/p/q as decimal strings, label 0/1;
// p and q columns empty when ground truth is withheld. A JSON sidecar
// records the generation parameters.

inline void write_dataset_csv(const Dataset& ds, const std::string& path,
                              bool include_ground_truth = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "n,label,p,q\n";
  for (const auto& s : ds.samples) {
    out << s.n.str() << ',' << s.label << ',';
    if (include_ground_truth && s.p) out << s.p->str();
    out << ',';
    if (include_ground_truth && s.q) out << s.q->str();
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string metadata_path_for(const std::string& csv_path) {
  return csv_path + ".meta.json";
}

inline void write_dataset_meta(const Dataset& ds, const std::string& path, int workers = 1) {
  nlohmann::json meta{
      {"format_version", 1},
      {"n_bits", ds.n_bits},
      {"ratio_min", format_rational(ds.interval.lo)},
      {"ratio_max", format_rational(ds.interval.hi)},
      {"delta_scale", format_rational(ds.delta_scale)},
      {"seed", ds.seed},
      {"workers", workers},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << meta.dump(2) << '\n';
}

inline Dataset read_dataset_csv(const std::string& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus: " + csv_path);
  std::string line;
  if (!std::getline(in, line) || line != "n,label,p,q") {
    throw std::runtime_error("corpus header mismatch in " + csv_path);
  }
  Dataset ds;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string n_str, label_str, p_str, q_str;
    std::getline(row, n_str, ',');
    std::getline(row, label_str, ',');
    std::getline(row, p_str, ',');
    std::getline(row, q_str, ',');
    SemiprimeSample s;
    s.n = BigInt(n_str);
    if (label_str != "0" && label_str != "1") {
      throw std::runtime_error("corpus label must be 0 or 1 in " + csv_path);
    }
    s.label = label_str == "1" ? 1 : 0;
    if (!p_str.empty()) s.p = BigInt(p_str);
    if (!q_str.empty()) s.q = BigInt(q_str);
    ds.samples.push_back(std::move(s));
  }
  if (!ds.samples.empty()) ds.n_bits = bit_length(ds.samples.front().n);

  std::ifstream meta_in(metadata_path_for(csv_path), std::ios::binary);
  if (meta_in) {
    const auto meta = nlohmann::json::parse(meta_in);
    ds.n_bits = meta.at("n_bits").get<int>();
    ds.interval.lo = parse_rational(meta.at("ratio_min").get<std::string>());
    ds.interval.hi = parse_rational(meta.at("ratio_max").get<std::string>());
    ds.delta_scale = parse_rational(meta.at("delta_scale").get<std::string>());
    ds.seed = meta.at("seed").get<std::uint64_t>();
  }
  return ds;
}

}  // namespace factorml
