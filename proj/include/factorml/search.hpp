#pragma once

// Stochastic binary search over p/q ratio intervals: probe the interval
// midpoint with the ratio-scaled factoriser, otherwise train one classifier
// per half-interval and descend into the half the models vote for.

#include <cmath>
#include <cstdint>
#include <future>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "factorml/encode.hpp"
#include "factorml/fermat.hpp"
#include "factorml/neuralnet.hpp"
#include "factorml/numtheory.hpp"
#include "factorml/prng.hpp"
#include "factorml/semigen.hpp"

namespace factorml {

struct SearchConfig {
  RatioInterval initial_interval{Rational(1), Rational(2)};
  std::size_t n_train = 10000;        // corpus size per half-interval
  double p_min = 0.55;                // minimum out-of-sample accuracy
  std::uint64_t max_iter_lawrence = kDefaultLawrenceMaxIter;
  int max_depth = 0;                  // 0 = bit length of n
  BigInt max_den_lawrence = BigInt(1) << 64;
  Rational feature_base{2};
  Rational delta_scale{1, 2};
  TrainConfig train_cfg;
  std::uint64_t seed = 0;
  bool concurrent_training = false;   // train the two half-interval models in parallel
};

inline void validate_search_config(const SearchConfig& cfg) {
  validate_interval(cfg.initial_interval);
  if (cfg.p_min < 0.5 || cfg.p_min >= 1.0) {
    throw std::invalid_argument("search: p_min must be in [0.5, 1)");
  }
  if (cfg.max_depth < 0) throw std::invalid_argument("search: max_depth must be >= 0");
  if (cfg.max_den_lawrence < 1) throw std::invalid_argument("search: max_den_lawrence must be >= 1");
}

enum class StepDecision { DescendLower, DescendUpper, StopConflict, StopConfidence, Factored };

inline const char* to_string(StepDecision d) {
  switch (d) {
    case StepDecision::DescendLower: return "descend_lower";
    case StepDecision::DescendUpper: return "descend_upper";
    case StepDecision::StopConflict: return "stop_conflict";
    case StepDecision::StopConfidence: return "stop_confidence";
    case StepDecision::Factored: return "factored";
  }
  return "?";
}

struct StepTrace {
  int depth = 0;
  RatioInterval interval;
  Rational midpoint;
  FermatResult lawrence_result;
  std::optional<double> p_lower, p_upper;  // absent when the probe already factored
  std::optional<bool> c_lower, c_upper;    // absent below the confidence gate
  StepDecision decision = StepDecision::Factored;
};

enum class SearchStatus { Factored, StoppedLowConfidence, StoppedConflict, DepthExhausted };

inline const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Factored: return "factored";
    case SearchStatus::StoppedLowConfidence: return "stopped_low_confidence";
    case SearchStatus::StoppedConflict: return "stopped_conflict";
    case SearchStatus::DepthExhausted: return "depth_exhausted";
  }
  return "?";
}

struct SearchOutcome {
  SearchStatus status = SearchStatus::DepthExhausted;
  std::optional<BigInt> factor;
  std::vector<StepTrace> trace;
};

/// Exact interval midpoint (lo + hi) / 2.
inline Rational midpoint(const RatioInterval& iv) { return (iv.lo + iv.hi) / 2; }

/// Reduce c to denominator <= cfg.max_den_lawrence, then run the ratio-scaled
/// factoriser against n.
inline FermatResult probe_lawrence(const BigInt& n, const Rational& c, const SearchConfig& cfg) {
  const Rational reduced = bounded_denominator_approx(c, cfg.max_den_lawrence);
  return factor_lawrence(n, reduced, cfg.max_iter_lawrence);
}

/// A trained (or stubbed) decider for one ratio interval.
class IntervalClassifier {
 public:
  virtual ~IntervalClassifier() = default;
  virtual double out_of_sample_accuracy() const = 0;
  virtual bool classify(const BigInt& n) const = 0;
};

/// Produces an IntervalClassifier for a given interval; implementations must
/// be safe to call from two threads when concurrent training is enabled.
class ClassifierProvider {
 public:
  virtual ~ClassifierProvider() = default;
  virtual std::unique_ptr<IntervalClassifier> train_for(const RatioInterval& interval, int n_bits,
                                                        std::uint64_t seed) const = 0;
};

/// Default provider: generates a fresh corpus for the interval, encodes it
/// under cfg.feature_base, and trains the dense classifier.
class MlpClassifierProvider : public ClassifierProvider {
 public:
  explicit MlpClassifierProvider(const SearchConfig& cfg) : cfg_(cfg) {}

  std::unique_ptr<IntervalClassifier> train_for(const RatioInterval& interval, int n_bits,
                                                std::uint64_t seed) const override {
    Prng rng(seed);
    const Dataset corpus = generate_training_semiprimes(
        n_bits, interval.lo, interval.hi, cfg_.delta_scale, cfg_.n_train, rng);
    const FeatureMatrix fm = build_feature_matrix(corpus, cfg_.feature_base);
    TrainConfig tc = cfg_.train_cfg;
    tc.seed = mix_seed(seed, 1);
    tc.checkpoint_path.clear();
    auto [model, report] = train(fm, tc);
    return std::make_unique<Trained>(std::move(model), report.out_of_sample_accuracy,
                                     cfg_.feature_base, fm.width);
  }

 private:
  class Trained : public IntervalClassifier {
   public:
    Trained(MlpModel model, double accuracy, Rational base, std::size_t width)
        : model_(std::move(model)), accuracy_(accuracy), base_(std::move(base)), width_(width) {}

    double out_of_sample_accuracy() const override { return accuracy_; }

    bool classify(const BigInt& n) const override {
      const auto padded = pad_left(rat_base(n, base_).digits, width_);
      std::vector<double> x(padded.begin(), padded.end());
      return factorml::classify(model_, x).first == 1;
    }

   private:
    MlpModel model_;
    double accuracy_;
    Rational base_;
    std::size_t width_;
  };

  SearchConfig cfg_;
};

/// The ratio-interval binary search. Per depth: (1) midpoint c; (2) probe —
/// success returns the factor; (3-5) train classifiers for [lo,c] and [c,hi];
/// (6) stop if either accuracy falls below p_min; (7-8) classify n with both,
/// stop on a double-negative conflict; (9) descend into the single positive
/// half; (10) on a double positive follow the more accurate model (ties go
/// to the lower half). Every depth appends a StepTrace.
inline SearchOutcome factor_ml_binary_search(const BigInt& n, const SearchConfig& cfg,
                                             const ClassifierProvider& provider) {
  validate_search_config(cfg);
  if (n < 3) throw std::domain_error("search: domain");
  if ((n & 1) == 0) throw std::domain_error("search: even input");
  if (is_probable_prime(n)) throw std::domain_error("search: input is prime");

  const int n_bits = bit_length(n);
  const int max_depth = cfg.max_depth > 0 ? cfg.max_depth : n_bits;

  SearchOutcome outcome;
  RatioInterval interval = cfg.initial_interval;
  for (int depth = 0; depth < max_depth; ++depth) {
    StepTrace step;
    step.depth = depth;
    step.interval = interval;
    step.midpoint = midpoint(interval);

    step.lawrence_result = probe_lawrence(n, step.midpoint, cfg);
    if (step.lawrence_result.succeeded) {
      step.decision = StepDecision::Factored;
      outcome.trace.push_back(std::move(step));
      outcome.status = SearchStatus::Factored;
      outcome.factor = outcome.trace.back().lawrence_result.factor;
      return outcome;
    }

    const RatioInterval lower{interval.lo, step.midpoint};
    const RatioInterval upper{step.midpoint, interval.hi};
    const std::uint64_t lower_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(depth), 0);
    const std::uint64_t upper_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(depth), 1);

    std::unique_ptr<IntervalClassifier> lower_model, upper_model;
    if (cfg.concurrent_training) {
      auto lower_future = std::async(std::launch::async, [&] {
        return provider.train_for(lower, n_bits, lower_seed);
      });
      upper_model = provider.train_for(upper, n_bits, upper_seed);
      lower_model = lower_future.get();
    } else {
      lower_model = provider.train_for(lower, n_bits, lower_seed);
      upper_model = provider.train_for(upper, n_bits, upper_seed);
    }

    step.p_lower = lower_model->out_of_sample_accuracy();
    step.p_upper = upper_model->out_of_sample_accuracy();
    if (std::min(*step.p_lower, *step.p_upper) < cfg.p_min) {
      step.decision = StepDecision::StopConfidence;
      outcome.trace.push_back(std::move(step));
      outcome.status = SearchStatus::StoppedLowConfidence;
      return outcome;
    }

    step.c_lower = lower_model->classify(n);
    step.c_upper = upper_model->classify(n);
    if (!*step.c_lower && !*step.c_upper) {
      step.decision = StepDecision::StopConflict;
      outcome.trace.push_back(std::move(step));
      outcome.status = SearchStatus::StoppedConflict;
      return outcome;
    }

    bool descend_lower;
    if (*step.c_lower != *step.c_upper) {
      descend_lower = *step.c_lower;
    } else {  // both positive: follow the more accurate model, ties go lower
      descend_lower = *step.p_lower >= *step.p_upper;
    }
    step.decision = descend_lower ? StepDecision::DescendLower : StepDecision::DescendUpper;
    outcome.trace.push_back(std::move(step));
    interval = descend_lower ? lower : upper;
  }
  outcome.status = SearchStatus::DepthExhausted;
  return outcome;
}

inline SearchOutcome factor_ml_binary_search(const BigInt& n, const SearchConfig& cfg) {
  const MlpClassifierProvider provider(cfg);
  return factor_ml_binary_search(n, cfg, provider);
}

/// Success-probability estimate p_bar^(n_bits / 2) for a full search with
/// mean per-level classification accuracy p_bar.
inline double estimate_success_probability(double p_bar, int n_bits) {
  if (!(p_bar > 0.0) || p_bar > 1.0) {
    throw std::invalid_argument("estimate_success_probability: p_bar must be in (0, 1]");
  }
  if (n_bits < 1) throw std::invalid_argument("estimate_success_probability: n_bits must be >= 1");
  return std::pow(p_bar, static_cast<double>(n_bits) / 2.0);
}

/// Trace export: rationals as "num/den" strings, big integers as decimal.
inline nlohmann::json outcome_to_json(const SearchOutcome& outcome) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : outcome.trace) {
    nlohmann::json entry{
        {"depth", step.depth},
        {"interval", {{"lo", format_rational(step.interval.lo)},
                      {"hi", format_rational(step.interval.hi)}}},
        {"midpoint", format_rational(step.midpoint)},
        {"lawrence", {{"factor", step.lawrence_result.factor.str()},
                       {"iterations", step.lawrence_result.iterations},
                       {"succeeded", step.lawrence_result.succeeded}}},
        {"decision", to_string(step.decision)},
    };
    entry["p_lower"] = step.p_lower ? nlohmann::json(*step.p_lower) : nlohmann::json();
    entry["p_upper"] = step.p_upper ? nlohmann::json(*step.p_upper) : nlohmann::json();
    entry["c_lower"] = step.c_lower ? nlohmann::json(*step.c_lower) : nlohmann::json();
    entry["c_upper"] = step.c_upper ? nlohmann::json(*step.c_upper) : nlohmann::json();
    steps.push_back(std::move(entry));
  }
  return nlohmann::json{
      {"status", to_string(outcome.status)},
      {"factor", outcome.factor ? nlohmann::json(outcome.factor->str()) : nlohmann::json()},
      {"trace", std::move(steps)},
  };
}

}  // namespace factorml
