#pragma once

// Dense feed-forward binary classifier: two relu hidden layers of width
// input/4 with L2 regularisation and inverted dropout, sigmoid output,
// binary cross-entropy, Adam, and accuracy-monitored early stopping.
// Features are single precision; all training arithmetic is double.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "factorml/encode.hpp"
#include "factorml/numtheory.hpp"
#include "factorml/prng.hpp"

namespace factorml {

enum class Activation { Relu, Sigmoid };

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
  Activation act = Activation::Relu;
};

struct MlpModel {
  std::vector<DenseLayer> layers;  // two relu hidden + one sigmoid output
  int input_width = 0;
  double l2_lambda = 0.0;
  double dropout_rate = 0.0;
};

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

struct EarlyStopConfig {
  double min_delta = 0.001;  // improvement threshold on training accuracy
  int patience = 25;
  bool restore_best = true;
};

struct TrainConfig {
  int max_epochs = 1000;
  int batch_size = 0;  // 0 = auto: 4096 below 1e5 rows, 100000 otherwise
  double l2_lambda = 0.0005;
  double dropout_rate = 0.2;
  AdamConfig adam;
  EarlyStopConfig early_stop;
  double test_fraction = 1.0 / 3.0;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string checkpoint_path;  // best-epoch checkpoint written here when set
};

struct TrainReport {
  std::vector<double> epoch_loss;      // training loss per epoch
  std::vector<double> epoch_accuracy;  // training accuracy per epoch
  int best_epoch = 0;                  // 1-based
  int stopped_epoch = 0;
  double in_sample_accuracy = 0.0;
  double out_of_sample_accuracy = 0.0;
  std::array<std::array<double, 2>, 2> confusion{};  // rows actual {T,F}, cols predicted {T,F}
};

constexpr double kProbClip = 1e-7;

/// Glorot-uniform weights, zero biases; identical parameters for identical
/// seeds. Hidden width is input_width/4.
inline MlpModel init_model(int input_width, const TrainConfig& cfg, Prng& rng) {
  if (input_width < 4) throw std::invalid_argument("init_model: input_width must be >= 4");
  const int hidden = input_width / 4;

  MlpModel model;
  model.input_width = input_width;
  model.l2_lambda = cfg.l2_lambda;
  model.dropout_rate = cfg.dropout_rate;

  auto make_layer = [&rng](int out, int in, Activation act) {
    DenseLayer layer;
    layer.w.resize(out, in);
    layer.b = Eigen::VectorXd::Zero(out);
    layer.act = act;
    const double limit = std::sqrt(6.0 / (in + out));
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) {
        layer.w(r, c) = limit * (2.0 * rng.uniform_unit() - 1.0);
      }
    }
    return layer;
  };
  model.layers.push_back(make_layer(hidden, input_width, Activation::Relu));
  model.layers.push_back(make_layer(hidden, hidden, Activation::Relu));
  model.layers.push_back(make_layer(1, hidden, Activation::Sigmoid));
  return model;
}

namespace nn_detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct BatchCache {
  Eigen::MatrixXd x;                   // batch x in
  std::vector<Eigen::MatrixXd> z;      // pre-activations per layer
  std::vector<Eigen::MatrixXd> h;      // post-activation (and post-dropout) per layer
  std::vector<Eigen::MatrixXd> mask;   // inverted-dropout masks for hidden layers
  Eigen::VectorXd probs;
};

// Rows are samples. Dropout masks, when active, are drawn row-major so runs
// replay exactly.
inline void forward_batch(const MlpModel& model, Eigen::MatrixXd x, bool train_mode, Prng* rng,
                          BatchCache& cache) {
  const auto batch = x.rows();
  cache.x = std::move(x);
  cache.z.assign(model.layers.size(), {});
  cache.h.assign(model.layers.size(), {});
  cache.mask.assign(model.layers.size(), {});

  const Eigen::MatrixXd* input = &cache.x;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const DenseLayer& layer = model.layers[li];
    cache.z[li] = (*input * layer.w.transpose()).rowwise() + layer.b.transpose();
    if (layer.act == Activation::Relu) {
      cache.h[li] = cache.z[li].cwiseMax(0.0);
      if (train_mode && model.dropout_rate > 0.0) {
        if (rng == nullptr) throw std::invalid_argument("forward: dropout requires a generator");
        const double keep_scale = 1.0 / (1.0 - model.dropout_rate);
        Eigen::MatrixXd& mask = cache.mask[li];
        mask.resize(batch, cache.h[li].cols());
        for (Eigen::Index r = 0; r < mask.rows(); ++r) {
          for (Eigen::Index c = 0; c < mask.cols(); ++c) {
            mask(r, c) = rng->uniform_unit() < model.dropout_rate ? 0.0 : keep_scale;
          }
        }
        cache.h[li] = cache.h[li].cwiseProduct(mask);
      }
    } else {
      cache.h[li] = cache.z[li].unaryExpr([](double z) { return sigmoid(z); });
    }
    input = &cache.h[li];
  }
  cache.probs = cache.h.back().col(0);
}

}  // namespace nn_detail

struct ForwardCache {
  nn_detail::BatchCache batch;
};

/// Single-sample forward pass. Inference mode (train_mode=false) is fully
/// deterministic; train mode applies inverted dropout after each hidden
/// layer using `rng`.
inline std::pair<double, ForwardCache> forward(const MlpModel& model,
                                               const std::vector<double>& x, bool train_mode,
                                               Prng* rng = nullptr) {
  if (static_cast<int>(x.size()) != model.input_width) {
    throw std::invalid_argument("forward: input width mismatch");
  }
  Eigen::MatrixXd row(1, model.input_width);
  for (int i = 0; i < model.input_width; ++i) row(0, i) = x[i];
  ForwardCache cache;
  nn_detail::forward_batch(model, std::move(row), train_mode, rng, cache.batch);
  return {cache.batch.probs(0), std::move(cache)};
}

/// Mean binary cross-entropy over the batch (probabilities clipped to
/// [1e-7, 1-1e-7]) plus l2_lambda * sum(W^2) over the two hidden layers.
inline double loss_value(const MlpModel& model, const Eigen::VectorXd& probs,
                         const Eigen::VectorXd& labels) {
  double bce = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = std::min(1.0 - kProbClip, std::max(kProbClip, probs(i)));
    bce -= labels(i) * std::log(p) + (1.0 - labels(i)) * std::log(1.0 - p);
  }
  bce /= static_cast<double>(probs.size());
  double reg = 0.0;
  for (std::size_t li = 0; li + 1 < model.layers.size(); ++li) {
    reg += model.layers[li].w.squaredNorm();
  }
  return bce + model.l2_lambda * reg;
}

struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  void add(const Gradients& other) {
    for (std::size_t i = 0; i < dw.size(); ++i) {
      dw[i] += other.dw[i];
      db[i] += other.db[i];
    }
  }
};

/// Exact gradients of loss_value for the cached forward pass (same dropout
/// masks). BCE terms are averaged over the batch; L2 terms are not.
inline Gradients backward(const MlpModel& model, const Eigen::VectorXd& labels,
                          const nn_detail::BatchCache& cache, bool include_l2 = true) {
  const auto batch = static_cast<double>(labels.size());
  Gradients grads;
  grads.dw.resize(model.layers.size());
  grads.db.resize(model.layers.size());

  // Sigmoid + BCE: dL/dz_out = (p - y) / batch.
  Eigen::MatrixXd delta = (cache.probs - labels).matrix() / batch;

  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const Eigen::MatrixXd& input = li == 0 ? cache.x : cache.h[li - 1];
    grads.dw[li] = delta.transpose() * input;
    grads.db[li] = delta.colwise().sum().transpose();
    if (include_l2 && li + 1 < model.layers.size()) {
      grads.dw[li] += 2.0 * model.l2_lambda * model.layers[li].w;
    }
    if (li == 0) break;
    Eigen::MatrixXd upstream = delta * model.layers[li].w;
    if (cache.mask[li - 1].size() > 0) {
      upstream = upstream.cwiseProduct(cache.mask[li - 1]);
    }
    delta = upstream.cwiseProduct(
        (cache.z[li - 1].array() > 0.0).cast<double>().matrix());
  }
  return grads;
}

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;

  static AdamState zeros_like(const MlpModel& model) {
    AdamState s;
    for (const auto& layer : model.layers) {
      s.mw.push_back(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
      s.vw.push_back(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
      s.mb.push_back(Eigen::VectorXd::Zero(layer.b.size()));
      s.vb.push_back(Eigen::VectorXd::Zero(layer.b.size()));
    }
    return s;
  }
};

/// One Adam update with bias correction:
/// theta -= lr * m_hat / (sqrt(v_hat) + eps), t is the 1-based step count.
inline void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, std::int64_t t,
                      const AdamConfig& cfg) {
  if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      param -= cfg.learning_rate *
               (m / bc1).cwiseQuotient(((v / bc2).cwiseSqrt().array() + cfg.epsilon).matrix());
    };
    update(model.layers[li].w, state.mw[li], state.vw[li], grads.dw[li]);
    update(model.layers[li].b, state.mb[li], state.vb[li], grads.db[li]);
  }
}

/// Inference-mode classification: label = 1 iff prob > 0.5.
inline std::pair<int, double> classify(const MlpModel& model, const std::vector<double>& x) {
  const auto [prob, cache] = forward(model, x, /*train_mode=*/false);
  return {prob > 0.5 ? 1 : 0, prob};
}

namespace nn_detail {

inline Eigen::MatrixXd rows_to_double(const FeatureMatrix& fm, std::size_t begin,
                                      std::size_t end) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin),
                      static_cast<Eigen::Index>(fm.width));
  for (std::size_t r = begin; r < end; ++r) {
    for (std::size_t c = 0; c < fm.width; ++c) {
      out(static_cast<Eigen::Index>(r - begin), static_cast<Eigen::Index>(c)) =
          static_cast<double>(fm.values[r * fm.width + c]);
    }
  }
  return out;
}

inline Eigen::VectorXd labels_to_double(const FeatureMatrix& fm, std::size_t begin,
                                        std::size_t end) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(end - begin));
  for (std::size_t r = begin; r < end; ++r) {
    out(static_cast<Eigen::Index>(r - begin)) = static_cast<double>(fm.labels[r]);
  }
  return out;
}

struct EvalCounts {
  double accuracy = 0.0;
  std::array<std::array<double, 2>, 2> confusion{};
};

// Chunked inference over [begin, end); confusion layout rows = actual {T,F},
// cols = predicted {T,F}, normalised to sum 1.
inline EvalCounts evaluate_range(const MlpModel& model, const FeatureMatrix& fm,
                                 std::size_t begin, std::size_t end) {
  if (end <= begin) throw std::invalid_argument("evaluate: empty row range");
  constexpr std::size_t kChunk = 16384;
  std::array<std::array<std::size_t, 2>, 2> counts{};
  BatchCache cache;
  for (std::size_t at = begin; at < end; at += kChunk) {
    const std::size_t stop = std::min(end, at + kChunk);
    forward_batch(model, rows_to_double(fm, at, stop), /*train_mode=*/false, nullptr, cache);
    for (std::size_t r = at; r < stop; ++r) {
      const bool actual_true = fm.labels[r] == 1;
      const bool predicted_true = cache.probs(static_cast<Eigen::Index>(r - at)) > 0.5;
      counts[actual_true ? 0 : 1][predicted_true ? 0 : 1] += 1;
    }
  }
  const double total = static_cast<double>(end - begin);
  EvalCounts out;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) out.confusion[r][c] = counts[r][c] / total;
  }
  out.accuracy = out.confusion[0][0] + out.confusion[1][1];
  return out;
}

inline Gradients batch_gradients(const MlpModel& model, const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& y, Prng& rng, int threads,
                                 double* loss_out) {
  BatchCache cache;
  if (threads <= 1 || x.rows() < 2 * threads) {
    forward_batch(model, x, /*train_mode=*/true, &rng, cache);
    if (loss_out) *loss_out = loss_value(model, cache.probs, y);
    return backward(model, y, cache);
  }

  // Data-parallel path: masks for the whole batch come from the single rng
  // stream first, then contiguous row chunks are processed per thread and
  // reduced in chunk order, so results are deterministic for a fixed thread
  // count.
  const auto rows = x.rows();
  std::vector<Eigen::MatrixXd> masks;
  if (model.dropout_rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - model.dropout_rate);
    for (std::size_t li = 0; li + 1 < model.layers.size(); ++li) {
      Eigen::MatrixXd mask(rows, model.layers[li].w.rows());
      for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        for (Eigen::Index c = 0; c < mask.cols(); ++c) {
          mask(r, c) = rng.uniform_unit() < model.dropout_rate ? 0.0 : keep_scale;
        }
      }
      masks.push_back(std::move(mask));
    }
  }

  struct ChunkResult {
    Gradients grads;
    double loss_sum = 0.0;  // per-sample BCE sum
    Eigen::Index rows = 0;
  };
  const Eigen::Index chunk_rows = (rows + threads - 1) / threads;
  std::vector<std::future<ChunkResult>> futures;
  for (int t = 0; t < threads; ++t) {
    const Eigen::Index begin = t * chunk_rows;
    if (begin >= rows) break;
    const Eigen::Index count = std::min(chunk_rows, rows - begin);
    futures.push_back(std::async(std::launch::async, [&, begin, count] {
      BatchCache local;
      local.x = x.middleRows(begin, count);
      local.z.assign(model.layers.size(), {});
      local.h.assign(model.layers.size(), {});
      local.mask.assign(model.layers.size(), {});
      const Eigen::MatrixXd* input = &local.x;
      for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const DenseLayer& layer = model.layers[li];
        local.z[li] = (*input * layer.w.transpose()).rowwise() + layer.b.transpose();
        if (layer.act == Activation::Relu) {
          local.h[li] = local.z[li].cwiseMax(0.0);
          if (!masks.empty()) {
            local.mask[li] = masks[li].middleRows(begin, count);
            local.h[li] = local.h[li].cwiseProduct(local.mask[li]);
          }
        } else {
          local.h[li] = local.z[li].unaryExpr([](double z) { return sigmoid(z); });
        }
        input = &local.h[li];
      }
      local.probs = local.h.back().col(0);
      const Eigen::VectorXd y_chunk = y.segment(begin, count);
      ChunkResult result;
      result.rows = count;
      for (Eigen::Index i = 0; i < count; ++i) {
        const double p = std::min(1.0 - kProbClip, std::max(kProbClip, local.probs(i)));
        result.loss_sum -= y_chunk(i) * std::log(p) + (1.0 - y_chunk(i)) * std::log(1.0 - p);
      }
      result.grads = backward(model, y_chunk, local, /*include_l2=*/false);
      // backward averages over the chunk; rescale to a batch-wide mean share
      const double scale = static_cast<double>(count) / static_cast<double>(rows);
      for (auto& g : result.grads.dw) g *= scale;
      for (auto& g : result.grads.db) g *= scale;
      return result;
    }));
  }

  Gradients total;
  double bce_sum = 0.0;
  bool first = true;
  for (auto& fut : futures) {
    ChunkResult chunk = fut.get();
    bce_sum += chunk.loss_sum;
    if (first) {
      total = std::move(chunk.grads);
      first = false;
    } else {
      total.add(chunk.grads);
    }
  }
  double reg = 0.0;
  for (std::size_t li = 0; li + 1 < model.layers.size(); ++li) {
    total.dw[li] += 2.0 * model.l2_lambda * model.layers[li].w;
    reg += model.layers[li].w.squaredNorm();
  }
  if (loss_out) *loss_out = bce_sum / static_cast<double>(rows) + model.l2_lambda * reg;
  return total;
}

}  // namespace nn_detail

/// Accuracy and normalised confusion matrix over a labelled feature matrix.
inline std::pair<double, std::array<std::array<double, 2>, 2>> evaluate(
    const MlpModel& model, const FeatureMatrix& fm) {
  if (fm.rows == 0) throw std::invalid_argument("evaluate: empty matrix");
  const auto counts = nn_detail::evaluate_range(model, fm, 0, fm.rows);
  return {counts.accuracy, counts.confusion};
}

inline void save_checkpoint(const MlpModel& model, const TrainConfig& cfg, const Rational& base,
                            const std::string& path);

/// Train on the first 2/3 of the (pre-shuffled) rows, evaluate on the final
/// 1/3. Stops when training accuracy fails to improve by min_delta for
/// `patience` epochs, restoring the best-epoch weights.
inline std::pair<MlpModel, TrainReport> train(const FeatureMatrix& fm, const TrainConfig& cfg) {
  if (fm.rows < 10) throw std::invalid_argument("train: need at least 10 rows");
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(fm.rows) * cfg.test_fraction));
  const std::size_t n_train = fm.rows - n_test;
  if (n_test == 0 || n_train == 0) throw std::invalid_argument("train: degenerate split");

  std::size_t batch_size = cfg.batch_size > 0 ? static_cast<std::size_t>(cfg.batch_size)
                                              : (fm.rows < 100000 ? 4096 : 100000);
  batch_size = std::min(batch_size, n_train);

  Prng rng(cfg.seed);
  MlpModel model = init_model(static_cast<int>(fm.width), cfg, rng);
  AdamState adam = AdamState::zeros_like(model);

  TrainReport report;
  MlpModel best_model = model;
  double best_accuracy = -1.0;
  int wait = 0;
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double loss_weighted = 0.0;
    for (std::size_t begin = 0; begin < n_train; begin += batch_size) {
      const std::size_t end = std::min(n_train, begin + batch_size);
      const Eigen::MatrixXd x = nn_detail::rows_to_double(fm, begin, end);
      const Eigen::VectorXd y = nn_detail::labels_to_double(fm, begin, end);
      double batch_loss = 0.0;
      Gradients grads = nn_detail::batch_gradients(model, x, y, rng, cfg.threads, &batch_loss);
      adam_step(model, grads, adam, ++step, cfg.adam);
      loss_weighted += batch_loss * static_cast<double>(end - begin);
    }
    report.epoch_loss.push_back(loss_weighted / static_cast<double>(n_train));

    const double train_accuracy =
        nn_detail::evaluate_range(model, fm, 0, n_train).accuracy;
    report.epoch_accuracy.push_back(train_accuracy);

    if (train_accuracy > best_accuracy + cfg.early_stop.min_delta) {
      best_accuracy = train_accuracy;
      report.best_epoch = epoch;
      best_model = model;
      wait = 0;
    } else if (++wait >= cfg.early_stop.patience) {
      report.stopped_epoch = epoch;
      break;
    }
  }
  if (report.stopped_epoch == 0) report.stopped_epoch = static_cast<int>(report.epoch_loss.size());
  if (cfg.early_stop.restore_best) model = best_model;

  report.in_sample_accuracy = best_accuracy;
  const auto test = nn_detail::evaluate_range(model, fm, n_train, fm.rows);
  report.out_of_sample_accuracy = test.accuracy;
  report.confusion = test.confusion;

  if (!cfg.checkpoint_path.empty()) {
    save_checkpoint(model, cfg, Rational(2), cfg.checkpoint_path);
  }
  return {std::move(model), std::move(report)};
}

// --- checkpoint format -------------------------------------------------------
//
// JSON container, format_version 1: architecture metadata, the TrainConfig
// used, the feature base, and row-major weight payloads per layer. Doubles
// round-trip bit-exactly through the serializer.

struct Checkpoint {
  MlpModel model;
  TrainConfig config;
  Rational base{2};
};

inline void save_checkpoint(const MlpModel& model, const TrainConfig& cfg, const Rational& base,
                            const std::string& path) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : model.layers) {
    std::vector<double> w(layer.w.size());
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
        w[static_cast<std::size_t>(r * layer.w.cols() + c)] = layer.w(r, c);
      }
    }
    std::vector<double> b(layer.b.data(), layer.b.data() + layer.b.size());
    layers.push_back({{"rows", layer.w.rows()},
                      {"cols", layer.w.cols()},
                      {"activation", layer.act == Activation::Relu ? "relu" : "sigmoid"},
                      {"w", w},
                      {"b", b}});
  }
  const nlohmann::json doc{
      {"format_version", 1},
      {"kind", "mlp-checkpoint"},
      {"input_width", model.input_width},
      {"l2_lambda", model.l2_lambda},
      {"dropout_rate", model.dropout_rate},
      {"base", format_rational(base)},
      {"train_config",
       {{"max_epochs", cfg.max_epochs},
        {"batch_size", cfg.batch_size},
        {"l2_lambda", cfg.l2_lambda},
        {"dropout_rate", cfg.dropout_rate},
        {"learning_rate", cfg.adam.learning_rate},
        {"beta1", cfg.adam.beta1},
        {"beta2", cfg.adam.beta2},
        {"epsilon", cfg.adam.epsilon},
        {"min_delta", cfg.early_stop.min_delta},
        {"patience", cfg.early_stop.patience},
        {"restore_best", cfg.early_stop.restore_best},
        {"test_fraction", cfg.test_fraction},
        {"seed", cfg.seed}}},
      {"layers", layers},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error("corrupt checkpoint " + path + ": " + err.what());
  }
  if (doc.value("kind", "") != "mlp-checkpoint") {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  if (doc.at("format_version").get<int>() != 1) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }

  Checkpoint ckpt;
  ckpt.model.input_width = doc.at("input_width").get<int>();
  ckpt.model.l2_lambda = doc.at("l2_lambda").get<double>();
  ckpt.model.dropout_rate = doc.at("dropout_rate").get<double>();
  ckpt.base = parse_rational(doc.at("base").get<std::string>());

  const auto& tc = doc.at("train_config");
  ckpt.config.max_epochs = tc.at("max_epochs").get<int>();
  ckpt.config.batch_size = tc.at("batch_size").get<int>();
  ckpt.config.l2_lambda = tc.at("l2_lambda").get<double>();
  ckpt.config.dropout_rate = tc.at("dropout_rate").get<double>();
  ckpt.config.adam.learning_rate = tc.at("learning_rate").get<double>();
  ckpt.config.adam.beta1 = tc.at("beta1").get<double>();
  ckpt.config.adam.beta2 = tc.at("beta2").get<double>();
  ckpt.config.adam.epsilon = tc.at("epsilon").get<double>();
  ckpt.config.early_stop.min_delta = tc.at("min_delta").get<double>();
  ckpt.config.early_stop.patience = tc.at("patience").get<int>();
  ckpt.config.early_stop.restore_best = tc.at("restore_best").get<bool>();
  ckpt.config.test_fraction = tc.at("test_fraction").get<double>();
  ckpt.config.seed = tc.at("seed").get<std::uint64_t>();

  for (const auto& layer_doc : doc.at("layers")) {
    DenseLayer layer;
    const auto rows = layer_doc.at("rows").get<Eigen::Index>();
    const auto cols = layer_doc.at("cols").get<Eigen::Index>();
    layer.act = layer_doc.at("activation").get<std::string>() == "relu" ? Activation::Relu
                                                                        : Activation::Sigmoid;
    const auto w = layer_doc.at("w").get<std::vector<double>>();
    const auto b = layer_doc.at("b").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
        static_cast<Eigen::Index>(b.size()) != rows) {
      throw std::runtime_error("checkpoint layer shape mismatch in " + path);
    }
    layer.w.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        layer.w(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      }
    }
    layer.b = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
    ckpt.model.layers.push_back(std::move(layer));
  }
  if (ckpt.model.layers.size() != 3 ||
      ckpt.model.layers.front().w.cols() != ckpt.model.input_width) {
    throw std::runtime_error("checkpoint architecture mismatch in " + path);
  }
  return ckpt;
}

}  // namespace factorml
