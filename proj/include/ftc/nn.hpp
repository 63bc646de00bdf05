#pragma once

// Dense multilayer perceptrons in double precision: forward/backward passes,
// Adam, early-stopped regression training, R², k-fold CV and grid search.
//
// Batches are stored one sample per column (features × N). Datasets keep
// the conventional one sample per row layout and are transposed on use.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ftc/random.hpp"

namespace ftc::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<std::size_t>;

enum class Activation { identity, relu, tanh };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

struct MlpSpec {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::identity;

  std::size_t inputs() const { return layer_sizes.front(); }
  std::size_t outputs() const { return layer_sizes.back(); }
  std::size_t layers() const { return layer_sizes.size() - 1; }

  Activation activation(std::size_t layer) const {
    return layer + 1 == layers() ? output_activation : hidden_activation;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layers(); ++l) {
      n += layer_sizes[l + 1] * layer_sizes[l] + layer_sizes[l + 1];
    }
    return n;
  }

  void validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("MlpSpec needs at least 2 layer sizes");
    for (auto s : layer_sizes) {
      if (s == 0) throw std::invalid_argument("MlpSpec layer sizes must be >= 1");
    }
  }

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Network parameters stored as one flat vector; layer l holds its
/// out×in weight matrix (column-major) followed by its bias.
class MlpParams {
 public:
  MlpParams() = default;
  explicit MlpParams(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    values_ = Vector::Zero(static_cast<Eigen::Index>(spec_.parameter_count()));
    offsets_.reserve(spec_.layers());
    std::size_t offset = 0;
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
      offsets_.push_back(offset);
      offset += spec_.layer_sizes[l + 1] * spec_.layer_sizes[l] + spec_.layer_sizes[l + 1];
    }
  }

  const MlpSpec& spec() const { return spec_; }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  Eigen::Map<Matrix> weight(std::size_t l) { return {values_.data() + offsets_[l], rows(l), cols(l)}; }
  Eigen::Map<const Matrix> weight(std::size_t l) const {
    return {values_.data() + offsets_[l], rows(l), cols(l)};
  }
  Eigen::Map<Vector> bias(std::size_t l) { return {values_.data() + bias_offset(l), rows(l)}; }
  Eigen::Map<const Vector> bias(std::size_t l) const {
    return {values_.data() + bias_offset(l), rows(l)};
  }

  /// Views into a gradient vector laid out like these parameters.
  Eigen::Map<Matrix> weight_in(Vector& flat, std::size_t l) const {
    return {flat.data() + offsets_[l], rows(l), cols(l)};
  }
  Eigen::Map<Vector> bias_in(Vector& flat, std::size_t l) const {
    return {flat.data() + bias_offset(l), rows(l)};
  }

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    return a.spec_ == b.spec_ && a.values_ == b.values_;
  }

 private:
  Eigen::Index rows(std::size_t l) const { return static_cast<Eigen::Index>(spec_.layer_sizes[l + 1]); }
  Eigen::Index cols(std::size_t l) const { return static_cast<Eigen::Index>(spec_.layer_sizes[l]); }
  std::size_t bias_offset(std::size_t l) const {
    return offsets_[l] + spec_.layer_sizes[l + 1] * spec_.layer_sizes[l];
  }

  MlpSpec spec_;
  Vector values_;
  std::vector<std::size_t> offsets_;
};

/// Glorot-uniform weights, zero biases.
inline MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  MlpParams params(spec);
  Rng rng = make_rng(seed, 0x6e6e);
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const double fan_in = static_cast<double>(spec.layer_sizes[l]);
    const double fan_out = static_cast<double>(spec.layer_sizes[l + 1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    auto w = params.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
    }
  }
  return params;
}

namespace detail {

inline void activate(Activation a, Matrix& z) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
  }
}

// Multiplies `grad` in place by the activation derivative, given the
// pre-activation and post-activation values of the layer.
inline void activation_backward(Activation a, const Matrix& pre, const Matrix& post, Matrix& grad) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: grad = (pre.array() > 0.0).select(grad, 0.0); break;
    case Activation::tanh: grad = grad.cwiseProduct((1.0 - post.array().square()).matrix()); break;
  }
}

}  // namespace detail

/// Everything backward() needs from a forward pass.
struct ForwardCache {
  std::vector<Matrix> inputs;       // input to layer l (inputs[0] is the batch)
  std::vector<Matrix> pre;          // affine output of layer l
  Matrix output;

  const Matrix& layer_output(std::size_t l) const {
    return l + 1 < inputs.size() ? inputs[l + 1] : output;
  }
};

inline ForwardCache forward(const MlpParams& params, const Matrix& batch) {
  const MlpSpec& spec = params.spec();
  if (static_cast<std::size_t>(batch.rows()) != spec.inputs()) {
    throw std::invalid_argument("forward: input width " + std::to_string(batch.rows()) +
                                " does not match network input " + std::to_string(spec.inputs()));
  }
  ForwardCache cache;
  cache.inputs.reserve(spec.layers());
  cache.pre.reserve(spec.layers());
  Matrix a = batch;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    Matrix z = params.weight(l) * a;
    z.colwise() += params.bias(l);
    cache.inputs.push_back(std::move(a));
    cache.pre.push_back(z);
    detail::activate(spec.activation(l), z);
    a = std::move(z);
  }
  cache.output = std::move(a);
  return cache;
}

/// Forward pass without keeping intermediate activations.
inline Matrix predict(const MlpParams& params, const Matrix& batch) {
  const MlpSpec& spec = params.spec();
  if (static_cast<std::size_t>(batch.rows()) != spec.inputs()) {
    throw std::invalid_argument("predict: input width mismatch");
  }
  Matrix a = batch;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    Matrix z = params.weight(l) * a;
    z.colwise() += params.bias(l);
    detail::activate(spec.activation(l), z);
    a = std::move(z);
  }
  return a;
}

/// Reverse-mode gradient of sum(output_grad ⊙ output) with respect to the
/// parameters. If `input_grad` is given, it receives the gradient with
/// respect to the batch.
inline Vector backward(const MlpParams& params, const ForwardCache& cache,
                       const Matrix& output_grad, Matrix* input_grad = nullptr) {
  const MlpSpec& spec = params.spec();
  Vector grads = Vector::Zero(static_cast<Eigen::Index>(params.size()));
  Matrix delta = output_grad;
  for (std::size_t l = spec.layers(); l-- > 0;) {
    detail::activation_backward(spec.activation(l), cache.pre[l], cache.layer_output(l), delta);
    params.weight_in(grads, l).noalias() = delta * cache.inputs[l].transpose();
    params.bias_in(grads, l) = delta.rowwise().sum();
    if (l > 0 || input_grad != nullptr) {
      Matrix upstream = params.weight(l).transpose() * delta;
      delta = std::move(upstream);
    }
  }
  if (input_grad != nullptr) *input_grad = std::move(delta);
  return grads;
}

struct AdamState {
  Vector m;
  Vector v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n)
      : m(Vector::Zero(static_cast<Eigen::Index>(n))), v(Vector::Zero(static_cast<Eigen::Index>(n))) {}
};

/// One bias-corrected Adam descent step.
inline void adam_step(Vector& params, const Vector& grads, AdamState& state, double learning_rate) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double m_scale = 1.0 / (1.0 - std::pow(state.beta1, t));
  const double v_scale = 1.0 / (1.0 - std::pow(state.beta2, t));
  params.array() -= learning_rate * (state.m.array() * m_scale) /
                    ((state.v.array() * v_scale).sqrt() + state.epsilon);
}

inline void adam_step(MlpParams& params, const Vector& grads, AdamState& state, double learning_rate) {
  adam_step(params.values(), grads, state, learning_rate);
}

// ---------------------------------------------------------------------------
// Regression

struct Dataset {
  Matrix inputs;   // N × d_in
  Matrix targets;  // N × d_out

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }

  void validate() const {
    if (inputs.rows() != targets.rows()) throw std::invalid_argument("dataset row counts differ");
    if (!inputs.allFinite() || !targets.allFinite()) {
      throw std::invalid_argument("dataset contains non-finite entries");
    }
  }

  Dataset subset(const IndexList& rows) const {
    Dataset out{Matrix(static_cast<Eigen::Index>(rows.size()), inputs.cols()),
                Matrix(static_cast<Eigen::Index>(rows.size()), targets.cols())};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(r);
      out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(r);
    }
    return out;
  }
};

inline IndexList shuffled_indices(std::size_t n, Rng& rng) {
  IndexList idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[uniform_int(rng, 0, i - 1)]);
  }
  return idx;
}

/// Mean over samples of the squared error summed over outputs.
/// `predictions` and `targets` are outputs × N.
inline double mse(const Matrix& predictions, const Matrix& targets) {
  return (predictions - targets).squaredNorm() / static_cast<double>(targets.cols());
}

struct R2Score {
  std::vector<double> per_output;
  double mean = 0.0;
};

/// Coefficient of determination per output column (rows are samples). A
/// column whose target has zero variance scores 0.
inline R2Score r2_score(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw std::invalid_argument("r2_score: shape mismatch");
  }
  if (targets.rows() < 2) throw std::invalid_argument("r2_score: need at least 2 rows");
  R2Score score;
  for (Eigen::Index j = 0; j < targets.cols(); ++j) {
    const double mean = targets.col(j).mean();
    const double ss_tot = (targets.col(j).array() - mean).square().sum();
    const double ss_res = (targets.col(j) - predictions.col(j)).squaredNorm();
    score.per_output.push_back(ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0);
  }
  score.mean = std::accumulate(score.per_output.begin(), score.per_output.end(), 0.0) /
               static_cast<double>(score.per_output.size());
  return score;
}

struct TrainOptions {
  double learning_rate = 1e-3;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::size_t batch_size = 200;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::vector<double> best_validation_loss;  // running minimum
  std::size_t best_epoch = 0;                // epochs completed at the best point
  bool stopped_early = false;

  std::size_t epochs() const { return train_loss.size(); }
};

struct TrainResult {
  MlpParams params;
  TrainHistory history;
  double validation_r2 = 0.0;
  IndexList validation_rows;
};

/// Mini-batch Adam on MSE with a held-out validation split and early
/// stopping. Returns the parameters with the best validation loss.
inline TrainResult train_regressor(const Dataset& data, const MlpSpec& spec,
                                   const TrainOptions& options,
                                   const MlpParams* warm_start = nullptr) {
  data.validate();
  spec.validate();
  if (data.size() < 2) throw std::invalid_argument("train_regressor: need at least 2 rows");
  if (static_cast<std::size_t>(data.inputs.cols()) != spec.inputs() ||
      static_cast<std::size_t>(data.targets.cols()) != spec.outputs()) {
    throw std::invalid_argument("train_regressor: dataset widths do not match the network");
  }
  if (warm_start != nullptr && !(warm_start->spec() == spec)) {
    throw std::invalid_argument("train_regressor: warm start has a different architecture");
  }

  Rng rng = make_rng(options.seed, 0x7472);
  const IndexList order = shuffled_indices(data.size(), rng);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(options.validation_fraction * static_cast<double>(data.size()))),
      1, data.size() - 1);
  IndexList val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  IndexList train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  const Dataset val = data.subset(val_rows);
  const Matrix x_train = data.subset(train_rows).inputs.transpose();
  const Matrix y_train = data.subset(train_rows).targets.transpose();
  const Matrix x_val = val.inputs.transpose();
  const Matrix y_val = val.targets.transpose();

  TrainResult result;
  result.params = warm_start != nullptr ? *warm_start : init_params(spec, derive_seed(options.seed, 1));
  result.validation_rows = val_rows;
  MlpParams params = result.params;
  AdamState adam(params.size());

  double best = mse(predict(params, x_val), y_val);
  std::size_t since_best = 0;
  const std::size_t n_train = train_rows.size();
  const std::size_t batch = std::max<std::size_t>(1, std::min(options.batch_size, n_train));

  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    const IndexList perm = shuffled_indices(n_train, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t count = std::min(batch, n_train - start);
      Matrix xb(x_train.rows(), static_cast<Eigen::Index>(count));
      Matrix yb(y_train.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t i = 0; i < count; ++i) {
        xb.col(static_cast<Eigen::Index>(i)) = x_train.col(static_cast<Eigen::Index>(perm[start + i]));
        yb.col(static_cast<Eigen::Index>(i)) = y_train.col(static_cast<Eigen::Index>(perm[start + i]));
      }
      const ForwardCache cache = forward(params, xb);
      const Matrix residual = cache.output - yb;
      epoch_loss += residual.squaredNorm();
      const Vector grads = backward(params, cache, (2.0 / static_cast<double>(count)) * residual);
      adam_step(params, grads, adam, options.learning_rate);
    }
    const double val_loss = mse(predict(params, x_val), y_val);
    result.history.train_loss.push_back(epoch_loss / static_cast<double>(n_train));
    result.history.validation_loss.push_back(val_loss);
    if (val_loss < best) {
      best = val_loss;
      since_best = 0;
      result.params = params;
      result.history.best_epoch = epoch + 1;
    } else {
      ++since_best;
    }
    result.history.best_validation_loss.push_back(best);
    if (since_best >= options.patience) {
      result.history.stopped_early = true;
      break;
    }
  }

  if (val.size() >= 2) {
    result.validation_r2 = r2_score(predict(result.params, x_val).transpose(), val.targets).mean;
  }
  return result;
}

inline Matrix predict_rows(const MlpParams& params, const Matrix& rows) {
  return predict(params, rows.transpose()).transpose();
}

struct CvResult {
  std::vector<double> fold_r2;
  double mean_r2 = 0.0;
};

/// k-fold cross-validated mean R². Folds are contiguous blocks of a seeded
/// shuffle. When a fold has fewer than 2 rows (e.g. leave-one-out), R² is
/// computed once on the pooled out-of-fold predictions instead.
inline CvResult kfold_cv(const Dataset& data, std::size_t k, const MlpSpec& spec,
                         const TrainOptions& options) {
  data.validate();
  if (k < 2) throw std::invalid_argument("kfold_cv: k must be >= 2");
  if (data.size() < k) throw std::invalid_argument("kfold_cv: fewer rows than folds");

  Rng rng = make_rng(options.seed, 0x6b66);
  const IndexList order = shuffled_indices(data.size(), rng);
  const std::size_t n = data.size();
  Matrix pooled(data.targets.rows(), data.targets.cols());
  bool pooled_only = false;
  CvResult out;

  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t begin = f * n / k;
    const std::size_t end = (f + 1) * n / k;
    IndexList test(order.begin() + static_cast<std::ptrdiff_t>(begin),
                   order.begin() + static_cast<std::ptrdiff_t>(end));
    IndexList train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(begin));
    train.insert(train.end(), order.begin() + static_cast<std::ptrdiff_t>(end), order.end());

    TrainOptions fold_options = options;
    fold_options.seed = derive_seed(options.seed, 100 + f);
    const TrainResult fit = train_regressor(data.subset(train), spec, fold_options);
    const Dataset held_out = data.subset(test);
    const Matrix pred = predict_rows(fit.params, held_out.inputs);
    for (std::size_t i = 0; i < test.size(); ++i) {
      pooled.row(static_cast<Eigen::Index>(test[i])) = pred.row(static_cast<Eigen::Index>(i));
    }
    if (test.size() < 2) {
      pooled_only = true;
    } else {
      out.fold_r2.push_back(r2_score(pred, held_out.targets).mean);
    }
  }

  if (pooled_only) {
    out.fold_r2.assign(1, r2_score(pooled, data.targets).mean);
  }
  out.mean_r2 = std::accumulate(out.fold_r2.begin(), out.fold_r2.end(), 0.0) /
                static_cast<double>(out.fold_r2.size());
  return out;
}

struct GridCell {
  std::vector<std::size_t> hidden;
  double learning_rate = 1e-3;
  Activation activation = Activation::relu;

  MlpSpec spec(std::size_t inputs, std::size_t outputs) const {
    MlpSpec s;
    s.layer_sizes.push_back(inputs);
    s.layer_sizes.insert(s.layer_sizes.end(), hidden.begin(), hidden.end());
    s.layer_sizes.push_back(outputs);
    s.hidden_activation = activation;
    return s;
  }

  std::string label() const {
    std::string s = "(";
    for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "," : "") + std::to_string(hidden[i]);
    return s + ")";
  }
};

struct GridResult {
  GridCell cell;
  std::size_t grid_index = 0;
  CvResult cv;
};

/// Evaluates every cell with kfold_cv (same folds for all cells) and sorts
/// by mean R² descending; ties keep grid order.
inline std::vector<GridResult> grid_search(const Dataset& data, const std::vector<GridCell>& grid,
                                           std::size_t k, std::uint64_t seed,
                                           TrainOptions base = {}) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  std::vector<GridResult> results;
  results.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TrainOptions options = base;
    options.learning_rate = grid[i].learning_rate;
    options.seed = seed;
    const MlpSpec spec = grid[i].spec(static_cast<std::size_t>(data.inputs.cols()),
                                      static_cast<std::size_t>(data.targets.cols()));
    results.push_back({grid[i], i, kfold_cv(data, k, spec, options)});
  }
  std::stable_sort(results.begin(), results.end(), [](const GridResult& a, const GridResult& b) {
    return a.cv.mean_r2 > b.cv.mean_r2;
  });
  return results;
}

/// Architecture × learning-rate × activation grid searched for the
/// transition model.
inline std::vector<GridCell> full_transition_grid() {
  const std::vector<std::vector<std::size_t>> archs = {{32, 32},   {32, 32, 32}, {64, 64},
                                                       {128, 128}, {256, 256},   {512, 512}};
  std::vector<GridCell> grid;
  for (const auto& arch : archs) {
    for (double lr : {1e-2, 5e-3, 1e-3}) {
      for (Activation a : {Activation::relu, Activation::tanh}) grid.push_back({arch, lr, a});
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// JSON persistence

inline nlohmann::json to_json(const MlpParams& params) {
  const MlpSpec& spec = params.spec();
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const auto w = params.weight(l);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j) row[static_cast<std::size_t>(j)] = w(i, j);
      rows.push_back(row);
    }
    const auto b = params.bias(l);
    layers.push_back({{"weights", rows}, {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  return {{"layer_sizes", spec.layer_sizes},
          {"hidden_activation", to_string(spec.hidden_activation)},
          {"output_activation", to_string(spec.output_activation)},
          {"layers", layers}};
}

inline MlpParams mlp_from_json(const nlohmann::json& j) {
  MlpSpec spec;
  spec.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  spec.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
  spec.output_activation = activation_from_string(j.at("output_activation").get<std::string>());
  MlpParams params(spec);
  const auto& layers = j.at("layers");
  if (layers.size() != spec.layers()) throw std::invalid_argument("mlp json: layer count mismatch");
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    auto w = params.weight(l);
    const auto& rows = layers[l].at("weights");
    const auto bias = layers[l].at("bias").get<std::vector<double>>();
    if (rows.size() != static_cast<std::size_t>(w.rows()) || bias.size() != static_cast<std::size_t>(w.rows())) {
      throw std::invalid_argument("mlp json: layer shape mismatch");
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
      if (row.size() != static_cast<std::size_t>(w.cols())) throw std::invalid_argument("mlp json: row width mismatch");
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(i, c) = row[static_cast<std::size_t>(c)];
    }
    params.bias(l) = Eigen::Map<const Vector>(bias.data(), static_cast<Eigen::Index>(bias.size()));
  }
  return params;
}

}  // namespace ftc::nn
