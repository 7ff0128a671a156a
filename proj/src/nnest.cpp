#include "pcest/nnest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "binary_io.hpp"
#include "pcest/parallel.hpp"
#include "pcest/simd/kernels.hpp"

namespace pcest::nnest {

namespace {

template <class Real>
void vaxpy(Real a, const Real* x, Real* y, int n) {
  simd::axpy(a, std::span<const Real>(x, n), std::span<Real>(y, n));
}

template <class Real>
Real vdot(const Real* x, const Real* y, int n) {
  return simd::dot(std::span<const Real>(x, n), std::span<const Real>(y, n));
}

template <class Real>
using Activations = std::vector<std::vector<Real>>;

template <class Real>
void forward_into(const DenseStack<Real>& net, const SparseHistogram& x, Activations<Real>& act) {
  act.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    auto& a = act[l];
    a.assign(layer.biases.begin(), layer.biases.end());
    if (l == 0) {
      for (std::size_t k = 0; k < x.bins.size(); ++k)
        vaxpy(static_cast<Real>(x.counts[k]), &layer.weights[std::size_t{x.bins[k]} * layer.out],
              a.data(), layer.out);
    } else {
      const auto& prev = act[l - 1];
      for (int i = 0; i < layer.in; ++i)
        if (prev[i] != Real(0))
          vaxpy(prev[i], &layer.weights[std::size_t(i) * layer.out], a.data(), layer.out);
    }
    if (layer.activation == Activation::relu)
      for (Real& v : a) v = std::max(v, Real(0));
  }
}

// Back-propagates dL/d(output) of one sample and adds the parameter gradient
// into grad.
template <class Real>
void backward_into(const DenseStack<Real>& net, const SparseHistogram& x,
                   const Activations<Real>& act, std::vector<Real> delta, DenseStack<Real>& grad) {
  std::vector<Real> next;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    auto& g = grad.layers[l];
    if (layer.activation == Activation::relu)
      for (int j = 0; j < layer.out; ++j)
        if (act[l][j] <= Real(0)) delta[j] = Real(0);
    for (int j = 0; j < layer.out; ++j) g.biases[j] += delta[j];
    if (l == 0) {
      for (std::size_t k = 0; k < x.bins.size(); ++k)
        vaxpy(static_cast<Real>(x.counts[k]), delta.data(),
              &g.weights[std::size_t{x.bins[k]} * layer.out], layer.out);
      break;
    }
    const auto& prev = act[l - 1];
    const bool prev_relu = net.layers[l - 1].activation == Activation::relu;
    next.assign(layer.in, Real(0));
    for (int i = 0; i < layer.in; ++i) {
      const Real* row = &layer.weights[std::size_t(i) * layer.out];
      if (!(prev_relu && prev[i] <= Real(0))) next[i] = vdot(row, delta.data(), layer.out);
      if (prev[i] != Real(0))
        vaxpy(prev[i], delta.data(), &g.weights[std::size_t(i) * layer.out], layer.out);
    }
    delta.swap(next);
  }
}

template <class Real>
DenseStack<Real> zeros_like(const DenseStack<Real>& net) {
  DenseStack<Real> z = net;
  for (auto& l : z.layers) {
    std::fill(l.weights.begin(), l.weights.end(), Real(0));
    std::fill(l.biases.begin(), l.biases.end(), Real(0));
  }
  return z;
}

// Sum over the selected samples of the per-entry squared log error; adds the
// gradient of (that sum / norm) into grad when grad is non-null.
template <class Real>
double accumulate(const DenseStack<Real>& net, std::span<const SparseHistogram> features,
                  std::span<const double> targets, std::span<const std::size_t> index,
                  double norm, DenseStack<Real>* grad) {
  const int out = net.output_dim();
  Activations<Real> act;
  std::vector<Real> dout(out);
  double loss = 0.0;
  for (std::size_t s : index) {
    forward_into(net, features[s], act);
    const auto& pred = act.back();
    for (int o = 0; o < out; ++o) {
      const double p = static_cast<double>(pred[o]);
      const double d = std::log1p(targets[s * out + o]) - std::log1p(std::max(p, 0.0));
      loss += d * d;
      dout[o] = p > 0.0 ? static_cast<Real>(-2.0 * d / (1.0 + p) / norm) : Real(0);
    }
    if (grad) backward_into(net, features[s], act, dout, *grad);
  }
  return loss;
}

template <class Real>
void add_into(DenseStack<Real>& acc, const DenseStack<Real>& g) {
  for (std::size_t l = 0; l < acc.layers.size(); ++l) {
    auto& a = acc.layers[l];
    const auto& b = g.layers[l];
    for (std::size_t k = 0; k < a.weights.size(); ++k) a.weights[k] += b.weights[k];
    for (std::size_t k = 0; k < a.biases.size(); ++k) a.biases[k] += b.biases[k];
  }
}

// Splits `index` into `threads` contiguous chunks and reduces their losses and
// gradients in chunk order.
template <class Real>
double accumulate_parallel(const DenseStack<Real>& net, std::span<const SparseHistogram> features,
                           std::span<const double> targets, std::span<const std::size_t> index,
                           double norm, DenseStack<Real>* grad, std::size_t threads) {
  threads = std::max<std::size_t>(1, std::min(threads, index.size()));
  if (threads == 1) return accumulate(net, features, targets, index, norm, grad);
  const std::size_t chunk = (index.size() + threads - 1) / threads;
  std::vector<double> losses(threads, 0.0);
  std::vector<DenseStack<Real>> grads(grad ? threads : 0);
  parallel_for(threads, threads, [&](std::size_t t) {
    const std::size_t lo = std::min(index.size(), t * chunk);
    const std::size_t hi = std::min(index.size(), lo + chunk);
    DenseStack<Real>* g = nullptr;
    if (grad) {
      grads[t] = zeros_like(net);
      g = &grads[t];
    }
    losses[t] = accumulate(net, features, targets, index.subspan(lo, hi - lo), norm, g);
  });
  double loss = 0.0;
  for (std::size_t t = 0; t < threads; ++t) {
    loss += losses[t];
    if (grad) add_into(*grad, grads[t]);
  }
  return loss;
}

const trajsim::Interval& axis_support(const trajsim::ParameterBox& box, int o) {
  return o == 0 ? box.delta : *box.omega;
}

}  // namespace

int HistogramSpec::bin_of(double tau) const {
  if (!(tau >= tau_min && tau <= tau_max)) return -1;
  const int b = static_cast<int>(std::floor((tau - tau_min) / width()));
  return std::min(b, n_bins - 1);
}

void validate(const HistogramSpec& spec) {
  if (spec.n_bins < 1) throw DomainError("histogram: n_bins must be >= 1");
  if (!std::isfinite(spec.tau_min) || !std::isfinite(spec.tau_max) || !(spec.tau_max > spec.tau_min))
    throw DomainError("histogram: need finite tau_min < tau_max");
}

std::vector<float> histogram_features(std::span<const double> delays, const HistogramSpec& spec) {
  validate(spec);
  std::vector<float> h(static_cast<std::size_t>(spec.n_bins), 0.0f);
  for (double t : delays) {
    const int b = spec.bin_of(t);
    if (b >= 0) h[b] += 1.0f;
  }
  return h;
}

SparseHistogram sparse_histogram(std::span<const double> delays, const HistogramSpec& spec) {
  validate(spec);
  std::vector<std::uint32_t> bins;
  bins.reserve(delays.size());
  for (double t : delays) {
    const int b = spec.bin_of(t);
    if (b >= 0) bins.push_back(static_cast<std::uint32_t>(b));
  }
  std::sort(bins.begin(), bins.end());
  SparseHistogram s;
  for (std::size_t k = 0; k < bins.size();) {
    std::size_t e = k;
    while (e < bins.size() && bins[e] == bins[k]) ++e;
    s.bins.push_back(bins[k]);
    s.counts.push_back(static_cast<float>(e - k));
    k = e;
  }
  return s;
}

template <class Real>
std::size_t DenseStack<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

template <class Real>
DenseStack<Real> make_stack(std::span<const int> widths) {
  if (widths.size() < 2) throw DomainError("make_stack: need at least input and output widths");
  DenseStack<Real> s;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    if (in < 1 || out < 1) throw DomainError("make_stack: widths must be positive");
    const bool last = l + 2 == widths.size();
    s.layers.push_back({in, out, last ? Activation::linear : Activation::relu,
                        std::vector<Real>(std::size_t(in) * out, Real(0)),
                        std::vector<Real>(out, Real(0))});
  }
  return s;
}

template <class Real>
std::vector<Real> forward(const DenseStack<Real>& net, const SparseHistogram& x) {
  for (auto b : x.bins)
    if (static_cast<int>(b) >= net.input_dim()) throw DomainError("forward: bin out of range");
  Activations<Real> act;
  forward_into(net, x, act);
  return act.back();
}

template <class Real>
double loss_and_gradient(const DenseStack<Real>& net, std::span<const SparseHistogram> batch,
                         std::span<const double> targets, DenseStack<Real>* grad) {
  const std::size_t out = static_cast<std::size_t>(net.output_dim());
  if (batch.empty() || targets.size() != batch.size() * out)
    throw DomainError("loss_and_gradient: batch and targets do not match");
  if (grad) *grad = zeros_like(net);
  std::vector<std::size_t> index(batch.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  const double norm = static_cast<double>(batch.size() * out);
  return accumulate(net, batch, targets, index, norm, grad) / norm;
}

template std::size_t DenseStack<float>::parameter_count() const;
template std::size_t DenseStack<double>::parameter_count() const;
template DenseStack<float> make_stack<float>(std::span<const int>);
template DenseStack<double> make_stack<double>(std::span<const int>);
template std::vector<float> forward(const DenseStack<float>&, const SparseHistogram&);
template std::vector<double> forward(const DenseStack<double>&, const SparseHistogram&);
template double loss_and_gradient(const DenseStack<float>&, std::span<const SparseHistogram>,
                                  std::span<const double>, DenseStack<float>*);
template double loss_and_gradient(const DenseStack<double>&, std::span<const SparseHistogram>,
                                  std::span<const double>, DenseStack<double>*);

std::string to_string(Arch a) { return a == Arch::d1 ? "1d" : "2d"; }

Arch arch_from_string(const std::string& s) {
  if (s == "1d") return Arch::d1;
  if (s == "2d") return Arch::d2;
  throw DomainError("unknown architecture '" + s + "' (expected 1d or 2d)");
}

std::vector<int> layer_widths(Arch a, int n_bins) {
  if (a == Arch::d1) return {n_bins, 100, 50, 30, 1};
  return {n_bins, 100, 50, 30, 20, 10, 2};
}

HistDenseModel make_model(Arch a, const trajsim::ParameterBox& support, int n_clicks,
                          const HistogramSpec& hist) {
  validate(hist);
  trajsim::validate(support);
  if (support.n_params() != static_cast<int>(a))
    throw DomainError("make_model: support box dimension does not match the architecture");
  if (n_clicks < 1) throw DomainError("make_model: n_clicks must be >= 1");
  HistDenseModel m;
  m.hist = hist;
  m.arch = a;
  m.n_clicks = n_clicks;
  m.support = support;
  const auto widths = layer_widths(a, hist.n_bins);
  m.net = make_stack<float>(widths);
  return m;
}

void glorot_init(DenseStack<float>& net, Rng& rng) {
  for (auto& l : net.layers) {
    const double limit = std::sqrt(6.0 / (l.in + l.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (float& w : l.weights) w = static_cast<float>(dist(rng));
    std::fill(l.biases.begin(), l.biases.end(), 0.0f);
  }
}

void he_init(DenseStack<float>& net, Rng& rng) {
  for (auto& l : net.layers) {
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / l.in), std::sqrt(6.0 / l.in));
    for (float& w : l.weights) w = static_cast<float>(dist(rng));
    std::fill(l.biases.begin(), l.biases.end(), 0.0f);
  }
}

void initialize(DenseStack<float>& net, const std::string& scheme, Rng& rng) {
  if (scheme == "glorot-uniform") glorot_init(net, rng);
  else if (scheme == "he-uniform") he_init(net, rng);
  else throw DomainError("unknown initialization '" + scheme + "'");
}

bayes::Estimate forward(const HistDenseModel& model, std::span<const double> delays) {
  if (delays.size() != static_cast<std::size_t>(model.n_clicks))
    throw DomainError("forward: record has " + std::to_string(delays.size()) +
                      " delays, model expects " + std::to_string(model.n_clicks));
  const auto raw = forward(model.net, sparse_histogram(delays, model.hist));
  bayes::Estimate e;
  e.method = bayes::EstimateMethod::nn;
  for (int o = 0; o < static_cast<int>(raw.size()); ++o) {
    const auto& iv = axis_support(model.support, o);
    e.values.push_back(std::clamp(static_cast<double>(raw[o]), iv.lo, iv.hi));
  }
  return e;
}

std::vector<bayes::Estimate> predict(const HistDenseModel& model,
                                     std::span<const DelayRecord> records, std::size_t threads) {
  std::vector<bayes::Estimate> out(records.size());
  parallel_for(records.size(), threads,
               [&](std::size_t i) { out[i] = forward(model, records[i].delays); });
  return out;
}

double msle_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty())
    throw DomainError("msle_loss: pred and target must be non-empty and equally long");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (!(target[k] >= 0.0)) throw DomainError("msle_loss: targets must be >= 0");
    const double d = std::log1p(target[k]) - std::log1p(std::max(pred[k], 0.0));
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

std::vector<double> add_target_noise(std::span<const double> targets, double sigma_y,
                                     const trajsim::Interval& support, Rng& rng) {
  if (!(sigma_y >= 0.0) || !std::isfinite(sigma_y))
    throw DomainError("add_target_noise: sigma_y must be finite and >= 0");
  std::vector<double> out(targets.begin(), targets.end());
  if (sigma_y == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma_y);
  for (double& y : out) y = std::clamp(y + noise(rng), support.lo, support.hi);
  return out;
}

TrainResult train(const trajsim::Dataset& data, const TrainConfig& cfg, Arch arch) {
  const auto& box = data.meta.box;
  const std::size_t n = data.records.size();
  const int out = static_cast<int>(arch);
  if (n == 0) throw DomainError("train: empty dataset");
  if (box.n_params() != out)
    throw DomainError("train: dataset dimension does not match the architecture");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0))
    throw DomainError("train: train_fraction must be in (0, 1]");
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
    throw DomainError("train: epochs, batch_size and learning_rate must be positive");
  const std::size_t n_train =
      std::max<std::size_t>(1, static_cast<std::size_t>(cfg.train_fraction * n));
  if (cfg.batch_size > n_train) throw DomainError("train: batch_size exceeds the training split");

  TrainResult result;
  auto& model = result.model;
  model = make_model(arch, box, data.meta.n_clicks);

  std::vector<SparseHistogram> features(n);
  std::vector<double> targets(n * out);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = data.records[r];
    if (rec.delays.size() != static_cast<std::size_t>(model.n_clicks) || !rec.truth)
      throw DomainError("train: every record needs a truth and n_clicks delays");
    if (!box.contains(*rec.truth)) throw DomainError("train: truth outside the support box");
    features[r] = sparse_histogram(rec.delays, model.hist);
    targets[r * out] = rec.truth->delta;
    if (out == 2) targets[r * out + 1] = rec.truth->omega;
  }

  auto noise_rng = child_rng(cfg.seed, 0, 2);
  for (int o = 0; o < out; ++o) {
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n; ++r) column[r] = targets[r * out + o];
    column = add_target_noise(column, cfg.sigma_y, axis_support(box, o), noise_rng);
    for (std::size_t r = 0; r < n; ++r) targets[r * out + o] = column[r];
  }

  auto init_rng = child_rng(cfg.seed, 0, 1);
  initialize(model.net, cfg.init, init_rng);
  model.init = cfg.init;
  for (int o = 0; o < out; ++o) {
    double mean_log = 0.0;
    for (std::size_t r = 0; r < n_train; ++r) mean_log += std::log1p(targets[r * out + o]);
    model.net.layers.back().biases[o] = static_cast<float>(std::expm1(mean_log / n_train));
  }

  DenseStack<float> m1 = zeros_like(model.net), m2 = m1, grad = m1;
  std::vector<std::size_t> order(n_train), val(n - n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::iota(val.begin(), val.end(), n_train);
  auto shuffle_rng = child_rng(cfg.seed, 0, 3);

  std::uint64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t lo = 0; lo < n_train; lo += cfg.batch_size) {
      const std::size_t hi = std::min(n_train, lo + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + lo, hi - lo);
      for (auto& l : grad.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0f);
        std::fill(l.biases.begin(), l.biases.end(), 0.0f);
      }
      const double norm = static_cast<double>(batch.size() * out);
      const double loss = accumulate_parallel(model.net, std::span<const SparseHistogram>(features),
                                              targets, batch, norm, &grad, cfg.threads);
      if (!std::isfinite(loss)) throw NumericalError("train: loss diverged (non-finite)");
      epoch_loss += loss;

      ++step;
      const double c1 = 1.0 / (1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step)));
      const double c2 = 1.0 / (1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step)));
      const float b1 = static_cast<float>(cfg.adam_beta1), b2 = static_cast<float>(cfg.adam_beta2);
      auto update = [&](std::vector<float>& w, std::vector<float>& m, std::vector<float>& v,
                        const std::vector<float>& g) {
        for (std::size_t k = 0; k < w.size(); ++k) {
          m[k] = b1 * m[k] + (1.0f - b1) * g[k];
          v[k] = b2 * v[k] + (1.0f - b2) * g[k] * g[k];
          const double mh = m[k] * c1, vh = v[k] * c2;
          w[k] -= static_cast<float>(cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_eps));
        }
      };
      for (std::size_t l = 0; l < model.net.layers.size(); ++l) {
        auto& layer = model.net.layers[l];
        update(layer.weights, m1.layers[l].weights, m2.layers[l].weights, grad.layers[l].weights);
        update(layer.biases, m1.layers[l].biases, m2.layers[l].biases, grad.layers[l].biases);
      }
    }
    result.history.train_msle.push_back(epoch_loss / static_cast<double>(n_train * out));
    if (val.empty()) {
      result.history.val_msle.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      const double norm = static_cast<double>(val.size() * out);
      result.history.val_msle.push_back(
          accumulate_parallel(model.net, std::span<const SparseHistogram>(features), targets,
                              std::span<const std::size_t>(val), norm, static_cast<DenseStack<float>*>(nullptr), cfg.threads) /
          norm);
    }
  }
  return result;
}

void write_model(const std::filesystem::path& path, const HistDenseModel& model) {
  using namespace detail;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  const auto& s = model.support;
  put_magic(os, "HDNN");
  put_le<std::uint16_t>(os, kModelFormatVersion);
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(model.arch));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(model.n_clicks));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.hist.n_bins));
  put_f64(os, model.hist.tau_min);
  put_f64(os, model.hist.tau_max);
  put_f64(os, s.delta.lo);
  put_f64(os, s.delta.hi);
  put_le<std::uint8_t>(os, s.omega ? 1 : 0);
  put_f64(os, s.omega ? s.omega->lo : 0.0);
  put_f64(os, s.omega ? s.omega->hi : 0.0);
  put_f64(os, s.fixed_omega);
  put_f64(os, s.gamma);
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(model.init.size()));
  os.write(model.init.data(), static_cast<std::streamsize>(model.init.size()));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(model.net.layers.size()));
  for (const auto& l : model.net.layers) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.in));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.out));
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(l.activation));
    for (float w : l.weights) put_f32(os, w);
    for (float b : l.biases) put_f32(os, b);
  }
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

HistDenseModel read_model(const std::filesystem::path& path) {
  using namespace detail;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  expect_magic(is, "HDNN", "model");
  const auto version = get_le<std::uint16_t>(is, "version");
  if (version != kModelFormatVersion)
    throw FormatError("model format version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
  HistDenseModel m;
  const auto arch = get_le<std::uint8_t>(is, "arch");
  if (arch != 1 && arch != 2) throw FormatError("model: unknown architecture tag");
  m.arch = static_cast<Arch>(arch);
  m.n_clicks = get_le<std::uint16_t>(is, "n_clicks");
  m.hist.n_bins = static_cast<int>(get_le<std::uint32_t>(is, "n_bins"));
  m.hist.tau_min = get_f64(is, "tau_min");
  m.hist.tau_max = get_f64(is, "tau_max");
  auto& s = m.support;
  s.delta.lo = get_f64(is, "delta_lo");
  s.delta.hi = get_f64(is, "delta_hi");
  const bool has_omega = get_le<std::uint8_t>(is, "has_omega") != 0;
  const double olo = get_f64(is, "omega_lo");
  const double ohi = get_f64(is, "omega_hi");
  if (has_omega) s.omega = trajsim::Interval{olo, ohi};
  else s.omega.reset();
  s.fixed_omega = get_f64(is, "fixed_omega");
  s.gamma = get_f64(is, "gamma");
  m.init.resize(get_le<std::uint16_t>(is, "init length"));
  if (!is.read(m.init.data(), static_cast<std::streamsize>(m.init.size())))
    throw FormatError("truncated file while reading init");
  try {
    validate(m.hist);
    trajsim::validate(s);
  } catch (const DomainError& e) {
    throw FormatError(std::string("model: invalid header: ") + e.what());
  }
  if (s.n_params() != arch) throw FormatError("model: support does not match the architecture");

  const auto n_layers = get_le<std::uint16_t>(is, "n_layers");
  const auto expected = layer_widths(m.arch, m.hist.n_bins);
  if (n_layers + 1u != expected.size()) throw FormatError("model: unexpected layer count");
  for (std::size_t l = 0; l < n_layers; ++l) {
    DenseLayer<float> layer;
    layer.in = static_cast<int>(get_le<std::uint32_t>(is, "layer in"));
    layer.out = static_cast<int>(get_le<std::uint32_t>(is, "layer out"));
    const auto act = get_le<std::uint8_t>(is, "activation");
    if (layer.in != expected[l] || layer.out != expected[l + 1] || act > 1)
      throw FormatError("model: layer shape does not match the architecture");
    layer.activation = static_cast<Activation>(act);
    layer.weights.resize(std::size_t(layer.in) * layer.out);
    layer.biases.resize(layer.out);
    for (float& w : layer.weights) w = get_f32(is, "weights");
    for (float& b : layer.biases) b = get_f32(is, "biases");
    m.net.layers.push_back(std::move(layer));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("model: trailing bytes");
  return m;
}

void write_loss_csv(const std::filesystem::path& path, const TrainHistory& h) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(10) << "epoch,train_msle,val_msle\n";
  for (std::size_t e = 0; e < h.train_msle.size(); ++e)
    os << e + 1 << ',' << h.train_msle[e] << ',' << h.val_msle[e] << '\n';
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pcest::nnest
