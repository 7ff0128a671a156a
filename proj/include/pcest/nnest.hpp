#pragma once

// Hist-Dense estimator: a fixed histogram of the delays followed by a small
// dense relu network, trained from scratch with Adam on the MSLE loss.
//
// Weights are stored input-major: weights[i * out + j] connects input i to
// output j, so the row touched by one input is contiguous. The first layer
// sees at most n_clicks non-zero histogram bins, which the forward and
// backward passes exploit by walking only those rows.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pcest/bayes.hpp"
#include "pcest/rng.hpp"
#include "pcest/trajsim.hpp"

namespace pcest::nnest {

struct HistogramSpec {
  int n_bins = 700;
  double tau_min = 0.0;
  double tau_max = 100.0;

  bool operator==(const HistogramSpec&) const = default;
  double width() const { return (tau_max - tau_min) / n_bins; }
  /// Bin of tau, or -1 when tau lies outside [tau_min, tau_max]. tau_max
  /// itself falls in the last bin.
  int bin_of(double tau) const;
};

void validate(const HistogramSpec& spec);

/// Dense count vector of length n_bins (raw counts, not frequencies).
std::vector<float> histogram_features(std::span<const double> delays,
                                      const HistogramSpec& spec = {});

/// Non-zero bins of a histogram in ascending bin order.
struct SparseHistogram {
  std::vector<std::uint32_t> bins;
  std::vector<float> counts;
};

SparseHistogram sparse_histogram(std::span<const double> delays, const HistogramSpec& spec = {});

enum class Activation : std::uint8_t { relu = 0, linear = 1 };

template <class Real>
struct DenseLayer {
  int in = 0;
  int out = 0;
  Activation activation = Activation::relu;
  std::vector<Real> weights;  ///< in * out, input-major
  std::vector<Real> biases;   ///< out

  bool operator==(const DenseLayer&) const = default;
};

template <class Real>
struct DenseStack {
  std::vector<DenseLayer<Real>> layers;

  bool operator==(const DenseStack&) const = default;
  std::size_t parameter_count() const;
  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }

  template <class To>
  DenseStack<To> cast() const {
    DenseStack<To> s;
    for (const auto& l : layers)
      s.layers.push_back({l.in, l.out, l.activation,
                          std::vector<To>(l.weights.begin(), l.weights.end()),
                          std::vector<To>(l.biases.begin(), l.biases.end())});
    return s;
  }
};

/// Zero-initialized stack of the given widths; hidden layers relu, last linear.
template <class Real>
DenseStack<Real> make_stack(std::span<const int> widths);

/// Output of the stack for one sparse input, without clamping.
template <class Real>
std::vector<Real> forward(const DenseStack<Real>& net, const SparseHistogram& x);

/// Mean MSLE over all n * out entries of a batch and, if grad is non-null,
/// its gradient with respect to every weight and bias (grad is resized to the
/// shape of net). targets is row-major n x out.
template <class Real>
double loss_and_gradient(const DenseStack<Real>& net, std::span<const SparseHistogram> batch,
                         std::span<const double> targets, DenseStack<Real>* grad);

enum class Arch : std::uint8_t { d1 = 1, d2 = 2 };

std::string to_string(Arch a);
Arch arch_from_string(const std::string& s);  ///< "1d" or "2d"

/// Layer widths of the two architectures, input first.
std::vector<int> layer_widths(Arch a, int n_bins = 700);

struct HistDenseModel {
  HistogramSpec hist;
  Arch arch = Arch::d1;
  int n_clicks = 48;
  trajsim::ParameterBox support = trajsim::ParameterBox::training_1d();
  std::string init = "glorot-uniform";
  DenseStack<float> net;

  bool operator==(const HistDenseModel&) const = default;
  std::size_t parameter_count() const { return net.parameter_count(); }
  int output_dim() const { return net.output_dim(); }
};

/// Model with all weights and biases zero.
HistDenseModel make_model(Arch a, const trajsim::ParameterBox& support, int n_clicks = 48,
                          const HistogramSpec& hist = {});

/// Glorot-uniform weights, U(-l, l) with l = sqrt(6 / (in + out)); zero biases.
void glorot_init(DenseStack<float>& net, Rng& rng);
/// He-uniform weights, U(-l, l) with l = sqrt(6 / in); zero biases.
void he_init(DenseStack<float>& net, Rng& rng);
/// Dispatches on "glorot-uniform" or "he-uniform"; DomainError otherwise.
void initialize(DenseStack<float>& net, const std::string& scheme, Rng& rng);

/// Estimate for one record, clamped into the model's support box. Throws
/// DomainError when the record length differs from the model's n_clicks.
bayes::Estimate forward(const HistDenseModel& model, std::span<const double> delays);

/// Same as forward() over every record of a dataset.
std::vector<bayes::Estimate> predict(const HistDenseModel& model,
                                     std::span<const DelayRecord> records,
                                     std::size_t threads = 1);

/// mean_k (ln(1 + t_k) - ln(1 + max(p_k, 0)))^2. Throws DomainError for
/// negative targets or mismatched lengths.
double msle_loss(std::span<const double> pred, std::span<const double> target);

/// y + N(0, sigma_y) clamped into [support.lo, support.hi]; no draws when
/// sigma_y == 0.
std::vector<double> add_target_noise(std::span<const double> targets, double sigma_y,
                                     const trajsim::Interval& support, Rng& rng);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 12800;
  int epochs = 200;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double train_fraction = 0.8;
  double sigma_y = 0.0;  ///< target noise, drawn once per record
  std::uint64_t seed = 0;
  std::string init = "glorot-uniform";
  /// Workers per batch. Results depend on the thread count only through the
  /// floating-point order of the gradient reduction.
  std::size_t threads = 1;
};

struct TrainHistory {
  std::vector<double> train_msle;
  std::vector<double> val_msle;  ///< NaN when there is no validation split
};

struct TrainResult {
  HistDenseModel model;
  TrainHistory history;
};

/// Mini-batch Adam on the MSLE loss. The first train_fraction of the records
/// train, the rest validate; batches come from an epoch-wise shuffle. The
/// output bias starts at the log-mean of the training targets so the first
/// predictions sit inside the support, where the floored loss has a gradient.
/// Throws NumericalError if the loss becomes non-finite.
TrainResult train(const trajsim::Dataset& data, const TrainConfig& config, Arch arch);

inline constexpr std::uint16_t kModelFormatVersion = 1;

// Model file (little endian), version 1:
//   "HDNN" u16 version, u8 arch, u16 n_clicks, u32 n_bins, f64 tau_min,
//   f64 tau_max, f64 delta_lo, f64 delta_hi, u8 has_omega, f64 omega_lo,
//   f64 omega_hi, f64 fixed_omega, f64 gamma, u16 init length + bytes,
//   u16 n_layers, then per layer u32 in, u32 out, u8 activation,
//   in*out f32 weights, out f32 biases.
void write_model(const std::filesystem::path& path, const HistDenseModel& model);
HistDenseModel read_model(const std::filesystem::path& path);

/// Columns: epoch,train_msle,val_msle.
void write_loss_csv(const std::filesystem::path& path, const TrainHistory& h);

}  // namespace pcest::nnest
