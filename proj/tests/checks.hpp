#pragma once

// Checks shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcest/nnest.hpp"
#include "pcest/trajsim.hpp"

namespace checks {

struct GradientCheck {
  double worst_relative_error = 0.0;
  std::size_t coordinates = 0;
};

// Back-propagated MSLE gradient of a Glorot-initialized 1D stack in double
// precision against central differences with a relative step of 1e-4.
// Coordinates are drawn among parameters the batch can reach: every weight
// of the hidden and output layers, and first-layer rows of occupied bins.
inline GradientCheck gradient_check(std::size_t n_coords, std::uint64_t seed) {
  using namespace pcest;
  const auto ds = trajsim::generate_dataset(trajsim::ParameterBox::training_1d(), 16, 48, {}, seed);
  std::vector<nnest::SparseHistogram> batch;
  std::vector<double> targets;
  for (const auto& r : ds.records) {
    batch.push_back(nnest::sparse_histogram(r.delays));
    targets.push_back(r.truth->delta);
  }
  auto model = nnest::make_model(nnest::Arch::d1, trajsim::ParameterBox::training_1d());
  Rng init = child_rng(seed, 0, 1);
  nnest::glorot_init(model.net, init);
  model.net.layers.back().biases[0] = 2.0f;
  auto net = model.net.cast<double>();

  nnest::DenseStack<double> grad;
  nnest::loss_and_gradient<double>(net, batch, targets, &grad);

  struct Coord {
    std::size_t layer;
    bool bias;
    std::size_t index;
  };
  std::vector<Coord> pool;
  std::vector<bool> occupied(700, false);
  for (const auto& b : batch)
    for (auto bin : b.bins) occupied[bin] = true;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    for (std::size_t k = 0; k < layer.weights.size(); ++k)
      if (l > 0 || occupied[k / static_cast<std::size_t>(layer.out)]) pool.push_back({l, false, k});
    for (std::size_t k = 0; k < layer.biases.size(); ++k) pool.push_back({l, true, k});
  }

  Rng pick = child_rng(seed, 0, 9);
  GradientCheck out;
  for (std::size_t c = 0; c < n_coords; ++c) {
    const Coord co = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(pick)];
    auto& slot = co.bias ? net.layers[co.layer].biases[co.index]
                         : net.layers[co.layer].weights[co.index];
    const double analytic = co.bias ? grad.layers[co.layer].biases[co.index]
                                    : grad.layers[co.layer].weights[co.index];
    const double w0 = slot;
    const double h = 1e-4 * std::max(std::abs(w0), 1e-2);
    slot = w0 + h;
    const double lp = nnest::loss_and_gradient<double>(net, batch, targets, nullptr);
    slot = w0 - h;
    const double lm = nnest::loss_and_gradient<double>(net, batch, targets, nullptr);
    slot = w0;
    const double numeric = (lp - lm) / (2.0 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
    out.worst_relative_error = std::max(out.worst_relative_error, std::abs(analytic - numeric) / scale);
    ++out.coordinates;
  }
  return out;
}

}  // namespace checks
