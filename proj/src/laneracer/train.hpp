#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "laneracer/dataset.hpp"
#include "laneracer/models.hpp"

namespace lr::harness {

struct TrainHyper {
  int epochs = 30;
  std::size_t batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double val_fraction = 0.25;
  bool mirror = true;       // horizontal flip with probability 0.5, w negated
  bool photometric = true;  // brightness scale and pixel jitter
};

struct InternalMetrics {
  double mae = 0.0;
  double mse = 0.0;
  friend bool operator==(const InternalMetrics&, const InternalMetrics&) = default;
};

struct EpochRecord {
  int epoch = 0;  // 0 = before any update
  InternalMetrics train;
  InternalMetrics val;
  double seconds = 0.0;
};

struct TrainHistory {
  EpochRecord initial;
  std::vector<EpochRecord> epochs;
  data::Split split;
};

struct TrainResult {
  TrainHistory history;
  models::ModelWeights weights;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Network input for sample `index`: the newest frame, or the 3-frame window
// of sequence models, cropped at the dataset horizon and resized.
nn::Tensor assemble_input(const models::ModelSpec& spec, const data::Dataset& ds, std::size_t index);

// Normalized (v, w) targets of one sample.
std::pair<double, double> normalized_label(const data::Dataset& ds, std::size_t index);

// Metrics over normalized labels; never simulates.
InternalMetrics evaluate_internal(const models::ModelSpec& spec, const models::ModelWeights& weights,
                                  const data::Dataset& ds, const std::vector<std::size_t>& indices);

// Adam on mean-squared error. Fully determined by (spec, dataset, hyper).
TrainResult train(const models::ModelSpec& spec, const data::Dataset& ds, const TrainHyper& hyper,
                  const EpochCallback& on_epoch = {});

// Same loop on an explicit index set with no validation split (val metrics mirror train).
TrainResult train_on(const models::ModelSpec& spec, const data::Dataset& ds, const std::vector<std::size_t>& train_idx,
                     const std::vector<std::size_t>& val_idx, const TrainHyper& hyper,
                     const EpochCallback& on_epoch = {});

}  // namespace lr::harness
