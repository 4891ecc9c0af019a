#include "laneracer/train.hpp"

#include <chrono>
#include <cmath>

#include "laneracer/adam.hpp"
#include "laneracer/error.hpp"
#include "laneracer/rng.hpp"

namespace lr::harness {

namespace {

models::PreprocessSpec crop_for(const models::ModelSpec& spec, const data::Dataset& ds) {
  return models::preprocess_spec(spec, ds.manifest.horizon_row);
}

struct SampleView {
  bool mirrored = false;
  bool jitter = false;
  std::uint64_t seed = 0;
};

// Preprocessed input with optional augmentation. All frames of one window
// share the mirror decision and brightness scale.
nn::Tensor build_input(const models::ModelSpec& spec, const data::Dataset& ds, std::size_t index,
                       const SampleView& view) {
  const auto pp = crop_for(spec, ds);
  double scale = 1.0;
  if (view.jitter) {
    Rng r(derive_seed(view.seed, 0));
    scale = r.uniform(0.8, 1.2);
  }
  auto prepare = [&](std::size_t i, std::uint64_t k) {
    const ImageFrame* f = &ds.samples[i].frame;
    ImageFrame tmp;
    if (view.jitter) {
      Rng r(derive_seed(view.seed, k + 1));
      tmp = data::augment_frame(*f, r, {scale, scale, 4.0});
      f = &tmp;
    }
    if (view.mirrored) {
      tmp = data::mirror_frame(*f);
      f = &tmp;
    }
    return models::preprocess(*f, pp);
  };
  if (spec.input_kind == models::InputKind::single_frame) return prepare(index, 0);
  const auto win = data::sequence_window(ds, index);
  nn::Tensor out({models::kSequenceLength, spec.height, spec.width, 3});
  const std::size_t n = spec.height * spec.width * 3;
  for (std::size_t k = 0; k < win.size(); ++k) {
    const nn::Tensor f = prepare(win[k], k);
    std::copy_n(f.ptr(), n, out.ptr() + k * n);
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

nn::Tensor assemble_input(const models::ModelSpec& spec, const data::Dataset& ds, std::size_t index) {
  if (index >= ds.size()) fail(ErrorCode::invalid_argument, "sample index out of range");
  return build_input(spec, ds, index, {});
}

std::pair<double, double> normalized_label(const data::Dataset& ds, std::size_t index) {
  const auto& s = ds.samples.at(index);
  return models::normalize({s.v, s.w}, ds.manifest.limits);
}

InternalMetrics evaluate_internal(const models::ModelSpec& spec, const models::ModelWeights& weights,
                                  const data::Dataset& ds, const std::vector<std::size_t>& indices) {
  if (indices.empty()) fail(ErrorCode::invalid_argument, "evaluate_internal: empty split");
  spec.network.check_params(weights.params);
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i : indices) {
    const nn::Tensor out = spec.network.forward(weights.params, assemble_input(spec, ds, i));
    const auto [v, w] = normalized_label(ds, i);
    const double dv = out[0] - v, dw = out[1] - w;
    abs_sum += std::abs(dv) + std::abs(dw);
    sq_sum += dv * dv + dw * dw;
  }
  const double n = 2.0 * static_cast<double>(indices.size());
  return {abs_sum / n, sq_sum / n};
}

TrainResult train_on(const models::ModelSpec& spec, const data::Dataset& ds, const std::vector<std::size_t>& train_idx,
                     const std::vector<std::size_t>& val_idx, const TrainHyper& hyper, const EpochCallback& on_epoch) {
  if (ds.size() == 0 || train_idx.empty()) fail(ErrorCode::invalid_argument, "train: dataset is empty");
  if (hyper.epochs < 0) fail(ErrorCode::invalid_argument, "train: epochs must be >= 0");
  if (hyper.batch == 0) fail(ErrorCode::invalid_argument, "train: batch must be >= 1");
  if (!(hyper.lr > 0.0)) fail(ErrorCode::invalid_argument, "train: learning rate must be positive");
  const auto pp = crop_for(spec, ds);
  if (pp.horizon_row >= ds.manifest.height) fail(ErrorCode::shape_mismatch, "train: dataset horizon leaves no image");

  TrainResult res;
  res.weights = models::init_weights(spec, derive_seed(hyper.seed, 1));
  const std::vector<std::size_t>& val = val_idx.empty() ? train_idx : val_idx;

  auto t0 = std::chrono::steady_clock::now();
  res.history.initial.epoch = 0;
  res.history.initial.train = evaluate_internal(spec, res.weights, ds, train_idx);
  res.history.initial.val = evaluate_internal(spec, res.weights, ds, val);
  res.history.initial.seconds = seconds_since(t0);
  if (on_epoch) on_epoch(res.history.initial);

  nn::AdamState adam(res.weights.params, {hyper.lr});
  std::vector<std::size_t> order = train_idx;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    t0 = std::chrono::steady_clock::now();
    Rng shuffle(derive_seed(hyper.seed, 2, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(i + 1)]);

    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t end = std::min(order.size(), start + hyper.batch);
      std::vector<nn::Tensor> inputs;
      inputs.reserve(end - start);
      nn::Tensor targets({end - start, 2});
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t idx = order[b];
        const std::uint64_t s = derive_seed(hyper.seed, 3 + static_cast<std::uint64_t>(epoch), idx);
        Rng draw(s);
        SampleView view;
        view.mirrored = hyper.mirror && draw.bernoulli(0.5);
        view.jitter = hyper.photometric;
        view.seed = derive_seed(s, 7);
        inputs.push_back(build_input(spec, ds, idx, view));
        const auto [v, w] = normalized_label(ds, idx);
        targets[2 * (b - start)] = v;
        targets[2 * (b - start) + 1] = view.mirrored ? -w : w;
      }
      try {
        const nn::BackwardResult r = nn::backward(spec.network, res.weights.params, inputs, targets);
        nn::adam_step(res.weights.params, r.grads, adam);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::numeric) throw;
        fail(ErrorCode::numeric, "train: epoch " + std::to_string(epoch) + ", batch starting at " +
                                     std::to_string(start) + ": " + e.what());
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train = evaluate_internal(spec, res.weights, ds, train_idx);
    rec.val = evaluate_internal(spec, res.weights, ds, val);
    rec.seconds = seconds_since(t0);
    res.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return res;
}

TrainResult train(const models::ModelSpec& spec, const data::Dataset& ds, const TrainHyper& hyper,
                  const EpochCallback& on_epoch) {
  if (ds.size() == 0) fail(ErrorCode::invalid_argument, "train: dataset is empty");
  const data::Split sp = data::split(ds.manifest, hyper.val_fraction, hyper.seed);
  TrainResult r = train_on(spec, ds, data::sample_indices(ds.manifest, sp.train),
                           data::sample_indices(ds.manifest, sp.val), hyper, on_epoch);
  r.history.split = sp;
  return r;
}

}  // namespace lr::harness
