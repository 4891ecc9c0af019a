// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)
// Exit status is the number of failing criteria.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "laneracer/error.hpp"
#include "laneracer/layers.hpp"
#include "laneracer/network.hpp"
#include "laneracer/report.hpp"
#include "laneracer/rng.hpp"
#include "laneracer/suite.hpp"
#include "laneracer/train.hpp"
#include "support/oracles.hpp"

using namespace lr;
using namespace lr::harness;
using nn::Padding;
using nn::Shape;
using nn::Tensor;

namespace {

// Tolerances and budgets.
constexpr double kOracleTol = 1e-9;
constexpr int kOracleInstances = 100;
constexpr double kGradStep = 1e-5;
constexpr double kGradTol = 1e-4;
constexpr int kGradInstances = 3;
constexpr std::size_t kMemMin = 820'000, kMemMax = 1'000'000;
constexpr double kTinyTarget = 62'000, kTinyRel = 0.20;
constexpr double kValReduction = 0.70;
constexpr double kOverfitMse = 1e-3;
constexpr double kSigmas = 4.0;
constexpr double kArcTol = 1e-6;

constexpr double kBudget1 = 30, kBudget2 = 120, kBudget4 = 120, kBudget5 = 1200;

const std::vector<std::string> kTrainCircuits{"simple_oval", "rounded_rectangle", "s_curve", "many_curves"};
constexpr std::uint64_t kSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.next_u64() % (hi - lo + 1); }

// ---- 1 ----

Outcome oracle_equivalence() {
  Rng rng(kSeed);
  double worst[4] = {0, 0, 0, 0};
  for (int n = 0; n < kOracleInstances; ++n) {
    {
      const std::size_t H = pick(rng, 3, 9), W = pick(rng, 3, 9), C = pick(rng, 1, 4), F = pick(rng, 1, 5);
      const std::size_t KH = pick(rng, 1, std::min<std::size_t>(H, 5)), KW = pick(rng, 1, std::min<std::size_t>(W, 5));
      const std::size_t sh = pick(rng, 1, 3), sw = pick(rng, 1, 3);
      const bool same = rng.bernoulli(0.5);
      const Tensor x = random_tensor({H, W, C}, rng), k = random_tensor({KH, KW, C, F}, rng),
                   b = random_tensor({F}, rng);
      const Tensor y = nn::conv2d(x, k, b, {sh, sw}, same ? Padding::same : Padding::valid);
      worst[0] = std::max(worst[0], nn::max_abs_diff(y, oracle::conv2d(x, k, b, sh, sw, same)));
    }
    {
      const std::size_t T = pick(rng, 1, 4), H = pick(rng, 3, 7), W = pick(rng, 3, 7), C = pick(rng, 1, 3),
                        F = pick(rng, 1, 4);
      const std::size_t KT = pick(rng, 1, T), KH = pick(rng, 1, std::min<std::size_t>(H, 3)),
                        KW = pick(rng, 1, std::min<std::size_t>(W, 3));
      const std::size_t st = pick(rng, 1, 2), sh = pick(rng, 1, 2), sw = pick(rng, 1, 2);
      const bool same = rng.bernoulli(0.5);
      const Tensor x = random_tensor({T, H, W, C}, rng), k = random_tensor({KT, KH, KW, C, F}, rng),
                   b = random_tensor({F}, rng);
      const Tensor y = nn::conv3d(x, k, b, {st, sh, sw}, same ? Padding::same : Padding::valid);
      worst[1] = std::max(worst[1], nn::max_abs_diff(y, oracle::conv3d(x, k, b, st, sh, sw, same)));
    }
    {
      const std::size_t N = pick(rng, 1, 40), M = pick(rng, 1, 20);
      const Tensor x = random_tensor({N}, rng), w = random_tensor({N, M}, rng), b = random_tensor({M}, rng);
      worst[2] = std::max(worst[2], nn::max_abs_diff(nn::dense(x, w, b), oracle::dense(x, w, b)));
    }
    {
      const std::size_t T = pick(rng, 1, 4), H = pick(rng, 2, 6), W = pick(rng, 2, 6), C = pick(rng, 1, 3),
                        F = pick(rng, 1, 4), K = rng.bernoulli(0.5) ? 3 : 1;
      const Tensor x = random_tensor({T, H, W, C}, rng, 2.0);
      const nn::ConvLstmWeights w{random_tensor({K, K, C, 4 * F}, rng, 0.7), random_tensor({K, K, F, 4 * F}, rng, 0.7),
                                  random_tensor({4 * F}, rng, 0.5)};
      const Tensor hs = nn::convlstm2d_sequence(x, w, nullptr);
      Tensor h({H, W, F}), c({H, W, F});
      const std::size_t frame = H * W * C, state = H * W * F;
      for (std::size_t t = 0; t < T; ++t) {
        Tensor xt({H, W, C});
        std::copy(x.ptr() + t * frame, x.ptr() + (t + 1) * frame, xt.ptr());
        Tensor h2, c2;
        oracle::convlstm_step(xt, h, c, w.kernel, w.recurrent_kernel, w.bias, h2, c2);
        h = h2;
        c = c2;
        for (std::size_t i = 0; i < state; ++i) worst[3] = std::max(worst[3], std::abs(hs[t * state + i] - h[i]));
      }
    }
  }
  const double all = *std::max_element(worst, worst + 4);
  return {all < kOracleTol,
          fmt("%d instances per layer; max |d| conv2d %.1e conv3d %.1e dense %.1e convlstm2d %.1e (tol %.0e)",
              kOracleInstances, worst[0], worst[1], worst[2], worst[3], kOracleTol)};
}

// ---- 2 ----

double max_grad_error(const nn::Network& net, nn::ParamSet params, const Tensor& x, const Tensor& target) {
  const std::vector<Tensor> inputs{x};
  const auto analytic = nn::backward(net, params, inputs, target);
  auto loss_at = [&](const nn::ParamSet& p) { return nn::mse_loss(net.forward(p, x).reshaped(target.shape()), target); };
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      const double saved = params[i][k];
      params[i][k] = saved + kGradStep;
      const double up = loss_at(params);
      params[i][k] = saved - kGradStep;
      const double down = loss_at(params);
      params[i][k] = saved;
      const double numeric = (up - down) / (2 * kGradStep);
      const double a = analytic.grads[i][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-5});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

Outcome gradient_check() {
  using namespace nn;
  struct Case {
    const char* name;
    Shape input;
    std::vector<LayerSpec> layers;
  };
  const std::vector<Case> cases = {
      {"conv2d", {6, 7, 2}, {conv2d_layer(3, 3, 3, 2, 2, Padding::same), flatten_layer(), dense_layer(2)}},
      {"conv3d", {3, 6, 6, 2}, {conv3d_layer(2, {2, 3, 3}, {1, 2, 1}, Padding::same), flatten_layer(), dense_layer(2)}},
      {"convlstm2d", {3, 5, 5, 2}, {convlstm2d_layer(2, 3, 3, false), flatten_layer(), dense_layer(2)}},
      {"convlstm2d(seq)", {2, 5, 5, 1}, {convlstm2d_layer(2, 3, 3, true), flatten_layer(), dense_layer(2)}},
      {"dense", {7}, {dense_layer(4), dense_layer(2)}},
      {"relu", {6, 6, 1}, {conv2d_layer(2, 3, 3, 1, 1, Padding::valid), activation_layer(LayerKind::relu),
                           flatten_layer(), dense_layer(2)}},
      {"tanh", {6}, {dense_layer(5), activation_layer(LayerKind::tanh), dense_layer(2)}},
      {"sigmoid", {6}, {dense_layer(5), activation_layer(LayerKind::sigmoid), dense_layer(2)}},
      {"maxpool2d", {6, 6, 1}, {conv2d_layer(2, 3, 3, 1, 1, Padding::same), maxpool2d_layer(2, 2, 2, 2),
                                flatten_layer(), dense_layer(2)}},
      {"maxpool3d", {2, 6, 6, 1}, {conv3d_layer(2, {1, 3, 3}, {1, 1, 1}, Padding::same),
                                   maxpool3d_layer({2, 2, 2}, {1, 2, 2}), flatten_layer(), dense_layer(2)}},
      {"flatten", {4, 4, 2}, {flatten_layer(), dense_layer(2)}},
      {"time_distributed", {3, 6, 6, 1}, {time_distributed(conv2d_layer(2, 3, 3, 2, 2, Padding::valid)),
                                          flatten_layer(), dense_layer(2)}},
      {"drive_head", {6}, {dense_layer(2), drive_head_layer()}},
  };
  Rng rng(kSeed + 2);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : cases) {
    const Network net(c.input, c.layers);
    for (int n = 0; n < kGradInstances; ++n) {
      ParamSet params = net.init_params(rng.next_u64());
      for (auto& p : params)
        for (auto& v : p.data()) v += rng.uniform(-0.1, 0.1);
      const Tensor x = random_tensor(c.input, rng);
      const Tensor target = random_tensor({1, 2}, rng);
      const double e = max_grad_error(net, params, x, target);
      if (e >= worst) {
        worst = e;
        worst_name = c.name;
      }
    }
  }
  return {worst < kGradTol, fmt("%zu layer kinds x %d instances, step %.0e; worst relative error %.2e (%s), tol %.0e",
                                cases.size(), kGradInstances, kGradStep, worst, worst_name.c_str(), kGradTol)};
}

// ---- 3 ----

Outcome architecture() {
  using models::build_model;
  const auto mem = build_model("memdccp");
  auto count = [&](const models::ModelSpec& s, nn::LayerKind k) {
    return std::count_if(s.network.layers().begin(), s.network.layers().end(),
                         [&](const nn::LayerSpec& l) { return l.kind == k; });
  };
  const auto c3 = count(mem, nn::LayerKind::conv3d), lstm = count(mem, nn::LayerKind::convlstm2d),
             dense = count(mem, nn::LayerKind::dense);
  const std::size_t pm = models::param_count(mem);
  const std::size_t pt = models::param_count(build_model("deepest_lstm_tiny"));
  const bool shapes = build_model("pilotnet").network.input_shape() == Shape{66, 200, 3} &&
                      build_model("deepest_lstm_tiny").network.input_shape() == Shape{50, 100, 3} &&
                      build_model("pilotnet_x3").network.input_shape() == Shape{3, 50, 100, 3} &&
                      mem.network.input_shape() == Shape{3, 50, 100, 3};
  const bool ok = c3 == 5 && lstm == 3 && dense == 3 && pm >= kMemMin && pm <= kMemMax &&
                  std::abs(double(pt) - kTinyTarget) <= kTinyRel * kTinyTarget && shapes;
  return {ok, fmt("memdccp %ld conv3d + %ld convlstm2d + %ld dense, %zu params; deepest_lstm_tiny %zu params; "
                  "input shapes %s",
                  long(c3), long(lstm), long(dense), pm, pt, shapes ? "66x200 / 50x100" : "WRONG")};
}

// ---- 4 ----

Outcome expert_loop() {
  bool ok = true;
  std::string detail;
  const sim::TrackVariation no_line[] = {{sim::LineColor::none, sim::RoadColor::grey, true},
                                         {sim::LineColor::none, sim::RoadColor::white, true},
                                         {sim::LineColor::none, sim::RoadColor::grey, false}};
  int failures_ok = 0, failures_total = 0;
  for (const auto& name : kTrainCircuits) {
    const auto track = sim::find_circuit(name);
    pilots::ExpertPilot expert;
    EpisodeConfig cfg;
    cfg.seed = kSeed;
    const auto m = run_episode(expert, track, cfg);
    const bool lap = m.completed && m.position_deviation_mae < track.road_width / 4;
    ok = ok && lap;
    detail += fmt("%s %s%s mae %.2f m; ", name.c_str(), lap ? "" : "FAILED ",
                  m.lap_seconds ? fmt("%.1f s", *m.lap_seconds).c_str() : failure_str(m.failure).c_str(),
                  m.position_deviation_mae);
    for (const auto& v : no_line) {
      cfg.variation = v;
      const auto f = run_episode(expert, track, cfg);
      ++failures_total;
      failures_ok += !f.completed && f.failure == FailureReason::line_lost_timeout;
    }
  }
  ok = ok && failures_ok == failures_total;
  detail += fmt("line_lost_timeout on %d/%d no-line runs", failures_ok, failures_total);
  return {ok, detail};
}

// ---- shared trained models for 5 and 6 ----

struct Trained {
  std::shared_ptr<const models::ModelSpec> spec;
  std::shared_ptr<const models::ModelWeights> weights;
  TrainHistory history;
};

const data::Dataset& desk_dataset() {
  static const data::Dataset ds = [] {
    std::vector<sim::TrackSpec> c;
    for (const auto& n : kTrainCircuits) c.push_back(sim::find_circuit(n));
    return data::record_dataset(c, 1, kSeed);
  }();
  return ds;
}

Trained train_desk(const std::string& model) {
  auto spec = std::make_shared<const models::ModelSpec>(models::build_model(model, models::Scale::desk));
  TrainHyper h;
  h.seed = kSeed;
  auto r = train(*spec, desk_dataset(), h);
  return {spec, std::make_shared<const models::ModelWeights>(std::move(r.weights)), r.history};
}

const Trained& trained(const std::string& model) {
  static std::map<std::string, Trained> cache;
  auto it = cache.find(model);
  if (it == cache.end()) it = cache.emplace(model, train_desk(model)).first;
  return it->second;
}

std::unique_ptr<pilots::Brain> neural(const Trained& t) {
  return std::make_unique<pilots::NeuralPilot>(t.spec, t.weights, SpeedLimits{}, sim::horizon_row(desk_camera()));
}

// ---- 5 ----

Outcome learning() {
  const auto& ds = desk_dataset();
  const auto& t = trained("memdccp");
  const double v0 = t.history.initial.val.mse, v1 = t.history.epochs.back().val.mse;
  const double reduction = 1.0 - v1 / v0;

  std::vector<std::size_t> batch;
  for (std::size_t i = 0; i < 32; ++i) batch.push_back(i * 101 % ds.size());
  TrainHyper h;
  h.epochs = 200;
  h.batch = 32;
  h.seed = kSeed;
  h.mirror = false;
  h.photometric = false;
  const auto spec = models::build_model("memdccp", models::Scale::desk);
  const double overfit = train_on(spec, ds, batch, {}, h).history.epochs.back().train.mse;

  return {reduction >= kValReduction && overfit < kOverfitMse,
          fmt("memdccp@desk, %zu samples %zux%zu, %zu epochs: val MSE %.5f -> %.5f (-%.1f%%, need %.0f%%); "
              "one-batch MSE %.2e (need < %.0e)",
              ds.size(), std::size_t(ds.manifest.width), std::size_t(ds.manifest.height), t.history.epochs.size(),
              v0, v1, 100 * reduction, 100 * kValReduction, overfit, kOverfitMse)};
}

// ---- 6 ----

Outcome imitation() {
  bool ok = true;
  std::string detail;
  for (const char* model : {"memdccp", "pilotnet"}) {
    const auto& t = trained(model);
    std::string laps;
    for (const auto& name : kTrainCircuits) {
      auto brain = neural(t);
      EpisodeConfig cfg;
      cfg.seed = kSeed;
      const auto m = run_episode(*brain, sim::find_circuit(name), cfg);
      if (m.completed) laps += fmt("%s%s %.1f s", laps.empty() ? "" : ", ", name.c_str(), *m.lap_seconds);
    }
    ok = ok && !laps.empty();
    detail += fmt("%s laps: %s; ", model, laps.empty() ? "none" : laps.c_str());
  }

  std::vector<SuiteBrain> brains{{"expert", [] { return std::make_unique<pilots::ExpertPilot>(); }},
                                 {"memdccp", [] { return neural(trained("memdccp")); }},
                                 {"pilotnet", [] { return neural(trained("pilotnet")); }}};
  SuiteOptions o;
  o.seed = kSeed;
  const auto rep = generalization_suite(brains, sim::find_circuit("simple_oval"), o);
  const bool grid = rep.conditions.size() == 6 && rep.cells.size() == 6 * brains.size();
  ok = ok && grid;
  std::string row;
  for (const auto& c : rep.conditions) {
    row += rep.cell("memdccp", c.name).mean.completed ? "+" : "-";
  }
  detail += fmt("generalization grid %zux%zu, memdccp row %s (not gated)", rep.brains.size(), rep.conditions.size(),
                row.c_str());
  return {ok, detail};
}

// ---- 7 ----

Outcome robustness() {
  bool ok = true;
  std::string detail;
  const auto conds = robustness_conditions();
  std::vector<double> noise;
  int cams = 0;
  for (const auto& c : conds) {
    if (c.noise_p > 0) noise.push_back(c.noise_p);
    cams += c.offset != CameraOffset::none || c.pitch_down > 0;
  }
  const bool sets = noise == std::vector<double>{0.2, 0.4, 0.6} && cams == 3 && conds.size() == 6 &&
                    conds[0].offset == CameraOffset::left && conds[1].offset == CameraOffset::right &&
                    conds[2].pitch_down > 0;
  ok = ok && sets;

  // exercise every condition
  SuiteOptions o;
  o.seed = kSeed;
  o.repeats = 1;
  const auto rep = robustness_suite({{"expert", [] { return std::make_unique<pilots::ExpertPilot>(); }}},
                                    sim::find_circuit("simple_oval"), o);
  ok = ok && rep.cells.size() == 6;
  detail += fmt("conditions %s; ", sets ? "left/right/down + noise {0.2,0.4,0.6}" : "WRONG");

  // salt-and-pepper fraction on a mid-grey frame
  ImageFrame grey(160, 120);
  std::fill(grey.rgb.begin(), grey.rgb.end(), 128);
  const double n = 160.0 * 120.0;
  double worst_sigma = 0.0;
  for (double p : {0.05, 0.2, 0.4, 0.6, 0.9}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto noisy = sim::salt_pepper(grey, p, derive_seed(kSeed, s));
      std::size_t changed = 0;
      for (std::size_t i = 0; i < noisy.rgb.size(); i += 3) changed += noisy.rgb[i] != 128;
      const double sigma = std::sqrt(n * p * (1 - p));
      worst_sigma = std::max(worst_sigma, std::abs(double(changed) - n * p) / sigma);
    }
  }
  ok = ok && worst_sigma < kSigmas;
  detail += fmt("salt-pepper worst deviation %.2f sigma; ", worst_sigma);

  // zero-magnitude perturbations reproduce the unperturbed episode
  bool identity = true;
  const auto track = sim::find_circuit("s_curve");
  EpisodeConfig base;
  base.seed = kSeed;
  for (auto offset : {CameraOffset::left, CameraOffset::right, CameraOffset::none}) {
    Condition zero;
    zero.offset = offset;
    pilots::ExpertPilot a, b;
    identity = identity && run_episode(a, track, condition_config(base, zero, kSeed)) == run_episode(b, track, base);
  }
  {
    const Trained tiny = [] {
      auto spec = std::make_shared<const models::ModelSpec>(models::build_model("pilotnet", models::Scale::desk));
      return Trained{spec, std::make_shared<const models::ModelWeights>(models::init_weights(*spec, kSeed)), {}};
    }();
    Condition zero;
    zero.offset = CameraOffset::right;
    auto a = neural(tiny), b = neural(tiny);
    identity = identity && run_episode(*a, track, condition_config(base, zero, kSeed)) == run_episode(*b, track, base);
  }
  ok = ok && identity;
  detail += fmt("zero-magnitude identity %s", identity ? "bit-exact" : "BROKEN");
  return {ok, detail};
}

// ---- 8 ----

struct PipelineBytes {
  std::vector<std::uint8_t> dataset, weights;
  std::string episode, report_json, report_csv;
};

PipelineBytes pipeline() {
  PipelineBytes out;
  const auto ds = data::record_dataset({sim::find_circuit("simple_oval"), sim::find_circuit("s_curve")}, 1, kSeed);
  out.dataset = data::encode_dataset(ds);
  auto spec = std::make_shared<const models::ModelSpec>(models::build_model("memdccp", models::Scale::desk));
  TrainHyper h;
  h.epochs = 2;
  h.seed = kSeed;
  auto r = train(*spec, data::decode_dataset(out.dataset), h);
  out.weights = models::encode_weights(*spec, r.weights);
  const Trained t{spec, std::make_shared<const models::ModelWeights>(std::move(r.weights)), {}};
  auto brain = neural(t);
  EpisodeConfig cfg;
  cfg.seed = kSeed;
  cfg.noise_p = 0.2;
  out.episode = episode_to_json(run_episode(*brain, sim::find_circuit("simple_oval"), cfg));
  SuiteOptions o;
  o.seed = kSeed;
  o.repeats = 1;
  const auto rep = robustness_suite({{"expert", [] { return std::make_unique<pilots::ExpertPilot>(); }},
                                     {"memdccp", [&] { return neural(t); }}},
                                    sim::find_circuit("simple_oval"), o);
  out.report_json = suite_to_json(rep);
  out.report_csv = suite_to_csv(rep);
  return out;
}

Outcome determinism() {
  const auto a = pipeline();
  const auto b = pipeline();
  const bool d = a.dataset == b.dataset, w = a.weights == b.weights, e = a.episode == b.episode,
             r = a.report_json == b.report_json && a.report_csv == b.report_csv;
  return {d && w && e && r,
          fmt("dataset %s (%zu bytes), weights %s, episode metrics %s, reports %s", d ? "identical" : "DIFFER",
              a.dataset.size(), w ? "identical" : "DIFFER", e ? "identical" : "DIFFER", r ? "identical" : "DIFFER")};
}

// ---- 9 ----

Outcome dynamics() {
  constexpr double dt = 0.01, horizon = 10.0;
  const int steps = static_cast<int>(std::lround(horizon / dt));
  struct Case {
    double v, w, heading;
  };
  const Case cases[] = {{5.0, 0.5, 0.0}, {10.0, -1.3, 2.0}, {3.0, 0.0, -0.7}, {8.0, 1e-7, 1.0}, {12.0, 3.0, 3.1}};
  double worst = 0.0;
  for (const auto& c : cases) {
    sim::CarState s;
    s.x = 1.0;
    s.y = -2.0;
    s.heading = c.heading;
    s.v = c.v;
    s.w = c.w;
    for (int i = 0; i < steps; ++i) s = sim::step_dynamics(s, {c.v, c.w}, dt, 0.0);
    const double t = steps * dt;
    double ax, ay;
    if (c.w == 0.0) {
      ax = 1.0 + c.v * t * std::cos(c.heading);
      ay = -2.0 + c.v * t * std::sin(c.heading);
    } else {
      const double r = c.v / c.w;
      ax = 1.0 + r * (std::sin(c.heading + c.w * t) - std::sin(c.heading));
      ay = -2.0 - r * (std::cos(c.heading + c.w * t) - std::cos(c.heading));
    }
    worst = std::max(worst, std::hypot(s.x - ax, s.y - ay));
  }
  return {worst < kArcTol,
          fmt("%zu (v,w) cases, %d steps of %.2f s, tau 0: worst position error %.2e m", std::size(cases), steps, dt,
              worst)};
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds, 0 = none
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "numeric-core oracle equivalence", kBudget1, oracle_equivalence},
      {2, "gradient correctness", kBudget2, gradient_check},
      {3, "architecture fidelity", 0, architecture},
      {4, "expert closes the loop", kBudget4, expert_loop},
      {5, "learning happens", kBudget5, learning},
      {6, "closed-loop imitation", 0, imitation},
      {7, "robustness suite mechanics", 0, robustness},
      {8, "end-to-end determinism", 0, determinism},
      {9, "dynamics correctness", 0, dynamics},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0 && secs > c.budget) {
      o.pass = false;
      o.detail += fmt(" [over budget %.0f s]", c.budget);
    }
    failed += !o.pass;
    std::printf("%s  %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed;
}
