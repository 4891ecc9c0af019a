#include "laneracer/laneracer.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "laneracer/dataset.hpp"
#include "laneracer/error.hpp"
#include "laneracer/report.hpp"
#include "laneracer/suite.hpp"
#include "laneracer/train.hpp"

struct lr_track {
  lr::sim::TrackSpec spec;
  double length = 0.0;
};

struct lr_dataset {
  lr::data::Dataset ds;
};

struct lr_model {
  std::shared_ptr<const lr::models::ModelSpec> spec;
  std::shared_ptr<const lr::models::ModelWeights> weights;
};

struct lr_report {
  lr::harness::SuiteReport report;
};

namespace {

thread_local std::string g_error;

lr_status status_of(lr::ErrorCode c) {
  switch (c) {
    case lr::ErrorCode::invalid_argument: return LR_ERR_INVALID_ARGUMENT;
    case lr::ErrorCode::shape_mismatch: return LR_ERR_SHAPE;
    case lr::ErrorCode::io: return LR_ERR_IO;
    case lr::ErrorCode::format: return LR_ERR_FORMAT;
    case lr::ErrorCode::version: return LR_ERR_VERSION;
    case lr::ErrorCode::checksum: return LR_ERR_CHECKSUM;
    case lr::ErrorCode::numeric: return LR_ERR_NUMERIC;
    case lr::ErrorCode::runtime: return LR_ERR_RUNTIME;
  }
  return LR_ERR_INTERNAL;
}

template <class F>
lr_status guarded(F&& f) {
  try {
    f();
    return LR_OK;
  } catch (const lr::Error& e) {
    g_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return LR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return LR_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) lr::fail(lr::ErrorCode::invalid_argument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lr::models::Scale scale_of(lr_scale s) {
  require(s == LR_SCALE_DESK || s == LR_SCALE_FULL, "unknown model scale");
  return s == LR_SCALE_DESK ? lr::models::Scale::desk : lr::models::Scale::full;
}

lr::models::ModelSpec spec_of(const char* name, lr_scale scale) {
  require(name != nullptr, "model name is null");
  return lr::models::build_model(std::string(name), scale_of(scale));
}

std::size_t crop_row() { return lr::sim::horizon_row(lr::harness::desk_camera()); }

lr_episode_metrics to_c(const lr::harness::EpisodeMetrics& m) {
  lr_episode_metrics out{};
  out.completed = m.completed ? 1 : 0;
  out.lap_seconds = m.lap_seconds ? *m.lap_seconds : std::numeric_limits<double>::quiet_NaN();
  out.position_deviation_mae = m.position_deviation_mae;
  out.average_speed = m.average_speed;
  out.failure = static_cast<lr_failure>(static_cast<int>(m.failure));
  out.elapsed = m.elapsed;
  return out;
}

std::unique_ptr<lr::pilots::Brain> make_brain(const lr_model* model) {
  if (model == nullptr) return std::make_unique<lr::pilots::ExpertPilot>();
  return std::make_unique<lr::pilots::NeuralPilot>(model->spec, model->weights, lr::SpeedLimits{}, crop_row());
}

}  // namespace

extern "C" {

const char* lr_version(void) { return "0.1.0"; }

const char* lr_last_error(void) { return g_error.c_str(); }

const char* lr_status_name(lr_status s) {
  switch (s) {
    case LR_OK: return "ok";
    case LR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LR_ERR_SHAPE: return "shape mismatch";
    case LR_ERR_IO: return "i/o error";
    case LR_ERR_FORMAT: return "format error";
    case LR_ERR_VERSION: return "version mismatch";
    case LR_ERR_CHECKSUM: return "checksum mismatch";
    case LR_ERR_NUMERIC: return "numeric error";
    case LR_ERR_RUNTIME: return "runtime error";
    case LR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void lr_string_free(char* s) { std::free(s); }

size_t lr_circuit_count(void) { return 7; }

lr_status lr_circuit_name(size_t index, const char** name) {
  return guarded([&] {
    require(name != nullptr, "output pointer is null");
    static const std::vector<std::string> names = [] {
      std::vector<std::string> n;
      for (const auto& c : lr::sim::builtin_circuits()) n.push_back(c.name);
      return n;
    }();
    require(index < names.size(), "circuit index out of range");
    *name = names[index].c_str();
  });
}

lr_status lr_track_open(const char* name_or_path, lr_track** out) {
  return guarded([&] {
    require(name_or_path != nullptr && out != nullptr, "null argument");
    auto t = std::make_unique<lr_track>();
    t->spec = lr::sim::find_circuit(name_or_path);
    t->length = lr::sim::TrackGeometry(t->spec).length();
    *out = t.release();
  });
}

lr_status lr_track_get_info(const lr_track* track, lr_track_info* info) {
  return guarded([&] {
    require(track != nullptr && info != nullptr, "null argument");
    info->name = track->spec.name.c_str();
    info->role = track->spec.role == lr::sim::CircuitRole::train ? LR_ROLE_TRAIN : LR_ROLE_TEST;
    info->waypoints = track->spec.centerline.size();
    info->length_m = track->length;
    info->road_width_m = track->spec.road_width;
    info->line_width_m = track->spec.line_width;
  });
}

lr_status lr_track_save(const lr_track* track, const char* path) {
  return guarded([&] {
    require(track != nullptr && path != nullptr, "null argument");
    lr::sim::save_track(track->spec, path);
  });
}

void lr_track_free(lr_track* track) { delete track; }

lr_status lr_dataset_record(const char* const* circuits, size_t count, int laps, uint64_t seed, lr_dataset** out) {
  return guarded([&] {
    require(circuits != nullptr && out != nullptr && count > 0, "no circuits given");
    std::vector<lr::sim::TrackSpec> tracks;
    for (size_t i = 0; i < count; ++i) {
      require(circuits[i] != nullptr, "circuit name is null");
      tracks.push_back(lr::sim::find_circuit(circuits[i]));
    }
    auto d = std::make_unique<lr_dataset>();
    d->ds = lr::data::record_dataset(tracks, laps, seed);
    *out = d.release();
  });
}

lr_status lr_dataset_read(const char* path, lr_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto d = std::make_unique<lr_dataset>();
    d->ds = lr::data::read_dataset(path);
    *out = d.release();
  });
}

lr_status lr_dataset_write(const lr_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    lr::data::write_dataset(ds->ds, path);
  });
}

lr_status lr_dataset_export(const lr_dataset* ds, const char* dir) {
  return guarded([&] {
    require(ds != nullptr && dir != nullptr, "null argument");
    lr::data::export_dataset(ds->ds, dir);
  });
}

lr_status lr_dataset_get_info(const lr_dataset* ds, lr_dataset_info* info) {
  return guarded([&] {
    require(ds != nullptr && info != nullptr, "null argument");
    const auto& m = ds->ds.manifest;
    info->samples = m.sample_count;
    info->episodes = m.episodes.size();
    info->width = m.width;
    info->height = m.height;
    info->horizon_row = m.horizon_row;
  });
}

void lr_dataset_free(lr_dataset* ds) { delete ds; }

lr_status lr_model_create(const char* name, lr_scale scale, uint64_t seed, lr_model** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    auto spec = std::make_shared<const lr::models::ModelSpec>(spec_of(name, scale));
    auto m = std::make_unique<lr_model>();
    m->weights = std::make_shared<const lr::models::ModelWeights>(lr::models::init_weights(*spec, seed));
    m->spec = std::move(spec);
    *out = m.release();
  });
}

lr_status lr_model_load(const char* name, lr_scale scale, const char* path, lr_model** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "null argument");
    auto spec = std::make_shared<const lr::models::ModelSpec>(spec_of(name, scale));
    auto m = std::make_unique<lr_model>();
    m->weights = std::make_shared<const lr::models::ModelWeights>(lr::models::load_weights(*spec, path));
    m->spec = std::move(spec);
    *out = m.release();
  });
}

lr_status lr_model_save(const lr_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    lr::models::save_weights(*model->spec, *model->weights, path);
  });
}

lr_status lr_model_param_count(const lr_model* model, uint64_t* count) {
  return guarded([&] {
    require(model != nullptr && count != nullptr, "null argument");
    *count = lr::models::param_count(*model->spec);
  });
}

lr_status lr_model_manifest(const lr_model* model, char** text) {
  return guarded([&] {
    require(model != nullptr && text != nullptr, "null argument");
    *text = dup_string(lr::models::model_manifest(*model->spec));
  });
}

void lr_model_free(lr_model* model) { delete model; }

void lr_train_params_default(lr_train_params* p) {
  if (p == nullptr) return;
  const lr::harness::TrainHyper h;
  p->epochs = h.epochs;
  p->batch = h.batch;
  p->learning_rate = h.lr;
  p->seed = h.seed;
  p->val_fraction = h.val_fraction;
  p->mirror = h.mirror ? 1 : 0;
  p->photometric = h.photometric ? 1 : 0;
}

lr_status lr_train(lr_model* model, const lr_dataset* ds, const lr_train_params* params, lr_epoch_callback callback,
                   void* user, char** history_json) {
  return guarded([&] {
    require(model != nullptr && ds != nullptr && params != nullptr, "null argument");
    lr::harness::TrainHyper h;
    h.epochs = params->epochs;
    h.batch = params->batch;
    h.lr = params->learning_rate;
    h.seed = params->seed;
    h.val_fraction = params->val_fraction;
    h.mirror = params->mirror != 0;
    h.photometric = params->photometric != 0;
    auto result = lr::harness::train(*model->spec, ds->ds, h, [&](const lr::harness::EpochRecord& e) {
      if (!callback) return;
      const lr_epoch_metrics m{e.epoch, e.train.mae, e.train.mse, e.val.mae, e.val.mse, e.seconds};
      callback(&m, user);
    });
    if (history_json) *history_json = dup_string(lr::harness::history_to_json(result.history, model->spec->id()));
    model->weights = std::make_shared<const lr::models::ModelWeights>(std::move(result.weights));
  });
}

lr_status lr_eval_internal(const lr_model* model, const lr_dataset* ds, lr_split split, double val_fraction,
                           uint64_t seed, double* mae, double* mse) {
  return guarded([&] {
    require(model != nullptr && ds != nullptr && mae != nullptr && mse != nullptr, "null argument");
    std::vector<std::size_t> idx;
    if (split == LR_SPLIT_ALL) {
      idx.resize(ds->ds.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    } else {
      require(split == LR_SPLIT_TRAIN || split == LR_SPLIT_VAL, "unknown split");
      const auto s = lr::data::split(ds->ds.manifest, val_fraction, seed);
      idx = lr::data::sample_indices(ds->ds.manifest, split == LR_SPLIT_VAL ? s.val : s.train);
    }
    const auto m = lr::harness::evaluate_internal(*model->spec, *model->weights, ds->ds, idx);
    *mae = m.mae;
    *mse = m.mse;
  });
}

void lr_episode_params_default(lr_episode_params* p) {
  if (p == nullptr) return;
  *p = lr_episode_params{};
  p->line = LR_LINE_RED;
  p->road = LR_ROAD_GREY;
  p->walls = 1;
  p->camera_offset = LR_OFFSET_NONE;
  p->offset_m = lr::harness::kLateralOffsetMagnitude;
  p->laps = 1;
  p->max_time = -1.0;
}

lr_status lr_run_episode(const lr_model* model, const lr_track* track, const lr_episode_params* p,
                         lr_episode_metrics* metrics, char** json) {
  return guarded([&] {
    require(track != nullptr && p != nullptr, "null argument");
    require(p->line >= LR_LINE_RED && p->line <= LR_LINE_NONE, "unknown line colour");
    require(p->road == LR_ROAD_GREY || p->road == LR_ROAD_WHITE, "unknown road colour");
    require(p->camera_offset >= LR_OFFSET_NONE && p->camera_offset <= LR_OFFSET_RIGHT, "unknown camera offset");
    lr::harness::Condition c;
    c.variation.line = static_cast<lr::sim::LineColor>(static_cast<int>(p->line));
    c.variation.road = static_cast<lr::sim::RoadColor>(static_cast<int>(p->road));
    c.variation.walls = p->walls != 0;
    c.offset = static_cast<lr::harness::CameraOffset>(static_cast<int>(p->camera_offset));
    c.offset_magnitude = p->offset_m;
    c.pitch_down = p->pitch_down;
    c.noise_p = p->noise_p;
    lr::harness::EpisodeConfig cfg = lr::harness::condition_config({}, c, p->seed);
    cfg.laps = p->laps;
    if (p->max_time >= 0.0) cfg.max_time = p->max_time;
    auto brain = make_brain(model);
    const auto m = lr::harness::run_episode(*brain, track->spec, cfg);
    if (metrics) *metrics = to_c(m);
    if (json) *json = dup_string(lr::harness::episode_to_json(m));
  });
}

lr_status lr_suite_run(lr_suite_kind kind, const lr_model* const* models, size_t count, int include_expert,
                       const lr_track* track, int repeats, uint64_t seed, lr_report** out) {
  return guarded([&] {
    require(track != nullptr && out != nullptr, "null argument");
    require(count == 0 || models != nullptr, "model list is null");
    std::vector<lr::harness::SuiteBrain> brains;
    if (include_expert) brains.push_back({"expert", [] { return make_brain(nullptr); }});
    for (size_t i = 0; i < count; ++i) {
      const lr_model* m = models[i];
      require(m != nullptr, "model handle is null");
      brains.push_back({lr::models::model_name_str(m->spec->name), [m] { return make_brain(m); }});
    }
    lr::harness::SuiteOptions o;
    o.repeats = repeats;
    o.seed = seed;
    auto r = std::make_unique<lr_report>();
    require(kind == LR_SUITE_GENERALIZATION || kind == LR_SUITE_ROBUSTNESS, "unknown suite");
    r->report = kind == LR_SUITE_GENERALIZATION ? lr::harness::generalization_suite(brains, track->spec, o)
                                                : lr::harness::robustness_suite(brains, track->spec, o);
    *out = r.release();
  });
}

lr_status lr_report_write(const lr_report* report, const char* path, lr_report_format format) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "null argument");
    if (format == LR_FORMAT_AUTO) {
      lr::harness::emit_report(report->report, path);
    } else {
      require(format == LR_FORMAT_JSON || format == LR_FORMAT_CSV, "unknown report format");
      lr::harness::emit_report(report->report, path,
                               format == LR_FORMAT_CSV ? lr::harness::ReportFormat::csv : lr::harness::ReportFormat::json);
    }
  });
}

lr_status lr_report_read(const char* path, lr_report** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto r = std::make_unique<lr_report>();
    r->report = lr::harness::read_report(path);
    *out = r.release();
  });
}

lr_status lr_report_cell(const lr_report* report, const char* brain, const char* condition,
                         lr_episode_metrics* metrics) {
  return guarded([&] {
    require(report != nullptr && brain != nullptr && condition != nullptr && metrics != nullptr, "null argument");
    *metrics = to_c(report->report.cell(brain, condition).mean);
  });
}

lr_status lr_report_dims(const lr_report* report, size_t* brains, size_t* conditions) {
  return guarded([&] {
    require(report != nullptr && brains != nullptr && conditions != nullptr, "null argument");
    *brains = report->report.brains.size();
    *conditions = report->report.conditions.size();
  });
}

void lr_report_free(lr_report* report) { delete report; }

}  // extern "C"
