// lrlab: command-line front end over the laneracer C API.
// Exit codes: 0 success, 1 infrastructure error, 2 bad arguments.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "laneracer/laneracer.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int code;
};

void check(lr_status s) {
  if (s == LR_OK) return;
  std::fprintf(stderr, "lrlab: %s: %s\n", lr_status_name(s), lr_last_error());
  throw Failure{s == LR_ERR_INVALID_ARGUMENT ? kExitUsage : kExitError};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
  ~Handle() { Free(p); }
  T** out() { return &p; }
};

using Track = Handle<lr_track, lr_track_free>;
using Dataset = Handle<lr_dataset, lr_dataset_free>;
using Model = Handle<lr_model, lr_model_free>;
using Report = Handle<lr_report, lr_report_free>;

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { lr_string_free(s); }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void write_string(const std::string& path, const char* text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "lrlab: cannot write '%s'\n", path.c_str());
    throw Failure{kExitError};
  }
  std::fputs(text, f);
  std::fclose(f);
}

const std::map<std::string, lr_scale> kScales{{"desk", LR_SCALE_DESK}, {"full", LR_SCALE_FULL}};
const std::vector<std::string> kModels{"pilotnet", "deepest_lstm_tiny", "pilotnet_x3", "memdccp"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laneracer lab: circuits, datasets, training and closed-loop evaluation"};
  app.set_config("--config", "", "Read options from a TOML/INI run configuration; flags override it");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lr_version()));

  std::string scale_name = "desk";
  auto add_scale = [&](CLI::App* c) {
    c->add_option("--scale", scale_name, "Model size: desk (64x48 renders) or full")
        ->check(CLI::IsMember({"desk", "full"}));
  };

  // circuits
  auto* circuits = app.add_subcommand("circuits", "Builtin circuits");
  circuits->require_subcommand(1);
  auto* circuits_list = circuits->add_subcommand("list", "List builtin circuits");
  auto* circuits_export = circuits->add_subcommand("export", "Write every builtin circuit as a JSON document");
  std::string circuits_out;
  circuits_export->add_option("--out", circuits_out, "Output directory")->required();

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Record and inspect expert datasets");
  dataset->require_subcommand(1);
  auto* ds_record = dataset->add_subcommand("record", "Record expert laps into an LRDS file");
  std::string ds_circuits = "simple_oval,rounded_rectangle,s_curve,many_curves";
  int ds_laps = 1;
  std::uint64_t ds_seed = 0;
  std::string ds_out;
  ds_record->add_option("--circuits", ds_circuits, "Comma-separated circuit names or files")->capture_default_str();
  ds_record->add_option("--laps", ds_laps, "Laps per circuit")->capture_default_str()->check(CLI::PositiveNumber);
  ds_record->add_option("--seed", ds_seed, "Seed")->capture_default_str();
  ds_record->add_option("--out", ds_out, "Output .lrds file")->required();
  auto* ds_export = dataset->add_subcommand("export", "Dump frames as PPM images plus labels.csv");
  std::string ds_in, ds_export_out;
  ds_export->add_option("--in", ds_in, "Input .lrds file")->required();
  ds_export->add_option("--out", ds_export_out, "Output directory")->required();

  // model
  auto* model_cmd = app.add_subcommand("model", "Describe a model architecture");
  std::string model_name = "memdccp";
  model_cmd->add_option("--model", model_name, "Model")->check(CLI::IsMember(kModels))->capture_default_str();
  add_scale(model_cmd);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset");
  lr_train_params tp;
  lr_train_params_default(&tp);
  std::string train_data, train_out, train_history;
  bool no_mirror = false, no_photometric = false;
  train_cmd->add_option("--model", model_name, "Model")->required()->check(CLI::IsMember(kModels));
  train_cmd->add_option("--data", train_data, "Dataset (.lrds)")->required();
  train_cmd->add_option("--epochs", tp.epochs, "Epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", tp.batch, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tp.learning_rate, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tp.seed, "Seed (initialization, split, shuffling)")->capture_default_str();
  train_cmd->add_option("--val-fraction", tp.val_fraction, "Fraction of episodes held out")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_flag("--no-mirror", no_mirror, "Disable random horizontal flips");
  train_cmd->add_flag("--no-photometric", no_photometric, "Disable brightness/pixel jitter");
  train_cmd->add_option("--out", train_out, "Output weights file")->required();
  train_cmd->add_option("--history", train_history, "Per-epoch metrics JSON");
  add_scale(train_cmd);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a brain");
  eval->require_subcommand(1);
  auto* eval_internal = eval->add_subcommand("internal", "MAE/MSE against dataset labels");
  std::string eval_weights, eval_data, eval_split = "val";
  double eval_val_fraction = tp.val_fraction;
  std::uint64_t eval_seed = 0;
  eval_internal->add_option("--model", model_name, "Model")->required()->check(CLI::IsMember(kModels));
  eval_internal->add_option("--weights", eval_weights, "Weights file")->required();
  eval_internal->add_option("--data", eval_data, "Dataset (.lrds)")->required();
  eval_internal->add_option("--split", eval_split, "train, val or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"train", "val", "all"}));
  eval_internal->add_option("--seed", eval_seed, "Seed used for training (selects the split)")->capture_default_str();
  eval_internal->add_option("--val-fraction", eval_val_fraction, "Validation fraction used for training")
      ->capture_default_str();
  add_scale(eval_internal);

  auto* eval_episode = eval->add_subcommand("episode", "Drive one closed-loop episode");
  lr_episode_params ep;
  lr_episode_params_default(&ep);
  std::string ep_model = "expert", ep_weights, ep_circuit = "simple_oval", ep_line = "red", ep_road = "grey",
              ep_walls = "on", ep_offset = "none", ep_out;
  eval_episode->add_option("--model", ep_model, "Model, or 'expert' for the PID pilot")
      ->capture_default_str()
      ->check(CLI::IsMember({"expert", "pilotnet", "deepest_lstm_tiny", "pilotnet_x3", "memdccp"}));
  eval_episode->add_option("--weights", ep_weights, "Weights file (neural models)");
  eval_episode->add_option("--circuit", ep_circuit, "Circuit name or file")->capture_default_str();
  eval_episode->add_option("--line", ep_line, "Line colour")->capture_default_str()->check(CLI::IsMember({"red", "white", "none"}));
  eval_episode->add_option("--road", ep_road, "Road colour")->capture_default_str()->check(CLI::IsMember({"grey", "white"}));
  eval_episode->add_option("--walls", ep_walls, "Lateral walls")->capture_default_str()->check(CLI::IsMember({"on", "off"}));
  eval_episode->add_option("--noise", ep.noise_p, "Salt-and-pepper probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  eval_episode->add_option("--camera-offset", ep_offset, "Move the camera sideways")
      ->capture_default_str()
      ->check(CLI::IsMember({"left", "right", "none"}));
  eval_episode->add_option("--camera-offset-m", ep.offset_m, "Sideways offset magnitude (m)")->capture_default_str();
  eval_episode->add_option("--camera-pitch-down", ep.pitch_down, "Extra camera pitch (rad)")->capture_default_str();
  eval_episode->add_option("--seed", ep.seed, "Seed")->capture_default_str();
  eval_episode->add_option("--laps", ep.laps, "Laps to complete")->capture_default_str()->check(CLI::PositiveNumber);
  eval_episode->add_option("--max-time", ep.max_time, "Time limit in s (negative: 6 x length / v_min)")->capture_default_str();
  eval_episode->add_option("--out", ep_out, "Metrics JSON");
  add_scale(eval_episode);

  // suite
  auto* suite = app.add_subcommand("suite", "Generalization and robustness grids");
  suite->require_subcommand(1);
  std::string suite_models = "expert,pilotnet,deepest_lstm_tiny,pilotnet_x3,memdccp", suite_dir = ".",
              suite_circuit = "simple_oval", suite_out;
  int suite_repeats = 3;
  std::uint64_t suite_seed = 0;
  std::vector<CLI::App*> suite_kinds;
  for (const char* kind : {"generalization", "robustness"}) {
    auto* s = suite->add_subcommand(kind, std::string("Run the ") + kind + " suite");
    s->add_option("--models", suite_models, "Comma-separated brains; 'expert' adds the PID pilot")->capture_default_str();
    s->add_option("--weights-dir", suite_dir, "Directory holding <model>.lrwt files")->capture_default_str();
    s->add_option("--circuit", suite_circuit, "Circuit")->capture_default_str();
    s->add_option("--repeats", suite_repeats, "Episodes per cell")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--seed", suite_seed, "Seed")->capture_default_str();
    s->add_option("--out", suite_out, "Report path (.json or .csv)")->required();
    add_scale(s);
    suite_kinds.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const lr_scale scale = kScales.at(scale_name);

    if (circuits_list->parsed()) {
      for (size_t i = 0; i < lr_circuit_count(); ++i) {
        const char* name = nullptr;
        check(lr_circuit_name(i, &name));
        Track t;
        check(lr_track_open(name, t.out()));
        lr_track_info info;
        check(lr_track_get_info(t.p, &info));
        std::printf("%-18s %-5s %7.1f m  %zu waypoints\n", info.name, info.role == LR_ROLE_TRAIN ? "train" : "test",
                    info.length_m, info.waypoints);
      }
    } else if (circuits_export->parsed()) {
      std::error_code ec;
      std::filesystem::create_directories(circuits_out, ec);
      for (size_t i = 0; i < lr_circuit_count(); ++i) {
        const char* name = nullptr;
        check(lr_circuit_name(i, &name));
        Track t;
        check(lr_track_open(name, t.out()));
        const std::string path = (std::filesystem::path(circuits_out) / (std::string(name) + ".json")).string();
        check(lr_track_save(t.p, path.c_str()));
        std::printf("%s\n", path.c_str());
      }
    } else if (ds_record->parsed()) {
      const auto names = split_list(ds_circuits);
      std::vector<const char*> ptrs;
      for (const auto& n : names) ptrs.push_back(n.c_str());
      Dataset d;
      check(lr_dataset_record(ptrs.data(), ptrs.size(), ds_laps, ds_seed, d.out()));
      check(lr_dataset_write(d.p, ds_out.c_str()));
      lr_dataset_info info;
      check(lr_dataset_get_info(d.p, &info));
      std::printf("recorded %llu samples in %llu episodes (%ux%u) -> %s\n",
                  static_cast<unsigned long long>(info.samples), static_cast<unsigned long long>(info.episodes),
                  info.width, info.height, ds_out.c_str());
    } else if (ds_export->parsed()) {
      Dataset d;
      check(lr_dataset_read(ds_in.c_str(), d.out()));
      check(lr_dataset_export(d.p, ds_export_out.c_str()));
      std::printf("exported to %s\n", ds_export_out.c_str());
    } else if (model_cmd->parsed()) {
      Model m;
      check(lr_model_create(model_name.c_str(), scale, 0, m.out()));
      OwnedString text;
      check(lr_model_manifest(m.p, &text.s));
      std::fputs(text.s, stdout);
    } else if (train_cmd->parsed()) {
      Dataset d;
      check(lr_dataset_read(train_data.c_str(), d.out()));
      Model m;
      check(lr_model_create(model_name.c_str(), scale, tp.seed, m.out()));
      tp.mirror = no_mirror ? 0 : 1;
      tp.photometric = no_photometric ? 0 : 1;
      OwnedString history;
      auto progress = [](const lr_epoch_metrics* e, void*) {
        std::printf("epoch %3d  train mse %.6f mae %.5f  val mse %.6f mae %.5f  (%.1fs)\n", e->epoch, e->train_mse,
                    e->train_mae, e->val_mse, e->val_mae, e->seconds);
        std::fflush(stdout);
      };
      check(lr_train(m.p, d.p, &tp, progress, nullptr, &history.s));
      check(lr_model_save(m.p, train_out.c_str()));
      if (!train_history.empty()) write_string(train_history, history.s);
    } else if (eval_internal->parsed()) {
      Dataset d;
      check(lr_dataset_read(eval_data.c_str(), d.out()));
      Model m;
      check(lr_model_load(model_name.c_str(), scale, eval_weights.c_str(), m.out()));
      const lr_split split = eval_split == "val" ? LR_SPLIT_VAL : eval_split == "train" ? LR_SPLIT_TRAIN : LR_SPLIT_ALL;
      double mae = 0.0, mse = 0.0;
      check(lr_eval_internal(m.p, d.p, split, eval_val_fraction, eval_seed, &mae, &mse));
      std::printf("{\"split\": \"%s\", \"mae\": %.17g, \"mse\": %.17g}\n", eval_split.c_str(), mae, mse);
    } else if (eval_episode->parsed()) {
      Track t;
      check(lr_track_open(ep_circuit.c_str(), t.out()));
      Model m;
      if (ep_model != "expert") {
        if (ep_weights.empty()) {
          std::fprintf(stderr, "lrlab: --weights is required for model '%s'\n", ep_model.c_str());
          return kExitUsage;
        }
        check(lr_model_load(ep_model.c_str(), scale, ep_weights.c_str(), m.out()));
      }
      ep.line = ep_line == "red" ? LR_LINE_RED : ep_line == "white" ? LR_LINE_WHITE : LR_LINE_NONE;
      ep.road = ep_road == "grey" ? LR_ROAD_GREY : LR_ROAD_WHITE;
      ep.walls = ep_walls == "on" ? 1 : 0;
      ep.camera_offset = ep_offset == "left" ? LR_OFFSET_LEFT : ep_offset == "right" ? LR_OFFSET_RIGHT : LR_OFFSET_NONE;
      lr_episode_metrics res;
      OwnedString json;
      check(lr_run_episode(m.p, t.p, &ep, &res, &json.s));
      std::fputs(json.s, stdout);
      if (!ep_out.empty()) write_string(ep_out, json.s);
    } else {
      CLI::App* chosen = suite_kinds[0]->parsed() ? suite_kinds[0] : suite_kinds[1];
      const lr_suite_kind kind = chosen == suite_kinds[0] ? LR_SUITE_GENERALIZATION : LR_SUITE_ROBUSTNESS;
      Track t;
      check(lr_track_open(suite_circuit.c_str(), t.out()));
      bool expert = false;
      std::vector<Model> models;
      for (const auto& name : split_list(suite_models)) {
        if (name == "expert") {
          expert = true;
          continue;
        }
        const std::string path = (std::filesystem::path(suite_dir) / (name + ".lrwt")).string();
        Model m;
        check(lr_model_load(name.c_str(), scale, path.c_str(), m.out()));
        models.push_back(std::move(m));
      }
      std::vector<const lr_model*> ptrs;
      for (const auto& m : models) ptrs.push_back(m.p);
      Report r;
      check(lr_suite_run(kind, ptrs.data(), ptrs.size(), expert ? 1 : 0, t.p, suite_repeats, suite_seed, r.out()));
      check(lr_report_write(r.p, suite_out.c_str(), LR_FORMAT_AUTO));
      std::printf("wrote %s\n", suite_out.c_str());
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
