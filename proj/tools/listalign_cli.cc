// Copyright (c) 2026 The listalign Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "listalign/annotation.h"
#include "listalign/checkpoint.h"
#include "listalign/config.h"
#include "listalign/corpus.h"
#include "listalign/errors.h"
#include "listalign/pipeline.h"
#include "listalign/server.h"
#include "listalign/synth.h"
#include "listalign/trainer.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace listalign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

// Thrown for runtime failures that are not data problems (port in use).
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
};

// Flag values land in the flat config under these keys, after the file and
// the environment, so flags win.
struct Overrides {
  std::vector<std::pair<std::string, std::string*>> strings;

  void bind(CLI::App* app, const std::string& flag, const std::string& key,
            const std::string& help) {
    owned.push_back(std::make_unique<std::string>());
    auto* slot = owned.back().get();
    app->add_option(flag, *slot, help + " [" + key + "]");
    strings.emplace_back(key, slot);
  }

  void apply(Config& c) const {
    for (const auto& [key, slot] : strings) {
      if (!slot->empty()) c.set(key, *slot);
    }
  }

  std::vector<std::unique_ptr<std::string>> owned;
};

void add_common(CLI::App* app, Common& common, bool out_required, const std::string& out_help) {
  app->add_option("--config", common.config_path, "TOML-style config file")
      ->check(CLI::ExistingFile);
  app->add_option("--set", common.sets, "Override one config key, as section.key=value");
  if (out_help.empty()) return;
  auto* out = app->add_option("--out", common.out, out_help);
  if (out_required) out->required();
}

Config resolve_config(const Common& common, const Overrides& flags) {
  Config c;
  if (!common.config_path.empty()) c = Config::load(common.config_path);
  c.apply_process_env();
  for (const auto& s : common.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--set", "expected section.key=value, got '" + s + "'");
    }
    c.set(s.substr(0, eq), s.substr(eq + 1));
  }
  flags.apply(c);
  return c;
}

std::string comma_list(const std::string& v) {
  if (v.empty() || v.front() == '[') return v;
  return "[" + v + "]";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json input_entry(const std::string& path) {
  return {{"path", path}, {"hash", file_hash(path)}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::string out_dir(const std::string& out) {
  const std::string dir = out.empty() ? "." : out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir + ": " + ec.message());
  return dir;
}

std::vector<std::uint64_t> to_seeds(const std::vector<double>& values) {
  std::vector<std::uint64_t> out;
  for (double v : values) {
    if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
      throw ValidationError("ablate.seeds", "seeds must be non-negative integers");
    }
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

DataConfig resolve_data(const Config& c) {
  DataConfig d = data_config_from(c);
  if (d.corpus.empty()) throw ValidationError("data.corpus", "--corpus is required");
  return d;
}

// gen-synth

int gen_synth(const Config& c, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const SynthConfig sc = synth_config_from(c);
  const auto corpus = generate_synthetic(sc);
  save_corpus(out, corpus.records);

  RunManifest m;
  m.command = "gen-synth";
  m.config = to_config(sc).to_json();
  m.seeds = {sc.seed};
  m.outputs = {{"corpus", out}};
  m.wall_clock_seconds = seconds_since(t0);
  write_manifest(m, out + ".manifest.json");
  std::printf("wrote %zu records to %s\n", corpus.records.size(), out.c_str());
  return kExitOk;
}

// train

int train(const Config& c, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const DataConfig dc = resolve_data(c);
  const TrainConfig tc = train_config_from(c);
  const auto data = prepare_data(load_corpus(dc.corpus), dc);
  std::printf("train groups %zu, test groups %zu, loss %s\n", data.split.train.size(),
              data.split.test.size(), std::string(loss_name(tc.loss)).c_str());
  const auto run = run_train(data, tc);
  for (std::size_t e = 0; e < run.result.epoch_loss.size(); ++e) {
    std::printf("epoch %zu loss %.6f\n", e + 1, run.result.epoch_loss[e]);
  }

  const std::string dir = out_dir(out);
  const std::string ckpt = dir + "/checkpoint.json";
  const std::string losses = dir + "/loss.csv";
  save_checkpoint(run.checkpoint, ckpt);
  std::ostringstream csv;
  write_loss_csv(csv, run.result.epoch_loss);
  write_text(losses, csv.str());

  Config resolved = to_config(dc);
  resolved.merge(to_config(tc));
  RunManifest m;
  m.command = "train";
  m.config = resolved.to_json();
  m.seeds = {tc.seed, dc.split_seed};
  m.inputs = {{"corpus", input_entry(dc.corpus)}};
  m.outputs = {{"checkpoint", ckpt}, {"loss_csv", losses}};
  m.wall_clock_seconds = seconds_since(t0);
  write_manifest(m, dir + "/manifest.json");
  std::printf("checkpoint written to %s\n", ckpt.c_str());
  return kExitOk;
}

// eval

int eval(Config c, const std::string& checkpoint_path, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (!c.has("data.feature_dim")) c.set("data.feature_dim", std::to_string(ckpt.feature_dim));
  const DataConfig dc = resolve_data(c);
  const auto data = prepare_data(load_corpus(dc.corpus), dc);
  const auto run = run_eval(ckpt, data);
  if (run.hash_mismatch) std::fprintf(stderr, "warning: %s\n", run.warning.c_str());
  std::fputs(format_metric_table({{std::string(loss_name(ckpt.config.loss)), run.report}}).c_str(),
             stdout);
  std::printf("Kendall tau %.4f, ECE %.4f, %zu groups, %zu scenarios\n", run.report.kendall_tau,
              run.report.ece, run.report.n_groups, run.report.n_scenarios);

  const std::string dir = out_dir(out);
  const std::string metrics = dir + "/metrics.json";
  write_text(metrics, eval_json(run).dump(2) + "\n");

  RunManifest m;
  m.command = "eval";
  m.config = to_config(dc).to_json();
  m.seeds = {ckpt.split_seed};
  m.inputs = {{"checkpoint", input_entry(checkpoint_path)}, {"corpus", input_entry(dc.corpus)}};
  m.outputs = {{"metrics", metrics}};
  m.wall_clock_seconds = seconds_since(t0);
  write_manifest(m, dir + "/manifest.json");
  return kExitOk;
}

// ablate

int ablate(const Config& c, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  reject_unknown_keys(c, "ablate", {"axis", "values", "seeds"});
  const DataConfig dc = resolve_data(c);
  const TrainConfig tc = train_config_from(c);
  const AblationAxis axis = parse_ablation_axis(c.get_string("ablate.axis", "LIST_SIZE"));
  const auto values = c.get_doubles("ablate.values").value_or(default_ablation_values(axis));
  const auto seeds = c.has("ablate.seeds") ? to_seeds(*c.get_doubles("ablate.seeds"))
                                           : default_ablation_seeds();
  if (values.empty()) throw ValidationError("ablate.values", "no ablation values");
  if (seeds.empty()) throw ValidationError("ablate.seeds", "no seeds");

  const auto data = prepare_data(load_corpus(dc.corpus), dc);
  const auto rows = run_ablate(data, tc, axis, values, seeds);
  for (const auto& r : rows) {
    std::printf("%s=%g seed=%llu ndcg5=%.4f unsafe_rate=%.4f\n",
                std::string(ablation_axis_name(axis)).c_str(), r.value,
                static_cast<unsigned long long>(r.seed), r.ndcg5, r.unsafe_rate);
  }

  const std::string dir = out_dir(out);
  const std::string grid = dir + "/ablation.csv";
  std::ostringstream csv;
  write_ablation_csv(csv, rows);
  write_text(grid, csv.str());

  Config resolved = to_config(dc);
  resolved.merge(to_config(tc));
  resolved.set("ablate.axis", std::string(ablation_axis_name(axis)));
  json vals = values;
  json sds = seeds;
  resolved.set("ablate.values", vals.dump());
  resolved.set("ablate.seeds", sds.dump());
  RunManifest m;
  m.command = "ablate";
  m.config = resolved.to_json();
  m.seeds = seeds;
  m.inputs = {{"corpus", input_entry(dc.corpus)}};
  m.outputs = {{"ablation_csv", grid}};
  m.wall_clock_seconds = seconds_since(t0);
  write_manifest(m, dir + "/manifest.json");
  return kExitOk;
}

// agree

int agree(Config c, const std::string& checkpoint_path, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Checkpoint> ckpt;
  if (!checkpoint_path.empty()) {
    ckpt = load_checkpoint(checkpoint_path);
    if (!c.has("data.feature_dim")) c.set("data.feature_dim", std::to_string(ckpt->feature_dim));
  }
  const DataConfig dc = resolve_data(c);
  auto records = load_corpus(dc.corpus);
  json report;
  if (ckpt) {
    const auto data = prepare_data(records, dc);
    report = agreement_report(records, &*ckpt, &data);
  } else {
    report = agreement_report(records);
  }
  std::fputs(format_agreement_report(report).c_str(), stdout);

  const std::string dir = out_dir(out);
  const std::string path = dir + "/agreement.json";
  const std::string tables = dir + "/shift_tables.csv";
  write_text(path, report.dump(2) + "\n");
  std::vector<ScenarioRecord> rated;
  for (auto& r : records) {
    if (!r.ratings.empty()) rated.push_back(std::move(r));
  }
  write_text(tables, shift_tables_csv(shift_tables(rated)));

  RunManifest m;
  m.command = "agree";
  m.config = to_config(dc).to_json();
  m.inputs = {{"corpus", input_entry(dc.corpus)}};
  if (ckpt) m.inputs["checkpoint"] = input_entry(checkpoint_path);
  m.outputs = {{"agreement", path}, {"shift_tables", tables}};
  m.wall_clock_seconds = seconds_since(t0);
  write_manifest(m, dir + "/manifest.json");
  return kExitOk;
}

// serve

int serve(const Config& c) {
  const ServiceConfig sc = service_config_from(c);
  const DataConfig dc = data_config_from(c);
  if (sc.corpus.empty()) throw ValidationError("service.corpus", "service.corpus is required");
  if (sc.checkpoint.empty()) {
    throw ValidationError("service.checkpoint", "service.checkpoint is required");
  }
  auto records = load_corpus(sc.corpus);
  const Checkpoint ckpt = load_checkpoint(sc.checkpoint);
  std::shared_ptr<const ImageFeatureTable> table;
  if (!dc.image_features.empty()) {
    table = std::make_shared<const ImageFeatureTable>(ImageFeatureTable::load(dc.image_features));
  }
  auto featurizer = std::make_shared<const Featurizer>(ckpt.feature_dim, table);

  std::unique_ptr<EventLogWriter> writer;
  EventSink sink;
  std::vector<json> history;
  if (!sc.event_log.empty()) history = read_event_log(sc.event_log);

  AnnotationService service(std::move(records), sc.options, checkpoint_scorer(ckpt, featurizer),
                            system_clock_ms(), [&writer](const json& event) {
                              if (writer) writer->append(event);
                            });
  service.replay(history);
  if (!sc.event_log.empty()) writer = std::make_unique<EventLogWriter>(sc.event_log);

  // Signals are taken synchronously on a dedicated thread.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  AnnotationServer server(service);
  const int port = server.bind(sc.bind, sc.port);
  if (port < 0) {
    throw RuntimeFailure("cannot bind " + sc.bind + ":" + std::to_string(sc.port) +
                         " (port in use?)");
  }
  std::printf("listening on %s:%d (%zu events replayed)\n", sc.bind.c_str(), port,
              history.size());
  std::fflush(stdout);

  std::thread waiter([&server, set] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.run();
  // run() only returns after stop(); wake the waiter if it is still blocked.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();

  if (writer) writer->flush();
  if (!sc.snapshot.empty()) write_text(sc.snapshot, service.export_corpus());
  std::printf("shutdown complete\n");
  return kExitOk;
}

// rerun

int rerun(const std::string& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read manifest " + manifest_path);
  json m;
  try {
    m = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("bad manifest: ") + e.what());
  }
  if (!m.is_object() || !m.contains("command") || !m.contains("config")) {
    throw ValidationError("manifest", "manifest lacks command or config");
  }
  const std::string command = m["command"].get<std::string>();
  Config c = Config::from_json(m["config"]);
  const json inputs = m.value("inputs", json::object());
  for (const auto& [role, entry] : inputs.items()) {
    const std::string path = entry.at("path").get<std::string>();
    if (file_hash(path) != entry.at("hash").get<std::string>()) {
      std::fprintf(stderr, "warning: input %s (%s) changed since the manifest was written\n",
                   role.c_str(), path.c_str());
    }
  }
  if (command == "gen-synth") {
    if (out.empty()) throw ValidationError("--out", "rerun of gen-synth needs --out FILE");
    return gen_synth(c, out);
  }
  if (command == "train") return train(c, out);
  if (command == "ablate") return ablate(c, out);
  if (command == "eval") {
    return eval(c, inputs.at("checkpoint").at("path").get<std::string>(), out);
  }
  throw ValidationError("manifest", "command '" + command + "' cannot be rerun");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"listalign: listwise scorer training, evaluation, agreement and annotation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "listalign 1.0.0");

  Common gen_opts, train_opts, eval_opts, ablate_opts, agree_opts, serve_opts;
  Overrides gen_flags, train_flags, eval_flags, ablate_flags, agree_flags, serve_flags;
  std::string eval_checkpoint, agree_checkpoint, manifest_path, rerun_out;

  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic JSONL corpus");
  add_common(gen, gen_opts, true, "Output corpus file; the manifest goes to <out>.manifest.json");
  gen_flags.bind(gen, "--seed", "synth.seed", "Generator seed");
  gen_flags.bind(gen, "--groups", "synth.n_groups", "Number of image groups");
  gen_flags.bind(gen, "--noise-std", "synth.noise_std", "Rating noise standard deviation");
  gen_flags.bind(gen, "--feature-dim", "synth.feature_dim", "Image feature width");

  auto add_data_flags = [](CLI::App* sub, Overrides& f) {
    f.bind(sub, "--corpus", "data.corpus", "Corpus JSONL file");
    f.bind(sub, "--image-features", "data.image_features", "Image feature JSONL file");
    f.bind(sub, "--feature-dim", "data.feature_dim", "Hashed text feature width");
  };
  auto add_train_flags = [](CLI::App* sub, Overrides& f) {
    f.bind(sub, "--loss", "train.loss", "Objective: lipo, bpo or bce");
    f.bind(sub, "--seed", "train.seed", "Training seed");
    f.bind(sub, "--epochs", "train.epochs", "Training epochs");
    f.bind(sub, "--lr", "train.lr", "AdamW learning rate");
    f.bind(sub, "--list-size", "train.list_size", "List size m used in training");
    f.bind(sub, "--fraction", "train.fraction", "Fraction f of training groups");
  };

  auto* tr = app.add_subcommand("train", "Train a scorer and save a checkpoint");
  add_common(tr, train_opts, false, "Output directory (checkpoint.json, loss.csv, manifest.json)");
  add_data_flags(tr, train_flags);
  add_train_flags(tr, train_flags);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  add_common(ev, eval_opts, false, "Output directory (metrics.json, manifest.json)");
  ev->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required();
  add_data_flags(ev, eval_flags);

  auto* ab = app.add_subcommand("ablate", "Train and evaluate over a list-size or fraction grid");
  add_common(ab, ablate_opts, false, "Output directory (ablation.csv, manifest.json)");
  add_data_flags(ab, ablate_flags);
  add_train_flags(ab, ablate_flags);
  ablate_flags.bind(ab, "--axis", "ablate.axis", "LIST_SIZE or FRACTION");
  Overrides ablate_lists;
  ablate_lists.bind(ab, "--values", "ablate.values", "Comma-separated axis values");
  ablate_lists.bind(ab, "--seeds", "ablate.seeds", "Comma-separated seeds");

  auto* ag = app.add_subcommand("agree", "Agreement statistics for an annotated corpus");
  add_common(ag, agree_opts, false, "Output directory (agreement.json, shift_tables.csv)");
  ag->add_option("--checkpoint", agree_checkpoint, "Optional checkpoint for model agreement rows");
  add_data_flags(ag, agree_flags);

  auto* sv = app.add_subcommand("serve", "Run the annotation HTTP service");
  add_common(sv, serve_opts, false, "");
  serve_flags.bind(sv, "--corpus", "service.corpus", "Seed corpus JSONL file");
  serve_flags.bind(sv, "--checkpoint", "service.checkpoint", "Checkpoint file");
  serve_flags.bind(sv, "--bind", "service.bind", "Bind address");
  serve_flags.bind(sv, "--port", "service.port", "Port (0 picks a free port)");
  serve_flags.bind(sv, "--event-log", "service.event_log", "Append-only JSONL event log");
  serve_flags.bind(sv, "--snapshot", "service.snapshot", "Corpus snapshot written on shutdown");
  serve_flags.bind(sv, "--delta", "service.delta", "Disagreement threshold");

  auto* rr = app.add_subcommand("rerun", "Repeat a run from its manifest");
  rr->add_option("manifest", manifest_path, "manifest.json written by a previous run")
      ->required()
      ->check(CLI::ExistingFile);
  rr->add_option("--out", rerun_out, "Output location for the repeated run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return gen_synth(resolve_config(gen_opts, gen_flags), gen_opts.out);
    if (*tr) return train(resolve_config(train_opts, train_flags), train_opts.out);
    if (*ev) return eval(resolve_config(eval_opts, eval_flags), eval_checkpoint, eval_opts.out);
    if (*ab) {
      for (auto& [key, slot] : ablate_lists.strings) *slot = comma_list(*slot);
      Config c = resolve_config(ablate_opts, ablate_flags);
      ablate_lists.apply(c);
      return ablate(c, ablate_opts.out);
    }
    if (*ag) return agree(resolve_config(agree_opts, agree_flags), agree_checkpoint, agree_opts.out);
    if (*sv) return serve(resolve_config(serve_opts, serve_flags));
    if (*rr) return rerun(manifest_path, rerun_out);
  } catch (const RuntimeFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(error_code_name(e.code())).c_str(),
                 e.what());
    switch (e.code()) {
      case ErrorCode::kValidation:
      case ErrorCode::kParse:
      case ErrorCode::kDimension:
      case ErrorCode::kNotFound:
      case ErrorCode::kIo:
        return kExitData;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
