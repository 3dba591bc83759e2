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

// Discrepancy-guided annotation loop. All mutations go through one writer
// and are recorded as events; replaying the event log over the seed corpus
// rebuilds the same store and session state.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "listalign/checkpoint.h"
#include "listalign/config.h"
#include "listalign/corpus.h"
#include "listalign/featurizer.h"

namespace listalign {

enum class Branch { kConfirmAndPrompt, kModalityCheck };

std::string_view branch_name(Branch b);

/// CONFIRM_AND_PROMPT iff delta <= threshold (delta < threshold when the
/// boundary is exclusive).
Branch branch_for(double delta, double threshold, bool inclusive = true);

struct ServiceOptions {
  double delta = 1.0;
  bool delta_inclusive = true;
  std::size_t canary_period = 10;  // 0 disables canaries
  std::uint64_t seed = 1;
};

struct ServiceConfig {
  ServiceOptions options;
  std::string corpus;
  std::string checkpoint;
  std::string event_log;
  std::string snapshot;
  std::string bind = "127.0.0.1";
  int port = 8080;
};

ServiceConfig service_config_from(const Config& config, ServiceConfig base = {});

struct Task {
  std::string scenario_id;
  std::string image_id;
  std::string image_ref;
  std::string text;
};

/// Every task payload has exactly these fields, canary or not.
nlohmann::ordered_json to_json(const Task& task);

enum class NextStatus { kTask, kDone, kConsentRequired };

struct NextResult {
  NextStatus status = NextStatus::kDone;
  std::optional<Task> task;
};

nlohmann::ordered_json to_json(const NextResult& next);

enum class PendingState { kNone, kModalityPending, kScenarioPrompt };

struct SessionView {
  std::string session_id;
  std::string annotator_id;
  bool consent_given = false;
  std::int64_t consent_timestamp = 0;  // 0 when consent was not given
  double delta = 1.0;
  std::size_t queue_length = 0;
  std::size_t served = 0;
  PendingState pending = PendingState::kNone;
  std::optional<Task> current;  // served and not yet judged
  std::optional<std::string> prompt_image_id;
};

nlohmann::ordered_json to_json(const SessionView& session);

struct JudgmentOutcome {
  Branch branch = Branch::kConfirmAndPrompt;
};

/// Model score for a record, already clamped to [1, 5].
using ScoreFn = std::function<double(const ScenarioRecord&)>;
/// Milliseconds since an arbitrary epoch.
using ClockFn = std::function<std::int64_t()>;
/// Receives each event line after it has been applied.
using EventSink = std::function<void(const nlohmann::ordered_json&)>;

/// Scale-score output of a checkpoint clamped to [1, 5].
ScoreFn checkpoint_scorer(const Checkpoint& checkpoint,
                          std::shared_ptr<const Featurizer> featurizer);

ClockFn system_clock_ms();

class AnnotationService {
 public:
  AnnotationService(std::vector<ScenarioRecord> seed_corpus, ServiceOptions options,
                    ScoreFn scorer, ClockFn clock = system_clock_ms(),
                    EventSink sink = nullptr);

  /// Throws ValidationError for an empty annotator id.
  SessionView create_session(const std::string& annotator_id, bool consent);
  /// Re-serves the current task until it is judged. Throws ConflictError
  /// while a modality check is pending.
  NextResult next_task(const std::string& session_id);
  JudgmentOutcome submit_judgment(const std::string& session_id,
                                  const std::string& scenario_id, int score);
  void submit_modality(const std::string& session_id, const std::string& scenario_id,
                       const std::string& modality);
  std::string submit_scenario(const std::string& session_id, const std::string& image_id,
                              const std::string& text);

  SessionView session(const std::string& session_id) const;
  std::vector<ScenarioRecord> export_records() const;
  std::string export_corpus() const;
  std::vector<nlohmann::ordered_json> events() const;

  /// Applies logged events without re-logging them; the sink is not called.
  void replay(const std::vector<nlohmann::ordered_json>& events);

  const ServiceOptions& options() const { return options_; }

 private:
  struct Served {
    std::string scenario_id;
    double s_vlm = 0.0;
    bool judged = false;
  };
  struct SessionState {
    std::string annotator_id;
    bool consent = false;
    std::int64_t consent_ts = 0;
    std::vector<std::string> queue;
    std::size_t position = 0;
    std::optional<Served> current;
    std::optional<std::string> pending_modality;  // scenario id
    std::optional<std::string> prompt_image;      // open proposal window
    std::optional<std::string> prompt_scenario;
    std::int64_t last_ts = 0;
  };

  std::vector<std::string> build_queue(const std::string& annotator_id,
                                       std::uint64_t session_number) const;
  SessionState& find_session(const std::string& session_id);
  const SessionState& find_session(const std::string& session_id) const;
  ScenarioRecord& find_record(const std::string& scenario_id);
  Task task_for(const std::string& scenario_id) const;
  std::int64_t stamp(std::int64_t last);
  void commit(nlohmann::ordered_json event, bool log);
  void apply(const nlohmann::ordered_json& event);
  std::string next_session_id();
  std::string next_proposal_id();

  ServiceOptions options_;
  ScoreFn scorer_;
  ClockFn clock_;
  EventSink sink_;

  mutable std::mutex mu_;
  std::vector<ScenarioRecord> store_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, SessionState> sessions_;
  std::vector<nlohmann::ordered_json> log_;
  std::uint64_t session_counter_ = 0;
  std::uint64_t proposal_counter_ = 0;
};

/// JSONL reader for an event log file; a missing file yields no events.
std::vector<nlohmann::ordered_json> read_event_log(const std::string& path);

/// Appends one JSON line per event, flushed immediately.
class EventLogWriter {
 public:
  explicit EventLogWriter(const std::string& path);
  void append(const nlohmann::ordered_json& event);
  void flush();

 private:
  std::mutex mu_;
  std::unique_ptr<std::ofstream> out_;
};

}  // namespace listalign
