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

#include "listalign/annotation.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "listalign/errors.h"
#include "listalign/rng.h"
#include "listalign/trainer.h"

namespace listalign {

namespace {

using json = nlohmann::ordered_json;

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string_view pending_name(PendingState p) {
  switch (p) {
    case PendingState::kNone:
      return "NONE";
    case PendingState::kModalityPending:
      return "MODALITY_PENDING";
    case PendingState::kScenarioPrompt:
      return "SCENARIO_PROMPT";
  }
  return "NONE";
}

}  // namespace

std::string_view branch_name(Branch b) {
  return b == Branch::kConfirmAndPrompt ? "CONFIRM_AND_PROMPT" : "MODALITY_CHECK";
}

Branch branch_for(double delta, double threshold, bool inclusive) {
  const bool agree = inclusive ? delta <= threshold : delta < threshold;
  return agree ? Branch::kConfirmAndPrompt : Branch::kModalityCheck;
}

ServiceConfig service_config_from(const Config& c, ServiceConfig s) {
  reject_unknown_keys(c, "service",
                      {"corpus", "checkpoint", "delta", "delta_inclusive", "canary_period",
                       "bind", "port", "event_log", "snapshot", "seed"});
  s.corpus = c.get_string("service.corpus", s.corpus);
  s.checkpoint = c.get_string("service.checkpoint", s.checkpoint);
  s.event_log = c.get_string("service.event_log", s.event_log);
  s.snapshot = c.get_string("service.snapshot", s.snapshot);
  s.bind = c.get_string("service.bind", s.bind);
  if (auto v = c.get_double("service.delta")) s.options.delta = *v;
  if (auto v = c.get_bool("service.delta_inclusive")) s.options.delta_inclusive = *v;
  if (auto v = c.get_uint("service.canary_period")) s.options.canary_period = *v;
  if (auto v = c.get_uint("service.seed")) s.options.seed = *v;
  if (auto v = c.get_int("service.port")) s.port = static_cast<int>(*v);
  if (!(s.options.delta > 0.0)) throw ValidationError("service.delta", "delta must be positive");
  if (s.port < 0 || s.port > 65535) throw ValidationError("service.port", "port out of range");
  return s;
}

json to_json(const Task& t) {
  return json{{"scenario_id", t.scenario_id},
              {"image_id", t.image_id},
              {"image_ref", t.image_ref},
              {"text", t.text}};
}

json to_json(const NextResult& n) {
  json j;
  switch (n.status) {
    case NextStatus::kTask:
      j["status"] = "TASK";
      j["task"] = to_json(*n.task);
      break;
    case NextStatus::kDone:
      j["status"] = "DONE";
      break;
    case NextStatus::kConsentRequired:
      j["status"] = "CONSENT_REQUIRED";
      break;
  }
  return j;
}

json to_json(const SessionView& s) {
  json j;
  j["session_id"] = s.session_id;
  j["annotator_id"] = s.annotator_id;
  j["consent_given"] = s.consent_given;
  j["consent_timestamp"] = s.consent_given ? json(s.consent_timestamp) : json(nullptr);
  j["delta"] = s.delta;
  j["queue_length"] = s.queue_length;
  j["served"] = s.served;
  j["pending"] = std::string(pending_name(s.pending));
  j["current_task"] = s.current ? to_json(*s.current) : json(nullptr);
  j["prompt_image_id"] = s.prompt_image_id ? json(*s.prompt_image_id) : json(nullptr);
  return j;
}

ScoreFn checkpoint_scorer(const Checkpoint& checkpoint,
                          std::shared_ptr<const Featurizer> featurizer) {
  if (checkpoint.feature_dim != featurizer->dim()) {
    throw DimensionError("checkpoint feature_dim does not match the featurizer");
  }
  return [params = checkpoint.params, loss = checkpoint.config.loss,
          featurizer](const ScenarioRecord& r) {
    const double raw = score(params, featurizer->features(r.image_id, r.text));
    const double s = loss == LossType::kBce ? bce_to_scale(raw) : raw;
    return std::clamp(s, 1.0, 5.0);
  };
}

ClockFn system_clock_ms() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

AnnotationService::AnnotationService(std::vector<ScenarioRecord> seed_corpus,
                                     ServiceOptions options, ScoreFn scorer, ClockFn clock,
                                     EventSink sink)
    : options_(options),
      scorer_(std::move(scorer)),
      clock_(std::move(clock)),
      sink_(std::move(sink)),
      store_(std::move(seed_corpus)) {
  if (!(options_.delta > 0.0)) throw ValidationError("delta", "delta must be positive");
  if (options_.canary_period == 1) {
    throw ValidationError("canary_period", "canary_period must be 0 (off) or at least 2");
  }
  if (!scorer_) throw ValidationError("scorer", "a model scorer is required");
  if (!clock_) clock_ = system_clock_ms();
  for (std::size_t i = 0; i < store_.size(); ++i) {
    if (!index_.emplace(store_[i].scenario_id, i).second) {
      throw ValidationError("scenario_id", "duplicate scenario_id '" + store_[i].scenario_id + "'");
    }
  }
}

std::vector<std::string> AnnotationService::build_queue(const std::string& annotator_id,
                                                        std::uint64_t session_number) const {
  auto rated_by_me = [&](const ScenarioRecord& r) {
    return std::any_of(r.ratings.begin(), r.ratings.end(),
                       [&](const Rating& x) { return x.annotator_id == annotator_id; });
  };
  std::vector<std::string> regular;
  std::vector<std::string> canaries;
  for (const auto& r : store_) {
    if (r.is_canary) {
      canaries.push_back(r.scenario_id);
    } else if (!rated_by_me(r)) {
      regular.push_back(r.scenario_id);
    }
  }
  Rng rng(derive_seed(options_.seed, "queue:" + std::to_string(session_number)));
  rng.shuffle(regular);
  rng.shuffle(canaries);
  const std::size_t period = options_.canary_period;
  if (period == 0 || canaries.empty()) return regular;
  // A canary at every position p with p % period == period - 1.
  std::vector<std::string> queue;
  std::size_t next_canary = 0;
  for (const auto& id : regular) {
    if (queue.size() % period == period - 1) {
      queue.push_back(canaries[next_canary++ % canaries.size()]);
    }
    queue.push_back(id);
  }
  if (queue.size() % period == period - 1) {
    queue.push_back(canaries[next_canary % canaries.size()]);
  }
  return queue;
}

AnnotationService::SessionState& AnnotationService::find_session(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

const AnnotationService::SessionState& AnnotationService::find_session(
    const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

ScenarioRecord& AnnotationService::find_record(const std::string& scenario_id) {
  auto it = index_.find(scenario_id);
  if (it == index_.end()) throw NotFoundError("unknown scenario '" + scenario_id + "'");
  return store_[it->second];
}

Task AnnotationService::task_for(const std::string& scenario_id) const {
  const auto& r = store_.at(index_.at(scenario_id));
  return Task{r.scenario_id, r.image_id, r.image_ref, r.text};
}

std::int64_t AnnotationService::stamp(std::int64_t last) { return std::max(last, clock_()); }

std::string AnnotationService::next_session_id() {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sess-%06llu",
                static_cast<unsigned long long>(session_counter_ + 1));
  return buf;
}

std::string AnnotationService::next_proposal_id() {
  for (std::uint64_t k = proposal_counter_ + 1;; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "prop%06llu", static_cast<unsigned long long>(k));
    if (!index_.count(buf)) return buf;
  }
}

void AnnotationService::commit(json event, bool log) {
  apply(event);
  log_.push_back(event);
  if (log && sink_) sink_(log_.back());
}

void AnnotationService::apply(const json& e) {
  const std::string type = e.at("type").get<std::string>();
  const std::string sid = e.at("session_id").get<std::string>();
  const std::int64_t ts = e.at("ts").get<std::int64_t>();
  if (type == "session_created") {
    SessionState s;
    s.annotator_id = e.at("annotator_id").get<std::string>();
    s.consent = e.at("consent").get<bool>();
    s.consent_ts = s.consent ? ts : 0;
    s.queue = e.at("queue").get<std::vector<std::string>>();
    s.last_ts = ts;
    if (!sessions_.emplace(sid, std::move(s)).second) {
      throw ConflictError("session '" + sid + "' already exists");
    }
    ++session_counter_;
    return;
  }
  auto& s = find_session(sid);
  if (ts < s.last_ts) throw ValidationError("ts", "event timestamps must be non-decreasing");
  s.last_ts = ts;
  if (type == "task_served") {
    const auto id = e.at("scenario_id").get<std::string>();
    if (s.position >= s.queue.size() || s.queue[s.position] != id) {
      throw ConflictError("served task does not match the session queue");
    }
    ++s.position;
    s.current = Served{id, e.at("s_vlm").get<double>(), false};
    s.prompt_image.reset();
    s.prompt_scenario.reset();
  } else if (type == "judgment") {
    const auto id = e.at("scenario_id").get<std::string>();
    if (!s.current || s.current->scenario_id != id || s.current->judged) {
      throw ConflictError("judgment does not match the served task");
    }
    auto& r = find_record(id);
    s.current->judged = true;
    r.ratings.push_back({s.annotator_id, e.at("score").get<int>()});
    const auto branch = e.at("branch").get<std::string>();
    if (branch == branch_name(Branch::kModalityCheck)) {
      s.pending_modality = id;
    } else {
      s.prompt_image = r.image_id;
      s.prompt_scenario = id;
    }
  } else if (type == "modality") {
    const auto id = e.at("scenario_id").get<std::string>();
    if (!s.pending_modality || *s.pending_modality != id) {
      throw ConflictError("no pending modality check for '" + id + "'");
    }
    find_record(id).modality_labels.push_back(
        {s.annotator_id, parse_modality(e.at("modality").get<std::string>())});
    s.pending_modality.reset();
  } else if (type == "scenario_proposed") {
    const auto image_id = e.at("image_id").get<std::string>();
    if (!s.prompt_image || *s.prompt_image != image_id) {
      throw ConflictError("no open proposal window for image '" + image_id + "'");
    }
    const auto& source = find_record(*s.prompt_scenario);
    ScenarioRecord r;
    r.scenario_id = e.at("new_scenario_id").get<std::string>();
    r.image_id = image_id;
    r.image_ref = source.image_ref;
    r.text = e.at("text").get<std::string>();
    r.proposed_by = s.annotator_id;
    if (!index_.emplace(r.scenario_id, store_.size()).second) {
      throw ConflictError("scenario id '" + r.scenario_id + "' already exists");
    }
    store_.push_back(std::move(r));
    ++proposal_counter_;
    s.prompt_image.reset();
    s.prompt_scenario.reset();
  } else {
    throw ValidationError("type", "unknown event type '" + type + "'");
  }
}

SessionView AnnotationService::create_session(const std::string& annotator_id, bool consent) {
  if (blank(annotator_id)) throw ValidationError("annotator_id", "annotator_id must be non-empty");
  std::lock_guard<std::mutex> lock(mu_);
  const std::string sid = next_session_id();
  json e;
  e["type"] = "session_created";
  e["session_id"] = sid;
  e["ts"] = clock_();
  e["annotator_id"] = annotator_id;
  e["consent"] = consent;
  e["queue"] = build_queue(annotator_id, session_counter_ + 1);
  commit(std::move(e), true);
  const auto& s = sessions_.at(sid);
  SessionView v;
  v.session_id = sid;
  v.annotator_id = s.annotator_id;
  v.consent_given = s.consent;
  v.consent_timestamp = s.consent_ts;
  v.delta = options_.delta;
  v.queue_length = s.queue.size();
  return v;
}

NextResult AnnotationService::next_task(const std::string& session_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto& s = find_session(session_id);
  if (!s.consent) return {NextStatus::kConsentRequired, std::nullopt};
  if (s.pending_modality) {
    throw ConflictError("modality check pending for '" + *s.pending_modality + "'");
  }
  if (s.current && !s.current->judged) {
    return {NextStatus::kTask, task_for(s.current->scenario_id)};
  }
  if (s.position >= s.queue.size()) return {NextStatus::kDone, std::nullopt};
  const std::string id = s.queue[s.position];
  const double s_vlm = std::clamp(scorer_(store_.at(index_.at(id))), 1.0, 5.0);
  json e;
  e["type"] = "task_served";
  e["session_id"] = session_id;
  e["ts"] = stamp(s.last_ts);
  e["scenario_id"] = id;
  e["position"] = s.position;
  e["s_vlm"] = s_vlm;
  commit(std::move(e), true);
  return {NextStatus::kTask, task_for(id)};
}

JudgmentOutcome AnnotationService::submit_judgment(const std::string& session_id,
                                                   const std::string& scenario_id, int score) {
  if (score < 1 || score > 5) {
    throw ValidationError("score", "score must be an integer in 1..5, got " + std::to_string(score));
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto& s = find_session(session_id);
  if (!s.current || s.current->scenario_id != scenario_id) {
    throw ConflictError("scenario '" + scenario_id + "' is not the task served to this session");
  }
  if (s.current->judged) throw ConflictError("scenario '" + scenario_id + "' already judged");
  const double gap = std::fabs(static_cast<double>(score) - s.current->s_vlm);
  const Branch branch = branch_for(gap, options_.delta, options_.delta_inclusive);
  json e;
  e["type"] = "judgment";
  e["session_id"] = session_id;
  e["ts"] = stamp(s.last_ts);
  e["scenario_id"] = scenario_id;
  e["score"] = score;
  e["s_vlm"] = s.current->s_vlm;
  e["delta"] = gap;
  e["branch"] = std::string(branch_name(branch));
  commit(std::move(e), true);
  return {branch};
}

void AnnotationService::submit_modality(const std::string& session_id,
                                        const std::string& scenario_id,
                                        const std::string& modality) {
  const Modality m = parse_modality(modality);
  std::lock_guard<std::mutex> lock(mu_);
  auto& s = find_session(session_id);
  if (!s.pending_modality || *s.pending_modality != scenario_id) {
    throw ConflictError("no pending modality check for '" + scenario_id + "'");
  }
  json e;
  e["type"] = "modality";
  e["session_id"] = session_id;
  e["ts"] = stamp(s.last_ts);
  e["scenario_id"] = scenario_id;
  e["modality"] = std::string(modality_name(m));
  commit(std::move(e), true);
}

std::string AnnotationService::submit_scenario(const std::string& session_id,
                                               const std::string& image_id,
                                               const std::string& text) {
  if (blank(text)) throw ValidationError("text", "scenario text must be non-empty");
  std::lock_guard<std::mutex> lock(mu_);
  auto& s = find_session(session_id);
  if (!s.prompt_image) throw ConflictError("no scenario prompt is open for this session");
  if (*s.prompt_image != image_id) {
    throw ConflictError("the open prompt is for image '" + *s.prompt_image + "', not '" +
                        image_id + "'");
  }
  const std::string new_id = next_proposal_id();
  json e;
  e["type"] = "scenario_proposed";
  e["session_id"] = session_id;
  e["ts"] = stamp(s.last_ts);
  e["image_id"] = image_id;
  e["text"] = text;
  e["source_scenario_id"] = *s.prompt_scenario;
  e["new_scenario_id"] = new_id;
  commit(std::move(e), true);
  return new_id;
}

SessionView AnnotationService::session(const std::string& session_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  const auto& s = find_session(session_id);
  SessionView v;
  v.session_id = session_id;
  v.annotator_id = s.annotator_id;
  v.consent_given = s.consent;
  v.consent_timestamp = s.consent_ts;
  v.delta = options_.delta;
  v.queue_length = s.queue.size();
  v.served = s.position;
  if (s.pending_modality) {
    v.pending = PendingState::kModalityPending;
  } else if (s.prompt_image) {
    v.pending = PendingState::kScenarioPrompt;
    v.prompt_image_id = s.prompt_image;
  }
  if (s.current && !s.current->judged) v.current = task_for(s.current->scenario_id);
  return v;
}

std::vector<ScenarioRecord> AnnotationService::export_records() const {
  std::lock_guard<std::mutex> lock(mu_);
  return store_;
}

std::string AnnotationService::export_corpus() const {
  return serialize_corpus(export_records());
}

std::vector<json> AnnotationService::events() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

void AnnotationService::replay(const std::vector<json>& events) {
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& e : events) commit(e, false);
}

std::vector<json> read_event_log(const std::string& path) {
  std::vector<json> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("bad event log line: ") + e.what());
    }
  }
  return out;
}

EventLogWriter::EventLogWriter(const std::string& path)
    : out_(std::make_unique<std::ofstream>(path, std::ios::app)) {
  if (!*out_) throw Error(ErrorCode::kIo, "cannot open event log " + path);
}

void EventLogWriter::append(const json& event) {
  std::lock_guard<std::mutex> lock(mu_);
  *out_ << event.dump() << '\n';
  out_->flush();
  if (!*out_) throw Error(ErrorCode::kIo, "event log write failed");
}

void EventLogWriter::flush() {
  std::lock_guard<std::mutex> lock(mu_);
  out_->flush();
}

}  // namespace listalign
