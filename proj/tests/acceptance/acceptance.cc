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
// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance <path-to-listalign-cli> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "listalign/agreement.h"
#include "listalign/annotation.h"
#include "listalign/corpus.h"
#include "listalign/losses.h"
#include "listalign/metrics.h"
#include "listalign/pipeline.h"
#include "listalign/rng.h"
#include "listalign/synth.h"

namespace fs = std::filesystem;
using namespace listalign;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

std::vector<double> random_gold(Rng& rng, std::size_t n) {
  // Means of three 1..5 ratings: ties are common, as in real consensus scores.
  std::vector<double> g(n);
  for (auto& x : g) {
    int s = 0;
    for (int k = 0; k < 3; ++k) s += 1 + static_cast<int>(rng.below(5));
    x = s / 3.0;
  }
  return g;
}

// 1 ----------------------------------------------------------------------

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(2024, "fd"));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(5);
    std::vector<double> s(n);
    for (auto& x : s) x = rng.uniform(-10.0, 10.0);
    const auto gold = random_gold(rng, n);
    for (auto op : {LossOp::kListMle, LossOp::kBpo, LossOp::kBce, LossOp::kMse}) {
      worst = std::max(worst, finite_diff_check(op, s, gold, 1e-5));
    }
    std::vector<double> logits(3);
    for (auto& x : logits) x = rng.uniform(-10.0, 10.0);
    const auto label = static_cast<Modality>(rng.below(3));
    worst = std::max(worst, finite_diff_check_modality(logits, label, 1e-5));
  }
  const double secs = elapsed(t0);
  return {worst < 1e-5 && secs < 60.0,
          fmt("max relative error %.3g over 100 lists x 5 losses, %.2fs", worst, secs)};
}

// 2 ----------------------------------------------------------------------

Outcome plackett_luce() {
  Rng rng(derive_seed(2024, "pl"));
  double worst = 0.0;
  for (std::size_t n = 2; n <= 5; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> s(n);
      for (auto& x : s) x = rng.uniform(-10.0, 10.0);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double total = 0.0;
      do {
        total += std::exp(-listmle_permutation_loss<double>(s, perm).value);
      } while (std::next_permutation(perm.begin(), perm.end()));
      worst = std::max(worst, std::fabs(total - 1.0));
    }
  }
  return {worst <= 1e-9, fmt("max |sum - 1| = %.3g over n in 2..5, 200 score vectors", worst)};
}

// 3 ----------------------------------------------------------------------
// Brute-force references, written without the library's helpers.

std::size_t brute_rank(const std::vector<double>& pred, std::size_t i) {
  std::size_t r = 1;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (pred[j] > pred[i] || (pred[j] == pred[i] && j < i)) ++r;
  }
  return r;
}

double brute_dcg_by_rank(const std::vector<double>& gold, const std::vector<std::size_t>& rank) {
  double d = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (rank[i] <= 5) d += (std::pow(2.0, gold[i]) - 1.0) / std::log2(rank[i] + 1.0);
  }
  return d;
}

double brute_ndcg5(const std::vector<double>& pred, const std::vector<double>& gold) {
  const std::size_t n = pred.size();
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[i] = brute_rank(pred, i);
  const double dcg = brute_dcg_by_rank(gold, rank);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  double best = 0.0;
  do {
    best = std::max(best, brute_dcg_by_rank(gold, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best == 0.0 ? 1.0 : dcg / best;
}

double brute_rr(const std::vector<double>& pred, const std::vector<double>& gold) {
  const double top = *std::max_element(gold.begin(), gold.end());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == top) return 1.0 / static_cast<double>(brute_rank(pred, i));
  }
  return 0.0;
}

double brute_unsafe(const std::vector<double>& pred, const std::vector<double>& gold) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] <= 2.5) {
      den += 1.0;
      if (pred[i] > 2.5) num += 1.0;
    }
  }
  return den == 0.0 ? 0.0 : num / den;
}

double brute_auc(const std::vector<double>& pred, const std::vector<double>& gold) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < gold.size(); ++i) (gold[i] <= 2.5 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) return 0.5;
  // Thresholds rise, so both rates are monotone and the points are in curve order.
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  for (int k = 0; k <= 40; ++k) {
    const double t = (10 + k) / 10.0;
    double tp = 0, fp = 0;
    for (auto i : pos) tp += pred[i] <= t;
    for (auto i : neg) fp += pred[i] <= t;
    pts.emplace_back(fp / neg.size(), tp / pos.size());
  }
  pts.emplace_back(1.0, 1.0);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  return area;
}

double brute_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
  auto sign = [](double x) { return (x > 0) - (x < 0); };
  auto tied_pairs = [](const std::vector<double>& v) {
    std::map<double, long> counts;
    for (double x : v) ++counts[x];
    long t = 0;
    for (const auto& [_, c] : counts) t += c * (c - 1) / 2;
    return t;
  };
  const long n = static_cast<long>(a.size());
  long s = 0;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < i; ++j) s += sign(a[i] - a[j]) * sign(b[i] - b[j]);
  }
  const long n0 = n * (n - 1) / 2;
  const double den = std::sqrt(double(n0 - tied_pairs(a)) * double(n0 - tied_pairs(b)));
  return den == 0.0 ? 0.0 : s / den;
}

double brute_ece(const std::vector<double>& p, const std::vector<int>& y) {
  double total = 0.0;
  for (int b = 0; b < 10; ++b) {
    const double lo = b / 10.0, hi = (b + 1) / 10.0;
    double sp = 0, sy = 0, c = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const bool in = (p[i] > lo && p[i] <= hi) || (b == 0 && p[i] == 0.0);
      if (in) {
        sp += p[i];
        sy += y[i];
        c += 1;
      }
    }
    if (c > 0) total += c / p.size() * std::fabs(sp / c - sy / c);
  }
  return total;
}

Outcome metric_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(2024, "metrics"));
  std::map<std::string, double> worst;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = 1 + rng.below(7);
    const auto gold = random_gold(rng, n);
    std::vector<double> pred(n);
    // Quantized predictions produce ties and values on sweep thresholds.
    const bool quantize = rng.bernoulli(0.5);
    for (auto& x : pred) {
      x = rng.uniform(0.5, 5.5);
      if (quantize) x = std::round(x * 2.0) / 2.0;
    }
    auto note = [&](const char* k, double v) { worst[k] = std::max(worst[k], v); };
    note("ndcg5", std::fabs(ndcg_at_k(pred, gold, 5) - brute_ndcg5(pred, gold)));
    note("mrr", std::fabs(reciprocal_rank(pred, gold) - brute_rr(pred, gold)));
    note("unsafe", std::fabs(unsafe_rate(pred, gold).value - brute_unsafe(pred, gold)));

    // Pooled instances for the population metrics.
    const std::size_t m = 2 + rng.below(60);
    const auto pg = random_gold(rng, m);
    std::vector<double> pp(m);
    for (auto& x : pp) {
      x = rng.uniform(0.5, 5.5);
      if (quantize) x = std::round(x * 10.0) / 10.0;
    }
    note("auc", std::fabs(auc_safety(pp, pg).auc - brute_auc(pp, pg)));
    note("tau_b", std::fabs(kendall_tau(pp, pg) - brute_tau_b(pp, pg)));
    std::vector<double> probs(m);
    std::vector<int> y(m);
    for (std::size_t i = 0; i < m; ++i) {
      probs[i] = quantize ? rng.below(11) / 10.0 : rng.uniform();
      y[i] = rng.bernoulli(0.5);
    }
    note("ece", std::fabs(ece(probs, y).ece - brute_ece(probs, y)));
  }
  // MRR as a mean over lists is checked on one pooled batch.
  std::vector<ScoredList> lists;
  double ref = 0.0;
  for (int i = 0; i < 200; ++i) {
    ScoredList l;
    l.gold = random_gold(rng, 1 + rng.below(5));
    for (std::size_t k = 0; k < l.gold.size(); ++k) l.pred.push_back(rng.uniform(1, 5));
    ref += brute_rr(l.pred, l.gold) / 200.0;
    lists.push_back(l);
  }
  worst["mrr"] = std::max(worst["mrr"], std::fabs(mrr(lists) - ref));

  double overall = 0.0;
  std::string detail;
  for (const auto& [k, v] : worst) {
    overall = std::max(overall, v);
    detail += k + "=" + fmt("%.2g", v) + " ";
  }
  const double secs = elapsed(t0);
  return {overall <= 1e-9 && secs < 60.0, detail + fmt("(1000 instances, %.2fs)", secs)};
}

// 4-7 --------------------------------------------------------------------
// One synthetic corpus, five training seeds. The training schedule is the
// desk-scale one documented in the README (lr 1e-3, 6 epochs).

struct Directional {
  std::map<std::string, MetricReport> mean;  // by run label
  double seconds = 0.0;
};

MetricReport accumulate(const std::vector<MetricReport>& runs) {
  MetricReport m;
  m.auc_safety = 0.0;
  const double n = static_cast<double>(runs.size());
  for (const auto& r : runs) {
    m.ndcg_at_5 += r.ndcg_at_5 / n;
    m.mrr += r.mrr / n;
    m.unsafe_rate += r.unsafe_rate / n;
    m.auc_safety += r.auc_safety / n;
    m.kendall_tau += r.kendall_tau / n;
    m.ece += r.ece / n;
  }
  return m;
}

Directional run_directional() {
  const auto t0 = std::chrono::steady_clock::now();
  SynthConfig sc;  // 2,000 groups, noise_std 0.5
  const auto corpus = generate_synthetic(sc);
  DataConfig dc;
  dc.feature_dim = sc.feature_dim;
  const auto data = prepare_data(corpus.records, dc);

  TrainConfig base;
  base.lr = 1e-3;
  base.epochs = 6;

  struct Run {
    std::string label;
    TrainConfig config;
  };
  std::vector<Run> runs;
  for (auto loss : {LossType::kListMle, LossType::kBpo, LossType::kBce}) {
    TrainConfig c = base;
    c.loss = loss;
    runs.push_back({std::string(loss_name(loss)), c});
  }
  TrainConfig no_aux = base;
  no_aux.aux_mse_weight = 0.0;
  runs.push_back({"lipo_no_mse", no_aux});
  for (std::size_t m : {1, 4}) {
    TrainConfig c = base;
    c.list_size = m;
    runs.push_back({"lipo_m" + std::to_string(m), c});
  }

  Directional out;
  for (const auto& run : runs) {
    std::vector<MetricReport> reports;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      TrainConfig c = run.config;
      c.seed = seed;
      const auto trained = run_train(data, c);
      reports.push_back(run_eval(trained.checkpoint, data).report);
    }
    out.mean[run.label] = accumulate(reports);
    const auto& m = out.mean[run.label];
    std::printf("  %-12s NDCG@5 %.4f  MRR %.4f  UR %.4f  AUC %.4f  ECE %.4f\n",
                run.label.c_str(), m.ndcg_at_5, m.mrr, m.unsafe_rate, m.auc_safety, m.ece);
    std::fflush(stdout);
  }
  out.mean["lipo_m5"] = out.mean["lipo"];
  out.seconds = elapsed(t0);
  return out;
}

Outcome ordering(const Directional& d) {
  const double l = d.mean.at("lipo").ndcg_at_5;
  const double b = d.mean.at("bpo").ndcg_at_5;
  const double c = d.mean.at("bce").ndcg_at_5;
  const bool ok = l >= b && b >= c && l - c >= 0.05 && d.seconds < 600.0;
  return {ok, fmt("NDCG@5 lipo %.4f, bpo %.4f, bce %.4f; gap %.4f (need >= 0.05)", l, b, c, l - c) +
                  fmt(", suite %.0fs", d.seconds)};
}

Outcome auc_ordering(const Directional& d) {
  const double l = d.mean.at("lipo").auc_safety;
  const double c = d.mean.at("bce").auc_safety;
  return {l - c >= 0.05, fmt("AUC-Safety lipo %.4f, bce %.4f; gap %.4f (need >= 0.05)", l, c, l - c)};
}

Outcome calibration(const Directional& d) {
  const double with = d.mean.at("lipo").ece;
  const double without = d.mean.at("lipo_no_mse").ece;
  return {with <= without, fmt("ECE lipo+mse %.4f, lipo alone %.4f", with, without)};
}

Outcome list_size(const Directional& d) {
  const double m1 = d.mean.at("lipo_m1").ndcg_at_5;
  const double m4 = d.mean.at("lipo_m4").ndcg_at_5;
  const double m5 = d.mean.at("lipo_m5").ndcg_at_5;
  const bool ok = std::fabs(m5 - m4) <= 0.02 && m4 - m1 >= 0.03;
  return {ok, fmt("NDCG@5 m=1 %.4f, m=4 %.4f, m=5 %.4f", m1, m4, m5) +
                  fmt("; |m5-m4| %.4f, m4-m1 %.4f", std::fabs(m5 - m4), m4 - m1)};
}

// 8 ----------------------------------------------------------------------

std::vector<ScenarioRecord> random_store(Rng& rng, std::size_t n) {
  std::vector<ScenarioRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ScenarioRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "r%04zu", i);
    r.scenario_id = id;
    r.image_id = "img" + std::to_string(rng.below(n / 3 + 1));
    r.image_ref = "https://example.org/" + r.image_id + ".jpg";
    const char* words[] = {"take", "the", "bag", "\"quoted\"", "caf\xc3\xa9", "tab\there", "line"};
    const std::size_t len = 1 + rng.below(6);
    for (std::size_t w = 0; w < len; ++w) r.text += std::string(w ? " " : "") + words[rng.below(7)];
    const std::size_t raters = rng.below(4);
    for (std::size_t k = 0; k < raters; ++k) {
      const std::string a = "ann" + std::to_string(k);
      r.ratings.push_back({a, 1 + static_cast<int>(rng.below(5))});
      if (rng.bernoulli(0.7)) r.modality_labels.push_back({a, static_cast<Modality>(rng.below(3))});
    }
    if (rng.bernoulli(0.5)) r.norm_label = rng.bernoulli(0.5) ? 1 : -1;
    if (rng.bernoulli(0.1)) {
      r.is_canary = true;
      r.canary_gold = 1 + static_cast<int>(rng.below(5));
    }
    if (rng.bernoulli(0.3)) r.latent_q = rng.uniform(0.0, 6.0);
    if (rng.bernoulli(0.1)) r.proposed_by = "ann9";
    out.push_back(std::move(r));
  }
  return out;
}

void drive_sessions(AnnotationService& service, Rng& rng) {
  const char* modalities[] = {"text", "image", "both"};
  for (int s = 0; s < 4; ++s) {
    const auto view = service.create_session("annotator" + std::to_string(s % 3), true);
    for (int step = 0; step < 25; ++step) {
      const auto next = service.next_task(view.session_id);
      if (next.status != NextStatus::kTask) break;
      const int score = 1 + static_cast<int>(rng.below(5));
      const auto outcome = service.submit_judgment(view.session_id, next.task->scenario_id, score);
      if (outcome.branch == Branch::kModalityCheck) {
        service.submit_modality(view.session_id, next.task->scenario_id, modalities[rng.below(3)]);
      } else if (rng.bernoulli(0.4)) {
        service.submit_scenario(view.session_id, next.task->image_id,
                                "proposed variant " + std::to_string(step));
      }
    }
  }
}

Outcome protocol(const fs::path& scratch) {
  std::string detail;
  bool ok = true;

  // Branch law.
  for (double d : {0.0, 0.5, 1.0, 1.5, 3.0}) {
    const Branch b = branch_for(d, 1.0);
    const Branch want = d <= 1.0 ? Branch::kConfirmAndPrompt : Branch::kModalityCheck;
    if (b != want) {
      ok = false;
      detail += fmt("branch wrong at %.1f; ", d);
    }
  }

  // Replay from the on-disk log reconstructs the store byte for byte.
  Rng rng(derive_seed(2024, "protocol"));
  SynthConfig sc;
  sc.n_groups = 60;
  sc.canary_fraction = 0.05;
  const auto seed_corpus = generate_synthetic(sc).records;
  const ScoreFn scorer = [](const ScenarioRecord& r) {
    return 1.0 + static_cast<double>(r.text.size() % 5);
  };
  std::int64_t tick = 1000;
  const ClockFn clock = [&tick] { return tick += 7; };
  const fs::path log_path = scratch / "protocol_events.jsonl";
  fs::remove(log_path);
  std::string live;
  {
    EventLogWriter writer(log_path.string());
    AnnotationService service(seed_corpus, {}, scorer, clock,
                              [&writer](const nlohmann::ordered_json& e) { writer.append(e); });
    drive_sessions(service, rng);
    writer.flush();
    live = service.export_corpus();
  }
  const auto events = read_event_log(log_path.string());
  AnnotationService replayed(seed_corpus, {}, scorer, [] { return std::int64_t{0}; });
  replayed.replay(events);
  if (replayed.export_corpus() != live) {
    ok = false;
    detail += "replayed store differs; ";
  }

  // export then import is the identity.
  int round_trips = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto store = random_store(rng, 1 + rng.below(40));
    const auto text = serialize_corpus(store);
    const auto back = parse_corpus(text);
    if (back != store || serialize_corpus(back) != text) {
      ok = false;
      detail += "round trip failed; ";
      break;
    }
    ++round_trips;
  }
  detail += "5 deltas checked, " + std::to_string(events.size()) + " events replayed, " +
            std::to_string(round_trips) + " store round trips";
  return {ok, detail};
}

// 9 ----------------------------------------------------------------------

ScenarioRecord toy(const std::string& id, std::optional<int> norm, std::vector<int> ratings,
                   std::optional<Modality> modality) {
  ScenarioRecord r;
  r.scenario_id = id;
  r.image_id = "img-" + id;
  r.text = "toy " + id;
  r.norm_label = norm;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    const std::string a = "a" + std::to_string(i);
    r.ratings.push_back({a, ratings[i]});
    if (modality) r.modality_labels.push_back({a, *modality});
  }
  return r;
}

RatingsMatrix matrix_of(std::vector<std::vector<std::optional<int>>> cells, MeasureLevel level) {
  RatingsMatrix m;
  m.level = level;
  for (std::size_t a = 0; a < cells.front().size(); ++a) m.annotators.push_back("c" + std::to_string(a));
  m.cells = std::move(cells);
  return m;
}

Outcome agreement() {
  std::string detail;
  bool ok = true;
  auto check = [&](bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += what + " failed; ";
    }
  };

  // Unanimous matrices.
  Rng rng(derive_seed(2024, "unanimous"));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::optional<int>>> cells;
    for (int u = 0; u < 8; ++u) {
      const int v = 1 + static_cast<int>(rng.below(5));
      cells.push_back({v, v, rng.bernoulli(0.3) ? std::optional<int>{} : std::optional<int>{v}});
    }
    for (auto level : {MeasureLevel::kOrdinal, MeasureLevel::kNominal}) {
      check(krippendorff_alpha(matrix_of(cells, level)) == 1.0, "unanimous alpha");
    }
  }

  // Worked example with twelve units and four coders (units x coders); the
  // exact rationals come from an independent pairwise-definition evaluation.
  using O = std::optional<int>;
  const O _;
  const std::vector<std::vector<O>> worked = {
      {1, 1, _, 1}, {2, 2, 3, 2}, {3, 3, 3, 3}, {3, 3, 3, 3}, {2, 2, 2, 2}, {1, 2, 3, 4},
      {4, 4, 4, 4}, {1, 1, 2, 1}, {2, 2, 2, 2}, {_, 5, 5, 5}, {_, _, 1, 1}, {_, 3, _, _}};
  const double nominal = krippendorff_alpha(matrix_of(worked, MeasureLevel::kNominal));
  const double ordinal = krippendorff_alpha(matrix_of(worked, MeasureLevel::kOrdinal));
  check(std::fabs(nominal - 113.0 / 152.0) <= 1e-9, "worked nominal");
  check(std::fabs(ordinal - 108577.0 / 133160.0) <= 1e-9, "worked ordinal");
  const std::vector<std::vector<O>> small = {{1, 1, 2}, {2, 2, _}, {3, 3, 3}, {1, 2, _}, {4, 4, 5}};
  check(std::fabs(krippendorff_alpha(matrix_of(small, MeasureLevel::kNominal)) - 29.0 / 65.0) <= 1e-9,
        "small nominal");
  check(std::fabs(krippendorff_alpha(matrix_of(small, MeasureLevel::kOrdinal)) - 1281.0 / 1495.0) <=
            1e-9,
        "small ordinal");
  detail += fmt("worked example nominal %.6f ordinal %.6f; ", nominal, ordinal);

  // Item screening. Sample stdevs: {1,5} 2.83, {2,3,4} 1.0, {1,1,4} 1.73,
  // {3} single rating, {2,4} 1.41, {1,2,3} 1.0, {3,3,3,3} 0.
  const std::vector<ScenarioRecord> screen_in = {
      toy("s1", 1, {1, 5}, {}),    toy("s2", 1, {2, 3, 4}, {}), toy("s3", 1, {1, 1, 4}, {}),
      toy("s4", 1, {3}, {}),       toy("s5", 1, {2, 4}, {}),    toy("s6", 1, {1, 2, 3}, {}),
      toy("s7", 1, {3, 3, 3, 3}, {})};
  const auto screened = screen_items(screen_in);
  std::vector<std::string> removed;
  for (const auto& r : screened.removed) removed.push_back(r.scenario_id);
  check(removed == std::vector<std::string>{"s1", "s3", "s5"}, "screen_items removal set");
  check(screened.kept.size() == 4, "screen_items kept count");

  // Shift tables on a hand-classified toy corpus.
  const auto T = Modality::kText, I = Modality::kImage, B = Modality::kBoth;
  const std::vector<ScenarioRecord> shifts = {
      toy("r1", 1, {5, 5}, T),  toy("r2", 1, {3, 3}, I),  toy("r3", 1, {1, 2}, B),
      toy("r4", -1, {3, 3}, T), toy("r5", -1, {4, 5}, I), toy("r6", -1, {2, 2}, B),
      toy("r7", 1, {4, 4}, T),  toy("r8", -1, {4, 4}, T), toy("r9", {}, {3, 3}, T),
      toy("r10", 1, {2, 2}, {})};
  const auto t = shift_tables(shifts);
  auto row = [&](Modality m) { return t.rows[static_cast<std::size_t>(m)]; };
  auto ext = [&](Modality m) { return t.extreme[static_cast<std::size_t>(m)]; };
  check(row(T).up == 2 && row(T).neutral == 2 && row(T).down == 0 && row(T).total == 4, "text row");
  check(row(I).up == 1 && row(I).neutral == 0 && row(I).down == 1 && row(I).total == 2, "image row");
  check(row(B).up == 0 && row(B).neutral == 1 && row(B).down == 1 && row(B).total == 2, "both row");
  check(ext(T).negative_norm == 1 && ext(T).positive_norm == 0 && ext(T).up == 1 &&
            ext(T).down == 0 && ext(T).total == 1,
        "text extreme");
  check(ext(I).negative_norm == 1 && ext(I).up == 1 && ext(I).total == 1, "image extreme");
  check(ext(B).positive_norm == 1 && ext(B).down == 1 && ext(B).total == 1, "both extreme");
  check(t.grand_total == 8 && t.skipped == 2, "shift totals");
  detail += "unanimous, screening and shift-table cases checked";
  return {ok, detail};
}

// 10 ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int sh(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return rc;
}

Outcome determinism(const std::string& cli, const fs::path& scratch) {
  const fs::path dir = scratch / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();
  const std::string corpus = d + "/corpus.jsonl";
  const std::string train_flags = " --lr 0.001 --epochs 2";
  std::vector<std::string> steps = {
      cli + " gen-synth --groups 200 --seed 5 --out " + corpus,
      cli + " train --corpus " + corpus + train_flags + " --out " + d + "/train_a",
      cli + " rerun " + d + "/train_a/manifest.json --out " + d + "/train_b",
      cli + " eval --corpus " + corpus + " --checkpoint " + d + "/train_a/checkpoint.json --out " +
          d + "/eval_a",
      cli + " rerun " + d + "/eval_a/manifest.json --out " + d + "/eval_b",
      cli + " ablate --corpus " + corpus + train_flags +
          " --axis FRACTION --values 0.5,1.0 --seeds 1,2 --out " + d + "/ablate_a",
      cli + " rerun " + d + "/ablate_a/manifest.json --out " + d + "/ablate_b",
  };
  for (const auto& s : steps) {
    if (sh(s) != 0) return {false, "command failed: " + s};
  }
  bool ok = true;
  std::string detail;
  for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
           {"train_a/checkpoint.json", "train_b/checkpoint.json"},
           {"train_a/loss.csv", "train_b/loss.csv"},
           {"eval_a/metrics.json", "eval_b/metrics.json"},
           {"ablate_a/ablation.csv", "ablate_b/ablation.csv"}}) {
    const auto x = slurp(dir / a);
    const auto y = slurp(dir / b);
    const bool same = !x.empty() && x == y;
    ok = ok && same;
    detail += a.substr(a.find('/') + 1) + (same ? " identical, " : " DIFFERS, ");
  }
  detail += "each rerun from its manifest";
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <listalign-cli> <scratch-dir>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);

  std::vector<std::pair<std::string, Outcome>> results;
  auto record = [&](const std::string& name, Outcome o) {
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(name, std::move(o));
  };
  auto guarded = [&](const std::string& name, const std::function<Outcome()>& f) {
    try {
      record(name, f());
    } catch (const std::exception& e) {
      record(name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded("1 gradient correctness", gradients);
  guarded("2 Plackett-Luce normalization", plackett_luce);
  guarded("3 metric oracle equivalence", metric_oracles);

  std::printf("training runs for criteria 4-7 (5 seeds each):\n");
  std::optional<Directional> dir;
  try {
    dir = run_directional();
  } catch (const std::exception& e) {
    std::printf("  training failed: %s\n", e.what());
  }
  auto directional = [&](const std::string& name, Outcome (*f)(const Directional&)) {
    if (!dir) return record(name, {false, "training runs failed"});
    record(name, f(*dir));
  };
  directional("4 supervision ordering", ordering);
  directional("5 AUC-Safety ordering", auc_ordering);
  directional("6 calibration direction", calibration);
  directional("7 list-size ablation shape", list_size);

  guarded("8 protocol branch law and replay", [&] { return protocol(scratch); });
  guarded("9 agreement statistics", agreement);
  guarded("10 determinism", [&] { return determinism(cli, scratch); });

  const auto failed = std::count_if(results.begin(), results.end(),
                                    [](const auto& r) { return !r.second.pass; });
  std::printf("%zu of %zu criteria passed\n", results.size() - failed, results.size());
  return failed == 0 ? 0 : 1;
}
