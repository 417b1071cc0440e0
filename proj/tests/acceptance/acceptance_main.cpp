// Acceptance gate: eight end-to-end checks over the shipped library, one
// [PASS]/[FAIL] line each, exit 0 only when every criterion holds. The
// reference implementations ("oracles") live in tests/support and are
// independent of the library internals.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "test_support.hpp"
#include "vot/backend.hpp"
#include "vot/datagen.hpp"
#include "vot/errors.hpp"
#include "vot/grounding_eval.hpp"
#include "vot/harness.hpp"
#include "vot/orchestrator.hpp"
#include "vot/stsg.hpp"
#include "vot/stsg_query.hpp"
#include "vot/stsg_text.hpp"

namespace {

using vot::Error;
using vot::ErrorCode;
namespace stsg = vot::stsg;
namespace testing = vot::testing;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string assets_path(const char* name) {
  return std::string(VOT_ASSETS_DIR) + "/" + name;
}

vot::pipeline::QAInstance golden_instance() {
  std::ifstream in(assets_path("golden_question.json"));
  return vot::pipeline::qa_from_json(nlohmann::json::parse(in));
}

vot::backend::MockScript golden_script() {
  return vot::backend::MockScript::load(assets_path("golden_white_truck.json"));
}

// ---- criterion 1 ---------------------------------------------------------------

bool round_trip_holds(std::string& detail) {
  std::mt19937_64 rng(20260819);
  testing::RandomGraphOptions options;
  options.max_frames = 8;
  options.max_instances = 9;  // plus at most one stuff node: <= 10 nodes per frame
  const Clock::time_point t0 = Clock::now();
  for (int k = 0; k < 1000; ++k) {
    const stsg::STSG x = testing::random_stsg(rng, options);
    const stsg::STSG y = stsg::parse(stsg::serialize(x).text);
    if (!stsg::structurally_equal(x, y)) {
      detail = "graph " + std::to_string(k) + " changed across serialize/parse";
      return false;
    }
  }
  const double elapsed = seconds_since(t0);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "1000/1000 in %.2fs", elapsed);
  detail = buf;
  return elapsed < 10.0;
}

// ---- criterion 2 ---------------------------------------------------------------

std::string fuzz_input(std::mt19937_64& rng, const std::vector<std::string>& corpus) {
  static const char kAlphabet[] = "Frame 0123456789:{}[](),\"\\-+.eE aZqbjTrilts_\n\t";
  constexpr std::size_t kChars = sizeof(kAlphabet) - 1;
  const int mode = static_cast<int>(rng() % 4);
  if (mode == 0) {  // mutate a valid expression
    std::string s = corpus[rng() % corpus.size()];
    const int edits = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < edits && !s.empty(); ++k) {
      s[rng() % s.size()] = kAlphabet[rng() % kChars];
    }
    return s;
  }
  if (mode == 1) {  // truncate a valid expression
    const std::string& s = corpus[rng() % corpus.size()];
    return s.substr(0, rng() % (s.size() + 1));
  }
  if (mode == 2) {  // random soup over the grammar's alphabet
    std::string s;
    const std::size_t len = rng() % 240;
    for (std::size_t k = 0; k < len; ++k) s.push_back(kAlphabet[rng() % kChars]);
    return s;
  }
  // splice two expression fragments
  const std::string& a = corpus[rng() % corpus.size()];
  const std::string& b = corpus[rng() % corpus.size()];
  return a.substr(0, rng() % (a.size() + 1)) + b.substr(rng() % (b.size() + 1));
}

bool parser_survives_fuzz(std::string& detail) {
  std::mt19937_64 rng(0xF0221);
  std::vector<std::string> corpus;
  for (int k = 0; k < 50; ++k) {
    corpus.push_back(stsg::serialize(testing::random_stsg(rng)).text);
  }

  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const std::string input = fuzz_input(rng, corpus);
    const Clock::time_point t0 = Clock::now();
    try {
      const stsg::STSG parsed = stsg::parse(input);
      if (!stsg::validate(parsed).ok) {
        detail = "input " + std::to_string(k) + " parsed into an invalid graph";
        return false;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseFailure && e.code() != ErrorCode::EmptyInput) {
        detail = "input " + std::to_string(k) + " raised " + e.what();
        return false;
      }
    } catch (const std::exception& e) {
      detail = "input " + std::to_string(k) + " raised untyped " + e.what();
      return false;
    }
    const double dt = seconds_since(t0);
    worst = std::max(worst, dt);
    if (dt > 5.0) {
      detail = "input " + std::to_string(k) + " blew the per-input budget";
      return false;
    }
  }
  char buf[80];
  std::snprintf(buf, sizeof(buf), "100000 inputs, worst case %.4fs", worst);
  detail = buf;
  return true;
}

// ---- criterion 3 ---------------------------------------------------------------

bool tracklets_match_oracle(std::string& detail) {
  std::mt19937_64 rng(303);
  for (int i = 0; i < 500; ++i) {
    const stsg::STSG graph = testing::random_stsg(rng);
    std::set<std::string> ids;
    for (const auto& frame : graph.frames) {
      for (const auto& node : frame.nodes) ids.insert(node.instance_id);
    }
    const std::vector<stsg::CoreferenceLink> coref = testing::oracle_coref(graph);
    for (const std::string& id : ids) {
      const stsg::Tracklet actual = stsg::extract_tracklet(graph, id);
      const std::vector<testing::OracleTrackletFrame> expected =
          testing::oracle_tracklet(graph, id);
      auto mismatch = [&](const char* what) {
        detail = "graph " + std::to_string(i) + ", target " + id + ": " + what;
        return false;
      };
      if (actual.target_id != id) return mismatch("wrong target id");
      if (actual.frames.size() != expected.size()) return mismatch("frame count differs");
      for (std::size_t k = 0; k < expected.size(); ++k) {
        if (actual.frames[k].frame_index != expected[k].frame_index) {
          return mismatch("frame order differs");
        }
        const stsg::ObjectNode& a = actual.frames[k].node;
        const stsg::ObjectNode& b = expected[k].node;
        if (a.instance_id != b.instance_id || a.category != b.category || a.bbox != b.bbox ||
            a.is_stuff != b.is_stuff) {
          return mismatch("node payload differs");
        }
        std::vector<stsg::PredicateEdge> ae = actual.frames[k].edges;
        std::vector<stsg::PredicateEdge> be = expected[k].edges;
        std::sort(ae.begin(), ae.end());
        std::sort(be.begin(), be.end());
        if (ae != be) return mismatch("incident edges differ");
      }
      std::vector<stsg::CoreferenceLink> chain;
      for (const stsg::CoreferenceLink& link : coref) {
        if (link.instance_id == id) chain.push_back(link);
      }
      std::vector<stsg::CoreferenceLink> actual_chain = actual.coref;
      std::sort(actual_chain.begin(), actual_chain.end());
      if (actual_chain != chain) return mismatch("coreference chain differs");
    }
  }
  detail = "500 graphs, every tracklet equal";
  return true;
}

bool neighbor_scenes_match_oracle(std::string& detail) {
  std::mt19937_64 rng(505);
  for (int i = 0; i < 500; ++i) {
    const stsg::STSG graph = testing::random_stsg(rng);
    for (const auto& frame : graph.frames) {
      for (const auto& node : frame.nodes) {
        const int hops = 1 + static_cast<int>(rng() % 3);
        const stsg::NeighborScene scene =
            stsg::neighbor_scene(graph, node.instance_id, frame.frame_index, hops);
        const std::set<std::string> expected =
            testing::oracle_reachable(frame, node.instance_id, hops);
        std::set<std::string> actual;
        for (const auto& n : scene.subgraph.nodes) actual.insert(n.instance_id);
        if (actual != expected) {
          detail = "graph " + std::to_string(i) + ", center " + node.instance_id +
                   " at frame " + std::to_string(frame.frame_index) + ", hops " +
                   std::to_string(hops) + ": node sets differ";
          return false;
        }
        // the subgraph keeps exactly the frame edges with both ends reachable
        std::vector<stsg::PredicateEdge> kept;
        for (const stsg::PredicateEdge& e : frame.edges) {
          if (expected.count(e.subject_id) && expected.count(e.object_id)) kept.push_back(e);
        }
        std::vector<stsg::PredicateEdge> got = scene.subgraph.edges;
        std::sort(kept.begin(), kept.end());
        std::sort(got.begin(), got.end());
        if (kept != got) {
          detail = "graph " + std::to_string(i) + ", center " + node.instance_id +
                   ": induced edges differ";
          return false;
        }
      }
    }
  }
  detail = "500 graphs, every neighbor scene equal";
  return true;
}

bool queries_match_oracles(std::string& detail) {
  std::string tracklet_detail;
  if (!tracklets_match_oracle(tracklet_detail)) {
    detail = tracklet_detail;
    return false;
  }
  std::string neighbor_detail;
  if (!neighbor_scenes_match_oracle(neighbor_detail)) {
    detail = neighbor_detail;
    return false;
  }
  detail = "tracklets and neighbor scenes each equal on 500 graphs";
  return true;
}

// ---- criterion 4 ---------------------------------------------------------------

bool metrics_hold(std::string& detail) {
  const stsg::BBox unit = testing::make_box(0.0, 0.0, 2.0, 2.0);
  const double self_iou = vot::eval::iou(unit, unit);
  if (std::abs(self_iou - 1.0) > 1e-9) {
    detail = "identical boxes scored " + std::to_string(self_iou);
    return false;
  }
  const double corner = vot::eval::iou(unit, testing::make_box(2.0, 2.0, 2.0, 2.0));
  if (std::abs(corner) > 1e-9) {
    detail = "corner-touching boxes scored " + std::to_string(corner);
    return false;
  }
  const double shifted = vot::eval::iou(unit, testing::make_box(1.0, 1.0, 2.0, 2.0));
  if (std::abs(shifted - 1.0 / 7.0) > 1e-9) {
    detail = "unit-shifted boxes scored " + std::to_string(shifted);
    return false;
  }

  if (vot::eval::temporal_iou({2, 6}, {4, 8}) != 3.0 / 7.0) {
    detail = "span overlap of [2,6] vs [4,8] is not exactly 3/7";
    return false;
  }

  // greedy matching vs the exact augmenting-path optimum
  std::mt19937_64 rng(404);
  auto tenth = [&](int lo, int hi) {
    return static_cast<double>(lo + static_cast<int>(rng() % (hi - lo + 1))) / 10.0;
  };
  int gaps = 0;
  for (int k = 0; k < 500; ++k) {
    auto random_frame = [&]() {
      stsg::FrameSceneGraph f;
      f.frame_index = 0;
      const int n = 1 + static_cast<int>(rng() % 5);
      for (int j = 0; j < n; ++j) {
        f.nodes.push_back(testing::boxed_node(
            "car-" + std::to_string(j + 1), "car",
            testing::make_box(tenth(0, 30), tenth(0, 30), tenth(5, 30), tenth(5, 30))));
      }
      return f;
    };
    const stsg::FrameSceneGraph pred = random_frame();
    const stsg::FrameSceneGraph gold = random_frame();
    const int greedy =
        static_cast<int>(vot::eval::match_objects(pred, gold, 0.5).size());
    const int best = testing::oracle_max_match_count(pred, gold, 0.5, &vot::eval::iou);
    if (greedy > best) {
      detail = "case " + std::to_string(k) + " matched more pairs than the optimum";
      return false;
    }
    if (greedy < best) {
      ++gaps;
      std::printf("       gap: case %d greedy %d optimal %d\n", k, greedy, best);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "spot values exact; greedy optimal on %d/500 (%d gaps)",
                500 - gaps, gaps);
  detail = buf;
  return gaps <= 25;  // optimal on >= 95%
}

// ---- criterion 5 ---------------------------------------------------------------

bool golden_run_reproduces(std::string& detail) {
  const vot::pipeline::QAInstance q = golden_instance();
  vot::backend::MockBackend mock(golden_script());
  const vot::pipeline::RunResult run = vot::pipeline::run_vot(q, mock, {});
  const vot::pipeline::ReasoningTrace& trace = run.trace;

  if (run.final != 'C') {
    detail = std::string("final answer was ") + run.final;
    return false;
  }
  const std::vector<std::string> want_targets = {"the white truck", "the neighborhood"};
  if (trace.targets != want_targets) {
    detail = "step-1 targets differ";
    return false;
  }
  const std::string want_expr =
      "Frame 1: {Objects: [{\"car-1\": [0.0,13.4,7.0,8.1]}], "
      "Triplets: [(\"car-1\",\"on the left\",\"street\")]}";
  for (const std::string& target : want_targets) {
    auto it = trace.tracklets.find(target);
    if (it == trace.tracklets.end() || it->second != want_expr) {
      detail = "step-2 expression differs for " + target;
      return false;
    }
  }
  if (trace.scored.size() != 4 || trace.scored[0].letter != 'A' || trace.scored[0].score != 5) {
    detail = "step-4 score for A is not 5";
    return false;
  }
  if (trace.rank != std::vector<char>{'C', 'A', 'D', 'B'}) {
    detail = "step-4 rank order differs";
    return false;
  }
  if (trace.verdicts.size() != 1 || !trace.verdicts[0].consistent ||
      trace.verdicts[0].rationale.find("is correct") == std::string::npos) {
    detail = "step-5 verdict differs";
    return false;
  }

  vot::backend::MockBackend again(golden_script());
  const vot::pipeline::RunResult rerun = vot::pipeline::run_vot(q, again, {});
  if (rerun.trace.to_json().dump(2) != trace.to_json().dump(2)) {
    detail = "two consecutive runs serialized differently";
    return false;
  }
  detail = "final C, all anchors matched, reruns byte-identical";
  return true;
}

// ---- criterion 6 ---------------------------------------------------------------

bool retry_semantics_hold(std::string& detail) {
  vot::backend::MockScript script = golden_script();
  vot::backend::MockEntry fail_once;
  fail_once.tag = vot::backend::StepTag::Step5;
  fail_once.response = "GROUNDING: PASS\nCOMMONSENSE: FAIL";
  fail_once.once = true;
  script.entries.insert(script.entries.begin(), fail_once);

  const vot::pipeline::QAInstance q = golden_instance();
  vot::backend::MockBackend mock(script);
  const vot::pipeline::RunResult retried = vot::pipeline::run_vot(q, mock, {});
  if (retried.trace.retries != 1) {
    detail = "one rejected verification yielded retries = " +
             std::to_string(retried.trace.retries);
    return false;
  }
  if (retried.final == 'C') {
    detail = "the rejected letter was re-answered";
    return false;
  }

  vot::pipeline::VotConfig no_retries;
  no_retries.max_retries = 0;
  vot::backend::MockBackend mock2(script);
  const vot::pipeline::RunResult stopped = vot::pipeline::run_vot(q, mock2, no_retries);
  if (!stopped.trace.unverified) {
    detail = "max_retries = 0 did not mark the trace unverified";
    return false;
  }
  detail = "retries = 1 with a different final, and unverified under max_retries = 0";
  return true;
}

// ---- criterion 7 ---------------------------------------------------------------

bool datagen_holds(std::string& detail) {
  std::mt19937_64 rng(707);
  std::vector<vot::datagen::VideoStsgPair> corpus;
  for (int k = 0; k < 50; ++k) {
    vot::datagen::VideoStsgPair pair;
    pair.video_id = "v-" + std::to_string(k);
    pair.graph = testing::random_stsg(rng);
    corpus.push_back(std::move(pair));
  }

  const std::vector<vot::datagen::TuningExample> examples =
      vot::datagen::gen_examples(vot::datagen::Objective::L1, corpus, 1.0, 99);
  if (examples.size() != 100) {
    detail = "N = 50 at ratio 1 produced " + std::to_string(examples.size()) + " examples";
    return false;
  }
  int yes = 0;
  int no = 0;
  for (const auto& example : examples) {
    if (example.expected == "yes") ++yes;
    if (example.expected == "no") ++no;
    if (!example.context.stsg_text.has_value()) {
      detail = "an example carries no expression";
      return false;
    }
    try {
      const stsg::STSG parsed = stsg::parse(*example.context.stsg_text);
      if (!stsg::validate(parsed).ok) {
        detail = "an emitted expression parsed into an invalid graph";
        return false;
      }
    } catch (const Error& e) {
      detail = std::string("an emitted expression does not parse: ") + e.what();
      return false;
    }
  }
  if (yes != 50 || no != 50) {
    detail = "label split is " + std::to_string(yes) + "/" + std::to_string(no);
    return false;
  }

  const std::vector<vot::datagen::TuningExample> again =
      vot::datagen::gen_examples(vot::datagen::Objective::L1, corpus, 1.0, 99);
  if (vot::datagen::to_jsonl(examples) != vot::datagen::to_jsonl(again)) {
    detail = "the same seed produced different JSONL bytes";
    return false;
  }
  detail = "100 examples, 50/50 labels, byte-identical rerun, all expressions parse";
  return true;
}

// ---- criterion 8 ---------------------------------------------------------------

bool benchmark_is_deterministic(std::string& detail) {
  const vot::pipeline::QAInstance base = golden_instance();
  vot::harness::Dataset dataset;
  for (int k = 0; k < 20; ++k) {
    vot::pipeline::QAInstance q = base;
    char id[16];
    std::snprintf(id, sizeof(id), "case-%02d", k);
    q.id = id;
    dataset.instances.push_back(std::move(q));
  }

  vot::harness::BenchConfig serial;
  serial.jobs = 1;
  vot::backend::MockBackend mock1(golden_script());
  const vot::harness::BenchReport one = vot::harness::run_benchmark(dataset, mock1, serial);

  vot::harness::BenchConfig parallel;
  parallel.jobs = 8;
  vot::backend::MockBackend mock8(golden_script());
  const vot::harness::BenchReport eight = vot::harness::run_benchmark(dataset, mock8, parallel);

  if (one.n_instances != 20 || one.n_correct != 20) {
    detail = "the scripted dataset did not score 20/20";
    return false;
  }
  if (one.canonical_json().dump(2) != eight.canonical_json().dump(2)) {
    detail = "--jobs 1 and --jobs 8 reports differ";
    return false;
  }
  detail = "20 instances, canonical reports identical at --jobs 1 and --jobs 8";
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* label;
    bool (*check)(std::string&);
  };
  const Criterion criteria[] = {
      {1, "textual round-trip over 1000 random graphs", round_trip_holds},
      {2, "parser survives 100000 fuzz inputs", parser_survives_fuzz},
      {3, "tracklet and neighbor-scene queries equal brute-force oracles",
       queries_match_oracles},
      {4, "metric spot values exact, greedy matching optimal on >= 95%", metrics_hold},
      {5, "golden white-truck session reproduces verbatim", golden_run_reproduces},
      {6, "verification retry and no-retry semantics", retry_semantics_hold},
      {7, "tuning-data counts, determinism, and parsable expressions", datagen_holds},
      {8, "benchmark report identical across --jobs 1 and --jobs 8",
       benchmark_is_deterministic},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    bool ok = false;
    std::string detail;
    try {
      ok = criterion.check(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("unexpected exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion.number,
                criterion.label, detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
