// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "testkit.hpp"
#include "tsmon/cli.hpp"
#include "tsmon/monitor.hpp"
#include "tsmon/semantics.hpp"
#include "tsmon/wellformed.hpp"

using namespace tsmon;
namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Result {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int tsmon_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("tsmon-acceptance-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<json> log_entries(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

bool is_deviation(const json& e) {
  return e["verdict"] == "deviation_low" || e["verdict"] == "deviation_high";
}

//------------------------------------------------------------------------------

Result corpus() {
  Result r;
  auto t0 = Clock::now();
  for (const char* name : {"sender", "receiver", "leader", "peer", "auth"}) {
    auto rules = testkit::diagnose_file(testkit::bundled_path(name));
    r.expect(rules.empty(), std::string(name) + " has diagnostics");
  }
  std::size_t n = 0;
  for (const auto& m : testkit::mutations()) {
    auto rules = testkit::diagnose_file(testkit::data_path("mutations/" + m.file));
    r.expect(rules == std::vector<std::string>{m.rule}, m.file + " did not give exactly " + m.rule);
    ++n;
  }
  r.expect(n >= 10, "fewer than ten mutations");
  double s = seconds_since(t0);
  r.expect(s < 1.0, "took " + std::to_string(s) + " s");
  if (r.pass) r.detail = "5 specs clean, " + std::to_string(n) + " mutations, " + std::to_string(s) + " s";
  return r;
}

Result trs_oracle() {
  Result r;
  auto t0 = Clock::now();
  auto none = Value::none();
  r.expect(build_trs(testkit::bundled("sender")) ==
               TransitionSet{{"S0", "msg", none, "S1"}, {"S1", "msg", none, "S1"}, {"S1", "ack", none, "S0"}},
           "sender transition set");
  r.expect(build_trs(testkit::bundled("auth")) == TransitionSet{{"Unauth", "login", Value::label("success"), "Auth"},
                                                                {"Unauth", "login", Value::label("failure"), "Unauth"},
                                                                {"Auth", "logoff", none, "Unauth"}},
           "auth transition set");

  std::mt19937_64 rng(2024);
  testkit::GenOptions opts;
  opts.max_states = 6;
  for (int i = 0; i < 200; ++i) {
    auto spec = testkit::random_spec(rng, opts);
    auto trs = build_trs(spec);
    std::string tag = "random spec " + std::to_string(i);
    r.expect(spec.typestate.states.size() <= 6, tag + " is too large");
    r.expect(trs.size() == testkit::expected_tuple_count(spec), tag + " tuple count");
    std::vector<std::string> names;
    for (const auto& s : spec.typestate.states) names.push_back(s.name);
    auto reach = testkit::reachable_fixpoint(trs, spec.typestate.start());
    auto prod = testkit::productive_fixpoint(trs, names);
    for (const auto& s : names) {
      r.expect(is_reachable(s, trs, spec.typestate.start()) == (reach.count(s) == 1), tag + " reachability of " + s);
      r.expect(is_productive(s, trs) == (prod.count(s) == 1), tag + " productivity of " + s);
    }
  }
  double s = seconds_since(t0);
  r.expect(s < 5.0, "took " + std::to_string(s) + " s");
  if (r.pass) r.detail = "200 random specs, " + std::to_string(s) + " s";
  return r;
}

Result counter_trace() {
  Result r;
  auto spec = testkit::bundled("counter");
  TInfo cfg = initial_config(spec);
  r.expect(cfg.state == "S0" && cfg.store.vars.at("acks") == 0, "initial configuration");
  auto a = step(spec, cfg, "m", Value::none());
  auto b = step(spec, a.next, "m", Value::none());
  r.expect(a.next.state == "S0" && a.next.store.vars.at("acks") == 1, "first m");
  r.expect(b.next.state == "S1" && b.next.store.vars.at("acks") == 0, "second m");
  r.expect(!a.triggered && b.triggered, "triggered flags");
  return r;
}

Result leader_trajectory() {
  Result r;
  auto spec = testkit::bundled("leader");
  const auto& in = spec.internal;

  TInfo cfg = initial_config(spec);
  StepOutcome out{cfg, false};
  TInfo before = cfg;
  for (int i = 0; i < 5; ++i) {
    before = out.next;
    out = step(spec, before, "vreq", Value::none());
  }
  auto after_pre = update(in, {"A2"}, before.store);
  r.expect(out.triggered && out.next.state == "L2", "(a) did not reach L2 on the fifth vreq");
  r.expect(eval(in, {"P2"}, after_pre) && !eval(in, {"P1"}, after_pre), "(a) did not trigger via P2");
  r.expect(out.next.store.vars == decltype(out.next.store.vars){{"acks", 0}, {"retries", 5}}, "(a) final store");

  out = step(spec, initial_config(spec), "vreq", Value::none());
  out = step(spec, out.next, "vack", Value::none());
  r.expect(!out.triggered && out.next.state == "L1", "(b) first vack moved on");
  before = out.next;
  out = step(spec, before, "vack", Value::none());
  after_pre = update(in, {"A1"}, before.store);
  r.expect(out.triggered && out.next.state == "L2", "(b) did not reach L2");
  r.expect(after_pre.vars.at("acks") == 2 && eval(in, {"P1"}, after_pre) && !eval(in, {"P2"}, after_pre),
           "(b) did not trigger via P1");
  return r;
}

Result monitoring_formula() {
  Result r;
  auto spec = testkit::bundled("receiver");
  MonitorConfig conf;
  conf.error_bound = 0.25;
  conf.warmup = 0;
  std::vector<TraceEvent> trace = {{"receiver", "msg", Direction::In, Value::none(), 0}};
  const std::size_t events = 40;
  for (std::uint64_t i = 1; i <= events; ++i) {
    bool msg = i % 2 == 1;
    trace.push_back({"receiver", msg ? "msg" : "ack", msg ? Direction::In : Direction::Out, Value::none(), i});
  }
  auto m = run_trace(spec, conf, trace);
  if (m.log.size() != events) {
    r.fail("logged " + std::to_string(m.log.size()) + " entries");
    return r;
  }
  for (std::size_t i = 0; i < events; ++i) {
    // The j-th msg (1-based) sees j - 1 earlier msgs among 2j - 2 events.
    std::size_t n = i, j = i / 2 + 1;
    double expected = i % 2 == 0 ? static_cast<double>(j) / static_cast<double>(2 * j - 1) : 0.5;
    const auto& e = m.log[i];
    r.expect(e.observed && *e.observed == expected,
             "estimate " + std::to_string(i) + " is not " + std::to_string(expected) + " after " + std::to_string(n));
    bool inside = expected >= 0.25 && expected <= 0.75;
    Verdict v = inside ? Verdict::Ok : (expected < 0.25 ? Verdict::DeviationLow : Verdict::DeviationHigh);
    r.expect(e.verdict == v, "verdict " + std::to_string(i));
  }
  return r;
}

Result faithful_run() {
  Result r;
  auto t0 = Clock::now();
  auto dir = scratch("faithful");
  r.expect(tsmon_run({"simulate", "abp", "--rounds", "200", "--drop", "0.2", "--seed", "42", "--out",
                      (dir / "run").string()}) == cli::kSuccess,
           "simulate failed");
  int code = tsmon_run({"monitor", testkit::bundled_path("receiver"), "--trace", (dir / "run" / "receiver.jsonl").string(),
                        "--error", "0.1", "--warmup", "20", "--log", (dir / "log.jsonl").string()});
  r.expect(code == cli::kSuccess || code == cli::kFindings, "monitor failed");
  std::size_t illegal = 0, judged = 0, deviations = 0;
  for (const auto& e : log_entries(dir / "log.jsonl")) {
    if (e["verdict"] == "illegal") ++illegal;
    if (e["verdict"] == "warmup" || e["verdict"] == "illegal") continue;
    ++judged;
    deviations += is_deviation(e);
  }
  double share = judged == 0 ? 1.0 : static_cast<double>(deviations) / static_cast<double>(judged);
  double s = seconds_since(t0);
  r.expect(judged > 0, "nothing judged");
  r.expect(illegal == 0, std::to_string(illegal) + " illegal entries");
  r.expect(share < 0.05, "deviation share " + std::to_string(share));
  r.expect(s < 10.0, "took " + std::to_string(s) + " s");
  if (r.pass)
    r.detail = std::to_string(deviations) + "/" + std::to_string(judged) + " deviations, " + std::to_string(s) + " s";
  fs::remove_all(dir);
  return r;
}

Result lazy_detection() {
  Result r;
  auto dir = scratch("lazy");
  std::size_t latest = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    auto run = dir / std::to_string(seed);
    auto log = dir / (std::to_string(seed) + ".jsonl");
    r.expect(tsmon_run({"simulate", "abp-lazy", "--rounds", "200", "--drop", "0.2", "--seed", std::to_string(seed),
                        "--out", run.string()}) == cli::kSuccess,
             "simulate failed for seed " + std::to_string(seed));
    tsmon_run({"monitor", testkit::bundled_path("receiver"), "--trace", (run / "receiver.jsonl").string(), "--error", "0.1",
               "--warmup", "20", "--log", log.string()});
    std::size_t position = 0, found = 0;
    for (const auto& e : log_entries(log)) {
      if (e["verdict"] == "illegal") continue;
      if (++position > 200) break;
      if (e["action"] == "ack" && e["verdict"] == "deviation_low") {
        found = position;
        break;
      }
    }
    r.expect(found != 0, "seed " + std::to_string(seed) + " has no ack deviation_low in 200 monitored events");
    latest = std::max(latest, found);
  }
  if (r.pass) r.detail = "latest first detection at monitored event " + std::to_string(latest);
  fs::remove_all(dir);
  return r;
}

Result epsilon_opacity() {
  Result r;
  auto dir = scratch("opacity");
  r.expect(tsmon_run({"simulate", "bitvote", "--rounds", "20", "--drop", "0.2", "--seed", "11", "--out",
                      (dir / "run").string()}) == cli::kSuccess,
           "simulate failed");
  std::ifstream in(dir / "run" / "peer0.jsonl");
  std::ofstream thin(dir / "thin.jsonl");
  std::size_t vwb = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && json::parse(line).value("action", "") == "vwb") {
      ++vwb;
      continue;
    }
    thin << line << '\n';
  }
  thin.close();
  r.expect(vwb > 0, "trace has no vwb events");

  auto monitor = [&](const fs::path& trace, const fs::path& log) {
    tsmon_run({"monitor", testkit::bundled_path("peer"), "--trace", trace.string(), "--log", log.string()});
    return testkit::read_text(log.string());
  };
  auto full = monitor(dir / "run" / "peer0.jsonl", dir / "full.log");
  auto filtered = monitor(dir / "thin.jsonl", dir / "thin.log");
  r.expect(!full.empty(), "empty log");
  r.expect(full.find("\"vwb\"") == std::string::npos, "vwb was logged");
  r.expect(full == filtered, "logs differ once vwb is filtered out");
  if (r.pass) r.detail = std::to_string(vwb) + " vwb events filtered";
  fs::remove_all(dir);
  return r;
}

Result determinism() {
  Result r;
  auto dir = scratch("determinism");
  auto files = [](const fs::path& d) {
    std::map<std::string, std::string> out;
    for (const auto& f : fs::directory_iterator(d)) out[f.path().filename().string()] = testkit::read_text(f.path().string());
    return out;
  };
  const std::vector<std::vector<std::string>> runs = {
      {"abp", "--rounds", "100", "--drop", "0.3", "--dup", "0.1", "--seed", "9"},
      {"abp-lazy", "--rounds", "50", "--drop", "0.2", "--seed", "9"},
      {"bitvote", "--n", "3", "--rounds", "10", "--drop", "0.2", "--seed", "9"},
  };
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      auto out = dir / (std::to_string(i) + "-" + std::to_string(rep));
      std::vector<std::string> args = {"simulate"};
      args.insert(args.end(), runs[i].begin(), runs[i].end());
      args.insert(args.end(), {"--out", out.string()});
      r.expect(tsmon_run(args) == cli::kSuccess, runs[i][0] + " simulate failed");
      auto got = files(out);
      if (rep == 0) first = got;
      else r.expect(got == first, runs[i][0] + " traces differ between runs");
    }
  }

  std::string logs[2];
  for (int rep = 0; rep < 2; ++rep) {
    auto log = dir / ("monitor-" + std::to_string(rep) + ".jsonl");
    tsmon_run({"monitor", testkit::bundled_path("receiver"), "--trace", (dir / "0-0" / "receiver.jsonl").string(), "--log",
               log.string()});
    logs[rep] = testkit::read_text(log.string());
  }
  r.expect(!logs[0].empty() && logs[0] == logs[1], "monitor logs differ between runs");
  fs::remove_all(dir);
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"corpus validates", corpus},
      {"transition set oracle", trs_oracle},
      {"counter trace", counter_trace},
      {"leader trajectory", leader_trajectory},
      {"monitoring formula", monitoring_formula},
      {"faithful abp run", faithful_run},
      {"lazy receiver detected", lazy_detection},
      {"epsilon opacity", epsilon_opacity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    failed += !r.pass;
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (r.pass ? "PASS" : "FAIL");
    if (!r.detail.empty()) std::cout << " - " << r.detail;
    std::cout << '\n';
  }
  return failed == 0 ? 0 : 1;
}
