#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "testkit.hpp"
#include "tsmon/simnet.hpp"

using namespace tsmon;
using namespace tsmon::sim;
using testkit::bundled;

namespace {

std::vector<std::string> actions(const std::vector<TraceEvent>& trace) {
  std::vector<std::string> out;
  for (const auto& e : trace) out.push_back(e.action);
  return out;
}

std::size_t count(const std::vector<TraceEvent>& trace, const std::string& action) {
  std::size_t n = 0;
  for (const auto& e : trace) n += e.action == action;
  return n;
}

std::size_t illegal(const ProtocolSpec& spec, const std::vector<TraceEvent>& trace) {
  auto m = run_trace(spec, MonitorConfig{}, trace);
  std::size_t n = 0;
  for (const auto& e : m.log) n += e.verdict == Verdict::Illegal;
  return n;
}

std::string spec_for(const std::string& participant) {
  if (participant == "sender" || participant == "receiver" || participant == "leader") return participant;
  return "peer";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tsmon-simnet-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("SplitMix64 reference outputs") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);

  SplitMix64 u(42);
  for (int i = 0; i < 1000; ++i) {
    double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.below(5) < 5);
  }
}

TEST_CASE("lossless alternating bit") {
  AbpConfig cfg;
  cfg.rounds = 3;
  auto r = run_abp(cfg);
  CHECK(r.participants == std::vector<std::string>{"sender", "receiver"});
  const std::vector<std::string> expected = {"msg", "ack", "msg", "ack", "msg", "ack"};
  CHECK(actions(r.traces.at("sender")) == expected);
  CHECK(actions(r.traces.at("receiver")) == expected);
  CHECK(r.traces.at("sender")[0].direction == Direction::Out);
  CHECK(r.traces.at("sender")[1].direction == Direction::In);
  CHECK(r.traces.at("receiver")[0].direction == Direction::In);
  CHECK(r.traces.at("receiver")[1].direction == Direction::Out);
  CHECK_FALSE(r.truncated);
  for (std::size_t i = 0; i < r.traces.at("sender").size(); ++i) CHECK(r.traces.at("sender")[i].seq == i);
}

TEST_CASE("single round") {
  AbpConfig cfg;
  cfg.rounds = 1;
  auto r = run_abp(cfg);
  CHECK(actions(r.traces.at("receiver")) == std::vector<std::string>{"msg", "ack"});
}

TEST_CASE("lossy alternating bit") {
  AbpConfig cfg;
  cfg.rounds = 20;
  cfg.net.drop_prob = 0.5;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.net.seed = seed;
    auto r = run_abp(cfg);
    CHECK_FALSE(r.truncated);
    CHECK(count(r.traces.at("sender"), "ack") == 20);
    CHECK(count(r.traces.at("sender"), "msg") >= 20);
    CHECK(count(r.traces.at("sender"), "msg") > 20);
  }
}

TEST_CASE("traces conform to the typestates") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    AbpConfig abp;
    abp.net.seed = seed;
    abp.rounds = 30;
    for (double drop : {0.0, 0.3}) {
      for (double dup : {0.0, 0.3}) {
        abp.net.drop_prob = drop;
        abp.net.dup_prob = dup;
        auto r = run_abp(abp);
        for (const auto& p : r.participants) CHECK(illegal(bundled(spec_for(p)), r.traces.at(p)) == 0);
      }
    }
    BitVoteConfig bv;
    bv.net.seed = seed;
    bv.voting_rounds = 4;
    for (std::uint64_t n : {1, 2, 3}) {
      for (double drop : {0.0, 0.3}) {
        bv.n = n;
        bv.net.drop_prob = drop;
        bv.net.dup_prob = drop;
        auto r = run_bitvote(bv);
        CHECK(r.participants.size() == n + 1);
        if (n == 2) CHECK(illegal(bundled("leader"), r.traces.at("leader")) == 0);
        for (std::uint64_t i = 0; i < n; ++i) CHECK(illegal(bundled("peer"), r.traces.at("peer" + std::to_string(i))) == 0);
      }
    }
  }
}

TEST_CASE("lossless bit vote round") {
  BitVoteConfig cfg;
  cfg.net.seed = 7;
  auto r = run_bitvote(cfg);
  CHECK(r.participants == std::vector<std::string>{"leader", "peer0", "peer1"});
  CHECK(actions(r.traces.at("leader")) == std::vector<std::string>{"vreq", "vack", "vack", "vwb"});
  CHECK(actions(r.traces.at("peer0")) == std::vector<std::string>{"vreq", "vack", "vwb"});

  auto spec = bundled("leader");
  auto m = run_trace(spec, MonitorConfig{}, r.traces.at("leader"));
  CHECK(m.state == "L1");
  CHECK(m.store.vars.at("acks") == 0);
  CHECK(m.store.vars.at("retries") == 5);
  REQUIRE(r.written_bits.size() == 1);
}

TEST_CASE("silent peers exhaust the retry budget") {
  BitVoteConfig cfg;
  cfg.net.link_drop[{"peer0", "leader"}] = 1.0;
  cfg.net.link_drop[{"peer1", "leader"}] = 1.0;
  auto r = run_bitvote(cfg);
  CHECK(actions(r.traces.at("leader")) == std::vector<std::string>{"vreq", "vreq", "vreq", "vreq", "vreq", "vwb"});

  auto spec = bundled("leader");
  TInfo t = initial_config(spec);
  bool via_p2 = false;
  for (const auto& e : r.traces.at("leader")) {
    auto out = step(spec, t, e.action, e.value);
    if (e.action == "vreq" && out.triggered && out.next.state == "L2") via_p2 = t.store.vars.at("retries") == 1;
    t = out.next;
  }
  CHECK(via_p2);
  REQUIRE(r.written_bits.size() == 1);
  CHECK(r.written_bits[0] == 0);
}

TEST_CASE("majority") {
  CHECK(majority_bit({0, 1, 1}) == 1);
  CHECK(majority_bit({0, 0, 1}) == 0);
  CHECK(majority_bit({0, 1}) == 0);
  CHECK(majority_bit({}) == 0);
  CHECK(majority_bit({1}) == 1);
}

TEST_CASE("the leader writes back only after a quorum or an exhausted budget") {
  auto spec = bundled("leader");
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    BitVoteConfig cfg;
    cfg.net.seed = seed;
    cfg.net.drop_prob = 0.4;
    cfg.voting_rounds = 5;
    auto r = run_bitvote(cfg);
    TInfo t = initial_config(spec);
    std::size_t writes = 0;
    for (const auto& e : r.traces.at("leader")) {
      if (e.action == "vwb") {
        CHECK(t.state == "L2");
        ++writes;
      }
      auto before = t;
      auto out = step(spec, t, e.action, e.value);
      if (out.next.state == "L2" && before.state != "L2") {
        const auto& pre = update(spec.internal, pre_assigns_of(spec.typestate, before.state, e.action), before.store);
        CHECK((pre.vars.at("acks") == 2 || pre.vars.at("retries") == 0));
      }
      t = out.next;
    }
    CHECK(writes == r.written_bits.size());
    CHECK(writes == 5);
  }
}

TEST_CASE("lossless receiver estimates stay near one half") {
  AbpConfig cfg;
  cfg.rounds = 50;
  auto r = run_abp(cfg);
  MonitorConfig conf;
  conf.warmup = 0;
  auto m = run_trace(bundled("receiver"), conf, r.traces.at("receiver"));
  CHECK(m.p_of("R1", "msg") + 1 == m.p_of("R1", "ack"));
  std::uint64_t n = 0;
  for (const auto& e : m.log) {
    if (n % 2 == 1) CHECK(std::abs(*e.observed - 0.5) <= 1.0 / static_cast<double>(n + 1));
    ++n;
  }
}

TEST_CASE("lazy receivers acknowledge fewer messages") {
  AbpConfig cfg;
  cfg.rounds = 100;
  cfg.ack_rate = kLazyAckRate;
  cfg.net.seed = 5;
  auto r = run_abp(cfg);
  const auto& rx = r.traces.at("receiver");
  double share = static_cast<double>(count(rx, "ack")) / static_cast<double>(rx.size());
  CHECK(share < 0.45);
  CHECK(count(r.traces.at("sender"), "ack") == 100);

  // The i-th msg is acked iff that keeps acks within 3/5 of msgs.
  std::size_t msgs = 0, acks = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    if (rx[i].action == "ack") continue;
    ++msgs;
    bool acked = i + 1 < rx.size() && rx[i + 1].action == "ack";
    CHECK(acked == ((acks + 1) * 5 <= msgs * 3));
    acks += acked;
  }
}

TEST_CASE("identical configurations give identical runs") {
  AbpConfig cfg;
  cfg.rounds = 40;
  cfg.net.seed = 1234;
  cfg.net.drop_prob = 0.3;
  cfg.net.dup_prob = 0.2;
  auto a = run_abp(cfg);
  auto b = run_abp(cfg);
  CHECK(a.traces == b.traces);
  CHECK(a.ticks == b.ticks);

  cfg.net.seed = 1235;
  auto c = run_abp(cfg);
  CHECK_FALSE(a.traces == c.traces);

  auto d1 = scratch("a");
  auto d2 = scratch("b");
  write_run(d1, a, manifest_json("abp", cfg, a));
  write_run(d2, b, manifest_json("abp", cfg, b));
  for (const char* f : {"sender.jsonl", "receiver.jsonl", "manifest.json"}) {
    CHECK(testkit::read_text((d1 / f).string()) == testkit::read_text((d2 / f).string()));
  }
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("the tick budget truncates long runs") {
  AbpConfig cfg;
  cfg.rounds = 1000;
  cfg.tick_budget = 50;
  auto r = run_abp(cfg);
  CHECK(r.truncated);
  CHECK(r.ticks <= 50);
  CHECK(count(r.traces.at("sender"), "ack") < 1000);

  auto dir = scratch("truncated");
  write_run(dir, r, manifest_json("abp", cfg, r));
  auto text = testkit::read_text((dir / "sender.jsonl").string());
  CHECK(text.rfind("{\"header\":", 0) == 0);
  std::ifstream in(dir / "sender.jsonl");
  CHECK(read_trace(in) == r.traces.at("sender"));
  auto manifest = testkit::read_text((dir / "manifest.json").string());
  CHECK(manifest.find("\"truncated\": true") != std::string::npos);
  std::filesystem::remove_all(dir);

  AbpConfig full;
  auto done = run_abp(full);
  CHECK_FALSE(done.truncated);
  auto clean = scratch("clean");
  write_run(clean, done, manifest_json("abp", full, done));
  CHECK(testkit::read_text((clean / "sender.jsonl").string()).rfind("{\"participant\":", 0) == 0);
  std::filesystem::remove_all(clean);
}

TEST_CASE("configuration validation") {
  AbpConfig abp;
  abp.net.drop_prob = 1.5;
  CHECK_THROWS_AS(run_abp(abp), std::invalid_argument);
  abp = AbpConfig{};
  abp.net.drop_prob = 1.0;
  CHECK_THROWS_AS(run_abp(abp), std::invalid_argument);
  abp = AbpConfig{};
  abp.rounds = 0;
  CHECK_THROWS_AS(run_abp(abp), std::invalid_argument);
  abp = AbpConfig{};
  abp.net.jitter = -1;
  CHECK_THROWS_AS(run_abp(abp), std::invalid_argument);

  BitVoteConfig bv;
  bv.n = 0;
  CHECK_THROWS_AS(run_bitvote(bv), std::invalid_argument);
  bv = BitVoteConfig{};
  bv.k = 0;
  CHECK_THROWS_AS(run_bitvote(bv), std::invalid_argument);
  bv = BitVoteConfig{};
  bv.net.link_drop[{"peer0", "leader"}] = 1.5;
  CHECK_THROWS_AS(run_bitvote(bv), std::invalid_argument);
}
