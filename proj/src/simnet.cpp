#include "tsmon/simnet.hpp"

#include <fstream>
#include <memory>
#include <queue>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace tsmon::sim {

using ordered_json = nlohmann::ordered_json;

double NetConfig::drop_for(const std::string& src, const std::string& dst) const {
  if (auto it = link_drop.find({src, dst}); it != link_drop.end()) return it->second;
  return drop_prob;
}

void NetConfig::validate() const {
  if (!(drop_prob >= 0.0 && drop_prob < 1.0)) throw std::invalid_argument("drop probability must lie in [0, 1)");
  if (!(dup_prob >= 0.0 && dup_prob < 1.0)) throw std::invalid_argument("duplication probability must lie in [0, 1)");
  if (base_delay < 0 || jitter < 0) throw std::invalid_argument("delays must be non-negative");
  for (const auto& [link, p] : link_drop) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("link drop probability must lie in [0, 1]");
  }
}

void AbpConfig::validate() const {
  net.validate();
  if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
  if (resend_interval < 1) throw std::invalid_argument("resend interval must be positive");
  if (!(ack_rate >= 0.0 && ack_rate <= 1.0)) throw std::invalid_argument("ack rate must lie in [0, 1]");
}

void BitVoteConfig::validate() const {
  net.validate();
  if (n < 1) throw std::invalid_argument("peer count must be at least 1");
  if (k < 1) throw std::invalid_argument("retry budget must be at least 1");
  if (voting_rounds < 1) throw std::invalid_argument("voting rounds must be at least 1");
  if (retry_interval < 1) throw std::invalid_argument("retry interval must be positive");
}

int majority_bit(const std::vector<int>& votes) {
  std::size_t ones = 0;
  for (int v : votes) ones += v != 0;
  return ones > votes.size() - ones ? 1 : 0;
}

namespace {

struct Message {
  std::string action;
  std::string sender;
  int bit = 0;
  std::uint64_t round = 0;
};

struct SimEvent {
  enum class Kind { Deliver, Timer };

  std::uint64_t time = 0;
  std::uint64_t order = 0;
  Kind kind = Kind::Deliver;
  std::string dst;
  Message payload;
  std::uint64_t timer_id = 0;
};

struct LaterFirst {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    return a.time != b.time ? a.time > b.time : a.order > b.order;
  }
};

class EventLoop;

class Participant {
 public:
  Participant(EventLoop& loop, std::string name) : loop_(loop), name_(std::move(name)) {}
  virtual ~Participant() = default;

  const std::string& name() const { return name_; }

  virtual void on_start() {}
  virtual void on_message(const Message& m) = 0;
  virtual void on_timer(std::uint64_t) {}

 protected:
  EventLoop& loop_;
  std::string name_;
};

class EventLoop {
 public:
  EventLoop(const NetConfig& net, std::uint64_t tick_budget) : net_(net), rng_(net.seed), budget_(tick_budget) {}

  void add(Participant& p) {
    participants_[p.name()] = &p;
    result_.participants.push_back(p.name());
    result_.traces[p.name()];
  }

  SplitMix64& rng() { return rng_; }

  void send(const std::string& src, const std::string& dst, Message m) {
    m.sender = src;
    if (rng_.uniform() < net_.drop_for(src, dst)) return;
    push_delivery(dst, m, delay());
    if (rng_.uniform() < net_.dup_prob) push_delivery(dst, m, delay());
  }

  void set_timer(const std::string& dst, std::int64_t after, std::uint64_t id) {
    SimEvent ev;
    ev.time = now_ + static_cast<std::uint64_t>(after);
    ev.order = order_++;
    ev.kind = SimEvent::Kind::Timer;
    ev.dst = dst;
    ev.timer_id = id;
    queue_.push(std::move(ev));
  }

  void record(const std::string& participant, const std::string& action, Direction dir) {
    auto& trace = result_.traces[participant];
    trace.push_back(TraceEvent{participant, action, dir, Value::none(), trace.size()});
  }

  SimResult run() {
    for (const auto& name : result_.participants) participants_.at(name)->on_start();
    while (!queue_.empty()) {
      SimEvent ev = queue_.top();
      if (ev.time > budget_) {
        result_.truncated = true;
        break;
      }
      queue_.pop();
      now_ = ev.time;
      Participant* p = participants_.at(ev.dst);
      if (ev.kind == SimEvent::Kind::Deliver) p->on_message(ev.payload);
      else p->on_timer(ev.timer_id);
    }
    result_.ticks = now_;
    return std::move(result_);
  }

  SimResult& result() { return result_; }

 private:
  std::uint64_t delay() {
    return static_cast<std::uint64_t>(net_.base_delay) + rng_.below(static_cast<std::uint64_t>(net_.jitter) + 1);
  }

  void push_delivery(const std::string& dst, const Message& m, std::uint64_t after) {
    SimEvent ev;
    ev.time = now_ + after;
    ev.order = order_++;
    ev.kind = SimEvent::Kind::Deliver;
    ev.dst = dst;
    ev.payload = m;
    queue_.push(std::move(ev));
  }

  NetConfig net_;
  SplitMix64 rng_;
  std::uint64_t budget_;
  std::uint64_t now_ = 0;
  std::uint64_t order_ = 0;
  std::priority_queue<SimEvent, std::vector<SimEvent>, LaterFirst> queue_;
  std::map<std::string, Participant*> participants_;
  SimResult result_;
};

//------------------------------------------------------------------------------
// Alternating bit protocol.

class AbpSender : public Participant {
 public:
  AbpSender(EventLoop& loop, const AbpConfig& cfg) : Participant(loop, "sender"), cfg_(cfg) {}

  void on_start() override { send_msg(); }

  void on_timer(std::uint64_t id) override {
    if (!done_ && id == generation_) send_msg();
  }

  void on_message(const Message& m) override {
    // Acks for an older bit, or after the last round, are outdated.
    if (done_ || m.action != "ack" || m.bit != bit_) return;
    loop_.record(name_, "ack", Direction::In);
    bit_ ^= 1;
    if (++flips_ == cfg_.rounds) {
      done_ = true;
      ++generation_;
      return;
    }
    send_msg();
  }

 private:
  void send_msg() {
    loop_.record(name_, "msg", Direction::Out);
    loop_.send(name_, "receiver", Message{"msg", {}, bit_, 0});
    loop_.set_timer(name_, cfg_.resend_interval, ++generation_);
  }

  const AbpConfig& cfg_;
  int bit_ = 0;
  std::uint64_t flips_ = 0;
  std::uint64_t generation_ = 0;
  bool done_ = false;
};

class AbpReceiver : public Participant {
 public:
  AbpReceiver(EventLoop& loop, const AbpConfig& cfg) : Participant(loop, "receiver"), cfg_(cfg) {}

  void on_message(const Message& m) override {
    if (m.action != "msg") return;
    loop_.record(name_, "msg", Direction::In);
    // New bits and duplicates of the last acknowledged bit are both acked,
    // as long as the acks sent stay within ack_rate of the msgs received.
    ++received_;
    if (static_cast<double>(acked_ + 1) <= cfg_.ack_rate * static_cast<double>(received_) + 1e-9) {
      ++acked_;
      loop_.record(name_, "ack", Direction::Out);
      loop_.send(name_, "sender", Message{"ack", {}, m.bit, 0});
    }
  }

 private:
  const AbpConfig& cfg_;
  std::uint64_t received_ = 0;
  std::uint64_t acked_ = 0;
};

//------------------------------------------------------------------------------
// Bit-vote protocol. The leader's counters mirror its typestate's internal
// state: a vreq spends a retry, a fresh vack adds an ack, and a completed
// round resets both before the write-back.

std::string peer_name(std::uint64_t i) { return "peer" + std::to_string(i); }

class Leader : public Participant {
 public:
  Leader(EventLoop& loop, const BitVoteConfig& cfg) : Participant(loop, "leader"), cfg_(cfg), retries_(cfg.k) {}

  void on_start() override { send_vreq(); }

  void on_timer(std::uint64_t id) override {
    if (!done_ && id == generation_) send_vreq();
  }

  void on_message(const Message& m) override {
    if (done_ || m.action != "vack" || m.round != round_ || !voters_.insert(m.sender).second) return;
    loop_.record(name_, "vack", Direction::In);
    ++acks_;
    votes_.push_back(m.bit);
    if (acks_ == static_cast<std::int64_t>(cfg_.n)) complete_round();
  }

 private:
  void send_vreq() {
    loop_.record(name_, "vreq", Direction::Out);
    for (std::uint64_t i = 0; i < cfg_.n; ++i) loop_.send(name_, peer_name(i), Message{"vreq", {}, 0, round_});
    --retries_;
    if (!started_) {
      started_ = true;
    } else if (retries_ == 0) {
      complete_round();
      return;
    }
    loop_.set_timer(name_, cfg_.retry_interval, ++generation_);
  }

  void complete_round() {
    acks_ = 0;
    retries_ = cfg_.k;
    ++generation_;
    int bit = majority_bit(votes_);
    loop_.result().written_bits.push_back(bit);
    loop_.record(name_, "vwb", Direction::Out);
    for (std::uint64_t i = 0; i < cfg_.n; ++i) loop_.send(name_, peer_name(i), Message{"vwb", {}, bit, round_});
    voters_.clear();
    votes_.clear();
    if (round_++ == cfg_.voting_rounds) {
      done_ = true;
      return;
    }
    send_vreq();
  }

  const BitVoteConfig& cfg_;
  std::uint64_t round_ = 1;
  std::int64_t acks_ = 0;
  std::int64_t retries_;
  bool started_ = false;  // left the initial state
  bool done_ = false;
  std::uint64_t generation_ = 0;
  std::set<std::string> voters_;
  std::vector<int> votes_;
};

class Peer : public Participant {
 public:
  Peer(EventLoop& loop, std::uint64_t index) : Participant(loop, peer_name(index)) {}

  void on_message(const Message& m) override {
    // Messages of rounds already written back are outdated.
    if (m.round <= closed_through_) return;
    if (m.action == "vreq") {
      loop_.record(name_, "vreq", Direction::In);
      if (m.round != vote_round_) {
        vote_round_ = m.round;
        vote_ = static_cast<int>(loop_.rng().next() >> 63);
      }
      loop_.record(name_, "vack", Direction::Out);
      loop_.send(name_, m.sender, Message{"vack", {}, vote_, m.round});
      started_ = true;
    } else if (m.action == "vwb" && started_) {
      loop_.record(name_, "vwb", Direction::In);
      closed_through_ = m.round;
    }
  }

 private:
  bool started_ = false;
  std::uint64_t vote_round_ = 0;
  std::uint64_t closed_through_ = 0;
  int vote_ = 0;
};

ordered_json net_json(const NetConfig& net) {
  ordered_json j;
  j["seed"] = net.seed;
  j["drop_prob"] = net.drop_prob;
  j["dup_prob"] = net.dup_prob;
  j["base_delay"] = net.base_delay;
  j["jitter"] = net.jitter;
  if (!net.link_drop.empty()) {
    ordered_json links = ordered_json::array();
    for (const auto& [link, p] : net.link_drop) links.push_back({{"src", link.first}, {"dst", link.second}, {"drop_prob", p}});
    j["link_drop"] = links;
  }
  return j;
}

std::string manifest(const std::string& protocol, ordered_json config, const SimResult& result, std::uint64_t seed) {
  ordered_json j;
  j["protocol"] = protocol;
  j["seed"] = seed;
  j["config"] = std::move(config);
  j["ticks"] = result.ticks;
  j["truncated"] = result.truncated;
  ordered_json files = ordered_json::object();
  for (const auto& p : result.participants) files[p] = p + ".jsonl";
  j["traces"] = files;
  return j.dump(2) + "\n";
}

}  // namespace

SimResult run_abp(const AbpConfig& cfg) {
  cfg.validate();
  EventLoop loop(cfg.net, cfg.tick_budget);
  AbpSender sender(loop, cfg);
  AbpReceiver receiver(loop, cfg);
  loop.add(sender);
  loop.add(receiver);
  return loop.run();
}

SimResult run_bitvote(const BitVoteConfig& cfg) {
  cfg.validate();
  EventLoop loop(cfg.net, cfg.tick_budget);
  Leader leader(loop, cfg);
  std::vector<std::unique_ptr<Peer>> peers;
  loop.add(leader);
  for (std::uint64_t i = 0; i < cfg.n; ++i) {
    peers.push_back(std::make_unique<Peer>(loop, i));
    loop.add(*peers.back());
  }
  return loop.run();
}

std::string manifest_json(const std::string& protocol, const AbpConfig& cfg, const SimResult& result) {
  ordered_json c;
  c["net"] = net_json(cfg.net);
  c["rounds"] = cfg.rounds;
  c["resend_interval"] = cfg.resend_interval;
  c["ack_rate"] = cfg.ack_rate;
  c["tick_budget"] = cfg.tick_budget;
  return manifest(protocol, std::move(c), result, cfg.net.seed);
}

std::string manifest_json(const std::string& protocol, const BitVoteConfig& cfg, const SimResult& result) {
  ordered_json c;
  c["net"] = net_json(cfg.net);
  c["n"] = cfg.n;
  c["k"] = cfg.k;
  c["voting_rounds"] = cfg.voting_rounds;
  c["retry_interval"] = cfg.retry_interval;
  c["tick_budget"] = cfg.tick_budget;
  return manifest(protocol, std::move(c), result, cfg.net.seed);
}

void write_run(const std::filesystem::path& dir, const SimResult& result, const std::string& manifest) {
  std::filesystem::create_directories(dir);
  for (const auto& p : result.participants) {
    std::ofstream out(dir / (p + ".jsonl"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / (p + ".jsonl")).string());
    if (result.truncated) {
      ordered_json header;
      header["header"] = {{"participant", p}, {"truncated", true}, {"ticks", result.ticks}};
      out << header.dump() << '\n';
    }
    write_trace(out, result.traces.at(p));
  }
  std::ofstream m(dir / "manifest.json", std::ios::binary);
  if (!m) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  m << manifest;
}

}  // namespace tsmon::sim
