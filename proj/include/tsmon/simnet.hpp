#pragma once

// Deterministic discrete-event simulation of the alternating-bit and
// bit-vote protocols over a lossy, duplicating network.
//
// Randomness comes from one SplitMix64 stream per run, drawn in a fixed
// order so that other implementations can reproduce traces exactly:
//
//   send(src, dst):  u = uniform();  drop if u < drop_for(src, dst)
//                    otherwise delay = base_delay + below(jitter + 1)
//                    u = uniform();  if u < dup_prob a second copy with
//                    delay = base_delay + below(jitter + 1)
//   peer vote:       bit = next() >> 63, once per round
//
// uniform() = (next() >> 11) * 2^-53 and below(b) = next() % b. Events are
// processed by (time, insertion order). The ABP receiver draws nothing: it
// acks its i-th msg iff acks so far + 1 <= ack_rate * i.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tsmon/monitor.hpp"

namespace tsmon::sim {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t kDefaultTickBudget = 100000;

struct NetConfig {
  std::uint64_t seed = 0;
  double drop_prob = 0.0;
  double dup_prob = 0.0;
  std::int64_t base_delay = 2;
  std::int64_t jitter = 3;
  /// (src, dst) -> drop probability for that link, overriding drop_prob.
  std::map<std::pair<std::string, std::string>, double> link_drop;

  double drop_for(const std::string& src, const std::string& dst) const;
  void validate() const;
};

struct AbpConfig {
  NetConfig net;
  std::uint64_t rounds = 10;
  std::int64_t resend_interval = 20;
  /// Fraction of received msgs the receiver acknowledges; below 1 models a
  /// lazy receiver.
  double ack_rate = 1.0;
  std::uint64_t tick_budget = kDefaultTickBudget;

  void validate() const;
};

/// Acknowledgement rate of the bundled lazy receiver.
inline constexpr double kLazyAckRate = 0.6;

struct BitVoteConfig {
  NetConfig net;
  std::uint64_t n = 2;
  std::int64_t k = 5;
  std::uint64_t voting_rounds = 1;
  std::int64_t retry_interval = 20;
  std::uint64_t tick_budget = kDefaultTickBudget;

  void validate() const;
};

struct SimResult {
  /// Participants in a fixed order: sender, receiver / leader, peer0, ...
  std::vector<std::string> participants;
  std::map<std::string, std::vector<TraceEvent>> traces;
  std::uint64_t ticks = 0;
  bool truncated = false;
  /// Bits broadcast in write-backs (bit-vote only).
  std::vector<int> written_bits;
};

SimResult run_abp(const AbpConfig& cfg);
SimResult run_bitvote(const BitVoteConfig& cfg);

/// Most frequent bit; ties and empty vote sets give 0.
int majority_bit(const std::vector<int>& votes);

std::string manifest_json(const std::string& protocol, const AbpConfig& cfg, const SimResult& result);
std::string manifest_json(const std::string& protocol, const BitVoteConfig& cfg, const SimResult& result);

/// Writes `<dir>/<participant>.jsonl` for every participant plus
/// `<dir>/manifest.json`. Truncated runs start each trace with a header line.
void write_run(const std::filesystem::path& dir, const SimResult& result, const std::string& manifest);

}  // namespace tsmon::sim
