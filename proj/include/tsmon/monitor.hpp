#pragma once

// Frequentist runtime monitor. Each observed action advances the typestate
// and, when the action carries a numeric ratio mu in its state s, compares
// the running estimate (p + 1) / (n + 1) against the closed interval
// [mu - E, mu + E], where n counts monitored executions in s and p those of
// the action. Counters persist across re-entries to a state.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tsmon/model.hpp"
#include "tsmon/semantics.hpp"
#include "tsmon/wellformed.hpp"

namespace tsmon {

inline constexpr double kDefaultErrorBound = 0.1;
inline constexpr std::uint64_t kDefaultWarmup = 10;
/// Slack applied to interval bounds so that values equal to a bound up to
/// rounding are accepted.
inline constexpr double kBoundaryTolerance = 1e-12;

struct MonitorConfig {
  double error_bound = kDefaultErrorBound;
  /// (state, action) -> error bound, overriding `error_bound`.
  std::map<std::pair<std::string, std::string>, double> per_action_error;
  std::uint64_t warmup = kDefaultWarmup;

  double bound_for(const std::string& state, const std::string& action) const;
  /// Throws std::invalid_argument unless every bound is positive.
  void validate() const;
};

enum class Direction { In, Out };

std::string_view to_string(Direction d);

struct TraceEvent {
  std::string participant;
  std::string action;
  Direction direction = Direction::Out;
  Value value;
  std::uint64_t seq = 0;

  bool operator==(const TraceEvent&) const = default;
};

enum class Verdict { Ok, DeviationLow, DeviationHigh, Warmup, Illegal };

std::string_view to_string(Verdict v);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool operator==(const Interval&) const = default;
};

struct LogEntry {
  std::string state;
  std::string action;
  // Absent on illegal entries.
  std::optional<double> mu;
  std::optional<Interval> interval;
  std::optional<double> observed;
  Verdict verdict = Verdict::Ok;
  std::uint64_t event_index = 0;
  std::string detail;  // illegal entries only

  bool operator==(const LogEntry&) const = default;
};

struct MTInfo {
  std::string state;
  VarStore store;
  std::map<std::string, std::uint64_t> n;
  std::map<std::pair<std::string, std::string>, std::uint64_t> p;
  std::vector<LogEntry> log;

  std::uint64_t n_of(const std::string& state) const;
  std::uint64_t p_of(const std::string& state, const std::string& action) const;
};

MTInfo initial_monitor(const ProtocolSpec& spec);

/// Never throws on bad events: illegal or unevaluable events are logged and
/// leave the configuration untouched.
MTInfo monitor_step(const ProtocolSpec& spec, MTInfo cfg, const MonitorConfig& conf, const TraceEvent& ev);

MTInfo run_trace(const ProtocolSpec& spec, const MonitorConfig& conf, const std::vector<TraceEvent>& events);

struct MonitorSummary {
  std::uint64_t events = 0;
  std::uint64_t monitored = 0;
  std::uint64_t ok = 0;
  std::uint64_t warmup = 0;
  std::uint64_t deviations = 0;
  std::uint64_t illegal = 0;
};

MonitorSummary summarize(std::uint64_t events, const std::vector<LogEntry>& log);

//------------------------------------------------------------------------------
// JSON Lines formats.

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line), detail_(message) {}
  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// One event per line:
///   {"participant": str, "action": str, "dir": "in"|"out", "value": null|bool|str, "seq": int}
/// Blank lines and header objects ({"header": ...}) are skipped; seq must
/// increase strictly per participant.
std::vector<TraceEvent> read_trace(std::istream& in);
std::string trace_line(const TraceEvent& ev);
void write_trace(std::ostream& out, const std::vector<TraceEvent>& events);

/// {"state", "action", "mu", "interval": [low, high], "observed", "verdict", "event_index"}
std::string log_line(const LogEntry& entry);
void write_log(std::ostream& out, const std::vector<LogEntry>& log);

}  // namespace tsmon
