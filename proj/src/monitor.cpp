#include "tsmon/monitor.hpp"

#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

namespace tsmon {

using ordered_json = nlohmann::ordered_json;

double MonitorConfig::bound_for(const std::string& state, const std::string& action) const {
  if (auto it = per_action_error.find({state, action}); it != per_action_error.end()) return it->second;
  return error_bound;
}

void MonitorConfig::validate() const {
  if (!(error_bound > 0.0)) throw std::invalid_argument("error bound must be positive");
  for (const auto& [key, e] : per_action_error) {
    if (!(e > 0.0)) throw std::invalid_argument("error bound for " + key.first + "." + key.second + " must be positive");
  }
}

std::string_view to_string(Direction d) { return d == Direction::In ? "in" : "out"; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Ok: return "ok";
    case Verdict::DeviationLow: return "deviation_low";
    case Verdict::DeviationHigh: return "deviation_high";
    case Verdict::Warmup: return "warmup";
    case Verdict::Illegal: return "illegal";
  }
  return "illegal";
}

std::uint64_t MTInfo::n_of(const std::string& s) const {
  auto it = n.find(s);
  return it == n.end() ? 0 : it->second;
}

std::uint64_t MTInfo::p_of(const std::string& s, const std::string& action) const {
  auto it = p.find({s, action});
  return it == p.end() ? 0 : it->second;
}

MTInfo initial_monitor(const ProtocolSpec& spec) {
  TInfo t = initial_config(spec);
  MTInfo m;
  m.state = std::move(t.state);
  m.store = std::move(t.store);
  return m;
}

namespace {

LogEntry illegal_entry(const MTInfo& cfg, const TraceEvent& ev, std::string detail) {
  LogEntry e;
  e.state = cfg.state;
  e.action = ev.action;
  e.verdict = Verdict::Illegal;
  e.event_index = ev.seq;
  e.detail = std::move(detail);
  return e;
}

}  // namespace

MTInfo monitor_step(const ProtocolSpec& spec, MTInfo cfg, const MonitorConfig& conf, const TraceEvent& ev) {
  const Branch* branch = nullptr;
  Side side = Side::In;
  try {
    std::tie(branch, side) = find_branch(spec.typestate, cfg.state, ev.action);
  } catch (const UndefinedActionError& e) {
    cfg.log.push_back(illegal_entry(cfg, ev, e.what()));
    return cfg;
  }
  if ((side == Side::In) != (ev.direction == Direction::In)) {
    cfg.log.push_back(illegal_entry(cfg, ev,
                                    "action '" + ev.action + "' is an " + (side == Side::In ? "input" : "output") +
                                        " but was observed as '" + std::string(to_string(ev.direction)) + "'"));
    return cfg;
  }

  StepOutcome out;
  try {
    out = step(spec, TInfo{cfg.state, cfg.store}, ev.action, ev.value);
  } catch (const std::exception& e) {  // IllegalActionError or EvalError
    cfg.log.push_back(illegal_entry(cfg, ev, e.what()));
    return cfg;
  }

  const std::string from = std::move(cfg.state);
  cfg.state = std::move(out.next.state);
  cfg.store = std::move(out.next.store);
  if (branch->ratio.is_epsilon()) return cfg;

  std::uint64_t& n = cfg.n[from];
  std::uint64_t& p = cfg.p[{from, ev.action}];
  const double mu = branch->ratio.value();
  const double error = conf.bound_for(from, ev.action);
  const double observed = static_cast<double>(p + 1) / static_cast<double>(n + 1);
  ++n;
  ++p;

  LogEntry e;
  e.state = from;
  e.action = ev.action;
  e.mu = mu;
  e.interval = Interval{mu - error, mu + error};
  e.observed = observed;
  e.event_index = ev.seq;
  if (n < conf.warmup) e.verdict = Verdict::Warmup;
  else if (observed < e.interval->low - kBoundaryTolerance) e.verdict = Verdict::DeviationLow;
  else if (observed > e.interval->high + kBoundaryTolerance) e.verdict = Verdict::DeviationHigh;
  else e.verdict = Verdict::Ok;
  cfg.log.push_back(std::move(e));
  return cfg;
}

MTInfo run_trace(const ProtocolSpec& spec, const MonitorConfig& conf, const std::vector<TraceEvent>& events) {
  MTInfo cfg = initial_monitor(spec);
  for (const auto& ev : events) cfg = monitor_step(spec, std::move(cfg), conf, ev);
  return cfg;
}

MonitorSummary summarize(std::uint64_t events, const std::vector<LogEntry>& log) {
  MonitorSummary s;
  s.events = events;
  for (const auto& e : log) {
    switch (e.verdict) {
      case Verdict::Ok: ++s.ok; ++s.monitored; break;
      case Verdict::Warmup: ++s.warmup; ++s.monitored; break;
      case Verdict::DeviationLow:
      case Verdict::DeviationHigh: ++s.deviations; ++s.monitored; break;
      case Verdict::Illegal: ++s.illegal; break;
    }
  }
  return s;
}

//------------------------------------------------------------------------------

std::vector<TraceEvent> read_trace(std::istream& in) {
  std::vector<TraceEvent> events;
  std::map<std::string, std::uint64_t> last_seq;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw TraceFormatError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw TraceFormatError(lineno, "expected a JSON object");
    if (j.contains("header")) continue;

    auto field = [&](const char* name) -> const ordered_json& {
      if (!j.contains(name)) throw TraceFormatError(lineno, std::string("missing field '") + name + "'");
      return j.at(name);
    };
    TraceEvent ev;
    const auto& participant = field("participant");
    const auto& action = field("action");
    const auto& dir = field("dir");
    const auto& value = field("value");
    const auto& seq = field("seq");
    if (!participant.is_string()) throw TraceFormatError(lineno, "'participant' must be a string");
    if (!action.is_string()) throw TraceFormatError(lineno, "'action' must be a string");
    if (!dir.is_string() || (dir != "in" && dir != "out")) throw TraceFormatError(lineno, "'dir' must be \"in\" or \"out\"");
    if (!seq.is_number_integer() || (seq.is_number_integer() && !seq.is_number_unsigned() && seq.get<std::int64_t>() < 0))
      throw TraceFormatError(lineno, "'seq' must be a non-negative integer");
    ev.participant = participant.get<std::string>();
    ev.action = action.get<std::string>();
    ev.direction = dir == "in" ? Direction::In : Direction::Out;
    ev.seq = seq.get<std::uint64_t>();
    if (value.is_null()) ev.value = Value::none();
    else if (value.is_boolean()) ev.value = Value::boolean(value.get<bool>());
    else if (value.is_string()) ev.value = Value::label(value.get<std::string>());
    else throw TraceFormatError(lineno, "'value' must be null, a boolean or a string");

    auto [it, fresh] = last_seq.try_emplace(ev.participant, ev.seq);
    if (!fresh) {
      if (ev.seq <= it->second)
        throw TraceFormatError(lineno, "seq " + std::to_string(ev.seq) + " does not increase for '" + ev.participant + "'");
      it->second = ev.seq;
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::string trace_line(const TraceEvent& ev) {
  ordered_json j;
  j["participant"] = ev.participant;
  j["action"] = ev.action;
  j["dir"] = to_string(ev.direction);
  switch (ev.value.kind()) {
    case Value::Kind::None: j["value"] = nullptr; break;
    case Value::Kind::Boolean: j["value"] = ev.value.text() == "true"; break;
    case Value::Kind::Label: j["value"] = ev.value.text(); break;
  }
  j["seq"] = ev.seq;
  return j.dump();
}

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events) {
  for (const auto& ev : events) out << trace_line(ev) << '\n';
}

std::string log_line(const LogEntry& entry) {
  ordered_json j;
  j["state"] = entry.state;
  j["action"] = entry.action;
  j["mu"] = entry.mu ? ordered_json(*entry.mu) : ordered_json(nullptr);
  j["interval"] = entry.interval ? ordered_json::array({entry.interval->low, entry.interval->high}) : ordered_json(nullptr);
  j["observed"] = entry.observed ? ordered_json(*entry.observed) : ordered_json(nullptr);
  j["verdict"] = to_string(entry.verdict);
  j["event_index"] = entry.event_index;
  if (!entry.detail.empty()) j["detail"] = entry.detail;
  return j.dump();
}

void write_log(std::ostream& out, const std::vector<LogEntry>& log) {
  for (const auto& e : log) out << log_line(e) << '\n';
}

}  // namespace tsmon
