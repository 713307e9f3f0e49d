#include "tsmon/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "tsmon/dsl.hpp"
#include "tsmon/monitor.hpp"
#include "tsmon/simnet.hpp"
#include "tsmon/wellformed.hpp"

namespace tsmon::cli {

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diagnostic(std::ostream& err, std::string_view rule, const std::string& file, const SourceSpan& span,
                      const std::string& message) {
  err << rule << ' ' << file << ':' << span.line << ':' << span.column << ' ' << message << '\n';
}

struct Loaded {
  std::optional<ProtocolSpec> spec;
  int status = kSuccess;
};

Loaded load_spec(const std::string& path, std::ostream& err) {
  auto text = read_file(path);
  if (!text) {
    err << "tsmon: cannot read '" << path << "'\n";
    return {std::nullopt, kUsage};
  }
  try {
    return {parse_protocol(*text), kSuccess};
  } catch (const ParseError& e) {
    print_diagnostic(err, rule_name(e.kind()), path, e.span(), e.detail());
    return {std::nullopt, kParse};
  }
}

/// Runs every well-formedness and transition rule; returns the number of
/// diagnostics printed.
std::size_t report_diagnostics(const ProtocolSpec& spec, const std::string& path, std::ostream& err) {
  auto diags = check_well_formed(spec);
  auto more = check_transition_rules(spec, build_trs(spec));
  diags.insert(diags.end(), more.begin(), more.end());
  for (const auto& d : diags) print_diagnostic(err, rule_name(d.rule), path, d.span, d.detail);
  return diags.size();
}

int cmd_validate(const std::string& path, std::ostream& err) {
  Loaded l = load_spec(path, err);
  if (!l.spec) return l.status;
  return report_diagnostics(*l.spec, path, err) == 0 ? kSuccess : kFindings;
}

int cmd_graph(const std::string& path, const std::string& dot_path, std::ostream& out, std::ostream& err) {
  Loaded l = load_spec(path, err);
  if (!l.spec) return l.status;
  if (report_diagnostics(*l.spec, path, err) != 0) return kFindings;
  std::string dot = export_dot(*l.spec, build_trs(*l.spec));
  if (dot_path.empty()) {
    out << dot;
    return kSuccess;
  }
  std::ofstream f(dot_path, std::ios::binary);
  if (!f) {
    err << "tsmon: cannot write '" << dot_path << "'\n";
    return kUsage;
  }
  f << dot;
  return kSuccess;
}

struct SimulateArgs {
  std::string protocol;
  std::uint64_t seed = 0;
  double drop = 0.0;
  double dup = 0.0;
  std::optional<std::uint64_t> rounds;
  std::uint64_t n = 2;
  std::int64_t k = 5;
  std::int64_t delay = 2;
  std::int64_t jitter = 3;
  std::int64_t interval = 20;
  std::optional<double> ack_rate;
  std::uint64_t tick_budget = sim::kDefaultTickBudget;
  std::string out_dir = ".";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  sim::NetConfig net;
  net.seed = a.seed;
  net.drop_prob = a.drop;
  net.dup_prob = a.dup;
  net.base_delay = a.delay;
  net.jitter = a.jitter;
  try {
    sim::SimResult result;
    std::string manifest;
    if (a.protocol == "bitvote") {
      sim::BitVoteConfig cfg;
      cfg.net = net;
      cfg.n = a.n;
      cfg.k = a.k;
      cfg.voting_rounds = a.rounds.value_or(1);
      cfg.retry_interval = a.interval;
      cfg.tick_budget = a.tick_budget;
      result = sim::run_bitvote(cfg);
      manifest = sim::manifest_json(a.protocol, cfg, result);
    } else {
      sim::AbpConfig cfg;
      cfg.net = net;
      cfg.rounds = a.rounds.value_or(10);
      cfg.resend_interval = a.interval;
      cfg.ack_rate = a.ack_rate.value_or(a.protocol == "abp-lazy" ? sim::kLazyAckRate : 1.0);
      cfg.tick_budget = a.tick_budget;
      result = sim::run_abp(cfg);
      manifest = sim::manifest_json(a.protocol, cfg, result);
    }
    sim::write_run(a.out_dir, result, manifest);
    out << manifest;
    if (result.truncated) err << "tsmon: tick budget exhausted; traces are truncated\n";
  } catch (const std::invalid_argument& e) {
    err << "tsmon: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "tsmon: " << e.what() << '\n';
    return kUsage;
  }
  return kSuccess;
}

struct MonitorArgs {
  std::string spec_path;
  std::string trace_path;
  double error = kDefaultErrorBound;
  std::uint64_t warmup = kDefaultWarmup;
  std::vector<std::string> error_for;
  std::string participant;
  std::string log_path;
};

int cmd_monitor(const MonitorArgs& a, std::ostream& out, std::ostream& err) {
  MonitorConfig conf;
  conf.error_bound = a.error;
  conf.warmup = a.warmup;
  for (const auto& item : a.error_for) {
    auto dot = item.find('.');
    auto eq = item.find('=');
    if (dot == std::string::npos || eq == std::string::npos || eq < dot) {
      err << "tsmon: --error-for expects STATE.ACTION=E, got '" << item << "'\n";
      return kUsage;
    }
    try {
      conf.per_action_error[{item.substr(0, dot), item.substr(dot + 1, eq - dot - 1)}] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      err << "tsmon: bad error bound in '" << item << "'\n";
      return kUsage;
    }
  }
  try {
    conf.validate();
  } catch (const std::invalid_argument& e) {
    err << "tsmon: " << e.what() << '\n';
    return kUsage;
  }

  Loaded l = load_spec(a.spec_path, err);
  if (!l.spec) return l.status;
  if (report_diagnostics(*l.spec, a.spec_path, err) != 0) return kFindings;

  std::ifstream trace_in(a.trace_path, std::ios::binary);
  if (!trace_in) {
    err << "tsmon: cannot read '" << a.trace_path << "'\n";
    return kUsage;
  }
  std::vector<TraceEvent> events;
  try {
    events = read_trace(trace_in);
  } catch (const TraceFormatError& e) {
    err << "TRACE " << a.trace_path << ':' << e.line() << ":1 " << e.detail() << '\n';
    return kParse;
  }
  if (!a.participant.empty()) {
    std::erase_if(events, [&](const TraceEvent& ev) { return ev.participant != a.participant; });
  }

  MTInfo result = run_trace(*l.spec, conf, events);
  if (a.log_path.empty()) {
    write_log(out, result.log);
  } else {
    std::ofstream log(a.log_path, std::ios::binary);
    if (!log) {
      err << "tsmon: cannot write '" << a.log_path << "'\n";
      return kUsage;
    }
    write_log(log, result.log);
  }

  MonitorSummary s = summarize(events.size(), result.log);
  err << "events=" << s.events << " monitored=" << s.monitored << " ok=" << s.ok << " warmup=" << s.warmup
      << " deviations=" << s.deviations << " illegal=" << s.illegal << '\n';
  return s.deviations == 0 && s.illegal == 0 ? kSuccess : kFindings;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Typestate validation, simulation and runtime monitoring", "tsmon"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a .tsp spec against every well-formedness rule");
  validate->add_option("spec", validate_path, "Protocol spec")->required();

  std::string graph_path;
  std::string dot_path;
  auto* graph = app.add_subcommand("graph", "Export a spec's transition graph as DOT");
  graph->add_option("spec", graph_path, "Protocol spec")->required();
  graph->add_option("--dot", dot_path, "Output file (standard output when omitted)");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Simulate a protocol and write per-participant traces");
  simulate->add_option("protocol", sa.protocol, "abp, abp-lazy or bitvote")
      ->required()
      ->check(CLI::IsMember({"abp", "abp-lazy", "bitvote"}));
  simulate->add_option("--seed", sa.seed, "PRNG seed")->envname("TSMON_SEED");
  simulate->add_option("--drop", sa.drop, "Per-message drop probability in [0, 1)");
  simulate->add_option("--dup", sa.dup, "Per-message duplication probability in [0, 1)");
  simulate->add_option("--rounds", sa.rounds, "Bit emissions (abp, default 10) or voting rounds (bitvote, default 1)");
  simulate->add_option("--n", sa.n, "Peer count (bitvote)")->capture_default_str();
  simulate->add_option("--k", sa.k, "Retry budget (bitvote)")->capture_default_str();
  simulate->add_option("--delay", sa.delay, "Base delivery delay in ticks")->capture_default_str();
  simulate->add_option("--jitter", sa.jitter, "Maximum extra delay in ticks")->capture_default_str();
  simulate->add_option("--interval", sa.interval, "Resend/retry interval in ticks")->capture_default_str();
  simulate->add_option("--ack-rate", sa.ack_rate, "Fraction of msgs the receiver acknowledges (abp)");
  simulate->add_option("--tick-budget", sa.tick_budget, "Simulation stops after this tick")->capture_default_str();
  simulate->add_option("--out", sa.out_dir, "Output directory")->capture_default_str();

  MonitorArgs ma;
  auto* monitor = app.add_subcommand("monitor", "Monitor a JSONL trace against a spec");
  monitor->add_option("spec", ma.spec_path, "Protocol spec")->required();
  monitor->add_option("--trace", ma.trace_path, "JSONL trace")->required();
  monitor->add_option("--error", ma.error, "Maximum acceptable error E")->capture_default_str();
  monitor->add_option("--warmup", ma.warmup, "Monitored executions in a state before verdicts")->capture_default_str();
  monitor->add_option("--error-for", ma.error_for, "Per-action bound STATE.ACTION=E (repeatable)");
  monitor->add_option("--participant", ma.participant, "Only monitor this participant's events");
  monitor->add_option("--log", ma.log_path, "Log output (standard output when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  if (*validate) return cmd_validate(validate_path, err);
  if (*graph) return cmd_graph(graph_path, dot_path, out, err);
  if (*simulate) return cmd_simulate(sa, out, err);
  if (*monitor) return cmd_monitor(ma, out, err);
  return kUsage;
}

}  // namespace tsmon::cli
