// Command-line front end: run, validate, oracle, diff-quiescent.
//
// Exit codes: 0 success, 1 invariant violation or route mismatch, 2 usage or
// input error.

#include <filesystem>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "bbroker/oracle.hpp"
#include "bbroker/simulator.hpp"
#include "bbroker/wire.hpp"

namespace {

using namespace bbroker;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

std::shared_ptr<const NetworkTopology> load_topology(const std::string& path) {
  return std::make_shared<const NetworkTopology>(parse_topology(read_file(path)));
}

int cmd_run(const std::string& topo_path, const std::string& scen_path, RunOptions options,
            const std::string& out_dir) {
  auto topo = load_topology(topo_path);
  Scenario scenario = scen_path.empty() ? Scenario{} : parse_scenario(read_file(scen_path));
  options.keep_trace_lines = !out_dir.empty();
  Simulator sim(topo, std::move(scenario), options);
  RunResult r = sim.run();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    std::string trace;
    for (const std::string& line : r.trace_lines) trace += line + "\n";
    write_file((dir / "trace.txt").string(), trace);
    write_file((dir / "metrics.csv").string(), write_metrics_csv(r.metrics));
    std::map<BrokerId, BrokerState> up;
    for (const auto& [id, state] : r.brokers) {
      if (!r.down.count(id)) up.emplace(id, state);
    }
    write_file((dir / "routes.txt").string(), write_route_table(route_table_of(up)));
    write_file((dir / "archive.txt").string(), write_archives(r.brokers));
    write_file((dir / "filters.txt").string(), write_filters(r.brokers));
  }

  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.trace_hash));
  std::cout << "events " << r.events << "\n"
            << "end_time " << r.end_time << "\n"
            << "trace_hash " << hash << "\n"
            << "quiescent " << (r.quiescent ? "yes" : "no") << "\n";
  for (int k = 0; k < kMessageKinds; ++k) {
    std::cout << "sent_" << to_string(static_cast<MessageKind>(k)) << ' ' << r.total_sent[k]
              << "\n";
  }
  if (!r.violations.empty()) {
    std::cerr << "invariant violation at event " << r.violation_event.value_or(0) << ":\n";
    for (const std::string& v : r.violations) std::cerr << "  " << v << "\n";
    return kViolation;
  }
  return kOk;
}

int cmd_validate(const std::string& topo_path, const std::string& scen_path) {
  auto topo = load_topology(topo_path);
  if (!scen_path.empty()) {
    Scenario scenario = parse_scenario(read_file(scen_path));
    const auto errors = validate_scenario(scenario, *topo);
    if (!errors.empty()) {
      for (const Violation& v : errors) std::cerr << scen_path << ": " << v.subject << ": " << v.message << "\n";
      return kUsage;
    }
  }
  std::cout << "ok: " << topo->transit_domains().size() << " transit, "
            << topo->edge_domains().size() << " edge, " << topo->links().size() << " links\n";
  return kOk;
}

int cmd_oracle(const std::string& topo_path, const std::string& out_path) {
  auto topo = load_topology(topo_path);
  const std::string text = write_route_table(oracle_best_routes(*topo));
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return kOk;
}

int cmd_diff(const std::string& routes_path, const std::string& oracle_path,
             const std::string& topo_path, double loss_tol, bool ignore_next_hop) {
  RouteTable actual = parse_route_table(read_file(routes_path));
  RouteTable expected = !oracle_path.empty()
                            ? parse_route_table(read_file(oracle_path))
                            : oracle_best_routes(*load_topology(topo_path));
  const auto diff = diff_route_tables(expected, actual, loss_tol, !ignore_next_hop);
  for (const std::string& d : diff) std::cout << d << "\n";
  return diff.empty() ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandwidth broker protocol simulator"};
  app.require_subcommand(1);

  std::string topo_path, scen_path, out_path, routes_path, oracle_path;
  RunOptions options;
  double loss_tol = 1e-12;
  bool ignore_next_hop = false;

  auto* run = app.add_subcommand("run", "Simulate a scenario");
  run->add_option("--topology", topo_path, "Topology file")->required();
  run->add_option("--scenario", scen_path, "Scenario file");
  run->add_option("--seed", options.seed, "Run seed");
  run->add_option("--terms", options.terms, "Number of terms")->check(CLI::NonNegativeNumber);
  run->add_option("--out", out_path, "Directory for trace, metrics, routes, archive, filters");
  run->add_flag("--checked", options.checked, "Check invariants after every event");
  run->add_flag("--stop-at-quiescence", options.stop_at_quiescence,
                "Stop once the network is quiescent and no action is pending");

  auto* validate_cmd = app.add_subcommand("validate", "Lint topology and scenario files");
  validate_cmd->add_option("--topology", topo_path, "Topology file")->required();
  validate_cmd->add_option("--scenario", scen_path, "Scenario file");

  auto* oracle = app.add_subcommand("oracle", "Print centralized best routes");
  oracle->add_option("--topology", topo_path, "Topology file")->required();
  oracle->add_option("--out", out_path, "Write the route table here instead of stdout");

  auto* diff = app.add_subcommand("diff-quiescent",
                                  "Compare a run's final AI databases with the oracle");
  diff->add_option("--routes", routes_path, "routes.txt written by run --out")->required();
  auto* oracle_opt = diff->add_option("--oracle", oracle_path, "Route table written by oracle");
  auto* topo_opt = diff->add_option("--topology", topo_path, "Compute the oracle from this topology");
  oracle_opt->excludes(topo_opt);
  diff->add_option("--loss-tolerance", loss_tol, "Absolute loss tolerance");
  diff->add_flag("--ignore-next-hop", ignore_next_hop, "Compare parameters only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(topo_path, scen_path, options, out_path);
    if (*validate_cmd) return cmd_validate(topo_path, scen_path);
    if (*oracle) return cmd_oracle(topo_path, out_path);
    if (*diff) {
      if (oracle_path.empty() && topo_path.empty()) {
        std::cerr << "diff-quiescent: one of --oracle or --topology is required\n";
        return kUsage;
      }
      return cmd_diff(routes_path, oracle_path, topo_path, loss_tol, ignore_next_hop);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::kParseError:
      case ErrorCode::kSchemaError:
      case ErrorCode::kValidationError:
      case ErrorCode::kScenarioError:
      case ErrorCode::kInvalidArgument:
        return kUsage;
      default:
        return kViolation;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
