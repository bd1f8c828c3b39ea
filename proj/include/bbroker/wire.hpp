// External formats: canonical XML messages, topology and scenario files,
// route tables and run reports.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bbroker/messages.hpp"
#include "bbroker/oracle.hpp"
#include "bbroker/scenario.hpp"
#include "bbroker/simulator.hpp"
#include "bbroker/topology.hpp"

namespace bbroker {

/// Exactly nine significant digits in fixed notation; zero is "0.00000000".
std::string format_loss(LossProb loss);

/// Canonical form: `<bb from=".." to="..">` around exactly one element, no
/// whitespace, fixed attribute order.
std::string encode_message(const InterDomainMessage& message);

/// Accepts any attribute order and whitespace between markup. Throws
/// kParseError (with byte offset) on malformed XML and kSchemaError on
/// missing, extra or out-of-range attributes.
InterDomainMessage decode_message(std::string_view document);

/// Line-oriented `bbtopo 1` format. Throws kParseError (with line number)
/// and kValidationError when the parsed topology breaks an invariant.
NetworkTopology parse_topology(std::string_view text);
std::string write_topology(const NetworkTopology& topology);

/// Line-oriented `bbscen 1` format; ids are checked later against a
/// topology by validate_scenario. Throws kParseError.
Scenario parse_scenario(std::string_view text);
std::string write_scenario(const Scenario& scenario);

/// `bbroutes 1` format; losses are written round-trip exact.
std::string write_route_table(const RouteTable& table);
RouteTable parse_route_table(std::string_view text);

/// Comma separated, header first, one row per (term, broker).
std::string write_metrics_csv(const std::vector<MetricsRow>& rows);

/// Demand archives, one record per line prefixed by the broker id.
std::string write_archives(const std::map<BrokerId, BrokerState>& brokers);

/// Border router filter tables of every broker.
std::string write_filters(const std::map<BrokerId, BrokerState>& brokers);

/// Throws kParseError when the file cannot be read.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace bbroker
