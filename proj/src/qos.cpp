#include "bbroker/qos.hpp"

#include <cassert>

namespace bbroker {

ServiceClass::ServiceClass(int id) : id_(id) {
  if (id < 0 || id > kMaxId) {
    throw Error(ErrorCode::kInvalidArgument,
                "service class " + std::to_string(id) + " outside 0..63");
  }
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kMismatchedKey: return "MismatchedKey";
    case ErrorCode::kStaleMessage: return "StaleMessage";
    case ErrorCode::kUnknownDestination: return "UnknownDestination";
    case ErrorCode::kNoLocalEdgeDomains: return "NoLocalEdgeDomains";
    case ErrorCode::kUnknownLink: return "UnknownLink";
    case ErrorCode::kNegativeTarget: return "NegativeTarget";
    case ErrorCode::kNotLocalSource: return "NotLocalSource";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kUnknownOrigin: return "UnknownOrigin";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kScenarioError: return "ScenarioError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Kbps Bottleneck::value() const {
  assert(!unbounded_);
  return value_;
}

Bottleneck min(const Bottleneck& a, const Bottleneck& b) {
  if (a.unbounded_) return b;
  if (b.unbounded_) return a;
  return a.value_ <= b.value_ ? a : b;
}

std::ostream& operator<<(std::ostream& os, const AvailabilityInfo& ai) {
  return os << "AI{" << ai.edge_domain << "/c" << ai.service_class.id()
            << " bw=" << ai.bandwidth << " avg=" << ai.avg_delay
            << " max=" << ai.max_delay << " jit=" << ai.jitter
            << " loss=" << ai.loss << " origin=" << ai.origin_broker
            << " until=" << ai.valid_until << "}";
}

bool same_parameters(const AvailabilityInfo& a, const AvailabilityInfo& b) {
  return a.edge_domain == b.edge_domain &&
         a.service_class == b.service_class && a.bandwidth == b.bandwidth &&
         a.avg_delay == b.avg_delay && a.max_delay == b.max_delay &&
         a.jitter == b.jitter && a.loss == b.loss &&
         a.origin_broker == b.origin_broker;
}

const char* to_string(AiOrder order) {
  switch (order) {
    case AiOrder::kBetter: return "better";
    case AiOrder::kEqual: return "equal";
    case AiOrder::kWorse: return "worse";
  }
  return "?";
}

namespace {

template <typename T>
AiOrder ascending(const T& a, const T& b) {
  if (a < b) return AiOrder::kBetter;
  if (b < a) return AiOrder::kWorse;
  return AiOrder::kEqual;
}

}  // namespace

AiOrder compare_ai(const AvailabilityInfo& a, const AvailabilityInfo& b) {
  if (a.edge_domain != b.edge_domain || a.service_class != b.service_class) {
    throw Error(ErrorCode::kMismatchedKey,
                "cannot rank " + a.edge_domain.str() + "/" +
                    std::to_string(a.service_class.id()) + " against " +
                    b.edge_domain.str() + "/" +
                    std::to_string(b.service_class.id()));
  }
  AiOrder order = ascending(a.avg_delay, b.avg_delay);
  if (order != AiOrder::kEqual) return order;
  order = ascending(a.max_delay, b.max_delay);
  if (order != AiOrder::kEqual) return order;
  order = ascending(a.loss, b.loss);
  if (order != AiOrder::kEqual) return order;
  order = ascending(a.jitter, b.jitter);
  if (order != AiOrder::kEqual) return order;
  order = ascending(b.bandwidth, a.bandwidth);  // more is better
  if (order != AiOrder::kEqual) return order;
  return ascending(a.origin_broker, b.origin_broker);
}

AvailabilityInfo compose(const TransitCost& t, const AvailabilityInfo& ai) {
  AvailabilityInfo out = ai;
  out.avg_delay = ai.avg_delay + t.avg_delay;
  out.max_delay = ai.max_delay + t.max_delay;
  out.jitter = ai.jitter + t.jitter;
  out.bandwidth = t.bottleneck.clamp(ai.bandwidth);
  out.loss = compose_loss(t.loss, ai.loss);
  return out;
}

TransitCost merge_costs(const TransitCost& t1, const TransitCost& t2) {
  TransitCost out;
  out.avg_delay = t1.avg_delay + t2.avg_delay;
  out.max_delay = t1.max_delay + t2.max_delay;
  out.jitter = t1.jitter + t2.jitter;
  out.bottleneck = min(t1.bottleneck, t2.bottleneck);
  out.loss = compose_loss(t1.loss, t2.loss);
  return out;
}

AvailabilityInfo origin_ai(const DomainId& edge, ServiceClass service_class,
                           const BrokerId& origin, SimTime valid_until) {
  AvailabilityInfo ai;
  ai.edge_domain = edge;
  ai.service_class = service_class;
  ai.bandwidth = kUnlimitedKbps;
  ai.origin_broker = origin;
  ai.valid_until = valid_until;
  return ai;
}

}  // namespace bbroker
