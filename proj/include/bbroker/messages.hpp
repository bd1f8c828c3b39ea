// Inter-domain messages exchanged between neighboring brokers.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bbroker/qos.hpp"
#include "bbroker/types.hpp"

namespace bbroker {

using DemandId = std::string;

struct AiMessage {
  AvailabilityInfo ai;
  friend bool operator==(const AiMessage&, const AiMessage&) = default;
};

/// Header-flagged AI sent while a broker stands up. The receiver answers it
/// with its whole database.
struct NewAiMessage {
  AvailabilityInfo ai;
  friend bool operator==(const NewAiMessage&, const NewAiMessage&) = default;
};

struct AiDatabaseTransfer {
  std::vector<AvailabilityInfo> ais;
  friend bool operator==(const AiDatabaseTransfer&,
                         const AiDatabaseTransfer&) = default;
};

/// Destination-aggregated demand forwarded toward the next hop.
struct AggregatedDs {
  DomainId dest_edge;
  ServiceClass service_class;
  Kbps bandwidth = 0;
  TermIndex term = 0;
  BrokerId origin;
  std::vector<DemandId> component_ids;
  friend bool operator==(const AggregatedDs&, const AggregatedDs&) = default;
};

/// Sent upstream when some broker could not admit the listed demands.
struct RejectionNotice {
  DomainId dest_edge;
  ServiceClass service_class;
  Kbps bandwidth = 0;
  TermIndex term = 0;
  BrokerId origin;  // the rejecting broker
  std::vector<DemandId> component_ids;
  friend bool operator==(const RejectionNotice&,
                         const RejectionNotice&) = default;
};

using MessagePayload = std::variant<AiMessage, NewAiMessage, AiDatabaseTransfer,
                                    AggregatedDs, RejectionNotice>;

enum class MessageKind { kAi, kNewAi, kAiDb, kDs, kReject };
inline constexpr int kMessageKinds = 5;

const char* to_string(MessageKind kind);

struct InterDomainMessage {
  BrokerId sender;
  BrokerId receiver;
  MessagePayload payload;

  MessageKind kind() const { return static_cast<MessageKind>(payload.index()); }
  /// True for the AI protocol (Ai, NewAi, database transfer).
  bool is_availability() const { return kind() <= MessageKind::kAiDb; }

  friend bool operator==(const InterDomainMessage&,
                         const InterDomainMessage&) = default;
};

}  // namespace bbroker
