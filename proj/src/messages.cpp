#include "bbroker/messages.hpp"

namespace bbroker {

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kAi: return "ai";
    case MessageKind::kNewAi: return "newai";
    case MessageKind::kAiDb: return "aidb";
    case MessageKind::kDs: return "ds";
    case MessageKind::kReject: return "reject";
  }
  return "?";
}

}  // namespace bbroker
