// Core identifiers, units and the error type shared by every module.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace bbroker {

/// Opaque string identifier. The tag keeps domain, broker, router and link
/// ids from being mixed up at compile time.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Id& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

using DomainId = Id<struct DomainTag>;
using BrokerId = Id<struct BrokerTag>;
using RouterId = Id<struct RouterTag>;
using LinkId = Id<struct LinkTag>;

using Kbps = std::int64_t;
using Micros = std::int64_t;
using SimTime = std::int64_t;  // microseconds since run start
using TermIndex = std::int64_t;
using LossProb = double;

inline constexpr SimTime kForever = std::numeric_limits<SimTime>::max();

/// DiffServ behavior class; the DSCP is six bits wide, so 0..63.
class ServiceClass {
 public:
  static constexpr int kMaxId = 63;

  ServiceClass() = default;
  explicit ServiceClass(int id);

  int id() const { return id_; }

  friend auto operator<=>(const ServiceClass&, const ServiceClass&) = default;
  friend bool operator==(const ServiceClass&, const ServiceClass&) = default;

 private:
  int id_ = 0;
};

enum class ErrorCode {
  kNoPath,
  kMismatchedKey,
  kStaleMessage,
  kUnknownDestination,
  kNoLocalEdgeDomains,
  kUnknownLink,
  kNegativeTarget,
  kNotLocalSource,
  kDuplicateId,
  kUnknownOrigin,
  kParseError,
  kSchemaError,
  kValidationError,
  kScenarioError,
  kInvalidArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bbroker

template <typename Tag>
struct std::hash<bbroker::Id<Tag>> {
  std::size_t operator()(const bbroker::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
