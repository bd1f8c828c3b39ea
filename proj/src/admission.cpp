#include "bbroker/admission.hpp"

#include <algorithm>
#include <set>

namespace bbroker {

std::string to_string(const AggregateKey& key) {
  return key.ingress.str() + ">" + key.dest_edge.str() + "/c" +
         std::to_string(key.service_class.id());
}

ReservationLedger::ReservationLedger(std::map<LinkId, Kbps> capacities)
    : capacity_(std::move(capacities)) {}

Kbps ReservationLedger::capacity(const LinkId& link) const {
  auto it = capacity_.find(link);
  if (it == capacity_.end()) {
    throw Error(ErrorCode::kUnknownLink, "link " + link.str() + " not in ledger");
  }
  return it->second;
}

Kbps ReservationLedger::reserved_total(const LinkId& link) const {
  auto it = reserved_.find(link);
  if (it == reserved_.end()) return 0;
  Kbps sum = 0;
  for (const auto& [key, kbps] : it->second) sum += kbps;
  return sum;
}

Kbps ReservationLedger::reserved(const LinkId& link, const AggregateKey& key) const {
  auto it = reserved_.find(link);
  if (it == reserved_.end()) return 0;
  auto kt = it->second.find(key);
  return kt == it->second.end() ? 0 : kt->second;
}

Kbps ReservationLedger::free_capacity(const LinkId& link) const {
  return capacity(link) - reserved_total(link);
}

AdmitResult ReservationLedger::admit(std::span<const LinkId> path,
                                     const AggregateKey& key, Kbps target,
                                     TermIndex term) {
  if (target < 0) {
    throw Error(ErrorCode::kNegativeTarget,
                to_string(key) + " target " + std::to_string(target));
  }
  for (const LinkId& l : path) {
    if (!has_link(l)) {
      throw Error(ErrorCode::kUnknownLink, "link " + l.str() + " not in ledger");
    }
  }
  for (const LinkId& l : path) {
    const Kbps delta = target - reserved(l, key);
    if (delta > 0 && delta > free_capacity(l)) return Rejected{l};
  }
  LedgerDecision d;
  d.kind = LedgerDecision::Kind::kAdmit;
  d.key = key;
  d.target = target;
  d.path.assign(path.begin(), path.end());
  d.term = term;
  apply(d);
  log_.push_back(std::move(d));
  return Admitted{};
}

std::vector<AggregateKey> ReservationLedger::release_stale(TermIndex current_term,
                                                           int hold_terms) {
  std::vector<AggregateKey> released;
  for (const auto& [key, res] : keys_) {
    if (res.last_refreshed_term <= current_term - hold_terms) released.push_back(key);
  }
  for (const AggregateKey& key : released) {
    LedgerDecision d;
    d.kind = LedgerDecision::Kind::kRelease;
    d.key = key;
    d.term = current_term;
    apply(d);
    log_.push_back(std::move(d));
  }
  return released;
}

void ReservationLedger::erase_key(const AggregateKey& key) {
  auto kt = keys_.find(key);
  if (kt == keys_.end()) return;
  for (const LinkId& l : kt->second.path) {
    auto it = reserved_.find(l);
    if (it == reserved_.end()) continue;
    it->second.erase(key);
    if (it->second.empty()) reserved_.erase(it);
  }
  keys_.erase(kt);
}

void ReservationLedger::apply(const LedgerDecision& d) {
  erase_key(d.key);
  if (d.kind == LedgerDecision::Kind::kRelease || d.target == 0) return;
  std::vector<LinkId> path;
  std::set<LinkId> seen;
  for (const LinkId& l : d.path) {
    if (seen.insert(l).second) path.push_back(l);
  }
  for (const LinkId& l : path) reserved_[l][d.key] = d.target;
  keys_[d.key] = KeyReservation{d.target, std::move(path), d.term};
}

ReservationLedger ReservationLedger::replay(const std::map<LinkId, Kbps>& capacities,
                                            const std::vector<LedgerDecision>& log) {
  ReservationLedger ledger(capacities);
  for (const LedgerDecision& d : log) ledger.apply(d);
  return ledger;
}

ReservationLedger ReservationLedger::snapshot() const {
  ReservationLedger copy(capacity_);
  copy.reserved_ = reserved_;
  copy.keys_ = keys_;
  return copy;
}

bool ReservationLedger::same_state(const ReservationLedger& other) const {
  if (capacity_ != other.capacity_ || reserved_ != other.reserved_ ||
      keys_.size() != other.keys_.size()) {
    return false;
  }
  return std::equal(keys_.begin(), keys_.end(), other.keys_.begin(),
                    [](const auto& a, const auto& b) {
                      return a.first == b.first && a.second.target == b.second.target &&
                             a.second.path == b.second.path;
                    });
}

void ReservationLedger::inject_unchecked(const LinkId& link, const AggregateKey& key,
                                         Kbps amount) {
  reserved_[link][key] += amount;
}

std::vector<std::string> ReservationLedger::check_conservation() const {
  std::vector<std::string> out;
  for (const auto& [link, by_key] : reserved_) {
    auto cap = capacity_.find(link);
    if (cap == capacity_.end()) {
      out.push_back("reservation on unknown link " + link.str());
      continue;
    }
    Kbps sum = 0;
    for (const auto& [key, kbps] : by_key) {
      if (kbps <= 0) {
        out.push_back("non-positive entry " + std::to_string(kbps) + " for " +
                      to_string(key) + " on " + link.str());
      }
      sum += kbps;
    }
    if (sum > cap->second) {
      out.push_back("admission safety: link " + link.str() + " reserved " +
                    std::to_string(sum) + " > capacity " +
                    std::to_string(cap->second));
    }
  }
  return out;
}

FilterTable build_filter_table(const ReservationLedger& ledger,
                               const RouteLookup& routes) {
  FilterTable table;
  for (const auto& [key, res] : ledger.keys()) {
    if (res.target <= 0) continue;
    table[key.ingress].push_back(
        FilterEntry{key, res.target, routes(key.dest_edge, key.service_class)});
  }
  return table;
}

}  // namespace bbroker
