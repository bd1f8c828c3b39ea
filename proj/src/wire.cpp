#include "bbroker/wire.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace bbroker {

// ---------------------------------------------------------------------------
// Scalars

std::string format_loss(LossProb loss) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8e", loss);
  // buf is "d.dddddddde[+-]XX".
  const std::string s(buf);
  const std::size_t e = s.find('e');
  std::string digits = s.substr(0, 1) + s.substr(2, e - 2);
  const int exponent = std::stoi(s.substr(e + 1));
  if (digits == std::string(9, '0')) return "0.00000000";
  if (exponent >= 0) {
    const std::size_t int_len = static_cast<std::size_t>(exponent) + 1;
    if (int_len >= digits.size()) return digits + std::string(int_len - digits.size(), '0');
    return digits.substr(0, int_len) + "." + digits.substr(int_len);
  }
  return "0." + std::string(static_cast<std::size_t>(-exponent - 1), '0') + digits;
}

namespace {

std::string exact_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

// ---------------------------------------------------------------------------
// XML subset: elements and attributes, whitespace between markup.

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct XmlAttr {
  std::string name;
  std::string value;
  std::size_t offset = 0;
};

struct XmlElement {
  std::string name;
  std::vector<XmlAttr> attrs;
  std::vector<XmlElement> children;
  std::size_t offset = 0;
};

class XmlReader {
 public:
  explicit XmlReader(std::string_view doc) : doc_(doc) {}

  XmlElement document() {
    skip_ws();
    if (doc_.substr(pos_, 5) == "<?xml") {
      const std::size_t close = doc_.find("?>", pos_);
      if (close == std::string_view::npos) fail("unterminated XML declaration");
      pos_ = close + 2;
      skip_ws();
    }
    XmlElement root = element();
    skip_ws();
    if (pos_ != doc_.size()) fail("content after the root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParseError, "byte " + std::to_string(pos_) + ": " + what);
  }

  bool at_end() const { return pos_ >= doc_.size(); }
  char peek() const { return at_end() ? '\0' : doc_[pos_]; }

  void expect(char c) {
    if (at_end()) fail(std::string("unexpected end of document, expected '") + c + "'");
    if (doc_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!at_end() && (doc_[pos_] == ' ' || doc_[pos_] == '\t' || doc_[pos_] == '\n' ||
                         doc_[pos_] == '\r')) {
      ++pos_;
    }
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':';
  }

  std::string name() {
    const std::size_t start = pos_;
    while (!at_end() && name_char(doc_[pos_])) ++pos_;
    if (start == pos_) fail(at_end() ? "unexpected end of document" : "expected a name");
    return std::string(doc_.substr(start, pos_ - start));
  }

  std::string attr_value() {
    if (at_end()) fail("unexpected end of document");
    const char quote = doc_[pos_];
    if (quote != '"' && quote != '\'') fail("expected a quoted attribute value");
    ++pos_;
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated attribute value");
      const char c = doc_[pos_];
      if (c == quote) break;
      if (c == '<') fail("'<' inside attribute value");
      if (c == '&') {
        out += entity();
        continue;
      }
      out += c;
      ++pos_;
    }
    ++pos_;
    return out;
  }

  std::string entity() {
    const std::size_t semi = doc_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 10) fail("malformed entity");
    const std::string_view ref = doc_.substr(pos_ + 1, semi - pos_ - 1);
    std::string out;
    if (ref == "amp") out = "&";
    else if (ref == "lt") out = "<";
    else if (ref == "gt") out = ">";
    else if (ref == "quot") out = "\"";
    else if (ref == "apos") out = "'";
    else if (ref.size() > 1 && ref[0] == '#') {
      unsigned long code = 0;
      const bool hex = ref[1] == 'x';
      std::string_view num = ref.substr(hex ? 2 : 1);
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), code, hex ? 16 : 10);
      if (num.empty() || ec != std::errc() || ptr != num.data() + num.size() || code == 0 ||
          code > 0x10FFFF) {
        fail("malformed character reference");
      }
      if (code < 0x80) {
        out += static_cast<char>(code);
      } else if (code < 0x800) {
        out += static_cast<char>(0xC0 | (code >> 6));
        out += static_cast<char>(0x80 | (code & 0x3F));
      } else if (code < 0x10000) {
        out += static_cast<char>(0xE0 | (code >> 12));
        out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (code & 0x3F));
      } else {
        out += static_cast<char>(0xF0 | (code >> 18));
        out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (code & 0x3F));
      }
    } else {
      fail("unknown entity '" + std::string(ref) + "'");
    }
    pos_ = semi + 1;
    return out;
  }

  XmlElement element() {
    XmlElement el;
    el.offset = pos_;
    expect('<');
    el.name = name();
    while (true) {
      const bool had_ws = !at_end() && std::isspace(static_cast<unsigned char>(peek()));
      skip_ws();
      if (at_end()) fail("unexpected end of document inside <" + el.name + ">");
      if (peek() == '/') {
        ++pos_;
        expect('>');
        return el;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      if (!had_ws) fail("expected whitespace before attribute");
      XmlAttr attr;
      attr.offset = pos_;
      attr.name = name();
      skip_ws();
      expect('=');
      skip_ws();
      attr.value = attr_value();
      for (const XmlAttr& a : el.attrs) {
        if (a.name == attr.name) {
          pos_ = attr.offset;
          fail("duplicate attribute '" + attr.name + "'");
        }
      }
      el.attrs.push_back(std::move(attr));
    }
    while (true) {
      skip_ws();
      if (at_end()) fail("unexpected end of document, <" + el.name + "> not closed");
      if (peek() != '<') fail("unexpected character data");
      if (doc_.substr(pos_, 2) == "</") {
        pos_ += 2;
        const std::size_t at = pos_;
        const std::string closing = name();
        if (closing != el.name) {
          pos_ = at;
          fail("mismatched closing tag </" + closing + "> for <" + el.name + ">");
        }
        skip_ws();
        expect('>');
        return el;
      }
      el.children.push_back(element());
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

// Attribute access with schema checking.
class Attrs {
 public:
  Attrs(const XmlElement& el, std::vector<std::string> expected) : el_(el) {
    for (const XmlAttr& a : el.attrs) {
      if (std::find(expected.begin(), expected.end(), a.name) == expected.end()) {
        schema(a.offset, "unexpected attribute '" + a.name + "' on <" + el.name + ">");
      }
    }
    for (const std::string& name : expected) {
      if (!find(name)) schema(el.offset, "<" + el.name + "> lacks attribute '" + name + "'");
    }
  }

  [[noreturn]] static void schema(std::size_t offset, const std::string& what) {
    throw Error(ErrorCode::kSchemaError, "byte " + std::to_string(offset) + ": " + what);
  }

  std::string text(const std::string& name) const {
    const XmlAttr* a = find(name);
    if (a->value.empty()) schema(a->offset, "empty '" + name + "' on <" + el_.name + ">");
    return a->value;
  }

  std::int64_t integer(const std::string& name, std::int64_t lo, std::int64_t hi) const {
    const XmlAttr* a = find(name);
    auto v = to_int(a->value);
    if (!v || *v < lo || *v > hi) {
      schema(a->offset, "'" + name + "' value \"" + a->value + "\" out of range [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return *v;
  }

  double probability(const std::string& name) const {
    const XmlAttr* a = find(name);
    auto v = to_double(a->value);
    if (!v || *v < 0.0 || *v > 1.0) {
      schema(a->offset, "'" + name + "' value \"" + a->value + "\" is not in [0, 1]");
    }
    return *v;
  }

 private:
  const XmlAttr* find(const std::string& name) const {
    for (const XmlAttr& a : el_.attrs) {
      if (a.name == name) return &a;
    }
    return nullptr;
  }

  const XmlElement& el_;
};

constexpr std::int64_t kMaxInt = std::numeric_limits<std::int64_t>::max();

void no_children(const XmlElement& el) {
  if (!el.children.empty()) {
    Attrs::schema(el.children.front().offset, "<" + el.name + "> takes no children");
  }
}

const std::vector<std::string> kAiAttrs = {"edge",   "class", "bw_kbps", "avg_us",     "max_us",
                                           "jitter_us", "loss", "origin", "valid_until"};
const std::vector<std::string> kDsAttrs = {"dest", "class", "bw_kbps", "term", "origin"};

void encode_ai(std::string& out, const char* tag, const AvailabilityInfo& ai) {
  out += '<';
  out += tag;
  out += " edge=\"" + escape(ai.edge_domain.str()) + "\"";
  out += " class=\"" + std::to_string(ai.service_class.id()) + "\"";
  out += " bw_kbps=\"" + std::to_string(ai.bandwidth) + "\"";
  out += " avg_us=\"" + std::to_string(ai.avg_delay) + "\"";
  out += " max_us=\"" + std::to_string(ai.max_delay) + "\"";
  out += " jitter_us=\"" + std::to_string(ai.jitter) + "\"";
  out += " loss=\"" + format_loss(ai.loss) + "\"";
  out += " origin=\"" + escape(ai.origin_broker.str()) + "\"";
  out += " valid_until=\"" + std::to_string(ai.valid_until) + "\"/>";
}

template <typename Demand>
void encode_demand(std::string& out, const char* tag, const Demand& d) {
  out += '<';
  out += tag;
  out += " dest=\"" + escape(d.dest_edge.str()) + "\"";
  out += " class=\"" + std::to_string(d.service_class.id()) + "\"";
  out += " bw_kbps=\"" + std::to_string(d.bandwidth) + "\"";
  out += " term=\"" + std::to_string(d.term) + "\"";
  out += " origin=\"" + escape(d.origin.str()) + "\"";
  if (d.component_ids.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  for (const DemandId& id : d.component_ids) out += "<c id=\"" + escape(id) + "\"/>";
  out += "</";
  out += tag;
  out += '>';
}

AvailabilityInfo decode_ai(const XmlElement& el) {
  Attrs a(el, kAiAttrs);
  no_children(el);
  AvailabilityInfo ai;
  ai.edge_domain = DomainId(a.text("edge"));
  ai.service_class = ServiceClass(static_cast<int>(a.integer("class", 0, ServiceClass::kMaxId)));
  ai.bandwidth = a.integer("bw_kbps", 0, kMaxInt);
  ai.avg_delay = a.integer("avg_us", 0, kMaxInt);
  ai.max_delay = a.integer("max_us", 0, kMaxInt);
  ai.jitter = a.integer("jitter_us", 0, kMaxInt);
  ai.loss = a.probability("loss");
  ai.origin_broker = BrokerId(a.text("origin"));
  ai.valid_until = a.integer("valid_until", 0, kMaxInt);
  return ai;
}

template <typename Demand>
Demand decode_demand(const XmlElement& el) {
  Attrs a(el, kDsAttrs);
  Demand d;
  d.dest_edge = DomainId(a.text("dest"));
  d.service_class = ServiceClass(static_cast<int>(a.integer("class", 0, ServiceClass::kMaxId)));
  d.bandwidth = a.integer("bw_kbps", 0, kMaxInt);
  d.term = a.integer("term", 0, kMaxInt);
  d.origin = BrokerId(a.text("origin"));
  for (const XmlElement& c : el.children) {
    if (c.name != "c") Attrs::schema(c.offset, "unexpected <" + c.name + "> in <" + el.name + ">");
    Attrs ca(c, {"id"});
    no_children(c);
    d.component_ids.push_back(ca.text("id"));
  }
  return d;
}

}  // namespace

std::string encode_message(const InterDomainMessage& message) {
  std::string out = "<bb from=\"" + escape(message.sender.str()) + "\" to=\"" +
                    escape(message.receiver.str()) + "\">";
  std::visit(
      [&out](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AiMessage>) {
          encode_ai(out, "ai", p.ai);
        } else if constexpr (std::is_same_v<T, NewAiMessage>) {
          encode_ai(out, "newai", p.ai);
        } else if constexpr (std::is_same_v<T, AiDatabaseTransfer>) {
          if (p.ais.empty()) {
            out += "<aidb/>";
          } else {
            out += "<aidb>";
            for (const AvailabilityInfo& ai : p.ais) encode_ai(out, "ai", ai);
            out += "</aidb>";
          }
        } else if constexpr (std::is_same_v<T, AggregatedDs>) {
          encode_demand(out, "ds", p);
        } else {
          encode_demand(out, "reject", p);
        }
      },
      message.payload);
  out += "</bb>";
  return out;
}

InterDomainMessage decode_message(std::string_view document) {
  XmlElement root = XmlReader(document).document();
  if (root.name != "bb") Attrs::schema(root.offset, "root element must be <bb>, got <" + root.name + ">");
  Attrs ra(root, {"from", "to"});
  InterDomainMessage m;
  m.sender = BrokerId(ra.text("from"));
  m.receiver = BrokerId(ra.text("to"));
  if (root.children.size() != 1) {
    Attrs::schema(root.offset, "<bb> must hold exactly one message element, found " +
                                   std::to_string(root.children.size()));
  }
  const XmlElement& el = root.children.front();
  if (el.name == "ai") {
    m.payload = AiMessage{decode_ai(el)};
  } else if (el.name == "newai") {
    m.payload = NewAiMessage{decode_ai(el)};
  } else if (el.name == "aidb") {
    Attrs(el, {});
    AiDatabaseTransfer t;
    for (const XmlElement& c : el.children) {
      if (c.name != "ai") Attrs::schema(c.offset, "unexpected <" + c.name + "> in <aidb>");
      t.ais.push_back(decode_ai(c));
    }
    m.payload = std::move(t);
  } else if (el.name == "ds") {
    m.payload = decode_demand<AggregatedDs>(el);
  } else if (el.name == "reject") {
    m.payload = decode_demand<RejectionNotice>(el);
  } else {
    Attrs::schema(el.offset, "unknown message element <" + el.name + ">");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Line-oriented text formats

namespace {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what);
}

/// Splits into non-empty token lines; '#' starts a comment. The first line
/// must be `<magic> 1`.
std::vector<Line> tokenize(std::string_view text, const std::string& magic) {
  std::vector<Line> lines;
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  bool header = false;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    Line line{number, {}};
    for (std::string tok; ls >> tok;) line.tokens.push_back(tok);
    if (line.tokens.empty()) continue;
    if (!header) {
      if (line.tokens.size() != 2 || line.tokens[0] != magic) {
        parse_fail(number, "expected header '" + magic + " 1'");
      }
      if (line.tokens[1] != "1") parse_fail(number, "unsupported version " + line.tokens[1]);
      header = true;
      continue;
    }
    lines.push_back(std::move(line));
  }
  if (!header) parse_fail(number, "missing header '" + magic + " 1'");
  return lines;
}

/// key=value tokens from `first` on.
class KeyValues {
 public:
  KeyValues(const Line& line, std::size_t first, std::set<std::string> allowed)
      : line_(line.number) {
    for (std::size_t i = first; i < line.tokens.size(); ++i) {
      const std::string& tok = line.tokens[i];
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) parse_fail(line_, "expected key=value, got '" + tok + "'");
      std::string key = tok.substr(0, eq);
      if (!allowed.count(key)) parse_fail(line_, "unknown key '" + key + "'");
      if (!values_.emplace(key, tok.substr(eq + 1)).second) {
        parse_fail(line_, "duplicate key '" + key + "'");
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) parse_fail(line_, "missing " + key + "=");
    if (it->second.empty()) parse_fail(line_, "empty " + key + "=");
    return it->second;
  }

  std::int64_t integer(const std::string& key) const { return parse_int(line_, key, text(key)); }

  double real(const std::string& key) const {
    auto v = to_double(text(key));
    if (!v) parse_fail(line_, key + "=" + text(key) + " is not a number");
    return *v;
  }

  static std::int64_t parse_int(int line, const std::string& what, const std::string& s) {
    auto v = to_int(s);
    if (!v) parse_fail(line, what + " '" + s + "' is not an integer");
    return *v;
  }

 private:
  int line_;
  std::map<std::string, std::string> values_;
};

void arity(const Line& line, std::size_t min, std::size_t max, const std::string& usage) {
  if (line.tokens.size() < min || line.tokens.size() > max) {
    parse_fail(line.number, "expected '" + usage + "'");
  }
}

ServiceClass parse_class(int line, const std::string& s) {
  const std::int64_t v = KeyValues::parse_int(line, "class", s);
  if (v < 0 || v > ServiceClass::kMaxId) {
    parse_fail(line, "class " + s + " outside 0.." + std::to_string(ServiceClass::kMaxId));
  }
  return ServiceClass(static_cast<int>(v));
}

}  // namespace

NetworkTopology parse_topology(std::string_view text) {
  std::vector<Domain> domains;
  std::vector<Router> routers;
  std::vector<Link> links;
  for (const Line& line : tokenize(text, "bbtopo")) {
    const std::string& kw = line.tokens[0];
    if (kw == "domain") {
      arity(line, 3, 4, "domain <id> transit broker=<id> | domain <id> edge classes=<c,..>");
      Domain d;
      d.id = DomainId(line.tokens[1]);
      if (line.tokens[2] == "transit") {
        d.kind = DomainKind::kTransit;
        KeyValues kv(line, 3, {"broker"});
        d.broker = BrokerId(kv.text("broker"));
      } else if (line.tokens[2] == "edge") {
        d.kind = DomainKind::kEdge;
        KeyValues kv(line, 3, {"classes"});
        std::istringstream cs(kv.text("classes"));
        for (std::string c; std::getline(cs, c, ',');) {
          d.classes.push_back(parse_class(line.number, c));
        }
      } else {
        parse_fail(line.number, "domain kind must be transit or edge, got '" + line.tokens[2] + "'");
      }
      domains.push_back(std::move(d));
    } else if (kw == "router") {
      arity(line, 3, 3, "router <id> <domain>");
      routers.push_back(Router{RouterId(line.tokens[1]), DomainId(line.tokens[2])});
    } else if (kw == "link") {
      arity(line, 5, 10, "link <id> <router> <router> intra|inter capacity= avg= max= loss= [jitter=]");
      Link l;
      l.id = LinkId(line.tokens[1]);
      l.a = RouterId(line.tokens[2]);
      l.b = RouterId(line.tokens[3]);
      if (line.tokens[4] == "intra") {
        l.kind = LinkKind::kIntra;
      } else if (line.tokens[4] == "inter") {
        l.kind = LinkKind::kInter;
      } else {
        parse_fail(line.number, "link kind must be intra or inter, got '" + line.tokens[4] + "'");
      }
      KeyValues kv(line, 5, {"capacity", "avg", "max", "loss", "jitter"});
      l.capacity = kv.integer("capacity");
      l.avg_delay = kv.integer("avg");
      l.max_delay = kv.integer("max");
      l.loss = kv.real("loss");
      if (kv.has("jitter")) l.jitter = kv.integer("jitter");
      links.push_back(std::move(l));
    } else {
      parse_fail(line.number, "unknown statement '" + kw + "'");
    }
  }
  NetworkTopology topo(std::move(domains), std::move(routers), std::move(links));
  const auto violations = validate(topo);
  if (!violations.empty()) {
    std::string msg;
    for (const Violation& v : violations) msg += "\n  " + v.subject + ": " + v.message;
    throw Error(ErrorCode::kValidationError, "topology is invalid:" + msg);
  }
  return topo;
}

std::string write_topology(const NetworkTopology& topology) {
  std::ostringstream os;
  os << "bbtopo 1\n";
  for (const Domain& d : topology.domains()) {
    os << "domain " << d.id << ' ' << to_string(d.kind);
    if (d.kind == DomainKind::kTransit) {
      os << " broker=" << (d.broker ? d.broker->str() : std::string());
    } else {
      os << " classes=";
      for (std::size_t i = 0; i < d.classes.size(); ++i) {
        os << (i ? "," : "") << d.classes[i].id();
      }
    }
    os << '\n';
  }
  for (const Router& r : topology.routers()) os << "router " << r.id << ' ' << r.domain << '\n';
  for (const Link& l : topology.links()) {
    os << "link " << l.id << ' ' << l.a << ' ' << l.b << ' ' << to_string(l.kind)
       << " capacity=" << l.capacity << " avg=" << l.avg_delay << " max=" << l.max_delay
       << " loss=" << exact_double(l.loss);
    if (l.jitter != 0) os << " jitter=" << l.jitter;
    os << '\n';
  }
  return os.str();
}

namespace {

StandingDemand parse_demand(const Line& line, std::size_t first) {
  KeyValues kv(line, first, {"src", "dest", "class", "bw"});
  StandingDemand d;
  d.src_edge = DomainId(kv.text("src"));
  d.dest_edge = DomainId(kv.text("dest"));
  d.service_class = parse_class(line.number, kv.text("class"));
  d.bandwidth = kv.integer("bw");
  return d;
}

std::int64_t single_int(const Line& line, const std::string& usage) {
  arity(line, 2, 2, usage);
  return KeyValues::parse_int(line.number, line.tokens[0], line.tokens[1]);
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::set<std::string> seen;
  for (const Line& line : tokenize(text, "bbscen")) {
    const std::string& kw = line.tokens[0];
    const bool once = kw == "term_length" || kw == "latency" || kw == "refresh_interval" ||
                      kw == "validity_window" || kw == "hold_terms";
    if (once && !seen.insert(kw).second) parse_fail(line.number, "duplicate " + kw);
    if (kw == "term_length") {
      s.term_length = single_int(line, "term_length <us>");
    } else if (kw == "latency") {
      s.latency = single_int(line, "latency <us>");
    } else if (kw == "refresh_interval") {
      s.refresh_interval = single_int(line, "refresh_interval <us>");
    } else if (kw == "validity_window") {
      s.validity_window = single_int(line, "validity_window <us>");
    } else if (kw == "hold_terms") {
      s.hold_terms = static_cast<int>(single_int(line, "hold_terms <n>"));
    } else if (kw == "link_latency") {
      arity(line, 4, 4, "link_latency <broker> <broker> <us>");
      auto key = std::make_pair(BrokerId(line.tokens[1]), BrokerId(line.tokens[2]));
      if (key.second < key.first) std::swap(key.first, key.second);
      if (!s.pair_latency.emplace(key, KeyValues::parse_int(line.number, "latency", line.tokens[3]))
               .second) {
        parse_fail(line.number, "duplicate link_latency for " + key.first.str() + " " +
                                    key.second.str());
      }
    } else if (kw == "phase") {
      arity(line, 3, 3, "phase <broker> <offset us>");
      if (!s.phase_offsets
               .emplace(BrokerId(line.tokens[1]),
                        KeyValues::parse_int(line.number, "offset", line.tokens[2]))
               .second) {
        parse_fail(line.number, "duplicate phase for " + line.tokens[1]);
      }
    } else if (kw == "demand") {
      s.demands.push_back(parse_demand(line, 1));
    } else if (kw == "at") {
      if (line.tokens.size() < 3) parse_fail(line.number, "expected 'at <time> <action> ...'");
      ScenarioAction a;
      a.line = line.number;
      a.time = KeyValues::parse_int(line.number, "time", line.tokens[1]);
      const std::string& what = line.tokens[2];
      if (what == "join" || what == "blackout") {
        arity(line, 4, 4, "at <time> " + what + " <broker>");
        a.kind = what == "join" ? ScenarioAction::Kind::kJoin : ScenarioAction::Kind::kBlackout;
        a.broker = BrokerId(line.tokens[3]);
      } else if (what == "demand") {
        a.kind = ScenarioAction::Kind::kDemand;
        a.demand = parse_demand(line, 3);
      } else if (what == "fault") {
        arity(line, 6, 6, "at <time> fault <broker> <link> <kbps>");
        a.kind = ScenarioAction::Kind::kFault;
        a.broker = BrokerId(line.tokens[3]);
        a.link = LinkId(line.tokens[4]);
        a.amount = KeyValues::parse_int(line.number, "amount", line.tokens[5]);
      } else {
        parse_fail(line.number, "unknown action '" + what + "'");
      }
      s.actions.push_back(std::move(a));
    } else {
      parse_fail(line.number, "unknown statement '" + kw + "'");
    }
  }
  return s;
}

std::string write_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "bbscen 1\n";
  os << "term_length " << s.term_length << '\n';
  if (s.latency) os << "latency " << *s.latency << '\n';
  if (s.refresh_interval) os << "refresh_interval " << *s.refresh_interval << '\n';
  if (s.validity_window) os << "validity_window " << *s.validity_window << '\n';
  os << "hold_terms " << s.hold_terms << '\n';
  for (const auto& [pair, lat] : s.pair_latency) {
    os << "link_latency " << pair.first << ' ' << pair.second << ' ' << lat << '\n';
  }
  for (const auto& [b, off] : s.phase_offsets) os << "phase " << b << ' ' << off << '\n';
  auto demand = [&os](const StandingDemand& d) {
    os << "src=" << d.src_edge << " dest=" << d.dest_edge
       << " class=" << d.service_class.id() << " bw=" << d.bandwidth;
  };
  for (const StandingDemand& d : s.demands) {
    os << "demand ";
    demand(d);
    os << '\n';
  }
  for (const ScenarioAction& a : s.actions) {
    os << "at " << a.time << ' ' << to_string(a.kind);
    switch (a.kind) {
      case ScenarioAction::Kind::kJoin:
      case ScenarioAction::Kind::kBlackout:
        os << ' ' << a.broker;
        break;
      case ScenarioAction::Kind::kDemand:
        os << ' ';
        demand(a.demand);
        break;
      case ScenarioAction::Kind::kFault:
        os << ' ' << a.broker << ' ' << a.link << ' ' << a.amount;
        break;
    }
    os << '\n';
  }
  return os.str();
}

std::string write_route_table(const RouteTable& table) {
  std::ostringstream os;
  os << "bbroutes 1\n";
  for (const auto& [key, entry] : table) {
    const AvailabilityInfo& ai = entry.ai;
    os << "route " << key.broker << ' ' << key.edge_domain << ' ' << key.service_class.id()
       << " bw=" << ai.bandwidth << " avg=" << ai.avg_delay << " max=" << ai.max_delay
       << " jitter=" << ai.jitter << " loss=" << exact_double(ai.loss)
       << " origin=" << ai.origin_broker << " next=" << entry.next_hop.str() << '\n';
  }
  return os.str();
}

RouteTable parse_route_table(std::string_view text) {
  RouteTable table;
  for (const Line& line : tokenize(text, "bbroutes")) {
    if (line.tokens[0] != "route") parse_fail(line.number, "unknown statement '" + line.tokens[0] + "'");
    arity(line, 11, 11,
          "route <broker> <edge> <class> bw= avg= max= jitter= loss= origin= next=");
    KeyValues kv(line, 4, {"bw", "avg", "max", "jitter", "loss", "origin", "next"});
    RouteKey key{BrokerId(line.tokens[1]), DomainId(line.tokens[2]),
                 parse_class(line.number, line.tokens[3])};
    RouteEntry e;
    e.ai.edge_domain = key.edge_domain;
    e.ai.service_class = key.service_class;
    e.ai.bandwidth = kv.integer("bw");
    e.ai.avg_delay = kv.integer("avg");
    e.ai.max_delay = kv.integer("max");
    e.ai.jitter = kv.integer("jitter");
    e.ai.loss = kv.real("loss");
    e.ai.origin_broker = BrokerId(kv.text("origin"));
    const std::string& next = kv.text("next");
    e.next_hop = next == "local" ? NextHop::local() : NextHop::via(BrokerId(next));
    if (!table.emplace(key, e).second) {
      parse_fail(line.number, "duplicate route for " + key.broker.str() + " " +
                                  key.edge_domain.str() + " " + line.tokens[3]);
    }
  }
  return table;
}

std::string write_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << "term,broker,time";
  for (int k = 0; k < kMessageKinds; ++k) {
    os << ",sent_" << to_string(static_cast<MessageKind>(k));
  }
  os << ",ai_db_size,admitted_kbps_by_class,rejected_kbps_by_class,link_utilization,stable\n";
  auto by_class = [&os](const std::map<int, Kbps>& m) {
    if (m.empty()) os << '-';
    bool first = true;
    for (const auto& [c, v] : m) {
      os << (first ? "" : ";") << c << ':' << v;
      first = false;
    }
  };
  for (const MetricsRow& r : rows) {
    os << r.term << ',' << r.broker << ',' << r.time;
    for (std::uint64_t n : r.sent) os << ',' << n;
    os << ',' << r.ai_db_size << ',';
    by_class(r.admitted_by_class);
    os << ',';
    by_class(r.rejected_by_class);
    os << ',';
    if (r.utilization.empty()) os << '-';
    bool first = true;
    for (const auto& [link, u] : r.utilization) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", u);
      os << (first ? "" : ";") << link << ':' << buf;
      first = false;
    }
    os << ',' << (r.stable ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string write_archives(const std::map<BrokerId, BrokerState>& brokers) {
  std::ostringstream os;
  for (const auto& [id, state] : brokers) {
    for (const ArchiveRecord& r : state.demand.archive.records()) {
      os << id << ' ' << r.to_line() << '\n';
    }
  }
  return os.str();
}

std::string write_filters(const std::map<BrokerId, BrokerState>& brokers) {
  std::ostringstream os;
  for (const auto& [id, state] : brokers) {
    for (const auto& [router, entries] : state.filters) {
      for (const FilterEntry& f : entries) {
        os << id << ' ' << router << ' ' << to_string(f.key) << " admitted_kbps=" << f.admitted
           << " next=" << (f.next_hop ? f.next_hop->str() : "-") << '\n';
      }
    }
  }
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::kInvalidArgument, "write failed for " + path);
}

}  // namespace bbroker
