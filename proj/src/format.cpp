#include "ppv/format.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ppv {

using nlohmann::json;
using nlohmann::ordered_json;

ParseError::ParseError(Kind kind, std::string location, const std::string& message)
    : std::runtime_error(message + (location.empty() ? "" : " (at " + location + ")")),
      kind_(kind),
      location_(std::move(location)) {}

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& msg) {
  throw ParseError(ParseError::Kind::Schema, where, msg);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string token(const json& j, const std::string& where) {
  if (!j.is_string()) schema(where, "expected a string");
  auto s = j.get<std::string>();
  if (s.empty()) schema(where, "names must be nonempty");
  return s;
}

std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) {
    if (j.is_number()) schema(where, "expected an integer within 64-bit range");
    schema(where, "expected an integer");
  }
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > std::uint64_t(INT64_MAX))
    schema(where, "integer exceeds 64-bit range");
  return j.get<std::int64_t>();
}

std::vector<std::string> token_list(const json& j, const std::string& where) {
  if (!j.is_array()) schema(where, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(token(j[i], where + "/" + std::to_string(i)));
  return out;
}

std::map<std::string, std::int64_t> coeff_map(const json& j, const std::string& where) {
  if (!j.is_object()) schema(where, "expected an object of coefficients");
  std::map<std::string, std::int64_t> out;
  for (const auto& [k, v] : j.items()) out[k] = integer(v, where + "/" + k);
  return out;
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Predicate predicate_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1)
    schema(where, "predicate node must be an object with exactly one of threshold, remainder, not, and, or");
  const std::string key = j.begin().key();
  const json& body = j.begin().value();
  const std::string at = where + "/" + key;
  if (key == "threshold") {
    if (!body.is_object()) schema(at, "expected an object");
    return Predicate::threshold(coeff_map(field(body, "coeffs", at), at + "/coeffs"),
                                integer(field(body, "c", at), at + "/c"));
  }
  if (key == "remainder") {
    if (!body.is_object()) schema(at, "expected an object");
    auto m = integer(field(body, "m", at), at + "/m");
    if (m < 2) schema(at + "/m", "modulus must be at least 2");
    return Predicate::remainder(coeff_map(field(body, "coeffs", at), at + "/coeffs"),
                                integer(field(body, "c", at), at + "/c"), m);
  }
  if (key == "not") return Predicate::negation(predicate_from_json(body, at));
  if (key == "and" || key == "or") {
    if (!body.is_array() || body.size() != 2) schema(at, "expected an array of two predicates");
    auto a = predicate_from_json(body[0], at + "/0");
    auto b = predicate_from_json(body[1], at + "/1");
    return key == "and" ? Predicate::conjunction(std::move(a), std::move(b))
                        : Predicate::disjunction(std::move(a), std::move(b));
  }
  schema(where, "unknown predicate node '" + key + "'");
}

ordered_json predicate_to_json(const Predicate& pd) {
  ordered_json out;
  switch (pd.kind) {
    case Predicate::Kind::Threshold:
      out["threshold"] = ordered_json{{"coeffs", pd.coeffs}, {"c", pd.c}};
      break;
    case Predicate::Kind::Remainder:
      out["remainder"] = ordered_json{{"coeffs", pd.coeffs}, {"c", pd.c}, {"m", pd.m}};
      break;
    case Predicate::Kind::Not:
      out["not"] = predicate_to_json(pd.operands.at(0));
      break;
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      out[pd.kind == Predicate::Kind::And ? "and" : "or"] =
          ordered_json::array({predicate_to_json(pd.operands.at(0)), predicate_to_json(pd.operands.at(1))});
      break;
  }
  return out;
}

ProtocolDocument parse_protocol(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(ParseError::Kind::Syntax, std::to_string(line) + ":" + std::to_string(col),
                     "malformed JSON");
  }
  if (!j.is_object()) schema("", "protocol document must be a JSON object");

  ProtocolDocument doc;
  auto& spec = doc.protocol;
  spec.states = token_list(field(j, "states", ""), "/states");

  const json& ts = field(j, "transitions", "");
  if (!ts.is_array()) schema("/transitions", "expected an array");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::string at = "/transitions/" + std::to_string(i);
    const json& t = ts[i];
    if (!t.is_object()) schema(at, "expected an object");
    ProtocolSpec::RawTransition raw;
    if (auto it = t.find("name"); it != t.end()) raw.name = token(*it, at + "/name");
    raw.pre = token_list(field(t, "pre", at), at + "/pre");
    raw.post = token_list(field(t, "post", at), at + "/post");
    if (raw.pre.size() != 2) schema(at + "/pre", "expected exactly 2 states, got " + std::to_string(raw.pre.size()));
    if (raw.post.size() != 2)
      schema(at + "/post", "expected exactly 2 states, got " + std::to_string(raw.post.size()));
    spec.transitions.push_back(std::move(raw));
  }

  spec.alphabet = token_list(field(j, "alphabet", ""), "/alphabet");

  const json& in = field(j, "input", "");
  if (!in.is_object()) schema("/input", "expected an object");
  for (const auto& [k, v] : in.items()) spec.input[k] = token(v, "/input/" + k);

  const json& out = field(j, "output", "");
  if (!out.is_object()) schema("/output", "expected an object");
  for (const auto& [k, v] : out.items()) {
    auto o = integer(v, "/output/" + k);
    if (o != 0 && o != 1) schema("/output/" + k, "output must be 0 or 1");
    spec.output[k] = int(o);
  }

  if (auto it = j.find("predicate"); it != j.end()) doc.predicate = predicate_from_json(*it);

  try {
    normalize(spec);
  } catch (const ProtocolError& e) {
    throw ParseError(ParseError::Kind::Semantic, e.element(), e.what());
  }
  if (doc.predicate) {
    std::set<std::string> alphabet(spec.alphabet.begin(), spec.alphabet.end());
    for (const auto& s : predicate_symbols(*doc.predicate))
      if (!alphabet.count(s))
        throw ParseError(ParseError::Kind::Semantic, "/predicate",
                         "predicate coefficient '" + s + "' is not an input symbol");
  }
  return doc;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProtocolDocument read_protocol_file(const std::string& path) { return parse_protocol(read_text_file(path)); }

std::string serialize_protocol(const ProtocolDocument& doc) {
  const auto& spec = doc.protocol;
  ordered_json j;
  j["states"] = spec.states;
  j["transitions"] = ordered_json::array();
  for (const auto& t : spec.transitions) {
    ordered_json jt;
    if (t.name) jt["name"] = *t.name;
    jt["pre"] = t.pre;
    jt["post"] = t.post;
    j["transitions"].push_back(std::move(jt));
  }
  j["alphabet"] = spec.alphabet;
  j["input"] = spec.input;
  j["output"] = spec.output;
  if (doc.predicate) j["predicate"] = predicate_to_json(*doc.predicate);
  return j.dump(2) + "\n";
}

ProtocolDocument to_document(const Protocol& p, std::optional<Predicate> predicate) {
  return {p.to_spec(), std::move(predicate)};
}

}  // namespace ppv
