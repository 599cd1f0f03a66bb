#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ppv/predicate.hpp"
#include "ppv/protocol.hpp"

namespace ppv {

/// Contents of a `.pp.json` file.
struct ProtocolDocument {
  ProtocolSpec protocol;
  std::optional<Predicate> predicate;

  friend bool operator==(const ProtocolDocument&, const ProtocolDocument&) = default;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Schema, Semantic };
  ParseError(Kind kind, std::string location, const std::string& message);
  Kind kind() const { return kind_; }
  /// "line:column" for syntax errors, a JSON pointer otherwise.
  const std::string& location() const { return location_; }

 private:
  Kind kind_;
  std::string location_;
};

/// Parses and validates a protocol document. Semantic validation runs the
/// full normalization, so a successful parse always yields a usable protocol.
ProtocolDocument parse_protocol(std::string_view text);
ProtocolDocument read_protocol_file(const std::string& path);

std::string serialize_protocol(const ProtocolDocument& doc);
ProtocolDocument to_document(const Protocol& p, std::optional<Predicate> predicate = std::nullopt);

Predicate predicate_from_json(const nlohmann::json& j, const std::string& where = "/predicate");
nlohmann::ordered_json predicate_to_json(const Predicate& pd);

/// Reads a whole file; throws std::runtime_error if it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace ppv
