#pragma once

// Line-oriented helpers for the newline-delimited JSON files.

#include <cstddef>
#include <functional>
#include <istream>
#include <string>

#include <json.hpp>

#include "cohgraph/error.hpp"

namespace cohgraph::detail {

// Calls `fn(record, line_number)` for every non-blank line. A provenance
// header (an object with a "config" key and no "id") is skipped. JSON syntax
// errors and JSON access errors thrown by `fn` surface as ParseError with the
// line number.
inline void for_each_record(std::istream& in, const std::string& source,
                            const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (record.is_object() && record.contains("config") && !record.contains("id")) continue;
    try {
      fn(record, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
}

inline std::string dump_line(const nlohmann::json& record) {
  return record.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

}  // namespace cohgraph::detail
