#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace poasim {

using Record = nlohmann::ordered_json;

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only event record, one JSON object per line. Every record starts
/// with "t" (simulated seconds) and "kind"; the remaining fields are fixed per
/// kind and written in a fixed order.
class MetricsTrace {
 public:
  void append(const Record& record) { lines_.push_back(record.dump()); }

  const std::vector<std::string>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }

  /// Parses every line. Throws TraceFormatError on a malformed line.
  std::vector<Record> records() const;

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  static MetricsTrace read(std::istream& in);
  static MetricsTrace load(const std::filesystem::path& path);

 private:
  std::vector<std::string> lines_;
};

}  // namespace poasim
