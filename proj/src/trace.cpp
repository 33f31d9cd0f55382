#include "poasim/trace.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace poasim {

std::vector<Record> MetricsTrace::records() const {
  std::vector<Record> out;
  out.reserve(lines_.size());
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    try {
      out.push_back(Record::parse(lines_[i]));
    } catch (const nlohmann::json::parse_error& e) {
      throw TraceFormatError("trace line " + std::to_string(i + 1) + ": " + e.what());
    }
    if (!out.back().is_object() || !out.back().contains("t") || !out.back().contains("kind"))
      throw TraceFormatError("trace line " + std::to_string(i + 1) + ": record needs \"t\" and \"kind\"");
  }
  return out;
}

void MetricsTrace::write(std::ostream& out) const {
  for (const auto& line : lines_) out << line << '\n';
}

void MetricsTrace::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  write(out);
  if (!out) throw std::ios_base::failure("short write on " + path.string());
}

MetricsTrace MetricsTrace::read(std::istream& in) {
  MetricsTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) trace.lines_.push_back(line);
  }
  return trace;
}

MetricsTrace MetricsTrace::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open trace " + path.string());
  return read(in);
}

}  // namespace poasim
