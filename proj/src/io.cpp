#include "ssc/io.hpp"

#include <charconv>
#include <cstdlib>
#include <stdexcept>

namespace ssc::io {

std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& file) : out_(file) {
  if (!out_) throw std::runtime_error("cannot write " + file.string());
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
  for (auto n : names) field(n);
  out_ << '\n';
  first_ = true;
}

CsvWriter& CsvWriter::field(std::string_view s) {
  if (!first_) out_ << ',';
  first_ = false;
  if (s.find_first_of(",\"\n") == std::string_view::npos) {
    out_ << s;
  } else {
    out_ << '"';
    for (char c : s) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  return *this;
}

CsvWriter& CsvWriter::field(double x) { return field(std::string_view(format_double(x))); }
CsvWriter& CsvWriter::field(std::uint64_t x) { return field(std::string_view(std::to_string(x))); }
CsvWriter& CsvWriter::field(std::int64_t x) { return field(std::string_view(std::to_string(x))); }

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
  ++rows_;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("SSC_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<std::size_t>(n);
    throw std::invalid_argument("SSC_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ssc::io
