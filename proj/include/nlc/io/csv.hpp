#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nlc::io {

/// Writes comma-separated rows of doubles at full precision (17 significant digits).
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  void row(std::span<const double> values);

 private:
  std::ostream& os_;
  std::size_t width_;
};

/// Numeric CSV with a header line. All cells must parse as doubles.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// Throws ConfigError naming the missing column.
  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
};

/// Parses a numeric CSV; ConfigError on ragged rows or non-numeric cells,
/// with the 1-based line number in the message.
CsvTable read_csv(std::istream& is, const std::string& source = "<stream>");
CsvTable read_csv(const std::filesystem::path& path);

/// Writes via a temporary file in the same directory, then renames into place.
template <class WriteFn>
void write_atomically(const std::filesystem::path& path, WriteFn&& fn);

std::string format_double(double v);

}  // namespace nlc::io

#include <fstream>

#include "nlc/errors.hpp"

namespace nlc::io {

template <class WriteFn>
void write_atomically(const std::filesystem::path& path, WriteFn&& fn) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    fn(os);
    os.flush();
    if (!os) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace nlc::io
