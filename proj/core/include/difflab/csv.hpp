#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace difflab {

// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

// CSV writer: first line "#schema=1", then a header row. Fields are written verbatim, so
// callers must not pass text containing commas or newlines.
class CsvWriter
{
public:
  CsvWriter(std::ostream &out, const std::vector<std::string> &columns);

  CsvWriter &field(std::string_view text);
  CsvWriter &field(double value);
  void end_row();

private:
  std::ostream &out_;
  std::size_t columns_;
  std::size_t current_ = 0;
};

inline constexpr int kCsvSchemaVersion = 1;

}  // namespace difflab
