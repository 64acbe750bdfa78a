#include "difflab/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace difflab {

std::string format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream &out, const std::vector<std::string> &columns)
  : out_(out), columns_(columns.size())
{
  out_ << "#schema=" << kCsvSchemaVersion << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

CsvWriter &CsvWriter::field(std::string_view text)
{
  if (current_ >= columns_)
    throw std::logic_error("csv row has more fields than columns");
  if (current_++)
    out_ << ',';
  out_ << text;
  return *this;
}

CsvWriter &CsvWriter::field(double value)
{
  return field(format_number(value));
}

void CsvWriter::end_row()
{
  if (current_ != columns_)
    throw std::logic_error("csv row has fewer fields than columns");
  out_ << '\n';
  current_ = 0;
}

}  // namespace difflab
