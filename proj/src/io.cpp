#include "kmd/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kmd::io
{

namespace
{

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
  {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

} // namespace

std::string format_double(double value)
{
  if (std::isnan(value))
  {
    return "nan";
  }
  if (std::isinf(value))
  {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_double(std::string_view token)
{
  token = trim(token);
  if (!token.empty() && token.front() == '+')
  {
    token.remove_prefix(1);
  }
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc{} || ptr != end)
  {
    throw InputError("non-numeric value '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true)
  {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos)
    {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::string read_text(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw InputError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view contents)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
    {
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
    {
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string matrix_to_csv(const RealMatrix& m)
{
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 24);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
    {
      if (j > 0)
      {
        out += ',';
      }
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

RealMatrix parse_csv_matrix(std::string_view text, bool skip_header)
{
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_pending = skip_header;
  while (pos <= text.size())
  {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
    {
      nl = text.size();
    }
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (header_pending)
    {
      header_pending = false;
      continue;
    }
    if (line.empty())
    {
      continue;
    }
    const auto tokens = split_csv_line(line);
    if (rows == 0)
    {
      cols = tokens.size();
    }
    else if (tokens.size() != cols)
    {
      throw InputError("ragged CSV: line " + std::to_string(line_no) + " has " +
                       std::to_string(tokens.size()) + " fields, expected " +
                       std::to_string(cols));
    }
    for (const auto tok : tokens)
    {
      try
      {
        values.push_back(parse_double(tok));
      }
      catch (const InputError& e)
      {
        throw InputError(std::string(e.what()) + " on line " + std::to_string(line_no));
      }
    }
    ++rows;
  }
  RealMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
  {
    for (std::size_t j = 0; j < cols; ++j)
    {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
    }
  }
  return m;
}

} // namespace kmd::io
