#pragma once

#include <boost/tokenizer.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace greenscan::csv {

inline std::vector<std::string> split_line(const std::string &line) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::string clean = line;
  if (!clean.empty() && clean.back() == '\r')
    clean.pop_back();
  std::vector<std::string> out;
  Tokenizer tok(clean, boost::escaped_list_separator<char>('\\', ',', '"'));
  for (const auto &field : tok)
    out.push_back(field);
  return out;
}

inline std::string quote(const std::string &field) {
  if (field.find_first_of(",\"\n\\") == std::string::npos)
    return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"' || c == '\\')
      out += '\\';
    out += c;
  }
  return out + '"';
}

/// Text that reads back to the same double.
inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace greenscan::csv
