// Minimal key=value config text: one pair per line, '#' comments.
#pragma once

#include <istream>
#include <map>
#include <stdexcept>
#include <string>

namespace bathykit::detail {

inline std::map<std::string, std::string> parse_kv(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has an empty key");
    kv[key] = value;
  }
  return kv;
}

}  // namespace bathykit::detail
