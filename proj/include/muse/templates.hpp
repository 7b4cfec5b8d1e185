#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "muse/error.hpp"

namespace muse {

using TemplateVars = std::map<std::string, std::string>;

// Replaces {name} placeholders for the names provided; anything else (including
// brace-heavy JSON examples inside templates) passes through untouched.
inline std::string fill_template(const std::string& tmpl, const TemplateVars& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close != std::string::npos) {
        std::string name = tmpl.substr(i + 1, close - i - 1);
        auto it = vars.find(name);
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MuseError(ErrorKind::config, "cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Built-in templates can be overridden by files named <task>_<slot>.txt in a
// user-supplied directory.
inline std::string load_template_override(const std::string& dir, const std::string& task,
                                          const std::string& slot,
                                          const std::string& fallback) {
  if (dir.empty()) return fallback;
  std::string path = dir + "/" + task + "_" + slot + ".txt";
  std::ifstream probe(path);
  if (!probe) return fallback;
  probe.close();
  return read_text_file(path);
}

} // namespace muse
