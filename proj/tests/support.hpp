#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testsupport {

inline std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::string fixture_path(const std::string &name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

inline std::string fixture(const std::string &name) {
  return read_file(fixture_path(name));
}

}  // namespace testsupport
