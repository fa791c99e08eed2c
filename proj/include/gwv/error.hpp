#pragma once

#include <stdexcept>
#include <string>

namespace gwv {

struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw error(msg);
}

}  // namespace gwv
