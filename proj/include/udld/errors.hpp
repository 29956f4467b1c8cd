#pragma once

#include <stdexcept>

namespace udld {

// Unusable settings (files, tables, JSON fields), as opposed to plain bad
// arguments which raise std::domain_error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace udld
