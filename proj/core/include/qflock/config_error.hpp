#ifndef QFLOCK_CONFIG_ERROR_HPP
#define QFLOCK_CONFIG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qflock {

/// Invalid or missing configuration. Carries the offending field name so the
/// CLI can report it and exit with the dedicated status code.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument("config field '" + field + "': " + message),
        field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace qflock

#endif  // QFLOCK_CONFIG_ERROR_HPP
