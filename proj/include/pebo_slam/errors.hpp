#ifndef PEBO_SLAM_ERRORS_HPP
#define PEBO_SLAM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pebo {

class DegenerateVector : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A landmark coincides with the camera centre, so its bearing is undefined.
class DegenerateBearing : public std::domain_error {
 public:
  explicit DegenerateBearing(std::size_t landmark)
      : std::domain_error("bearing undefined for landmark " + std::to_string(landmark)),
        landmark_(landmark) {}
  std::size_t landmark() const noexcept { return landmark_; }

 private:
  std::size_t landmark_;
};

class ProfileExhausted : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Scenario validation failure; `where` is "line N, field F" when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what) {}
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pebo

#endif  // PEBO_SLAM_ERRORS_HPP
