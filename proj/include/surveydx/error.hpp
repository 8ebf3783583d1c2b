#ifndef SURVEYDX_ERROR_HPP
#define SURVEYDX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace surveydx {

// Stable machine-readable error codes. The CLI maps every thrown Error to a
// single-line JSON record {code, message} on stderr and exit code 1.
namespace errc {
inline constexpr const char* duplicate_cell = "duplicate_cell";
inline constexpr const char* non_finite = "non_finite";
inline constexpr const char* bad_sample_size = "bad_sample_size";
inline constexpr const char* zero_difficulty = "zero_difficulty";
inline constexpr const char* full_sample = "full_sample";
inline constexpr const char* degenerate_variance = "degenerate_variance";
inline constexpr const char* all_ties = "all_ties";
inline constexpr const char* length_mismatch = "length_mismatch";
inline constexpr const char* no_overlap = "no_overlap";
inline constexpr const char* all_replications_dropped = "all_replications_dropped";
inline constexpr const char* target_unreachable = "target_unreachable";
inline constexpr const char* bracket_invalid = "bracket_invalid";
inline constexpr const char* no_respondents = "no_respondents";
inline constexpr const char* missing_column = "missing_column";
inline constexpr const char* parse_error = "parse_error";
inline constexpr const char* io_error = "io_error";
inline constexpr const char* domain_error = "domain_error";
}  // namespace errc

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace surveydx

#endif  // SURVEYDX_ERROR_HPP
