#pragma once

// Covariant degree-of-freedom count of an involutive system:
//
//   N = sum_n n * (t_n - sum_m (-1)^m (l_n^m + r_n^m))
//
// t_n counts equations of order n, l_n^m gauge identities and r_n^m gauge
// symmetries of order n and reducibility m.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace partlag::dof {

struct InvolutiveTable {
  std::string label;
  std::map<int, long> equations;                     // n -> t_n
  std::map<std::pair<int, int>, long> identities;   // (n, m) -> l_n^m
  std::map<std::pair<int, int>, long> symmetries;   // (n, m) -> r_n^m

  /// Throws std::invalid_argument on negative counts or orders.
  void validate() const;
  /// Counts of both tables added entry by entry.
  InvolutiveTable merged(const InvolutiveTable& other) const;
};

long dof(const InvolutiveTable& table);

std::vector<std::string> builtin_names();
/// Throws std::out_of_range for an unknown name.
InvolutiveTable builtin(const std::string& name);

class TableParseError : public std::runtime_error {
 public:
  TableParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Table file: one `key = count` per line, `#` comments. Keys are `label`,
/// `t<n>`, `l<n>.<m>` and `r<n>.<m>`; repeated keys add up.
InvolutiveTable parse_table(const std::string& text);
InvolutiveTable load_table(const std::filesystem::path& path);

}  // namespace partlag::dof
