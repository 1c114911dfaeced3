#pragma once

// Design points for the through-the-origin regression y_i = beta x_i + e_i,
// whose least-squares variance is sigma^2 / S_x with S_x = sum_i x_i^2.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace relinfo {

/// Nonnegative-denominator fraction in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  friend Rational operator+(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
};

class Design {
 public:
  explicit Design(std::vector<double> points);
  explicit Design(std::vector<Rational> points);

  const std::vector<double>& points() const { return points_; }
  /// Present when every point was given as an exact fraction.
  const std::optional<std::vector<Rational>>& exact_points() const { return exact_; }
  std::size_t size() const { return points_.size(); }

  /// Multiset union.
  Design operator+(const Design& other) const;

 private:
  std::vector<double> points_;
  std::optional<std::vector<Rational>> exact_;
};

/// Sum of squared points (with multiplicity); centered subtracts the mean first.
double sx(const Design& design, bool centered = false);
std::optional<Rational> sx_exact(const Design& design, bool centered = false);

/// sx(b) / sx(a): the variance of the slope estimate under a relative to b.
double variance_ratio(const Design& a, const Design& b, bool centered = false);

/// Parses a design expression: terms joined by '+', each either a preset
/// (base, base-doubled, interlaced) or a generator "i/D:LO..HI" with optional
/// exclusions "\\E1,E2" and repetition "*K", e.g. "i/12:1..11\\6".
Design parse_design_expression(const std::string& expression);

/// One point per line; blank lines and lines starting with '#' are skipped.
Design read_design_file(const std::filesystem::path& path);

/// A path naming an existing file is read as a design file, anything else is
/// parsed as an expression.
Design load_design(const std::string& spec);

}  // namespace relinfo
