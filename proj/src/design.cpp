#include "relinfo/design.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string_view>

#include "relinfo/error.hpp"

namespace relinfo {

namespace {

std::int64_t narrow(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) fail(ErrorCode::domain, "rational arithmetic overflow");
  return static_cast<std::int64_t>(v);
}

Rational reduce(__int128 num, __int128 den) {
  if (den == 0) fail(ErrorCode::domain, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = 1;
  return Rational{narrow(num / a), narrow(den / a)};
}

std::int64_t parse_int(std::string_view s, const std::string& context) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::parse, "design expression '" + context + "': expected an integer, found '" + std::string(s) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<Rational> generator(std::int64_t den, std::int64_t lo, std::int64_t hi,
                                const std::vector<std::int64_t>& excluded) {
  std::vector<Rational> pts;
  for (std::int64_t i = lo; i <= hi; ++i) {
    if (std::find(excluded.begin(), excluded.end(), i) != excluded.end()) continue;
    pts.push_back(Rational::make(i, den));
  }
  return pts;
}

std::vector<Rational> preset(std::string_view name) {
  if (name == "base") return generator(9, 0, 9, {});
  if (name == "base-doubled") {
    auto pts = generator(9, 0, 9, {});
    auto again = pts;
    pts.insert(pts.end(), again.begin(), again.end());
    return pts;
  }
  if (name == "interlaced") {
    auto pts = generator(9, 0, 9, {});
    auto extra = generator(12, 1, 11, {6});
    pts.insert(pts.end(), extra.begin(), extra.end());
    return pts;
  }
  return {};
}

std::vector<Rational> parse_term(std::string_view term, const std::string& context) {
  term = trim(term);
  std::int64_t repeat = 1;
  if (const auto star = term.rfind('*'); star != std::string_view::npos) {
    repeat = parse_int(trim(term.substr(star + 1)), context);
    if (repeat < 1) fail(ErrorCode::parse, "design expression '" + context + "': repetition must be positive");
    term = trim(term.substr(0, star));
  }
  std::vector<Rational> pts = preset(term);
  if (pts.empty()) {
    // i/D:LO..HI[\E1,E2]
    if (term.substr(0, 2) != "i/") {
      fail(ErrorCode::parse, "design expression '" + context + "': unknown term '" + std::string(term) + "'");
    }
    const auto colon = term.find(':');
    const auto dots = term.find("..");
    if (colon == std::string_view::npos || dots == std::string_view::npos || dots < colon) {
      fail(ErrorCode::parse, "design expression '" + context + "': generator must look like i/D:LO..HI");
    }
    const std::int64_t den = parse_int(term.substr(2, colon - 2), context);
    if (den <= 0) fail(ErrorCode::parse, "design expression '" + context + "': denominator must be positive");
    const std::int64_t lo = parse_int(term.substr(colon + 1, dots - colon - 1), context);
    std::string_view rest = term.substr(dots + 2);
    std::vector<std::int64_t> excluded;
    if (const auto bs = rest.find('\\'); bs != std::string_view::npos) {
      std::string_view ex = rest.substr(bs + 1);
      rest = rest.substr(0, bs);
      std::size_t start = 0;
      for (;;) {
        const auto comma = ex.find(',', start);
        excluded.push_back(parse_int(ex.substr(start, comma == std::string_view::npos ? ex.npos : comma - start), context));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    const std::int64_t hi = parse_int(rest, context);
    if (hi < lo) fail(ErrorCode::parse, "design expression '" + context + "': empty range");
    pts = generator(den, lo, hi, excluded);
  }
  std::vector<Rational> out;
  for (std::int64_t r = 0; r < repeat; ++r) out.insert(out.end(), pts.begin(), pts.end());
  return out;
}

}  // namespace

Rational Rational::make(std::int64_t num, std::int64_t den) { return reduce(num, den); }

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational operator+(Rational a, Rational b) {
  return reduce(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                static_cast<__int128>(a.den) * b.den);
}

Rational operator*(Rational a, Rational b) {
  return reduce(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}

Design::Design(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) fail(ErrorCode::invalid_argument, "design must contain at least one point");
  for (double x : points_) {
    if (!std::isfinite(x)) fail(ErrorCode::invalid_argument, "design points must be finite");
  }
}

Design::Design(std::vector<Rational> points) : exact_(std::move(points)) {
  if (exact_->empty()) fail(ErrorCode::invalid_argument, "design must contain at least one point");
  for (const auto& r : *exact_) points_.push_back(r.value());
}

Design Design::operator+(const Design& other) const {
  if (exact_ && other.exact_) {
    auto pts = *exact_;
    pts.insert(pts.end(), other.exact_->begin(), other.exact_->end());
    return Design(std::move(pts));
  }
  auto pts = points_;
  pts.insert(pts.end(), other.points_.begin(), other.points_.end());
  return Design(std::move(pts));
}

double sx(const Design& design, bool centered) {
  if (const auto exact = sx_exact(design, centered)) return exact->value();
  const auto& x = design.points();
  const double mean = centered ? std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()) : 0.0;
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s;
}

std::optional<Rational> sx_exact(const Design& design, bool centered) {
  if (!design.exact_points()) return std::nullopt;
  const auto& x = *design.exact_points();
  Rational sum{0, 1};
  for (const auto& r : x) sum = sum + r;
  const Rational mean = centered ? sum * Rational::make(1, static_cast<std::int64_t>(x.size())) : Rational{0, 1};
  const Rational neg_mean{-mean.num, mean.den};
  Rational s{0, 1};
  for (const auto& r : x) {
    const Rational d = r + neg_mean;
    s = s + d * d;
  }
  return s;
}

double variance_ratio(const Design& a, const Design& b, bool centered) {
  const double sa = sx(a, centered);
  if (!(sa > 0.0)) fail(ErrorCode::domain, "reference design has S_x = 0");
  return sx(b, centered) / sa;
}

Design parse_design_expression(const std::string& expression) {
  std::vector<Rational> pts;
  std::string_view rest(expression);
  if (trim(rest).empty()) fail(ErrorCode::parse, "empty design expression");
  for (;;) {
    const auto plus = rest.find('+');
    const auto part = parse_term(rest.substr(0, plus), expression);
    pts.insert(pts.end(), part.begin(), part.end());
    if (plus == std::string_view::npos) break;
    rest = rest.substr(plus + 1);
  }
  return Design(std::move(pts));
}

Design read_design_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::vector<double> pts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
      fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ":1: not a number: '" + std::string(t) + "'");
    }
    pts.push_back(v);
  }
  if (pts.empty()) fail(ErrorCode::invalid_argument, path.string() + ": design file has no points");
  return Design(std::move(pts));
}

Design load_design(const std::string& spec) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec, ec)) return read_design_file(spec);
  return parse_design_expression(spec);
}

}  // namespace relinfo
