#include "ecap/complex_literal.hpp"

#include <charconv>
#include <regex>

#include "ecap/error.hpp"

namespace ecap {

namespace {

double to_double(const std::string& s) {
  if (s.empty() || s == "+") return 1.0;
  if (s == "-") return -1.0;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::Format, "bad number '" + s + "'");
  }
  return v;
}

}  // namespace

Complex parse_complex(std::string_view text) {
  static const std::regex real_only(R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)$)");
  static const std::regex imag_only(R"(^([+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i$)");
  static const std::regex full(
      R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i$)");
  const std::string s(text);
  std::smatch m;
  if (std::regex_match(s, m, real_only)) return {to_double(m[1]), 0.0};
  if (std::regex_match(s, m, full)) return {to_double(m[1]), to_double(m[2])};
  if (std::regex_match(s, m, imag_only)) return {0.0, to_double(m[1])};
  throw Error(ErrorKind::Format, "not a complex literal: '" + s + "'");
}

std::string format_complex(Complex z) {
  // Adding +0.0 folds negative zeros, so exact zeros always print as "0".
  z = {z.real() + 0.0, z.imag() + 0.0};
  char buf[64];
  auto re = std::to_chars(buf, buf + sizeof buf, z.real());
  std::string out(buf, re.ptr);
  if (!std::signbit(z.imag())) out += '+';
  auto im = std::to_chars(buf, buf + sizeof buf, z.imag());
  out.append(buf, im.ptr);
  out += 'i';
  return out;
}

}  // namespace ecap
