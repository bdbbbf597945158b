#include "lefschetz/rational.hpp"

#include <cctype>

namespace lefschetz {

Rational rational_from_string(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw std::invalid_argument("rational_from_string: empty literal");

  if (s.find('/') != std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("rational_from_string: bad fraction '" + text + "'");
    q.canonicalize();
    if (q.get_den() == 0) throw std::invalid_argument("rational_from_string: zero denominator in '" + text + "'");
    return q;
  }

  bool negative = false;
  std::size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') {
    negative = s[pos] == '-';
    ++pos;
  }

  std::string digits;
  long scale10 = 0;  // value = digits * 10^scale10
  bool seen_dot = false, seen_digit = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("rational_from_string: bad literal '" + text + "'");
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      seen_digit = true;
      if (seen_dot) --scale10;
    } else if (c == 'e' || c == 'E') {
      ++pos;
      break;
    } else {
      throw std::invalid_argument("rational_from_string: bad literal '" + text + "'");
    }
  }
  if (!seen_digit) throw std::invalid_argument("rational_from_string: bad literal '" + text + "'");
  if (pos <= s.size() && pos > 0 && (s[pos - 1] == 'e' || s[pos - 1] == 'E')) {
    if (pos == s.size()) throw std::invalid_argument("rational_from_string: bad exponent in '" + text + "'");
    scale10 += std::stol(s.substr(pos));
    pos = s.size();
  }

  mpz_class mant(digits.empty() ? "0" : digits, 10);
  Rational q(mant);
  if (scale10 > 0) {
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(scale10));
    q *= Rational(pow10);
  } else if (scale10 < 0) {
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(-scale10));
    q /= Rational(pow10);
  }
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

std::string rational_to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

}  // namespace lefschetz
