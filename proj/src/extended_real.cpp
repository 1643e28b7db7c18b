#include "ssap/extended_real.hpp"

#include <cmath>
#include <stdexcept>

#include "ssap/csv.hpp"
#include "ssap/errors.hpp"

namespace ssap {

ExtendedReal ExtendedReal::finite(double v) {
  if (!std::isfinite(v)) throw InvalidParameter("ExtendedReal::finite: value is not finite");
  ExtendedReal r;
  r.value_ = v;
  return r;
}

double ExtendedReal::value() const {
  if (kind_ != Kind::Finite) throw std::logic_error("ExtendedReal::value on infinite sentinel");
  return value_;
}

std::string ExtendedReal::to_string() const {
  switch (kind_) {
    case Kind::NegInf: return "-inf";
    case Kind::PosInf: return "+inf";
    default: return csv::format_double(value_);
  }
}

ExtendedReal ExtendedReal::parse(std::string_view text) {
  if (text == "-inf" || text == "-infinity") return neg_inf();
  if (text == "+inf" || text == "inf" || text == "+infinity" || text == "infinity") return pos_inf();
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidParameter("not a threshold value: '" + s + "'");
  }
  if (used != s.size()) throw InvalidParameter("not a threshold value: '" + s + "'");
  return finite(v);
}

std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.kind_ != b.kind_ || a.kind_ != ExtendedReal::Kind::Finite) {
    return static_cast<int>(a.kind_) <=> static_cast<int>(b.kind_);
  }
  return a.value_ <=> b.value_;
}

bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
  return (a <=> b) == std::partial_ordering::equivalent;
}

}  // namespace ssap
