#include "semnav/geometry.hpp"

namespace semnav {

double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a <= -std::numbers::pi) {
    a += two_pi;
  } else if (a > std::numbers::pi) {
    a -= two_pi;
  }
  return a;
}

double angle_between(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace semnav
