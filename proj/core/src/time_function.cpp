#include "coordfeas/time_function.hpp"

#include <algorithm>
#include <cmath>

namespace coordfeas {

double eval(const TimeFunction& f, double t) {
  if (const auto* s = std::get_if<Sinusoid>(&f); s != nullptr) {
    return s->amplitude * std::sin(s->rate * t + s->phase);
  }
  if (const auto* c = std::get_if<ConstantRef>(&f); c != nullptr) {
    return c->value;
  }
  const auto& pts = std::get<PiecewiseLinear>(f).points;
  if (pts.empty()) return 0.0;
  if (t <= pts.front().first) return pts.front().second;
  if (t >= pts.back().first) return pts.back().second;
  const auto hi = std::upper_bound(
      pts.begin(), pts.end(), t,
      [](double value, const std::pair<double, double>& p) { return value < p.first; });
  const auto lo = hi - 1;
  const double span = hi->first - lo->first;
  const double alpha = span > 0.0 ? (t - lo->first) / span : 0.0;
  return lo->second + alpha * (hi->second - lo->second);
}

}  // namespace coordfeas
