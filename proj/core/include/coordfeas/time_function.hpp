#pragma once

#include <utility>
#include <variant>
#include <vector>

namespace coordfeas {

// amplitude * sin(rate * t + phase)
struct Sinusoid {
  double amplitude = 0.0;
  double rate = 0.0;
  double phase = 0.0;
};

struct ConstantRef {
  double value = 0.0;
};

// Linear interpolation over (t, value) knots with strictly increasing t;
// clamped to the end values outside the table.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> points;
};

using TimeFunction = std::variant<Sinusoid, ConstantRef, PiecewiseLinear>;

double eval(const TimeFunction& f, double t);

}  // namespace coordfeas
