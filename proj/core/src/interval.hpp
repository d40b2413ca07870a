#pragma once

// Outward-rounded interval arithmetic and an HC4 forward-backward contractor
// over a Program's tape.

#include <vector>

#include "program.hpp"

namespace atdecor::detail {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval entire();
  static Interval point(double v) { return {v, v}; }
  bool empty() const { return lo > hi; }
  double width() const { return hi - lo; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

using Box = std::vector<Interval>;

Interval operator+(Interval a, Interval b);
Interval operator-(Interval a, Interval b);
Interval operator*(Interval a, Interval b);
Interval operator-(Interval a);
// Sound enclosure of {x / y}; `entire()` when y straddles zero.
Interval divide(Interval a, Interval b);
Interval hull(Interval a, Interval b);

// Intersection that treats gaps within 1e-9 * magnitude as touching, so that
// rounding in feasible problems never produces an empty box.
Interval intersect(Interval a, Interval b);

void forward_intervals(const Tape& tape, const Box& inputs, std::vector<Interval>& out);

struct Hc4Result {
  bool empty = false;
  Box box;
  // Constraint indices that changed the box, in first-change order, plus the
  // one that emptied it. Contracting with just these reproduces the result.
  std::vector<int> contributors;
  int emptied = -1;
};

Hc4Result hc4(const Program& program, Box box, const std::vector<int>& constraints,
              int max_sweeps = 100);

Box input_box(const Program& program);

}  // namespace atdecor::detail
