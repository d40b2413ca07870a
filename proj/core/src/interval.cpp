#include "interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atdecor::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTouch = 1e-9;
constexpr double kShrink = 1e-6;

double down(double v) { return std::isfinite(v) ? std::nextafter(v, -kInf) : v; }
double up(double v) { return std::isfinite(v) ? std::nextafter(v, kInf) : v; }

// 0 * inf is 0 here: an exactly-zero factor pins the product.
double times(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

Interval rounded(double lo, double hi) {
  if (std::isnan(lo)) lo = -kInf;
  if (std::isnan(hi)) hi = kInf;
  return {down(lo), up(hi)};
}

Interval empty_interval() { return {kInf, -kInf}; }

}  // namespace

Interval Interval::entire() { return {-kInf, kInf}; }

Interval operator+(Interval a, Interval b) { return rounded(a.lo + b.lo, a.hi + b.hi); }
Interval operator-(Interval a, Interval b) { return rounded(a.lo - b.hi, a.hi - b.lo); }
Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

Interval operator*(Interval a, Interval b) {
  const double p[] = {times(a.lo, b.lo), times(a.lo, b.hi), times(a.hi, b.lo), times(a.hi, b.hi)};
  return rounded(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}

Interval divide(Interval a, Interval b) {
  if (a.empty() || b.empty()) return empty_interval();
  if (b.lo > 0.0 || b.hi < 0.0) {
    double q[4];
    int n = 0;
    for (double x : {a.lo, a.hi}) {
      for (double y : {b.lo, b.hi}) q[n++] = x / y;
    }
    for (double v : q) {
      if (std::isnan(v)) return Interval::entire();
    }
    return rounded(*std::min_element(q, q + 4), *std::max_element(q, q + 4));
  }
  // Divisor touches zero on one side only: a one-sided ray when a excludes 0.
  if (b.lo == 0.0 && b.hi > 0.0) {
    if (a.lo > 0.0) return rounded(a.lo / b.hi, kInf);
    if (a.hi < 0.0) return rounded(-kInf, a.hi / b.hi);
  } else if (b.hi == 0.0 && b.lo < 0.0) {
    if (a.lo > 0.0) return rounded(-kInf, a.lo / b.lo);
    if (a.hi < 0.0) return rounded(a.hi / b.lo, kInf);
  }
  return Interval::entire();
}

Interval hull(Interval a, Interval b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Interval intersect(Interval a, Interval b) {
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.lo <= r.hi) return r;
  if (std::isnan(r.lo) || std::isnan(r.hi)) return empty_interval();
  const double mag = std::max({1.0, std::isfinite(r.lo) ? std::abs(r.lo) : 0.0,
                               std::isfinite(r.hi) ? std::abs(r.hi) : 0.0});
  if (r.lo - r.hi <= kTouch * mag) return {r.hi, r.lo};
  return empty_interval();
}

void forward_intervals(const Tape& tape, const Box& inputs, std::vector<Interval>& out) {
  const auto& nodes = tape.nodes();
  out.resize(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const TapeNode& n = nodes[k];
    Interval r;
    switch (n.kind) {
      case NodeKind::kConst: r = Interval::point(n.value); break;
      case NodeKind::kInput: r = inputs[n.input]; break;
      case NodeKind::kAdd:
        r = Interval::point(0.0);
        for (int a : n.args) r = r + out[a];
        break;
      case NodeKind::kSub: r = out[n.args[0]] - out[n.args[1]]; break;
      case NodeKind::kMul:
        r = Interval::point(1.0);
        for (int a : n.args) r = r * out[a];
        break;
      case NodeKind::kNeg: r = -out[n.args[0]]; break;
      case NodeKind::kMin:
      case NodeKind::kMax:
        r = out[n.args[0]];
        for (int a : n.args) {
          r = n.kind == NodeKind::kMin
                  ? Interval{std::min(r.lo, out[a].lo), std::min(r.hi, out[a].hi)}
                  : Interval{std::max(r.lo, out[a].lo), std::max(r.hi, out[a].hi)};
        }
        break;
      case NodeKind::kNoisyOr: {
        Interval miss = Interval::point(1.0);
        for (int a : n.args) miss = miss * (Interval::point(1.0) - out[a]);
        r = Interval::point(1.0) - miss;
        break;
      }
    }
    out[k] = r;
  }
}

namespace {

// Narrows `target`; false when it becomes empty.
bool narrow(Interval& target, Interval by) {
  target = intersect(target, by);
  return !target.empty();
}

// Backward projection of node k onto its arguments.
bool backward(const TapeNode& n, const Interval& self, std::vector<Interval>& iv) {
  const auto& args = n.args;
  const std::size_t m = args.size();
  switch (n.kind) {
    case NodeKind::kConst:
      return self.contains(n.value) || !intersect(self, Interval::point(n.value)).empty();
    case NodeKind::kInput: return true;
    case NodeKind::kAdd:
      for (std::size_t i = 0; i < m; ++i) {
        Interval rest = Interval::point(0.0);
        for (std::size_t j = 0; j < m; ++j) {
          if (j != i) rest = rest + iv[args[j]];
        }
        if (!narrow(iv[args[i]], self - rest)) return false;
      }
      return true;
    case NodeKind::kSub:
      if (!narrow(iv[args[0]], self + iv[args[1]])) return false;
      return narrow(iv[args[1]], iv[args[0]] - self);
    case NodeKind::kNeg: return narrow(iv[args[0]], -self);
    case NodeKind::kMul:
      for (std::size_t i = 0; i < m; ++i) {
        Interval rest = Interval::point(1.0);
        for (std::size_t j = 0; j < m; ++j) {
          if (j != i) rest = rest * iv[args[j]];
        }
        if (!narrow(iv[args[i]], divide(self, rest))) return false;
      }
      return true;
    case NodeKind::kNoisyOr: {
      const Interval one = Interval::point(1.0);
      const Interval miss = one - self;
      for (std::size_t i = 0; i < m; ++i) {
        Interval rest = one;
        for (std::size_t j = 0; j < m; ++j) {
          if (j != i) rest = rest * (one - iv[args[j]]);
        }
        if (!narrow(iv[args[i]], one - divide(miss, rest))) return false;
      }
      return true;
    }
    case NodeKind::kMin:
    case NodeKind::kMax: {
      const bool is_min = n.kind == NodeKind::kMin;
      // Every argument is on the far side of the result's near bound.
      for (int a : args) {
        const Interval ray = is_min ? Interval{self.lo, std::numeric_limits<double>::infinity()}
                                    : Interval{-std::numeric_limits<double>::infinity(), self.hi};
        if (!narrow(iv[a], ray)) return false;
      }
      // When only one argument can attain the result, it equals the result.
      int candidate = -1;
      int count = 0;
      for (int a : args) {
        const bool can = is_min ? iv[a].lo <= self.hi : iv[a].hi >= self.lo;
        if (can) {
          candidate = a;
          ++count;
        }
      }
      if (count == 0) return false;
      if (count == 1) return narrow(iv[candidate], self);
      return true;
    }
  }
  return true;
}

struct Contractor {
  const Program& p;
  std::vector<Interval> iv;

  // Returns an empty box on conflict.
  bool atom(const Atom& a, Box& box) {
    forward_intervals(p.tape, box, iv);
    Interval& l = iv[a.lhs];
    Interval& r = iv[a.rhs];
    const Interval off = Interval::point(a.offset);
    if (a.eq) {
      if (!narrow(l, r - off)) return false;
      if (!narrow(r, l + off)) return false;
    } else {
      const double inf = std::numeric_limits<double>::infinity();
      if (!narrow(l, Interval{-inf, (r - off).hi})) return false;
      if (!narrow(r, Interval{(l + off).lo, inf})) return false;
    }
    const int top = std::max(a.lhs, a.rhs);
    const auto& nodes = p.tape.nodes();
    for (int k = top; k >= 0; --k) {
      if (!backward(nodes[k], iv[k], iv)) return false;
    }
    for (int k = 0; k <= top; ++k) {
      const TapeNode& n = nodes[k];
      if (n.kind == NodeKind::kInput && !narrow(box[n.input], iv[k])) return false;
    }
    return true;
  }

  bool node(const CNode& c, Box& box) {
    switch (c.kind) {
      case CNode::kAtom: return atom(p.atoms[c.atom], box);
      case CNode::kAnd:
        for (const CNode& child : c.children) {
          if (!node(child, box)) return false;
        }
        return true;
      case CNode::kOr: {
        Box merged;
        bool any = false;
        for (const CNode& child : c.children) {
          Box b = box;
          if (!node(child, b)) continue;
          if (!any) {
            merged = std::move(b);
            any = true;
          } else {
            for (std::size_t i = 0; i < merged.size(); ++i) merged[i] = hull(merged[i], b[i]);
          }
        }
        if (!any) return false;
        box = std::move(merged);
        return true;
      }
    }
    return true;
  }
};

bool significant(const Interval& before, const Interval& after) {
  if (before.lo == after.lo && before.hi == after.hi) return false;
  if (!std::isfinite(before.width())) return true;
  const double scale = std::max({1e-300, before.width(), kShrink * std::abs(before.lo)});
  return (before.width() - after.width()) > kShrink * scale;
}

}  // namespace

Box input_box(const Program& program) {
  Box box;
  for (std::size_t i = 0; i < program.input_count(); ++i) {
    box.push_back(Interval{program.lower[i], program.upper[i]});
  }
  return box;
}

Hc4Result hc4(const Program& program, Box box, const std::vector<int>& constraints,
              int max_sweeps) {
  Hc4Result result;
  Contractor contractor{program, {}};
  std::vector<bool> contributed(program.constraints.size(), false);
  auto note = [&](int c) {
    if (!contributed[c]) {
      contributed[c] = true;
      result.contributors.push_back(c);
    }
  };
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool progress = false;
    for (int c : constraints) {
      Box next = box;
      if (!contractor.node(program.constraints[c].root, next)) {
        note(c);
        result.empty = true;
        result.emptied = c;
        result.box = std::move(box);
        return result;
      }
      bool changed = false;
      for (std::size_t i = 0; i < box.size(); ++i) {
        if (next[i].lo != box[i].lo || next[i].hi != box[i].hi) changed = true;
        if (significant(box[i], next[i])) progress = true;
      }
      if (changed) note(c);
      box = std::move(next);
    }
    if (!progress) break;
  }
  result.box = std::move(box);
  return result;
}

}  // namespace atdecor::detail
