#include "saa/geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "saa/error.hpp"

namespace saa {

std::string to_string(Norm norm) {
  switch (norm) {
    case Norm::l1: return "l1";
    case Norm::l2: return "l2";
    case Norm::linf: return "linf";
  }
  return "linf";
}

Norm norm_from_string(const std::string& name) {
  if (name == "l1") return Norm::l1;
  if (name == "l2") return Norm::l2;
  if (name == "linf") return Norm::linf;
  fail(ErrorKind::invalid_argument, "unknown norm '" + name + "'");
}

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::box: return "box";
    case SpaceKind::ball: return "ball";
    case SpaceKind::simplex: return "simplex";
    case SpaceKind::cloud: return "cloud";
    case SpaceKind::product: return "product";
  }
  return "box";
}

double norm(std::span<const double> v, Norm kind) {
  double acc = 0.0;
  switch (kind) {
    case Norm::l1:
      for (double x : v) acc += std::abs(x);
      return acc;
    case Norm::l2:
      for (double x : v) acc += x * x;
      return std::sqrt(acc);
    case Norm::linf:
      for (double x : v) acc = std::max(acc, std::abs(x));
      return acc;
  }
  return acc;
}

double distance(std::span<const double> a, std::span<const double> b, Norm kind) {
  require(a.size() == b.size(), ErrorKind::dimension_mismatch,
          "distance between points of dimension " + std::to_string(a.size()) + " and " +
              std::to_string(b.size()));
  double acc = 0.0;
  switch (kind) {
    case Norm::l1:
      for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
      return acc;
    case Norm::l2:
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
      }
      return std::sqrt(acc);
    case Norm::linf:
      for (std::size_t k = 0; k < a.size(); ++k) acc = std::max(acc, std::abs(a[k] - b[k]));
      return acc;
  }
  return acc;
}

namespace {

double combine(const std::vector<double>& parts, Norm kind) {
  double acc = 0.0;
  for (double p : parts) {
    switch (kind) {
      case Norm::l1: acc += p; break;
      case Norm::l2: acc += p * p; break;
      case Norm::linf: acc = std::max(acc, p); break;
    }
  }
  return kind == Norm::l2 ? std::sqrt(acc) : acc;
}

// Diameter of `space` measured in `metric`, which may differ from the norm
// that defines a ball's shape when the space is a product factor.
double diameter_under(const SpaceDescriptor& space, Norm metric) {
  const double d = static_cast<double>(space.dimension());
  switch (space.kind()) {
    case SpaceKind::box: {
      std::vector<double> widths(space.dimension());
      for (std::size_t k = 0; k < widths.size(); ++k) widths[k] = space.hi()[k] - space.lo()[k];
      return combine(widths, metric);
    }
    case SpaceKind::ball: {
      const double r = space.radius();
      if (r == 0.0) return 0.0;
      // Farthest pair is (c + v, c - v) for v on the unit sphere of the shape
      // norm maximising the metric norm.
      const Norm shape = space.norm();
      if (shape == metric || metric == Norm::linf) return 2.0 * r;
      if (shape == Norm::l1) return 2.0 * r;  // vertices ±r e_k
      if (shape == Norm::l2) return 2.0 * r * std::sqrt(d);           // metric l1
      if (metric == Norm::l2) return 2.0 * r * std::sqrt(d);          // shape linf
      return 2.0 * r * d;                                              // shape linf, metric l1
    }
    case SpaceKind::simplex: {
      if (space.dimension() <= 1) return 0.0;
      switch (metric) {
        case Norm::l1: return 2.0;
        case Norm::l2: return std::sqrt(2.0);
        case Norm::linf: return 1.0;
      }
      return 0.0;
    }
    case SpaceKind::cloud:
      return diameter(space.points(), metric);
    case SpaceKind::product: {
      std::vector<double> parts;
      for (const auto& f : space.factors()) parts.push_back(diameter_under(f, metric));
      return combine(parts, metric);
    }
  }
  return 0.0;
}

Point project_l1_ball(std::span<const double> x, std::span<const double> c, double r) {
  Point v(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) v[k] = x[k] - c[k];
  if (norm(v, Norm::l1) <= r) {
    Point out(x.begin(), x.end());
    return out;
  }
  // Sort-and-threshold projection of |v| onto the simplex of radius r.
  std::vector<double> u(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) u[k] = std::abs(v[k]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double candidate = (cumulative - r) / static_cast<double>(k + 1);
    if (u[k] - candidate > 0.0) tau = candidate;
  }
  Point out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double mag = std::max(std::abs(v[k]) - tau, 0.0);
    out[k] = c[k] + std::copysign(mag, v[k]);
  }
  return out;
}

Point project_simplex(std::span<const double> x) {
  std::vector<double> u(x.begin(), x.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - candidate > 0.0) tau = candidate;
  }
  Point out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::max(x[k] - tau, 0.0);
  return out;
}

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a * b;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double acc = 1.0L;
  for (std::size_t j = 1; j <= k; ++j) acc = acc * static_cast<long double>(n - k + j) / j;
  if (acc > static_cast<long double>(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(std::llround(acc));
}

std::size_t simplex_divisions(double h) {
  require(h > 0.0, ErrorKind::invalid_argument, "grid resolution must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / h)));
}

std::vector<Point> cartesian(const std::vector<std::vector<Point>>& parts) {
  std::vector<Point> out{Point{}};
  for (const auto& part : parts) {
    std::vector<Point> next;
    next.reserve(out.size() * part.size());
    for (const auto& prefix : out) {
      for (const auto& tail : part) {
        Point p = prefix;
        p.insert(p.end(), tail.begin(), tail.end());
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

void budget_check(std::size_t count, std::size_t budget, const std::string& what) {
  if (count > budget) {
    throw Error(ErrorKind::budget,
                what + " needs " + std::to_string(count) + " points, budget is " +
                    std::to_string(budget),
                count);
  }
}

}  // namespace

std::vector<double> axis_lattice(double lo, double hi, double h) {
  require(h > 0.0, ErrorKind::invalid_argument, "grid resolution must be positive");
  require(hi >= lo, ErrorKind::invalid_argument, "lattice upper end below lower end");
  if (hi == lo) return {lo};
  const double ratio = (hi - lo) / h;
  const double rounded = std::round(ratio);
  std::vector<double> out;
  if (std::abs(ratio - rounded) < 1e-9 * std::max(1.0, ratio)) {
    const auto n = static_cast<std::size_t>(rounded);
    out.reserve(n + 1);
    for (std::size_t j = 0; j < n; ++j) {
      out.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n));
    }
    out.push_back(hi);
  } else {
    const auto n = static_cast<std::size_t>(std::floor(ratio));
    out.reserve(n + 1);
    for (std::size_t j = 0; j <= n; ++j) out.push_back(lo + static_cast<double>(j) * h);
  }
  return out;
}

SpaceDescriptor SpaceDescriptor::box(Point lo, Point hi, Norm norm) {
  require(!lo.empty() && lo.size() == hi.size(), ErrorKind::dimension_mismatch,
          "box bounds must be nonempty and of equal dimension");
  for (std::size_t k = 0; k < lo.size(); ++k) {
    require(std::isfinite(lo[k]) && std::isfinite(hi[k]) && lo[k] <= hi[k],
            ErrorKind::invalid_argument, "box requires finite lo <= hi in every coordinate");
  }
  SpaceDescriptor s;
  s.kind_ = SpaceKind::box;
  s.dimension_ = lo.size();
  s.norm_ = norm;
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  s.compute_diameter();
  return s;
}

SpaceDescriptor SpaceDescriptor::ball(Point center, double radius, Norm norm) {
  require(!center.empty(), ErrorKind::invalid_argument, "ball center must be nonempty");
  require(std::isfinite(radius) && radius >= 0.0, ErrorKind::invalid_argument,
          "ball radius must be finite and nonnegative");
  SpaceDescriptor s;
  s.kind_ = SpaceKind::ball;
  s.dimension_ = center.size();
  s.norm_ = norm;
  s.center_ = std::move(center);
  s.radius_ = radius;
  s.compute_diameter();
  return s;
}

SpaceDescriptor SpaceDescriptor::simplex(std::size_t dimension, Norm norm) {
  require(dimension >= 1, ErrorKind::invalid_argument, "simplex dimension must be >= 1");
  SpaceDescriptor s;
  s.kind_ = SpaceKind::simplex;
  s.dimension_ = dimension;
  s.norm_ = norm;
  s.compute_diameter();
  return s;
}

SpaceDescriptor SpaceDescriptor::cloud(std::vector<Point> points, Norm norm) {
  require(!points.empty(), ErrorKind::invalid_argument, "point cloud must be nonempty");
  const std::size_t d = points.front().size();
  require(d >= 1, ErrorKind::invalid_argument, "cloud points must have dimension >= 1");
  for (const auto& p : points) {
    require(p.size() == d, ErrorKind::dimension_mismatch, "cloud points differ in dimension");
  }
  SpaceDescriptor s;
  s.kind_ = SpaceKind::cloud;
  s.dimension_ = d;
  s.norm_ = norm;
  s.points_ = std::move(points);
  s.compute_diameter();
  return s;
}

SpaceDescriptor SpaceDescriptor::product(std::vector<SpaceDescriptor> factors, Norm norm) {
  require(!factors.empty(), ErrorKind::invalid_argument, "product needs at least one factor");
  SpaceDescriptor s;
  s.kind_ = SpaceKind::product;
  s.norm_ = norm;
  for (const auto& f : factors) s.dimension_ += f.dimension();
  s.factors_ = std::move(factors);
  s.compute_diameter();
  return s;
}

void SpaceDescriptor::compute_diameter() { diameter_ = diameter_under(*this, norm_); }

bool SpaceDescriptor::contains(std::span<const double> x, double tol) const {
  if (x.size() != dimension_) return false;
  switch (kind_) {
    case SpaceKind::box:
      for (std::size_t k = 0; k < dimension_; ++k) {
        if (x[k] < lo_[k] - tol || x[k] > hi_[k] + tol) return false;
      }
      return true;
    case SpaceKind::ball:
      return distance(x, center_, norm_) <= radius_ + tol;
    case SpaceKind::simplex: {
      double sum = 0.0;
      for (double v : x) {
        if (v < -tol) return false;
        sum += v;
      }
      return std::abs(sum - 1.0) <= tol * std::max<double>(1.0, static_cast<double>(dimension_));
    }
    case SpaceKind::cloud:
      for (const auto& p : points_) {
        if (distance(x, p, Norm::linf) <= tol) return true;
      }
      return false;
    case SpaceKind::product: {
      std::size_t offset = 0;
      for (const auto& f : factors_) {
        if (!f.contains(x.subspan(offset, f.dimension()), tol)) return false;
        offset += f.dimension();
      }
      return true;
    }
  }
  return false;
}

Point SpaceDescriptor::project(std::span<const double> x) const {
  require(x.size() == dimension_, ErrorKind::dimension_mismatch,
          "projection input has dimension " + std::to_string(x.size()) + ", space has " +
              std::to_string(dimension_));
  switch (kind_) {
    case SpaceKind::box: {
      Point out(dimension_);
      for (std::size_t k = 0; k < dimension_; ++k) out[k] = std::clamp(x[k], lo_[k], hi_[k]);
      return out;
    }
    case SpaceKind::ball: {
      if (norm_ == Norm::linf) {
        Point out(dimension_);
        for (std::size_t k = 0; k < dimension_; ++k) {
          out[k] = std::clamp(x[k], center_[k] - radius_, center_[k] + radius_);
        }
        return out;
      }
      if (norm_ == Norm::l1) return project_l1_ball(x, center_, radius_);
      const double r = distance(x, center_, Norm::l2);
      Point out(x.begin(), x.end());
      if (r > radius_) {
        for (std::size_t k = 0; k < dimension_; ++k) {
          out[k] = center_[k] + (x[k] - center_[k]) * radius_ / r;
        }
      }
      return out;
    }
    case SpaceKind::simplex:
      return project_simplex(x);
    case SpaceKind::cloud: {
      const Point* best = &points_.front();
      double best_d = distance(x, *best, Norm::l2);
      for (const auto& p : points_) {
        const double d = distance(x, p, Norm::l2);
        if (d < best_d) {
          best_d = d;
          best = &p;
        }
      }
      return *best;
    }
    case SpaceKind::product: {
      Point out;
      out.reserve(dimension_);
      std::size_t offset = 0;
      for (const auto& f : factors_) {
        const Point part = f.project(x.subspan(offset, f.dimension()));
        out.insert(out.end(), part.begin(), part.end());
        offset += f.dimension();
      }
      return out;
    }
  }
  return Point(x.begin(), x.end());
}

std::size_t SpaceDescriptor::grid_size(double h) const {
  require(h > 0.0, ErrorKind::invalid_argument, "grid resolution must be positive");
  switch (kind_) {
    case SpaceKind::box: {
      std::size_t count = 1;
      for (std::size_t k = 0; k < dimension_; ++k) {
        count = checked_mul(count, axis_lattice(lo_[k], hi_[k], h).size());
      }
      return count;
    }
    case SpaceKind::ball: {
      // Bounding-box lattice count (upper bound on the filtered grid).
      const std::size_t per_axis = axis_lattice(-radius_, radius_, h).size();
      std::size_t count = 1;
      for (std::size_t k = 0; k < dimension_; ++k) count = checked_mul(count, per_axis);
      return count;
    }
    case SpaceKind::simplex: {
      const std::size_t n = simplex_divisions(h);
      return binomial(n + dimension_ - 1, dimension_ - 1);
    }
    case SpaceKind::cloud:
      return points_.size();
    case SpaceKind::product: {
      std::size_t count = 1;
      for (const auto& f : factors_) count = checked_mul(count, f.grid_size(h));
      return count;
    }
  }
  return 0;
}

std::vector<Point> SpaceDescriptor::grid(double h, std::size_t budget) const {
  budget_check(grid_size(h), budget, to_string(kind_) + " grid");
  switch (kind_) {
    case SpaceKind::box: {
      std::vector<std::vector<Point>> axes;
      for (std::size_t k = 0; k < dimension_; ++k) {
        std::vector<Point> axis;
        for (double v : axis_lattice(lo_[k], hi_[k], h)) axis.push_back(Point{v});
        axes.push_back(std::move(axis));
      }
      return cartesian(axes);
    }
    case SpaceKind::ball: {
      std::vector<std::vector<Point>> axes;
      for (std::size_t k = 0; k < dimension_; ++k) {
        std::vector<Point> axis;
        for (double v : axis_lattice(center_[k] - radius_, center_[k] + radius_, h)) {
          axis.push_back(Point{v});
        }
        axes.push_back(std::move(axis));
      }
      std::vector<Point> out;
      for (auto& p : cartesian(axes)) {
        if (contains(p)) out.push_back(std::move(p));
      }
      return out;
    }
    case SpaceKind::simplex: {
      const std::size_t n = simplex_divisions(h);
      std::vector<Point> out;
      std::vector<std::size_t> counts(dimension_, 0);
      // Enumerate compositions of n into dimension_ parts, lexicographically.
      std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t left) {
        if (k + 1 == dimension_) {
          counts[k] = left;
          Point p(dimension_);
          for (std::size_t j = 0; j < dimension_; ++j) {
            p[j] = static_cast<double>(counts[j]) / static_cast<double>(n);
          }
          out.push_back(std::move(p));
          return;
        }
        for (std::size_t c = 0; c <= left; ++c) {
          counts[k] = c;
          rec(k + 1, left - c);
        }
      };
      rec(0, n);
      return out;
    }
    case SpaceKind::cloud:
      return points_;
    case SpaceKind::product: {
      std::vector<std::vector<Point>> parts;
      for (const auto& f : factors_) parts.push_back(f.grid(h, budget));
      return cartesian(parts);
    }
  }
  return {};
}

std::optional<double> SpaceDescriptor::bracket_radius() const {
  if (kind_ == SpaceKind::ball) return radius_;
  if (kind_ == SpaceKind::box && norm_ == Norm::linf) {
    const double side = hi_[0] - lo_[0];
    for (std::size_t k = 1; k < dimension_; ++k) {
      if (std::abs((hi_[k] - lo_[k]) - side) > 1e-12) return std::nullopt;
    }
    return side / 2.0;
  }
  return std::nullopt;
}

double diameter(std::span<const Point> points, Norm norm) {
  if (points.size() < 2) return 0.0;
  const std::size_t d = points.front().size();
  if (norm == Norm::linf || (norm == Norm::l1 && d <= 12)) {
    // Exact via extreme projections: linf uses coordinate ranges, l1 uses the
    // 2^(d-1) sign patterns.
    const std::size_t patterns = norm == Norm::linf ? d : (std::size_t{1} << (d - 1));
    double best = 0.0;
    for (std::size_t s = 0; s < patterns; ++s) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& p : points) {
        double v = 0.0;
        if (norm == Norm::linf) {
          v = p[s];
        } else {
          for (std::size_t k = 0; k < d; ++k) v += (k == 0 || !((s >> (k - 1)) & 1U)) ? p[k] : -p[k];
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      best = std::max(best, hi - lo);
    }
    return best;
  }
  double best = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      best = std::max(best, distance(points[a], points[b], norm));
    }
  }
  return best;
}

namespace {

constexpr std::size_t kMaxHashedDimension = 6;
using CellKey = std::array<std::int64_t, kMaxHashedDimension>;

struct CellHash {
  std::size_t operator()(const CellKey& key) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t v : key) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

bool separated(std::span<const double> a, std::span<const double> b, Norm norm, double theta) {
  return distance(a, b, norm) > theta + kSeparationSlack;
}

PackingNet packing_brute(std::span<const Point> candidates, Norm norm, double theta) {
  PackingNet net;
  net.theta = theta;
  net.candidates = candidates.size();
  for (const auto& c : candidates) {
    bool ok = true;
    for (const auto& kept : net.points) {
      if (!separated(c, kept, norm, theta)) {
        ok = false;
        break;
      }
    }
    if (ok) net.points.push_back(c);
  }
  return net;
}

PackingNet greedy_packing(std::span<const Point> candidates, Norm norm, double theta) {
  const std::size_t d = candidates.front().size();
  for (const auto& c : candidates) {
    require(c.size() == d, ErrorKind::dimension_mismatch, "packing candidates differ in dimension");
  }
  if (d == 0 || d > kMaxHashedDimension) return packing_brute(candidates, norm, theta);

  Point origin(d, std::numeric_limits<double>::infinity());
  double extent = 0.0;
  for (const auto& c : candidates) {
    for (std::size_t k = 0; k < d; ++k) origin[k] = std::min(origin[k], c[k]);
  }
  for (const auto& c : candidates) {
    for (std::size_t k = 0; k < d; ++k) extent = std::max(extent, c[k] - origin[k]);
  }
  // A pair within theta differs by at most one cell per axis under any of
  // the supported norms.
  const double cell = theta + 2.0 * kSeparationSlack;
  if (extent / cell > 1e17) return packing_brute(candidates, norm, theta);

  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells;
  PackingNet net;
  net.theta = theta;
  net.candidates = candidates.size();

  std::size_t offsets = 1;
  for (std::size_t k = 0; k < d; ++k) offsets *= 3;

  for (const auto& c : candidates) {
    CellKey key{};
    for (std::size_t k = 0; k < d; ++k) {
      key[k] = static_cast<std::int64_t>(std::floor((c[k] - origin[k]) / cell));
    }
    bool ok = true;
    for (std::size_t o = 0; o < offsets && ok; ++o) {
      CellKey probe = key;
      std::size_t code = o;
      for (std::size_t k = 0; k < d; ++k) {
        probe[k] += static_cast<std::int64_t>(code % 3) - 1;
        code /= 3;
      }
      const auto it = cells.find(probe);
      if (it == cells.end()) continue;
      for (std::size_t idx : it->second) {
        if (!separated(c, net.points[idx], norm, theta)) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      cells[key].push_back(net.points.size());
      net.points.push_back(c);
    }
  }
  return net;
}


// Dynamic bitset over candidate indices.
class Bits {
 public:
  explicit Bits(std::size_t n) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  bool any() const {
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
  }
  // index of the lowest set bit; size() * 64 when empty
  std::size_t first() const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (words_[k] != 0) return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
    }
    return words_.size() * 64;
  }
  void and_not(const Bits& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= ~o.words_[k];
  }
  Bits operator&(const Bits& o) const {
    Bits r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= o.words_[k];
    return r;
  }
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      for (std::uint64_t w = words_[k]; w != 0; w &= w - 1) f(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
    }
  }

 private:
  std::vector<std::uint64_t> words_;
};

// Maximum packing as a maximum clique of the "separated" graph: branch and
// bound with a greedy-colouring bound, seeded with a known packing.
class MaxPacking {
 public:
  MaxPacking(std::span<const Point> candidates, Norm norm, double theta, std::size_t node_budget)
      : n_(candidates.size()), budget_(node_budget) {
    compatible_.assign(n_, Bits(n_));
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = a + 1; b < n_; ++b) {
        if (separated(candidates[a], candidates[b], norm, theta)) {
          compatible_[a].set(b);
          compatible_[b].set(a);
        }
      }
    }
    // a candidate's colour class may only grow by points it conflicts with
    separated_or_self_ = compatible_;
    for (std::size_t a = 0; a < n_; ++a) separated_or_self_[a].set(a);
  }

  // Returns false when the node budget ran out before the search finished.
  bool run(std::vector<std::size_t> seed) {
    best_ = std::move(seed);
    Bits all(n_);
    for (std::size_t i = 0; i < n_; ++i) all.set(i);
    std::vector<std::size_t> current;
    expand(all, current);
    return nodes_ <= budget_;
  }

  const std::vector<std::size_t>& best() const { return best_; }

 private:
  void expand(Bits p, std::vector<std::size_t>& current) {
    if (++nodes_ > budget_) return;
    // colour classes are sets of mutually conflicting candidates
    std::vector<std::size_t> order, colour;
    Bits uncoloured = p;
    std::size_t k = 0;
    while (uncoloured.any()) {
      ++k;
      Bits avail = uncoloured;
      for (std::size_t v = avail.first(); v < n_; v = avail.first()) {
        uncoloured.reset(v);
        order.push_back(v);
        colour.push_back(k);
        avail.and_not(separated_or_self_[v]);
      }
    }
    for (std::size_t idx = order.size(); idx-- > 0;) {
      if (current.size() + colour[idx] <= best_.size() || nodes_ > budget_) return;
      const std::size_t v = order[idx];
      current.push_back(v);
      const Bits next = p & compatible_[v];
      if (next.any()) {
        expand(next, current);
      } else if (current.size() > best_.size()) {
        best_ = current;
      }
      current.pop_back();
      p.reset(v);
    }
  }

  std::size_t n_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  std::vector<Bits> compatible_;
  std::vector<Bits> separated_or_self_;
  std::vector<std::size_t> best_;
};

}  // namespace

PackingNet packing_net(std::span<const Point> candidates, Norm norm, double theta) {
  require(theta > 0.0, ErrorKind::invalid_argument, "packing scale must be positive");
  if (candidates.empty()) return PackingNet{{}, theta, 0};
  PackingNet net = greedy_packing(candidates, norm, theta);
  net.greedy_size = net.size();
  if (candidates.size() > kExactPackingLimit) return net;
  // the greedy net keeps candidates in order, so its indices are recoverable
  std::vector<std::size_t> seed;
  for (std::size_t i = 0, j = 0; i < candidates.size() && j < net.size(); ++i) {
    if (candidates[i] == net.points[j]) {
      seed.push_back(i);
      ++j;
    }
  }
  MaxPacking search(candidates, norm, theta, kExactPackingNodes);
  net.exact = search.run(seed);
  auto best = search.best();
  std::sort(best.begin(), best.end());
  net.points.clear();
  for (std::size_t i : best) net.points.push_back(candidates[i]);
  return net;
}

PackingNet packing_net(const SpaceDescriptor& space, double theta, double h, std::size_t budget) {
  require(theta > 0.0, ErrorKind::invalid_argument, "packing scale must be positive");
  require(h > 0.0, ErrorKind::invalid_argument, "grid resolution must be positive");
  const auto candidates = space.grid(h, budget);
  return packing_net(candidates, space.norm(), theta);
}

EntropyResult entropy_number(const SpaceDescriptor& space, double theta, double h,
                             std::size_t budget) {
  const PackingNet net = packing_net(space, theta, h, budget);
  EntropyResult out;
  out.size = net.size();
  out.entropy = std::log(static_cast<double>(net.size()));
  if (const auto r = space.bracket_radius(); r && *r > 0.0) {
    const double d = static_cast<double>(space.dimension());
    EntropyBracket b;
    b.lower = theta < *r ? d * std::log(*r / theta) : 0.0;
    b.upper = d * std::log(1.0 + 2.0 * *r / theta);
    out.bracket = b;
  }
  return out;
}

namespace {

double a_alpha_term(double d_alpha, int i, double alpha, double h_fine, double h_coarse) {
  const double weight = d_alpha / std::pow(2.0, static_cast<double>(i) * alpha);
  const double ii = static_cast<double>(i);
  return weight * std::sqrt(h_fine + h_coarse + std::log(ii * (ii + 1.0)));
}

AAlphaResult a_alpha_impl(std::span<const Point> points, Norm norm, double alpha, double diam,
                          const AAlphaOptions& options) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::invalid_argument,
          "Hoelder exponent must lie in (0, 1]");
  require(options.max_index >= 1, ErrorKind::invalid_argument, "truncation index must be >= 1");
  AAlphaResult out;
  out.diameter = diam;
  out.candidates = points.size();
  if (diam <= 0.0 || points.size() < 2) {
    out.entropies = {0.0};
    return out;
  }
  const double d_alpha = std::pow(diam, alpha);
  const double saturated = std::log(static_cast<double>(points.size()));
  bool saturated_reached = false;
  auto entropy_at = [&](int k) {
    if (saturated_reached) return saturated;
    const double theta = diam / std::pow(2.0, k);
    const std::size_t size = packing_net(points, norm, theta).size();
    // Once every candidate is kept, every smaller scale keeps them all too.
    if (size == points.size()) saturated_reached = true;
    return std::log(static_cast<double>(size));
  };

  out.entropies.push_back(entropy_at(0));
  double sum = 0.0;
  int i = 1;
  for (;; ++i) {
    out.entropies.push_back(entropy_at(i));
    const double term = a_alpha_term(d_alpha, i, alpha, out.entropies[i], out.entropies[i - 1]);
    sum += term;
    if (term < options.relative_tolerance * sum || i >= options.max_index) break;
  }
  out.value = sum;
  out.truncation = i;

  double tail = 0.0;
  for (long j = i + 1; j < i + 10'000'000L; ++j) {
    const double term = a_alpha_term(d_alpha, static_cast<int>(j), alpha, saturated, saturated);
    tail += term;
    if (term < 1e-17 * (sum + tail)) break;
  }
  out.tail_bound = tail;
  return out;
}

}  // namespace

AAlphaResult a_alpha(std::span<const Point> points, Norm norm, double alpha,
                     const AAlphaOptions& options) {
  return a_alpha_impl(points, norm, alpha, diameter(points, norm), options);
}

AAlphaResult a_alpha(const SpaceDescriptor& space, double alpha, const AAlphaOptions& options) {
  const auto points = space.grid(options.h, options.budget);
  AAlphaResult out = a_alpha_impl(points, space.norm(), alpha, space.diameter(), options);
  out.grid_approximate = space.kind() != SpaceKind::cloud;
  return out;
}

double distance_to_set(std::span<const double> x, std::span<const Point> b, Norm norm) {
  require(!b.empty(), ErrorKind::invalid_argument, "distance to an empty set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : b) best = std::min(best, distance(x, p, norm));
  return best;
}

double set_deviation(std::span<const Point> a, std::span<const Point> b, Norm norm) {
  require(!a.empty() && !b.empty(), ErrorKind::invalid_argument,
          "set deviation needs two nonempty sets");
  double worst = 0.0;
  for (const auto& p : a) worst = std::max(worst, distance_to_set(p, b, norm));
  return worst;
}

}  // namespace saa
