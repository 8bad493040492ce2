#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace saa {

using Point = std::vector<double>;

// Slack used by every set-membership test (grid sets, feasibility flags).
inline constexpr double kSetTolerance = 1e-12;
// Two points are "separated at scale theta" when dist > theta + kSeparationSlack.
inline constexpr double kSeparationSlack = 1e-12;
inline constexpr std::size_t kDefaultGridBudget = 2'000'000;
inline constexpr std::size_t kExactPackingLimit = 128;
inline constexpr std::size_t kExactPackingNodes = 200'000;

enum class Norm { l1, l2, linf };

std::string to_string(Norm norm);
Norm norm_from_string(const std::string& name);

double norm(std::span<const double> v, Norm kind);
double distance(std::span<const double> a, std::span<const double> b, Norm kind);

enum class SpaceKind { box, ball, simplex, cloud, product };

std::string to_string(SpaceKind kind);

// Compact subset of R^d with a declared norm. Immutable once built; the
// diameter is computed at construction.
class SpaceDescriptor {
 public:
  static SpaceDescriptor box(Point lo, Point hi, Norm norm = Norm::linf);
  static SpaceDescriptor ball(Point center, double radius, Norm norm = Norm::l2);
  static SpaceDescriptor simplex(std::size_t dimension, Norm norm = Norm::l1);
  static SpaceDescriptor cloud(std::vector<Point> points, Norm norm = Norm::linf);
  // Cartesian product; coordinates are concatenated in factor order and the
  // declared norm is applied to the concatenated vector.
  static SpaceDescriptor product(std::vector<SpaceDescriptor> factors, Norm norm);

  SpaceKind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  Norm norm() const { return norm_; }
  double diameter() const { return diameter_; }

  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  const Point& center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<SpaceDescriptor>& factors() const { return factors_; }

  bool contains(std::span<const double> x, double tol = kSetTolerance) const;

  // Euclidean projection onto the set (exact for every kind; nearest point
  // for clouds).
  Point project(std::span<const double> x) const;

  // Number of points grid(h) would produce, without materialising them.
  std::size_t grid_size(double h) const;

  // Grid representation at resolution h: boxes use an axis lattice that
  // includes both endpoints, balls the bounding-box lattice filtered by
  // membership, simplices the lattice {k/n : sum k = n} with n = round(1/h),
  // clouds their own points. Throws a budget error when the count exceeds
  // `budget`.
  std::vector<Point> grid(double h, std::size_t budget = kDefaultGridBudget) const;

  // Equal-sided boxes and balls: radius for the analytic entropy bracket.
  std::optional<double> bracket_radius() const;

 private:
  SpaceDescriptor() = default;
  void compute_diameter();

  SpaceKind kind_ = SpaceKind::box;
  std::size_t dimension_ = 0;
  Norm norm_ = Norm::linf;
  double diameter_ = 0.0;
  Point lo_, hi_, center_;
  double radius_ = 0.0;
  std::vector<Point> points_;
  std::vector<SpaceDescriptor> factors_;
};

// Lattice coordinates along [lo, hi] at step h, endpoints included.
std::vector<double> axis_lattice(double lo, double hi, double h);

double diameter(std::span<const Point> points, Norm norm);

struct PackingNet {
  std::vector<Point> points;
  double theta = 0.0;
  std::size_t candidates = 0;
  std::size_t greedy_size = 0;  // size of the greedy seed net
  bool exact = false;           // points form a maximum packing of the candidates

  std::size_t size() const { return points.size(); }
};

// Maximal theta-packing. A greedy pass over the candidates in their given
// order keeps each candidate separated from every kept point; sets of at
// most kExactPackingLimit candidates are then enlarged to a maximum packing
// by branch and bound, which stops after kExactPackingNodes nodes and
// keeps the best net found (exact = false).
PackingNet packing_net(std::span<const Point> candidates, Norm norm, double theta);
PackingNet packing_net(const SpaceDescriptor& space, double theta, double h,
                       std::size_t budget = kDefaultGridBudget);

struct EntropyBracket {
  double lower = 0.0;
  double upper = 0.0;
};

struct EntropyResult {
  std::size_t size = 0;
  double entropy = 0.0;
  std::optional<EntropyBracket> bracket;
};

EntropyResult entropy_number(const SpaceDescriptor& space, double theta, double h,
                             std::size_t budget = kDefaultGridBudget);

struct AAlphaOptions {
  int max_index = 60;
  double relative_tolerance = 1e-9;
  double h = 0.01;  // construction grid resolution
  std::size_t budget = kDefaultGridBudget;
};

struct AAlphaResult {
  double value = 0.0;
  double diameter = 0.0;
  int truncation = 0;
  // Bound on the omitted terms using the saturated (all-candidates) entropy.
  double tail_bound = 0.0;
  // entropies[k] = H(D / 2^k), k = 0..truncation.
  std::vector<double> entropies;
  std::size_t candidates = 0;
  // True when the set was represented by a construction grid.
  bool grid_approximate = false;
};

AAlphaResult a_alpha(std::span<const Point> points, Norm norm, double alpha,
                     const AAlphaOptions& options = {});
AAlphaResult a_alpha(const SpaceDescriptor& space, double alpha,
                     const AAlphaOptions& options = {});

// sup_{a in A} min_{b in B} ||a - b||.
double set_deviation(std::span<const Point> a, std::span<const Point> b, Norm norm);

// min_{b in B} ||x - b||.
double distance_to_set(std::span<const double> x, std::span<const Point> b, Norm norm);

}  // namespace saa
