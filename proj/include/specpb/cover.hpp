// Disk covers of a flat torus or a plane rectangle, their intersection
// graphs and colorings, subordinate partitions of unity with analytic
// gradients, and the grid estimate of nu_c.
#pragma once

#include "specpb/inf_one.hpp"
#include "specpb/json_io.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace specpb {

struct Domain {
  enum class Kind { Torus, Rect };
  Kind kind = Kind::Torus;
  Eigen::Vector2d lo{0.0, 0.0};  ///< torus: origin; rect: lower corner
  Eigen::Vector2d hi{1.0, 1.0};  ///< torus: lo + (Lx, Ly); rect: upper corner

  static Domain torus(double lx, double ly);
  static Domain rect(double x0, double y0, double x1, double y1);

  Eigen::Vector2d extent() const { return hi - lo; }
  /// b - a, reduced to the shortest periodic representative on the torus.
  Eigen::Vector2d displacement(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
  double distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
    return displacement(a, b).norm();
  }
  /// Grid point (i, j) of an n x n sample grid: x0 + i L / n on the torus,
  /// x0 + i (x1 - x0) / (n - 1) on the rectangle.
  Eigen::Vector2d grid_point(int i, int j, int n) const;
};

struct Ball {
  std::string id;
  Eigen::Vector2d c;
  double r = 0.0;
};

struct BallCover {
  std::string id;
  Domain domain;
  std::vector<Ball> balls;

  /// Throws InvalidParameter on nonpositive radii, non-finite data, and
  /// disks that wrap around the torus (r >= min(Lx, Ly) / 2).
  void validate() const;
  std::size_t size() const { return balls.size(); }
  double max_radius() const;
};

/// {domain: {torus: [Lx, Ly]} | {rect: [x0, y0, x1, y1]}, balls: [{c: [x, y], r}]}
BallCover cover_from_json(const Json& j);
Json to_json(const BallCover& cover);

/// k x k disks on the torus [0, Lx) x [0, Ly) centred at cell centres.  The
/// radius is (1 + overlap) times the covering radius of a cell, half its
/// diagonal.
BallCover torus_grid_cover(int k, double lx, double ly, double overlap);

struct IntersectionGraph {
  std::vector<std::vector<int>> adjacency;  ///< sorted neighbour lists
  int max_degree = 0;                       ///< d of d-regularity

  std::size_t edge_count() const;
};

/// Edge iff the closed disks meet: dist(c_i, c_j) <= r_i + r_j.
IntersectionGraph intersection_graph(const BallCover& cover);
int d_regularity(const BallCover& cover);

struct Coloring {
  std::vector<int> color;                  ///< per ball
  std::vector<std::vector<int>> families;  ///< balls per color
};

/// Greedy coloring in descending-degree order (ties by index), lowest free color.
Coloring color_disjoint_families(const BallCover& cover, const IntersectionGraph& graph);
Coloring color_disjoint_families(const BallCover& cover);
/// True when the disks of every family are pairwise disjoint as closed sets.
bool families_disjoint(const BallCover& cover, const Coloring& coloring);

enum class Cutoff { Polynomial, Exponential };
std::string to_string(Cutoff c);
Cutoff cutoff_from_string(const std::string& s);

class NotACover : public std::runtime_error {
public:
  NotACover(const std::string& what, Eigen::Vector2d witness)
      : std::runtime_error(what), witness_(std::move(witness)) {}
  const Eigen::Vector2d& witness() const { return witness_; }

private:
  Eigen::Vector2d witness_;
};

/// Values and gradients of the members active at one point.
struct PartitionSample {
  std::vector<int> active;  ///< members with f_i > 0, ascending
  Eigen::VectorXd f;
  Eigen::VectorXd fx;       ///< d f_i / dx
  Eigen::VectorXd fy;       ///< d f_i / dy
};

/// f_i = phi_i / sum_j phi_j with phi_i(z) = phi(|z - c_i| / (s r_i)), where
/// phi(t) = (1 - t^2)^3 or exp(-1 / (1 - t^2)) for t < 1 and s is the
/// support scale.  s = 1 gives a partition subordinate to the cover.
class PartitionOfUnity {
public:
  PartitionOfUnity(BallCover cover, Cutoff cutoff = Cutoff::Polynomial, double support_scale = 1.0);

  const BallCover& cover() const { return cover_; }
  Cutoff cutoff() const { return cutoff_; }
  double support_scale() const { return scale_; }
  bool subordinate() const { return scale_ <= 1.0; }
  std::size_t size() const { return cover_.size(); }

  /// Throws NotACover at the first grid point (row-major) where no bump is
  /// positive.
  void check_coverage(int grid) const;

  PartitionSample sample(const Eigen::Vector2d& z) const;
  /// Same, looking only at `candidates` (ascending member ids that include
  /// every member whose bump may be positive at z).
  PartitionSample sample(const Eigen::Vector2d& z, const std::vector<int>& candidates) const;
  /// All L members at z.
  Eigen::VectorXd values(const Eigen::Vector2d& z) const;
  /// Dense L x L matrix B_ij = {f_i, f_j}(z) = d_x f_i d_y f_j - d_y f_i d_x f_j.
  Eigen::MatrixXd bracket_matrix(const Eigen::Vector2d& z) const;
  /// Bracket restricted to the active members of `s`.
  static Eigen::MatrixXd bracket_matrix(const PartitionSample& s);

private:
  /// Bump value and its gradient with respect to z for member i.
  bool bump(int i, const Eigen::Vector2d& z, double& phi, Eigen::Vector2d& grad) const;

  BallCover cover_;
  Cutoff cutoff_;
  double scale_;
};

struct PartitionCheck {
  double max_sum_error = 0.0;     ///< max |sum f_i - 1|
  double min_value = 0.0;         ///< min f_i
  bool subordinate = true;        ///< f_i > 0 only inside closed disk i
  std::optional<Eigen::Vector2d> subordination_witness;
};

/// Checks the partition identity, positivity and subordination on the grid.
PartitionCheck check_partition(const PartitionOfUnity& pou, int grid);

struct NuOptions {
  int grid = 512;
  InfOneOptions inf_one;
  int threads = 0;           ///< 0: hardware concurrency
  bool keep_field = false;   ///< store the norm at every grid point
};

struct NuReport {
  double nu_c = 0.0;
  Eigen::Vector2d argmax{0.0, 0.0};
  int argmax_i = 0;
  int argmax_j = 0;
  Eigen::VectorXi x;         ///< full-length sign witnesses
  Eigen::VectorXi y;
  int grid = 0;
  bool exact = true;         ///< every grid point solved by enumeration
  int max_active = 0;        ///< largest number of members active at one point
  std::vector<double> field; ///< row-major, index i * grid + j, when requested
};

/// max over grid points of the infinity-to-one norm of B(z).  The result is
/// deterministic: each thread reduces a fixed block of rows and ties go to
/// the lowest grid index.
NuReport nu_c(const PartitionOfUnity& pou, const NuOptions& options = {});

enum class CheckStatus { Pass, Fail, Skipped };
std::string to_string(CheckStatus s);

struct LowerBoundReport {
  CheckStatus status = CheckStatus::Skipped;
  std::string reason;
  int d = 0;
  double r = 0.0;
  double bound = 0.0;        ///< 1 / (2 d^2 pi r^2)
  double nu_c = 0.0;
  double grid_slack = 0.01;
  bool small_energy_asserted = false;
  bool subordinate = true;
};

/// PASS iff nu_c >= bound * (1 - grid_slack).  Skipped when the partition is
/// not subordinate or d = 0.
LowerBoundReport check_lower_bound(const PartitionOfUnity& pou, const NuReport& nu, int d,
                                   bool small_energy_asserted, double grid_slack = 0.01);

/// Least-squares slope of log(values) against log(radii).
double loglog_slope(const std::vector<double>& radii, const std::vector<double>& values);

Json to_json(const IntersectionGraph& g, const Coloring& c);
Json to_json(const NuReport& r);
Json to_json(const LowerBoundReport& r);

}  // namespace specpb
