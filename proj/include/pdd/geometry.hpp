#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pdd/error.hpp"

namespace pdd {

/// Largest spatial dimension supported by the fixed-capacity point types.
inline constexpr int kMaxDim = 3;

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
template <typename Scalar>
using SquareT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using Point = PointT<double>;
using Square = SquareT<double>;

enum class FaceKind { Absorbing, Reflecting };
enum class EventKind { None, Absorbing, Reflecting };

/// Faces are numbered 2*axis for the lower face and 2*axis+1 for the upper.
constexpr int face_axis(int face_id) { return face_id / 2; }
constexpr bool face_is_upper(int face_id) { return (face_id % 2) == 1; }

template <typename Scalar>
struct BoundaryEventT {
  EventKind kind = EventKind::None;
  int face_id = -1;
  PointT<Scalar> hit_point;
};

/// Axis-aligned box with a boundary condition tag per face.
template <typename Scalar>
class BoxDomainT {
 public:
  using Vector = PointT<Scalar>;

  BoxDomainT() = default;

  BoxDomainT(Vector lo, Vector hi, std::vector<FaceKind> faces = {})
      : lo_(std::move(lo)), hi_(std::move(hi)), faces_(std::move(faces)) {
    require(lo_.size() > 0 && lo_.size() <= kMaxDim, ErrorKind::InvalidArgument,
            "box dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    require(lo_.size() == hi_.size(), ErrorKind::InvalidArgument, "lo/hi dimension mismatch");
    for (Eigen::Index i = 0; i < lo_.size(); ++i) {
      require(lo_[i] < hi_[i], ErrorKind::InvalidArgument, "box requires lo < hi on every axis");
    }
    if (faces_.empty()) faces_.assign(static_cast<std::size_t>(2 * dim()), FaceKind::Absorbing);
    require(static_cast<int>(faces_.size()) == 2 * dim(), ErrorKind::InvalidArgument,
            "box needs one face kind per face");
  }

  static BoxDomainT interval(Scalar lo, Scalar hi, FaceKind left = FaceKind::Absorbing,
                             FaceKind right = FaceKind::Absorbing) {
    Vector a(1), b(1);
    a << lo;
    b << hi;
    return BoxDomainT(a, b, {left, right});
  }

  static BoxDomainT rectangle(Scalar x_lo, Scalar x_hi, Scalar y_lo, Scalar y_hi) {
    Vector a(2), b(2);
    a << x_lo, y_lo;
    b << x_hi, y_hi;
    return BoxDomainT(a, b);
  }

  int dim() const { return static_cast<int>(lo_.size()); }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  Scalar lo(int axis) const { return lo_[axis]; }
  Scalar hi(int axis) const { return hi_[axis]; }
  Scalar width(int axis) const { return hi_[axis] - lo_[axis]; }

  FaceKind face_kind(int face_id) const { return faces_.at(static_cast<std::size_t>(face_id)); }
  const std::vector<FaceKind>& face_kinds() const { return faces_; }
  void set_face_kind(int face_id, FaceKind kind) { faces_.at(static_cast<std::size_t>(face_id)) = kind; }
  Scalar face_value(int face_id) const {
    return face_is_upper(face_id) ? hi_[face_axis(face_id)] : lo_[face_axis(face_id)];
  }

  bool has_absorbing_face() const {
    return std::any_of(faces_.begin(), faces_.end(), [](FaceKind k) { return k == FaceKind::Absorbing; });
  }
  bool all_absorbing() const {
    return std::all_of(faces_.begin(), faces_.end(), [](FaceKind k) { return k == FaceKind::Absorbing; });
  }

  Scalar volume() const { return (hi_ - lo_).prod(); }
  Scalar diameter() const { return (hi_ - lo_).norm(); }

  bool contains_strictly(const Vector& x) const {
    return ((x.array() > lo_.array()) && (x.array() < hi_.array())).all();
  }

  /// Distance from an interior point to the closest face.
  Scalar distance_to_boundary(const Vector& x) const {
    return std::min((x - lo_).minCoeff(), (hi_ - x).minCoeff());
  }

  int nearest_face(const Vector& x) const {
    int best = 0;
    Scalar best_dist = std::numeric_limits<Scalar>::infinity();
    for (int face = 0; face < 2 * dim(); ++face) {
      const Scalar d = std::abs(x[face_axis(face)] - face_value(face));
      if (d < best_dist) {
        best_dist = d;
        best = face;
      }
    }
    return best;
  }

 private:
  Vector lo_;
  Vector hi_;
  std::vector<FaceKind> faces_;
};

using BoxDomain = BoxDomainT<double>;
using BoundaryEvent = BoundaryEventT<double>;

/// Boundary test. A point is interior iff it lies strictly inside every
/// slab; otherwise the face with the largest overshoot is reported (ties go
/// to the lowest face id). The hit point sits on that face; coordinates that
/// also violate another axis are pulled one ulp inside so the hit point
/// classifies back onto the same face.
template <typename Scalar>
BoundaryEventT<Scalar> classify_point(const BoxDomainT<Scalar>& domain, const PointT<Scalar>& x) {
  BoundaryEventT<Scalar> event;
  Scalar best_overshoot = -std::numeric_limits<Scalar>::infinity();
  for (int axis = 0; axis < domain.dim(); ++axis) {
    const Scalar below = domain.lo(axis) - x[axis];
    const Scalar above = x[axis] - domain.hi(axis);
    if (below >= 0 && below > best_overshoot) {
      best_overshoot = below;
      event.face_id = 2 * axis;
    }
    if (above >= 0 && above > best_overshoot) {
      best_overshoot = above;
      event.face_id = 2 * axis + 1;
    }
  }
  if (event.face_id < 0) {
    event.hit_point = x;
    return event;
  }
  event.kind = domain.face_kind(event.face_id) == FaceKind::Absorbing ? EventKind::Absorbing
                                                                       : EventKind::Reflecting;
  event.hit_point = x;
  if (best_overshoot > 0) {
    const int chosen_axis = face_axis(event.face_id);
    for (int axis = 0; axis < domain.dim(); ++axis) {
      if (axis == chosen_axis) continue;
      const Scalar lo = domain.lo(axis);
      const Scalar hi = domain.hi(axis);
      if (event.hit_point[axis] <= lo) event.hit_point[axis] = std::nextafter(lo, hi);
      if (event.hit_point[axis] >= hi) event.hit_point[axis] = std::nextafter(hi, lo);
    }
  }
  event.hit_point[face_axis(event.face_id)] = domain.face_value(event.face_id);
  return event;
}

template <typename Scalar>
struct PartitionT {
  BoxDomainT<Scalar> parent;
  int axis = 0;
  std::vector<Scalar> cut_points;
  std::vector<BoxDomainT<Scalar>> subdomains;

  std::size_t size() const { return subdomains.size(); }
};

using Partition = PartitionT<double>;

/// Splits `domain` into `p` equal-width strips along `axis`. Faces created by
/// a cut are absorbing (they carry interface Dirichlet data); outer faces keep
/// the parent's tags.
template <typename Scalar>
PartitionT<Scalar> partition_box(const BoxDomainT<Scalar>& domain, int axis, int p) {
  require(p >= 1, ErrorKind::InvalidArgument, "subdomain count must be >= 1");
  require(axis >= 0 && axis < domain.dim(), ErrorKind::InvalidArgument, "partition axis out of range");

  PartitionT<Scalar> partition;
  partition.parent = domain;
  partition.axis = axis;
  const Scalar lo = domain.lo(axis);
  const Scalar hi = domain.hi(axis);
  for (int k = 1; k < p; ++k) {
    partition.cut_points.push_back(lo + (hi - lo) * Scalar(k) / Scalar(p));
  }

  for (int k = 0; k < p; ++k) {
    auto sub_lo = domain.lo();
    auto sub_hi = domain.hi();
    auto faces = domain.face_kinds();
    if (k > 0) {
      sub_lo[axis] = partition.cut_points[static_cast<std::size_t>(k - 1)];
      faces[static_cast<std::size_t>(2 * axis)] = FaceKind::Absorbing;
    }
    if (k < p - 1) {
      sub_hi[axis] = partition.cut_points[static_cast<std::size_t>(k)];
      faces[static_cast<std::size_t>(2 * axis + 1)] = FaceKind::Absorbing;
    }
    partition.subdomains.emplace_back(sub_lo, sub_hi, faces);
  }
  return partition;
}

/// What the second index of an interface node measures.
enum class LevelKind {
  Time,        ///< time levels T0 = 0 < T1 < ... (parabolic problems, 1D cuts)
  Transverse,  ///< positions along a cut line (2D elliptic problems)
};

/// Interface nodes: one row per cut, one column per level.
template <typename Scalar>
class InterfaceGridT {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  InterfaceGridT() = default;
  InterfaceGridT(PartitionT<Scalar> partition, std::vector<Scalar> levels, LevelKind kind)
      : partition_(std::move(partition)), levels_(std::move(levels)), kind_(kind) {
    const auto rows = static_cast<Eigen::Index>(partition_.cut_points.size());
    const auto cols = static_cast<Eigen::Index>(levels_.size());
    values_ = Matrix::Zero(rows, cols);
    std_errors_ = Matrix::Zero(rows, cols);
    samples_ = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows, cols);
    known_ = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, false);
  }

  const PartitionT<Scalar>& partition() const { return partition_; }
  const std::vector<Scalar>& levels() const { return levels_; }
  const std::vector<Scalar>& cuts() const { return partition_.cut_points; }
  LevelKind level_kind() const { return kind_; }

  std::size_t cut_count() const { return partition_.cut_points.size(); }
  std::size_t level_count() const { return levels_.size(); }
  std::size_t node_count() const { return cut_count() * level_count(); }

  /// Spatial location of node (cut, level). For time levels this is the cut
  /// point itself; for transverse levels the level is the coordinate along
  /// the cut line.
  PointT<Scalar> node_point(std::size_t cut, std::size_t level) const {
    const auto& parent = partition_.parent;
    PointT<Scalar> x(parent.dim());
    if (kind_ == LevelKind::Time) {
      x = (parent.lo() + parent.hi()) / Scalar(2);
    } else {
      x.setZero();
      x[1 - partition_.axis] = levels_[level];
    }
    x[partition_.axis] = partition_.cut_points[cut];
    return x;
  }

  void set_value(std::size_t cut, std::size_t level, Scalar value, Scalar std_error, long long n) {
    const auto r = static_cast<Eigen::Index>(cut);
    const auto c = static_cast<Eigen::Index>(level);
    values_(r, c) = value;
    std_errors_(r, c) = std_error;
    samples_(r, c) = n;
    known_(r, c) = true;
  }

  bool has_value(std::size_t cut, std::size_t level) const {
    return known_(static_cast<Eigen::Index>(cut), static_cast<Eigen::Index>(level));
  }
  bool complete() const { return known_.size() == 0 || known_.all(); }

  const Matrix& values() const { return values_; }
  const Matrix& std_errors() const { return std_errors_; }
  const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>& samples() const { return samples_; }

 private:
  PartitionT<Scalar> partition_;
  std::vector<Scalar> levels_;
  LevelKind kind_ = LevelKind::Time;
  Matrix values_;
  Matrix std_errors_;
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> samples_;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> known_;
};

using InterfaceGrid = InterfaceGridT<double>;

/// One node per (cut point, time level); values start unset.
template <typename Scalar>
InterfaceGridT<Scalar> build_interface_grid(const PartitionT<Scalar>& partition,
                                            const std::vector<Scalar>& time_levels) {
  require(!time_levels.empty() && time_levels.front() == Scalar(0), ErrorKind::InvalidArgument,
          "time levels must start at 0");
  for (std::size_t i = 1; i < time_levels.size(); ++i) {
    require(time_levels[i] > time_levels[i - 1], ErrorKind::InvalidArgument,
            "time levels must be strictly increasing");
  }
  return InterfaceGridT<Scalar>(partition, time_levels, LevelKind::Time);
}

/// Nodes along each cut line of a 2D partition, at the given coordinates of
/// the transverse axis.
template <typename Scalar>
InterfaceGridT<Scalar> build_transverse_grid(const PartitionT<Scalar>& partition,
                                             const std::vector<Scalar>& positions) {
  require(partition.parent.dim() == 2, ErrorKind::InvalidArgument,
          "transverse interface grids need a 2D partition");
  const int other = 1 - partition.axis;
  require(!positions.empty(), ErrorKind::InvalidArgument, "no transverse positions");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    require(positions[i] >= partition.parent.lo(other) && positions[i] <= partition.parent.hi(other),
            ErrorKind::InvalidArgument, "transverse position outside the domain");
    if (i > 0) {
      require(positions[i] > positions[i - 1], ErrorKind::InvalidArgument,
              "transverse positions must be strictly increasing");
    }
  }
  return InterfaceGridT<Scalar>(partition, positions, LevelKind::Transverse);
}

template <typename Scalar>
std::vector<Scalar> uniform_levels(Scalar lo, Scalar hi, std::size_t count) {
  require(count >= 2, ErrorKind::InvalidArgument, "need at least two levels");
  std::vector<Scalar> levels(count);
  for (std::size_t i = 0; i < count; ++i) {
    levels[i] = lo + (hi - lo) * Scalar(i) / Scalar(count - 1);
  }
  levels.back() = hi;
  return levels;
}

}  // namespace pdd
