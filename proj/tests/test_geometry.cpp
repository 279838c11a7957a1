#include <doctest.h>

#include "pdd/geometry.hpp"
#include "pdd/polynomial.hpp"

using namespace pdd;

namespace {

Point p2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

}  // namespace

TEST_CASE("box construction validates bounds") {
  CHECK_THROWS_AS(BoxDomain::interval(1.0, 1.0), Error);
  CHECK_THROWS_AS(BoxDomain::interval(2.0, 1.0), Error);
  Point lo(2), hi(2);
  lo << 0, 0;
  hi << 1, 1;
  CHECK_THROWS_AS(BoxDomain(lo, hi, {FaceKind::Absorbing}), Error);

  const BoxDomain box = BoxDomain::rectangle(0, 2, -1, 1);
  CHECK(box.dim() == 2);
  CHECK(box.volume() == doctest::Approx(4.0));
  CHECK(box.all_absorbing());
  CHECK(box.face_value(0) == 0.0);
  CHECK(box.face_value(1) == 2.0);
  CHECK(box.face_value(2) == -1.0);
  CHECK(box.face_value(3) == 1.0);
}

TEST_CASE("classify_point reports interior points as None") {
  const BoxDomain box = BoxDomain::rectangle(0, 1, 0, 1);
  const auto event = classify_point(box, p2(0.3, 0.7));
  CHECK(event.kind == EventKind::None);
  CHECK(event.face_id == -1);
}

TEST_CASE("classify_point picks the face with the largest overshoot") {
  BoxDomain box = BoxDomain::rectangle(0, 1, 0, 1);
  box.set_face_kind(3, FaceKind::Reflecting);

  auto event = classify_point(box, p2(1.2, 0.5));
  CHECK(event.kind == EventKind::Absorbing);
  CHECK(event.face_id == 1);
  CHECK(event.hit_point[0] == 1.0);
  CHECK(event.hit_point[1] == 0.5);

  event = classify_point(box, p2(1.05, 1.3));
  CHECK(event.kind == EventKind::Reflecting);
  CHECK(event.face_id == 3);
  CHECK(event.hit_point[1] == 1.0);
  CHECK(event.hit_point[0] < 1.0);
}

TEST_CASE("equal overshoots go to the lowest face id") {
  const BoxDomain box = BoxDomain::rectangle(0, 1, 0, 1);
  const auto event = classify_point(box, p2(-0.25, -0.25));
  CHECK(event.face_id == 0);
}

TEST_CASE("classify_point is idempotent on hit points") {
  BoxDomain box = BoxDomain::rectangle(-1, 1, 0, 2);
  box.set_face_kind(0, FaceKind::Reflecting);
  const double probes[][2] = {{1.5, 1.0}, {-3.0, 3.0}, {0.2, -0.01}, {2.0, 2.0}, {-1.0, 0.5}, {1.0, 2.0}};
  for (const auto& q : probes) {
    const auto first = classify_point(box, p2(q[0], q[1]));
    REQUIRE(first.kind != EventKind::None);
    const auto second = classify_point(box, first.hit_point);
    CHECK(second.face_id == first.face_id);
    CHECK(second.kind == first.kind);
    CHECK((second.hit_point - first.hit_point).norm() == 0.0);
  }
}

TEST_CASE("partition_box cuts into equal strips with absorbing cut faces") {
  const BoxDomain box = BoxDomain::interval(-2000, 2000, FaceKind::Reflecting, FaceKind::Absorbing);
  const Partition part = partition_box(box, 0, 4);
  REQUIRE(part.size() == 4);
  REQUIRE(part.cut_points.size() == 3);
  CHECK(part.cut_points[0] == -1000.0);
  CHECK(part.cut_points[1] == 0.0);
  CHECK(part.cut_points[2] == 1000.0);
  CHECK(part.subdomains[0].face_kind(0) == FaceKind::Reflecting);
  CHECK(part.subdomains[0].face_kind(1) == FaceKind::Absorbing);
  CHECK(part.subdomains[1].face_kind(0) == FaceKind::Absorbing);
  CHECK(part.subdomains[3].hi(0) == 2000.0);
  double total = 0.0;
  for (const auto& sub : part.subdomains) total += sub.volume();
  CHECK(total == doctest::Approx(box.volume()));

  CHECK_THROWS_AS(partition_box(box, 0, 0), Error);
  CHECK_THROWS_AS(partition_box(box, 1, 2), Error);
  CHECK(partition_box(box, 0, 1).cut_points.empty());
}

TEST_CASE("interface grid bookkeeping") {
  const Partition part = partition_box(BoxDomain::interval(0, 4), 0, 4);
  InterfaceGrid grid = build_interface_grid(part, uniform_levels(0.0, 1.0, 5));
  CHECK(grid.cut_count() == 3);
  CHECK(grid.level_count() == 5);
  CHECK(grid.node_count() == 15);
  CHECK_FALSE(grid.complete());
  CHECK(grid.node_point(1, 3)[0] == 2.0);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t j = 0; j < 5; ++j) grid.set_value(k, j, 1.0, 0.0, 10);
  }
  CHECK(grid.complete());

  CHECK_THROWS_AS(build_interface_grid(part, std::vector<double>{0.1, 0.5}), Error);
  CHECK_THROWS_AS(build_interface_grid(part, std::vector<double>{0.0, 0.5, 0.5}), Error);
}

TEST_CASE("transverse grids place nodes along the cut line") {
  const Partition part = partition_box(BoxDomain::rectangle(0, 1, 0, 1), 0, 2);
  const InterfaceGrid grid = build_transverse_grid(part, uniform_levels(0.0, 1.0, 5));
  const Point x = grid.node_point(0, 2);
  CHECK(x[0] == 0.5);
  CHECK(x[1] == 0.5);
  CHECK_THROWS_AS(build_transverse_grid(partition_box(BoxDomain::interval(0, 1), 0, 2), {0.5}), Error);
}

TEST_CASE("least-squares polynomial reproduces polynomials") {
  const std::vector<double> x = uniform_levels(0.0, 1.0, 11);
  std::vector<double> y;
  for (double t : x) y.push_back(1.0 - 2.0 * t + 3.0 * t * t);
  for (int degree = 2; degree <= 10; ++degree) {
    const Polynomial p = fit_least_squares<double>(x, y, degree);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(p(x[i]) == doctest::Approx(y[i]).epsilon(1e-10));
    CHECK(p(0.55) == doctest::Approx(1.0 - 1.1 + 3.0 * 0.55 * 0.55).epsilon(1e-9));
  }
  CHECK_THROWS_AS(fit_least_squares<double>(x, y, 11), Error);
}

TEST_CASE("geometry types work with float scalars") {
  const auto box = BoxDomainT<float>::interval(0.0f, 1.0f);
  PointT<float> x(1);
  x << 1.5f;
  const auto event = classify_point(box, x);
  CHECK(event.face_id == 1);
  CHECK(event.hit_point[0] == 1.0f);
}
