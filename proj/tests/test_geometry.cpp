#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using exitlab::geometry::ArmFrame;
using exitlab::geometry::Domain;
using exitlab::geometry::DomainKind;
using exitlab::geometry::Point;
using exitlab::geometry::Rect;

namespace {

double pos(double v) { return std::max(v, 0.0); }

// Complement of {min(|x1|,|x2|) < 1} is four closed quadrants |x1|,|x2| >= 1.
double cross_clearance(Point p) {
    if (std::min(std::abs(p.x1), std::abs(p.x2)) >= 1.0) return 0.0;
    return std::hypot(pos(1.0 - std::abs(p.x1)), pos(1.0 - std::abs(p.x2)));
}

// Complement of {-1 < min(x1,x2) < 1}: {x1 <= -1} u {x2 <= -1} u {x1 >= 1, x2 >= 1}.
double corner_clearance(Point p) {
    const double m = std::min(p.x1, p.x2);
    if (m <= -1.0 || m >= 1.0) return 0.0;
    return std::min({p.x1 + 1.0, p.x2 + 1.0, std::hypot(pos(1.0 - p.x1), pos(1.0 - p.x2))});
}

}  // namespace

TEST_CASE("cross and corner clearance match the closed-form distance on random points") {
    const auto cross = Domain::cross();
    const auto corner = Domain::corner();
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    double worst_cross = 0.0, worst_corner = 0.0;
    int mismatched_membership = 0;
    for (int i = 0; i < 100000; ++i) {
        const Point p{u(gen), u(gen)};
        worst_cross = std::max(worst_cross, std::abs(cross.clearance(p) - cross_clearance(p)));
        worst_corner = std::max(worst_corner, std::abs(corner.clearance(p) - corner_clearance(p)));
        mismatched_membership += cross.contains(p) != (cross_clearance(p) > 0.0);
        mismatched_membership += corner.contains(p) != (corner_clearance(p) > 0.0);
    }
    CHECK(worst_cross < 1e-12);
    CHECK(worst_corner < 1e-12);
    CHECK(mismatched_membership == 0);
}

TEST_CASE("corner boundary distance at the origin agrees with a brute-force search") {
    const auto corner = Domain::corner();
    const double h = 0.005;
    double best = std::numeric_limits<double>::infinity();
    for (double x = -3.0; x <= 3.0; x += h) {
        for (double y = -3.0; y <= 3.0; y += h) {
            if (!corner.contains({x, y})) best = std::min(best, std::hypot(x, y));
        }
    }
    CHECK(corner.boundary_distance({0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(corner.boundary_distance({0.0, 0.0}) - best) < 2.0 * h);
}

TEST_CASE("boundary distance is 1-Lipschitz and respects the cross symmetries") {
    const auto cross = Domain::cross();
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 20000; ++i) {
        const Point p{u(gen), u(gen)};
        const Point q{p.x1 + 0.1 * u(gen), p.x2 + 0.1 * u(gen)};
        const double dp = cross.clearance(p), dq = cross.clearance(q);
        CHECK(std::abs(dp - dq) <= std::hypot(p.x1 - q.x1, p.x2 - q.x2) + 1e-12);
        CHECK(cross.clearance({p.x2, p.x1}) == doctest::Approx(dp).epsilon(1e-14));
        CHECK(cross.clearance({-p.x1, p.x2}) == doctest::Approx(dp).epsilon(1e-14));
        CHECK(cross.clearance({p.x1, -p.x2}) == doctest::Approx(dp).epsilon(1e-14));
    }
}

TEST_CASE("boundary distance rejects exterior points") {
    const auto cross = Domain::cross();
    CHECK_THROWS_AS((void)cross.boundary_distance({2.0, 2.0}), std::domain_error);
    CHECK(cross.boundary_distance({1.0, 3.0}) == 0.0);
    CHECK(cross.exterior_distance({2.0, 2.0}) == doctest::Approx(1.0));
    CHECK(cross.exterior_distance({0.0, 0.0}) == 0.0);
}

TEST_CASE("truncation is monotone in the arm length") {
    const auto cross = Domain::cross();
    const auto t8 = cross.truncate(8.0), t12 = cross.truncate(12.0);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-14.0, 14.0);
    for (int i = 0; i < 20000; ++i) {
        const Point p{u(gen), u(gen)};
        if (t8.contains(p)) CHECK(t12.contains(p));
        if (t12.contains(p)) CHECK(cross.contains(p));
        CHECK(t8.clearance(p) <= t12.clearance(p) + 1e-12);
        CHECK(t12.clearance(p) <= cross.clearance(p) + 1e-12);
    }
    CHECK(t12.bounded());
    const auto box = t12.bounding_box();
    CHECK(box.xmin == -12.0);
    CHECK(box.xmax == 12.0);
    CHECK(t12.truncation().value() == 12.0);
    CHECK_FALSE(t12.contains({12.5, 0.0}));
    CHECK(t12.contains({11.5, 0.0}));
}

TEST_CASE("truncation needs an arm length beyond the compact part") {
    CHECK_THROWS_AS((void)Domain::cross().truncate(1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)Domain::corner().truncate(2.0), std::invalid_argument);
    CHECK_THROWS_AS((void)Domain::half_plane().truncate(5.0), std::invalid_argument);
    CHECK_NOTHROW((void)Domain::corner().truncate(16.0));
}

TEST_CASE("arms are semi-strips of the domain width with consistent frames") {
    for (const auto& d : {Domain::strip(), Domain::semi_strip(), Domain::cross(), Domain::corner()}) {
        CAPTURE(d.name());
        for (std::size_t j = 0; j < d.arms().size(); ++j) {
            const ArmFrame& a = d.arms()[j];
            CHECK(a.half_width == doctest::Approx(d.half_width()));
            CHECK(std::abs(exitlab::geometry::dot(a.axis, a.normal())) < 1e-15);
            CHECK(exitlab::geometry::norm(a.axis) == doctest::Approx(1.0));
            const Point p = a.to_global(d.compact_radius() + 3.0, 0.4 * a.half_width);
            const Point back = a.to_local(p);
            CHECK(back.x1 == doctest::Approx(d.compact_radius() + 3.0));
            CHECK(back.x2 == doctest::Approx(0.4 * a.half_width));
            CHECK(d.contains(p));
            CHECK(d.arm_of(p).value() == j);
            CHECK(d.clearance(p) == doctest::Approx(0.6 * a.half_width));
        }
    }
    CHECK(Domain::strip().arms().size() == 2);
    CHECK(Domain::semi_strip().arms().size() == 1);
    CHECK(Domain::cross().arms().size() == 4);
    CHECK(Domain::corner().arms().size() == 2);
}

TEST_CASE("domain kinds round-trip through their names") {
    for (auto kind : {DomainKind::Strip, DomainKind::SemiStrip, DomainKind::Cross, DomainKind::Corner,
                      DomainKind::StripWithCavity, DomainKind::UnionOfRects, DomainKind::TiltedSquare,
                      DomainKind::HalfPlane}) {
        CHECK(exitlab::geometry::parse_domain_kind(exitlab::geometry::to_string(kind)) == kind);
    }
    CHECK_THROWS((void)exitlab::geometry::parse_domain_kind("annulus"));
}

TEST_CASE("tilted square uses the rotated distance") {
    const auto sq = Domain::tilted_square(2.0);
    CHECK(sq.contains({1.9, 0.0}));
    CHECK_FALSE(sq.contains({1.5, 0.6}));
    CHECK(sq.clearance({0.0, 0.0}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(sq.clearance({0.5, -0.25}) == doctest::Approx((2.0 - 0.75) / std::sqrt(2.0)));
    CHECK(sq.bounded());
}

TEST_CASE("touching rectangles merge without a slit") {
    const auto d = Domain::union_of_rects({Rect{-1.0, 0.0, -1.0, 1.0}, Rect{0.0, 1.0, -1.0, 1.0}});
    CHECK(d.contains({0.0, 0.0}));
    CHECK(d.clearance({0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(d.clearance({0.5, 0.0}) == doctest::Approx(0.5));
}

TEST_CASE("a strip with a cavity contains the cavity and widens the clearance") {
    const auto d = Domain::strip_with_cavity(1.0, {Rect{-0.5, 0.5, 0.0, 2.0}});
    CHECK(d.contains({0.0, 1.5}));
    CHECK_FALSE(d.contains({2.0, 1.5}));
    CHECK(d.clearance({0.0, 0.9}) == doctest::Approx(std::hypot(0.5, 0.1)));
    CHECK(d.compact_radius() >= 1.0);
    CHECK(d.arms().size() == 2);
}

TEST_CASE("half-plane clearance is the first coordinate") {
    const auto d = Domain::half_plane();
    CHECK(d.clearance({0.7, -30.0}) == doctest::Approx(0.7));
    CHECK_FALSE(d.contains({-0.1, 0.0}));
    CHECK_FALSE(d.bounded());
}
