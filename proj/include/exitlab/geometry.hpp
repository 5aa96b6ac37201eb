#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace exitlab::geometry {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
    friend Point operator-(Point a, Point b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
    friend Point operator*(double s, Point a) { return {s * a.x1, s * a.x2}; }
    friend bool operator==(Point, Point) = default;
};

double dot(Point a, Point b);
double norm(Point a);

/// Axis-aligned rectangle (xmin, xmax) x (ymin, ymax). Bounds may be infinite.
struct Rect {
    double xmin = 0.0;
    double xmax = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;

    /// Euclidean distance from `p` to the closed rectangle (0 inside).
    double distance(Point p) const;
    double squared_distance(Point p) const;
    bool contains_open(Point p) const;
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Local frame of a semi-strip arm: y1 runs along `axis` from `origin`,
/// y2 along the left normal. The arm is {y1 > 0, |y2| < half_width}.
struct ArmFrame {
    Point origin;
    Point axis{1.0, 0.0};
    double half_width = 1.0;

    Point normal() const { return {-axis.x2, axis.x1}; }
    Point to_local(Point p) const;
    Point to_global(double y1, double y2) const;
    bool contains(Point p) const;
};

enum class DomainKind {
    Strip,
    SemiStrip,
    Cross,
    Corner,
    StripWithCavity,
    UnionOfRects,
    TiltedSquare,
    HalfPlane,
};

std::string to_string(DomainKind kind);
DomainKind parse_domain_kind(const std::string& name);

/// An open planar domain given by an exact membership predicate.
///
/// Axis-aligned kinds are stored as a union of open rectangles and
/// decomposed into a finite cell complex on construction; the domain is
/// the interior of the union of the closed inside cells, so rectangles
/// that merely touch are joined without a slit. The tilted square
/// {|x1| + |x2| < c} is handled in closed form.
///
/// Values are immutable after construction.
class Domain {
public:
    static Domain strip(double half_width = 1.0);
    static Domain semi_strip(double half_width = 1.0);
    static Domain cross(double half_width = 1.0);
    static Domain corner(double half_width = 1.0);
    static Domain strip_with_cavity(double half_width, std::vector<Rect> cavities);
    static Domain union_of_rects(std::vector<Rect> rects);
    /// {|x1| + |x2| < half_diagonal}.
    static Domain tilted_square(double half_diagonal);
    /// {x1 > 0}; its exit time from x is the half-line exit time of x1.
    static Domain half_plane();

    DomainKind kind() const { return kind_; }
    double half_width() const { return half_width_; }
    std::span<const Rect> rects() const { return rects_; }
    std::span<const ArmFrame> arms() const { return arms_; }
    double compact_radius() const { return compact_radius_; }
    std::optional<double> truncation() const { return truncation_; }
    bool bounded() const;
    std::string name() const;

    /// True iff `p` lies strictly inside the open domain.
    bool contains(Point p) const;

    /// Distance from an interior or boundary point to the boundary.
    /// Throws std::domain_error when `p` is outside the closed domain.
    double boundary_distance(Point p) const;

    /// Distance from `p` to the complement; 0 when `p` is not interior.
    double clearance(Point p) const;

    /// Distance from `p` to the closed domain; 0 when `p` is in its closure.
    double exterior_distance(Point p) const;

    /// Intersection with the half-planes {y1 < L} of every arm.
    /// Throws std::invalid_argument unless L > compact_radius().
    Domain truncate(double arm_length) const;

    /// Bounding box of a bounded domain; throws std::logic_error otherwise.
    Rect bounding_box() const;

    /// Index of the arm containing `p`, if any.
    std::optional<std::size_t> arm_of(Point p) const;

    friend bool operator==(const Domain& a, const Domain& b);

private:
    Domain(DomainKind kind, double half_width, std::vector<Rect> rects,
           std::vector<ArmFrame> arms, double compact_radius);
    void build_cells();

    DomainKind kind_;
    double half_width_;
    std::vector<Rect> rects_;  // open pieces (pre-truncation) for axis-aligned kinds
    std::vector<ArmFrame> arms_;
    double compact_radius_;
    std::optional<double> truncation_;

    std::vector<Rect> inside_cells_;
    std::vector<Rect> outside_cells_;
};

}  // namespace exitlab::geometry
