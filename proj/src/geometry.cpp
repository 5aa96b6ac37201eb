#include "exitlab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace exitlab::geometry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double representative(double lo, double hi) {
    if (std::isinf(lo) && std::isinf(hi)) return 0.0;
    if (std::isinf(lo)) return hi - 1.0;
    if (std::isinf(hi)) return lo + 1.0;
    return 0.5 * (lo + hi);
}

std::vector<double> breakpoints(const std::vector<Rect>& rects, bool horizontal) {
    std::vector<double> cuts;
    for (const auto& r : rects) {
        for (double v : horizontal ? std::array{r.xmin, r.xmax} : std::array{r.ymin, r.ymax}) {
            if (std::isfinite(v)) cuts.push_back(v);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.insert(cuts.begin(), -kInf);
    cuts.push_back(kInf);
    return cuts;
}

double segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return norm(p - (a + s * ab));
}

ArmFrame arm(Point axis, double half_width) { return ArmFrame{{0.0, 0.0}, axis, half_width}; }

double sup_radius(const std::vector<Rect>& rects) {
    double r = 0.0;
    for (const auto& q : rects) {
        r = std::max({r, std::abs(q.xmin), std::abs(q.xmax), std::abs(q.ymin), std::abs(q.ymax)});
    }
    return r;
}

void check_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

void check_rects(const std::vector<Rect>& rects, bool allow_empty) {
    if (rects.empty() && !allow_empty) throw std::invalid_argument("rectangle list is empty");
    for (const auto& r : rects) {
        if (!(r.xmin < r.xmax) || !(r.ymin < r.ymax)) {
            throw std::invalid_argument("rectangle must satisfy xmin < xmax and ymin < ymax");
        }
        if (!std::isfinite(r.xmin) || !std::isfinite(r.xmax) || !std::isfinite(r.ymin) ||
            !std::isfinite(r.ymax)) {
            throw std::invalid_argument("cavity rectangles must be bounded");
        }
    }
}

}  // namespace

double dot(Point a, Point b) { return a.x1 * b.x1 + a.x2 * b.x2; }
double norm(Point a) { return std::hypot(a.x1, a.x2); }

double Rect::squared_distance(Point p) const {
    const double dx = std::max(0.0, std::max(xmin - p.x1, p.x1 - xmax));
    const double dy = std::max(0.0, std::max(ymin - p.x2, p.x2 - ymax));
    return dx * dx + dy * dy;
}

double Rect::distance(Point p) const { return std::sqrt(squared_distance(p)); }

bool Rect::contains_open(Point p) const {
    return p.x1 > xmin && p.x1 < xmax && p.x2 > ymin && p.x2 < ymax;
}

Point ArmFrame::to_local(Point p) const {
    const Point d = p - origin;
    return {dot(d, axis), dot(d, normal())};
}

Point ArmFrame::to_global(double y1, double y2) const {
    return origin + y1 * axis + y2 * normal();
}

bool ArmFrame::contains(Point p) const {
    const Point y = to_local(p);
    return y.x1 > 0.0 && std::abs(y.x2) < half_width;
}

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::Strip: return "strip";
        case DomainKind::SemiStrip: return "semistrip";
        case DomainKind::Cross: return "cross";
        case DomainKind::Corner: return "corner";
        case DomainKind::StripWithCavity: return "strip_with_cavity";
        case DomainKind::UnionOfRects: return "union_of_rects";
        case DomainKind::TiltedSquare: return "tilted_square";
        case DomainKind::HalfPlane: return "halfplane";
    }
    return "unknown";
}

DomainKind parse_domain_kind(const std::string& name) {
    for (auto k : {DomainKind::Strip, DomainKind::SemiStrip, DomainKind::Cross, DomainKind::Corner,
                   DomainKind::StripWithCavity, DomainKind::UnionOfRects, DomainKind::TiltedSquare,
                   DomainKind::HalfPlane}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown domain kind '" + name + "'");
}

Domain::Domain(DomainKind kind, double half_width, std::vector<Rect> rects,
               std::vector<ArmFrame> arms, double compact_radius)
    : kind_(kind),
      half_width_(half_width),
      rects_(std::move(rects)),
      arms_(std::move(arms)),
      compact_radius_(compact_radius) {
    build_cells();
}

Domain Domain::strip(double a) {
    check_positive(a, "half_width");
    return Domain(DomainKind::Strip, a, {{-kInf, kInf, -a, a}},
                  {arm({1.0, 0.0}, a), arm({-1.0, 0.0}, a)}, a);
}

Domain Domain::semi_strip(double a) {
    check_positive(a, "half_width");
    return Domain(DomainKind::SemiStrip, a, {{0.0, kInf, -a, a}}, {arm({1.0, 0.0}, a)}, a);
}

Domain Domain::cross(double a) {
    check_positive(a, "half_width");
    return Domain(DomainKind::Cross, a, {{-kInf, kInf, -a, a}, {-a, a, -kInf, kInf}},
                  {arm({1.0, 0.0}, a), arm({0.0, 1.0}, a), arm({-1.0, 0.0}, a), arm({0.0, -1.0}, a)},
                  a);
}

Domain Domain::corner(double a) {
    check_positive(a, "half_width");
    return Domain(DomainKind::Corner, a, {{-a, kInf, -a, a}, {-a, a, -a, kInf}},
                  {arm({1.0, 0.0}, a), arm({0.0, 1.0}, a)}, 2.0 * a);
}

Domain Domain::strip_with_cavity(double a, std::vector<Rect> cavities) {
    check_positive(a, "half_width");
    check_rects(cavities, false);
    const double radius = std::max(a, sup_radius(cavities) + 1.0);
    std::vector<Rect> rects{{-kInf, kInf, -a, a}};
    rects.insert(rects.end(), cavities.begin(), cavities.end());
    return Domain(DomainKind::StripWithCavity, a, std::move(rects),
                  {arm({1.0, 0.0}, a), arm({-1.0, 0.0}, a)}, radius);
}

Domain Domain::union_of_rects(std::vector<Rect> rects) {
    check_rects(rects, false);
    double min_half = kInf;
    for (const auto& r : rects) {
        min_half = std::min({min_half, 0.5 * (r.xmax - r.xmin), 0.5 * (r.ymax - r.ymin)});
    }
    const double radius = sup_radius(rects);
    return Domain(DomainKind::UnionOfRects, min_half, std::move(rects), {}, radius);
}

Domain Domain::tilted_square(double c) {
    check_positive(c, "half_diagonal");
    return Domain(DomainKind::TiltedSquare, c / std::sqrt(2.0), {}, {}, c);
}

Domain Domain::half_plane() {
    return Domain(DomainKind::HalfPlane, kInf, {{0.0, kInf, -kInf, kInf}}, {}, 1.0);
}

void Domain::build_cells() {
    inside_cells_.clear();
    outside_cells_.clear();
    if (kind_ == DomainKind::TiltedSquare) return;

    std::vector<Rect> pieces = rects_;
    if (truncation_) {
        for (const auto& a : arms_) {
            // Arms are axis aligned; the cut {y1 < L} is a half-plane bound.
            const double L = *truncation_;
            for (auto& r : pieces) {
                if (a.axis.x1 > 0.5) r.xmax = std::min(r.xmax, a.origin.x1 + L);
                if (a.axis.x1 < -0.5) r.xmin = std::max(r.xmin, a.origin.x1 - L);
                if (a.axis.x2 > 0.5) r.ymax = std::min(r.ymax, a.origin.x2 + L);
                if (a.axis.x2 < -0.5) r.ymin = std::max(r.ymin, a.origin.x2 - L);
            }
        }
        std::erase_if(pieces, [](const Rect& r) { return !(r.xmin < r.xmax && r.ymin < r.ymax); });
    }

    const auto xs = breakpoints(pieces, true);
    const auto ys = breakpoints(pieces, false);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const Rect cell{xs[i], xs[i + 1], ys[j], ys[j + 1]};
            const Point rep{representative(cell.xmin, cell.xmax), representative(cell.ymin, cell.ymax)};
            const bool in = std::any_of(pieces.begin(), pieces.end(),
                                        [&](const Rect& r) { return r.contains_open(rep); });
            (in ? inside_cells_ : outside_cells_).push_back(cell);
        }
    }
}

bool Domain::bounded() const {
    if (kind_ == DomainKind::TiltedSquare || kind_ == DomainKind::UnionOfRects) return true;
    return truncation_.has_value() && !arms_.empty();
}

std::string Domain::name() const { return to_string(kind_); }

double Domain::clearance(Point p) const {
    if (kind_ == DomainKind::TiltedSquare) {
        const double slack = compact_radius_ - std::abs(p.x1) - std::abs(p.x2);
        return slack > 0.0 ? slack / std::sqrt(2.0) : 0.0;
    }
    double d2 = kInf;
    for (const auto& cell : outside_cells_) d2 = std::min(d2, cell.squared_distance(p));
    return std::sqrt(d2);
}

bool Domain::contains(Point p) const { return clearance(p) > 0.0; }

double Domain::exterior_distance(Point p) const {
    if (kind_ == DomainKind::TiltedSquare) {
        const double c = compact_radius_;
        if (std::abs(p.x1) + std::abs(p.x2) <= c) return 0.0;
        const Point v[4] = {{c, 0.0}, {0.0, c}, {-c, 0.0}, {0.0, -c}};
        double d = kInf;
        for (int k = 0; k < 4; ++k) d = std::min(d, segment_distance(p, v[k], v[(k + 1) % 4]));
        return d;
    }
    double d2 = kInf;
    for (const auto& cell : inside_cells_) d2 = std::min(d2, cell.squared_distance(p));
    return std::sqrt(d2);
}

double Domain::boundary_distance(Point p) const {
    const double d = clearance(p);
    if (d > 0.0) return d;
    if (exterior_distance(p) == 0.0) return 0.0;
    throw std::domain_error("boundary_distance: point lies outside the closed domain");
}

Domain Domain::truncate(double L) const {
    if (!(L > compact_radius_)) {
        throw std::invalid_argument("truncate: arm length must exceed the compact radius");
    }
    if (arms_.empty() && !bounded()) {
        throw std::invalid_argument("truncate: unbounded domain has no arms to cut");
    }
    Domain out = *this;
    if (!arms_.empty()) {
        out.truncation_ = L;
        out.build_cells();
    }
    return out;
}

Rect Domain::bounding_box() const {
    if (!bounded()) throw std::logic_error("bounding_box: domain is unbounded");
    if (kind_ == DomainKind::TiltedSquare) {
        const double c = compact_radius_;
        return {-c, c, -c, c};
    }
    Rect box{kInf, -kInf, kInf, -kInf};
    for (const auto& cell : inside_cells_) {
        box.xmin = std::min(box.xmin, cell.xmin);
        box.xmax = std::max(box.xmax, cell.xmax);
        box.ymin = std::min(box.ymin, cell.ymin);
        box.ymax = std::max(box.ymax, cell.ymax);
    }
    return box;
}

std::optional<std::size_t> Domain::arm_of(Point p) const {
    for (std::size_t j = 0; j < arms_.size(); ++j) {
        if (arms_[j].contains(p)) return j;
    }
    return std::nullopt;
}

bool operator==(const Domain& a, const Domain& b) {
    return a.kind_ == b.kind_ && a.half_width_ == b.half_width_ && a.rects_ == b.rects_ &&
           a.compact_radius_ == b.compact_radius_ && a.truncation_ == b.truncation_;
}

}  // namespace exitlab::geometry
