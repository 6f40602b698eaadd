#pragma once

#include <algorithm>
#include <cmath>

namespace hierpose {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Axis-aligned box stored as center + size.
struct Box {
    Vec2 center;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double x0() const { return center.x - w / 2.0; }
    double y0() const { return center.y - h / 2.0; }
    double x1() const { return center.x + w / 2.0; }
    double y1() const { return center.y + h / 2.0; }

    /// Containment test, inclusive at the (optionally expanded) boundary.
    bool contains(Vec2 p, double margin = 0.0) const {
        return p.x >= x0() - margin && p.x <= x1() + margin && p.y >= y0() - margin &&
               p.y <= y1() + margin;
    }

    static Box from_corners(double x0, double y0, double x1, double y1) {
        return {{(x0 + x1) / 2.0, (y0 + y1) / 2.0}, x1 - x0, y1 - y0};
    }
};

inline double box_iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0()));
    const double iy = std::max(0.0, std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0()));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace hierpose
