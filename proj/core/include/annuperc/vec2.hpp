#pragma once

#include <algorithm>
#include <cmath>

namespace annuperc {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2_sq(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double norm2(Vec2 a) { return std::sqrt(norm2_sq(a)); }
inline double norm_inf(Vec2 a) { return std::max(std::fabs(a.x), std::fabs(a.y)); }

// strict ordering used for deterministic tie-breaking
inline bool lex_less(Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; }

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Rect shrunk(double m) const { return {x0 + m, y0 + m, x1 - m, y1 - m}; }
    static Rect hull(const Rect& a, const Rect& b) {
        return {std::min(a.x0, b.x0), std::min(a.y0, b.y0),
                std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
    }
};

}  // namespace annuperc
