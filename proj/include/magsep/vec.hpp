#ifndef MAGSEP_VEC_HPP
#define MAGSEP_VEC_HPP

#include <cmath>

namespace magsep {

// Vector in the cross-flow plane. Components are (y, z): y across the
// channel width, z across the depth. The flow axis x is kept separate.
struct Vec2 {
    double y = 0.0;
    double z = 0.0;

    Vec2& operator+=(const Vec2& o) { y += o.y; z += o.z; return *this; }
    Vec2& operator-=(const Vec2& o) { y -= o.y; z -= o.z; return *this; }
    Vec2& operator*=(double s) { y *= s; z *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 v) { return v *= s; }
inline Vec2 operator*(Vec2 v, double s) { return v *= s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.y * b.y + a.z * b.z; }
inline double norm_squared(const Vec2& v) { return dot(v, v); }
inline double norm(const Vec2& v) { return std::hypot(v.y, v.z); }

// Counterclockwise quarter turn in the (y, z) plane: (y, z) -> (-z, y).
inline Vec2 rot90(const Vec2& v) { return {-v.z, v.y}; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    Vec2 cross_flow() const { return {y, z}; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 v) { return v *= s; }
inline Vec3 operator*(Vec3 v, double s) { return v *= s; }

inline double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

}  // namespace magsep

#endif
