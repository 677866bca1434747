#pragma once

#include <cmath>

namespace cpforce {

// Minimal 3-vector. Forces are vectors even though the builtin coupling
// profiles vary along a single axis; the unused components stay zero.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
    friend Vec3 operator*(Vec3 v, double s) { return s * v; }
    friend Vec3 operator/(Vec3 v, double s) { return {v.x / s, v.y / s, v.z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(Vec3 o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

}  // namespace cpforce
