#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "ipose/errors.hpp"

namespace ipose {

inline constexpr double kPi = std::numbers::pi;

/// Points with camera-frame depth at or below this are treated as behind the camera.
inline constexpr double kMinProjectionDepth = 1e-6;

struct Vec2 {
    double x{0.0};
    double y{0.0};

    Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }

    double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec3 {
    double x{0.0};
    double y{0.0};
    double z{0.0};

    Vec3 operator+(const Vec3& r) const { return {x + r.x, y + r.y, z + r.z}; }
    Vec3 operator-(const Vec3& r) const { return {x - r.x, y - r.y, z - r.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    double dot(const Vec3& r) const { return x * r.x + y * r.y + z * r.z; }
    Vec3 cross(const Vec3& r) const {
        return {y * r.z - z * r.y, z * r.x - x * r.z, x * r.y - y * r.x};
    }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
    Vec3 normalized() const {
        const double n = norm();
        return n > 0.0 ? *this / n : Vec3{};
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// 3D point in meters.
using Point3 = Vec3;
/// Continuous (sub-pixel) image position in pixels.
using Pixel2 = Vec2;

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Rotation stored as a unit quaternion. Every producing operation returns a
/// normalized value with w >= 0, so the two antipodal encodings of a rotation
/// compare equal componentwise.
struct UnitQuaternion {
    double w{1.0};
    double x{0.0};
    double y{0.0};
    double z{0.0};

    static UnitQuaternion identity() { return {}; }

    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle) {
        const Vec3 n = axis.normalized();
        const double h = 0.5 * angle;
        const double s = std::sin(h);
        return UnitQuaternion{std::cos(h), s * n.x, s * n.y, s * n.z}.normalized();
    }

    /// Exponential map: rotation vector (axis * angle) to quaternion.
    static UnitQuaternion from_rotation_vector(const Vec3& rv) {
        const double angle = rv.norm();
        if (angle < 1e-12) {
            return UnitQuaternion{1.0, 0.5 * rv.x, 0.5 * rv.y, 0.5 * rv.z}.normalized();
        }
        return from_axis_angle(rv, angle);
    }

    static UnitQuaternion from_rotation_matrix(const Mat3& m) {
        // Shepperd's method: pick the largest diagonal combination for stability.
        const double t = m[0][0] + m[1][1] + m[2][2];
        UnitQuaternion q;
        if (t > 0.0) {
            const double s = std::sqrt(t + 1.0) * 2.0;
            q = {0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s,
                 (m[1][0] - m[0][1]) / s};
        } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
            const double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
            q = {(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s,
                 (m[0][2] + m[2][0]) / s};
        } else if (m[1][1] > m[2][2]) {
            const double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
            q = {(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s,
                 (m[1][2] + m[2][1]) / s};
        } else {
            const double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
            q = {(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s,
                 (m[1][2] + m[2][1]) / s, 0.25 * s};
        }
        return q.normalized();
    }

    double dot(const UnitQuaternion& r) const {
        return w * r.w + x * r.x + y * r.y + z * r.z;
    }

    double norm() const { return std::sqrt(dot(*this)); }

    /// Unit-norm copy, canonicalized to w >= 0.
    UnitQuaternion normalized() const {
        const double n = norm();
        UnitQuaternion q{w / n, x / n, y / n, z / n};
        if (q.w < 0.0) {
            q = {-q.w, -q.x, -q.y, -q.z};
        }
        return q;
    }

    UnitQuaternion conjugate() const { return {w, -x, -y, -z}; }

    UnitQuaternion operator*(const UnitQuaternion& r) const {
        return UnitQuaternion{
            w * r.w - x * r.x - y * r.y - z * r.z,
            w * r.x + x * r.w + y * r.z - z * r.y,
            w * r.y - x * r.z + y * r.w + z * r.x,
            w * r.z + x * r.y - y * r.x + z * r.w,
        }
            .normalized();
    }

    Vec3 rotate(const Vec3& v) const {
        const Vec3 u{x, y, z};
        const Vec3 t = 2.0 * u.cross(v);
        return v + w * t + u.cross(t);
    }

    Mat3 rotation_matrix() const {
        const double xx = x * x, yy = y * y, zz = z * z;
        const double wx = w * x, wy = w * y, wz = w * z;
        const double xy = x * y, xz = x * z, yz = y * z;
        return {{{1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)},
                 {2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)},
                 {2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)}}};
    }
};

/// Angle of the relative rotation between two orientations, in [0, pi].
inline double geodesic_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
    const double d = std::clamp(std::abs(a.dot(b)), 0.0, 1.0);
    return 2.0 * std::acos(d);
}

/// Geodesic interpolation from a (t = 0) to b (t = 1) along the shortest arc.
inline UnitQuaternion slerp(const UnitQuaternion& a, const UnitQuaternion& b, double t) {
    if (a.w == b.w && a.x == b.x && a.y == b.y && a.z == b.z) {
        return a;  // exact fixed point for identical inputs
    }
    double d = a.dot(b);
    double sign = 1.0;
    if (d < 0.0) {
        d = -d;
        sign = -1.0;
    }
    d = std::min(d, 1.0);
    if (d > 1.0 - 1e-12) {
        // Nearly identical orientations: linear blend, then renormalize.
        return UnitQuaternion{a.w + t * (sign * b.w - a.w), a.x + t * (sign * b.x - a.x),
                              a.y + t * (sign * b.y - a.y), a.z + t * (sign * b.z - a.z)}
            .normalized();
    }
    const double theta = std::acos(d);
    const double sa = std::sin((1.0 - t) * theta) / std::sin(theta);
    const double sb = sign * std::sin(t * theta) / std::sin(theta);
    return UnitQuaternion{sa * a.w + sb * b.w, sa * a.x + sb * b.x, sa * a.y + sb * b.y,
                          sa * a.z + sb * b.z}
        .normalized();
}

/// SE(3) rigid transform: p' = rotation * p + translation. Translation in meters.
struct RigidTransform {
    UnitQuaternion rotation{};
    Vec3 translation{};

    static RigidTransform identity() { return {}; }

    Point3 transform_point(const Point3& p) const {
        return rotation.rotate(p) + translation;
    }
};

inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation * b.rotation, a.rotation.rotate(b.translation) + a.translation};
}

inline RigidTransform invert(const RigidTransform& t) {
    const UnitQuaternion qi = t.rotation.conjugate();
    return {qi, -qi.rotate(t.translation)};
}

/// Object pose in the robot frame from the two camera-frame poses:
/// the inverse of the robot's camera-frame pose composed with the object's.
inline RigidTransform object_in_robot_frame(const RigidTransform& cam_robot,
                                            const RigidTransform& cam_object) {
    return compose(invert(cam_robot), cam_object);
}

struct CameraIntrinsics {
    double fx{0.0};
    double fy{0.0};
    double cx{0.0};
    double cy{0.0};
    int width{0};
    int height{0};

    static CameraIntrinsics vga_default() { return {600.0, 600.0, 320.0, 240.0, 640, 480}; }

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && cx > 0.0 && cx < width && cy > 0.0 && cy < height;
    }
};

/// Pinhole projection of a camera-frame point. Throws BehindCameraError for
/// depth <= kMinProjectionDepth.
inline Pixel2 project_camera_point(const CameraIntrinsics& k, const Point3& p) {
    if (p.z <= kMinProjectionDepth) {
        throw BehindCameraError{};
    }
    return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

/// Projects a point expressed in some frame F, given the pose of F in the camera frame.
inline Pixel2 project(const CameraIntrinsics& k, const RigidTransform& cam_from_frame,
                      const Point3& p) {
    return project_camera_point(k, cam_from_frame.transform_point(p));
}

/// Camera-frame point of a pixel at a known depth.
inline Point3 back_project(const CameraIntrinsics& k, const Pixel2& px, double depth) {
    return {(px.x - k.cx) / k.fx * depth, (px.y - k.cy) / k.fy * depth, depth};
}

inline bool in_image(const CameraIntrinsics& k, const Pixel2& px) {
    return px.x >= 0.0 && px.x < static_cast<double>(k.width) && px.y >= 0.0 &&
           px.y < static_cast<double>(k.height);
}

}  // namespace ipose
