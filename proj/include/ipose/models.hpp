#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipose/errors.hpp"
#include "ipose/geometry.hpp"

namespace ipose {

/// Rigid object described by its bounding cuboid. Keypoints are the 8 cuboid
/// vertices plus the centroid (last), in the object frame centered at the
/// centroid with extents dx, dy, dz in meters.
struct ObjectModel {
    enum class Shape { cuboid, cylinder };

    std::string name;
    Shape shape{Shape::cuboid};
    double dx{0.0};
    double dy{0.0};
    double dz{0.0};

    static constexpr std::size_t kVertexCount = 8;
    static constexpr std::size_t kKeypointCount = 9;
    /// Index of the centroid keypoint/map (the last one).
    static constexpr std::size_t kCentroidIndex = 8;

    std::array<Point3, kVertexCount> vertices() const {
        std::array<Point3, kVertexCount> v{};
        for (std::size_t i = 0; i < kVertexCount; ++i) {
            v[i] = {(i & 1U) != 0U ? 0.5 * dx : -0.5 * dx,
                    (i & 2U) != 0U ? 0.5 * dy : -0.5 * dy,
                    (i & 4U) != 0U ? 0.5 * dz : -0.5 * dz};
        }
        return v;
    }

    Point3 centroid() const { return {}; }

    std::vector<Point3> keypoints() const {
        std::vector<Point3> pts;
        pts.reserve(kKeypointCount);
        for (const auto& v : vertices()) {
            pts.push_back(v);
        }
        pts.push_back(centroid());
        return pts;
    }

    double largest_dimension() const {
        return std::max(dx, std::max(dy, dz));
    }
};

/// Built-in object catalog: YCB-style items plus toy grocery boxes, cans, and
/// bottles. Extents are approximate; cylinders and bottles are modeled by
/// their bounding cuboids.
inline const std::vector<ObjectModel>& object_catalog() {
    using Shape = ObjectModel::Shape;
    static const std::vector<ObjectModel> catalog = {
        {"sugar_box", Shape::cuboid, 0.093, 0.045, 0.176},
        {"cracker_box", Shape::cuboid, 0.164, 0.072, 0.213},
        {"soup_can", Shape::cylinder, 0.068, 0.068, 0.101},
        {"meat_can", Shape::cuboid, 0.101, 0.060, 0.083},
        {"mustard", Shape::cuboid, 0.095, 0.058, 0.160},
        {"choc_pudding", Shape::cuboid, 0.083, 0.035, 0.055},
        {"butter", Shape::cuboid, 0.103, 0.035, 0.065},
        {"cream_cheese", Shape::cuboid, 0.104, 0.040, 0.065},
        {"raisins", Shape::cuboid, 0.075, 0.045, 0.123},
        {"popcorn", Shape::cuboid, 0.090, 0.050, 0.126},
        {"granola_bars", Shape::cuboid, 0.165, 0.060, 0.120},
        {"mac_and_cheese", Shape::cuboid, 0.166, 0.045, 0.120},
        {"cookies", Shape::cuboid, 0.167, 0.055, 0.115},
        {"spaghetti", Shape::cuboid, 0.045, 0.090, 0.250},
        {"tomato_sauce", Shape::cylinder, 0.066, 0.066, 0.070},
        {"tuna", Shape::cylinder, 0.071, 0.071, 0.033},
        {"alphabet_soup", Shape::cylinder, 0.066, 0.066, 0.084},
        {"parmesan", Shape::cylinder, 0.062, 0.062, 0.103},
        {"milk", Shape::cuboid, 0.070, 0.070, 0.190},
    };
    return catalog;
}

inline std::optional<ObjectModel> find_object(const std::string& name) {
    for (const auto& m : object_catalog()) {
        if (m.name == name) {
            return m;
        }
    }
    return std::nullopt;
}

/// One revolute joint: a fixed link offset followed by a rotation about the
/// given axis. The joint's keypoint sits at the post-offset origin.
struct JointSpec {
    Vec3 offset{};
    Vec3 axis{0.0, 0.0, 1.0};
    double min_angle{-2.8};
    double max_angle{2.8};
};

struct KinematicChain {
    static constexpr std::size_t kJointCount = 7;
    std::string name;
    std::array<JointSpec, kJointCount> joints{};
};

/// Keypoint layout for a bimanual robot: 10 fixed torso keypoints plus one
/// keypoint per joint of two 7-joint arms, 24 in total. Keypoint order is
/// torso 0-9, then arm 0 joints, then arm 1 joints.
struct RobotKeypointModel {
    static constexpr std::size_t kTorsoCount = 10;
    static constexpr std::size_t kKeypointCount = 24;

    std::vector<Point3> torso_keypoints;
    std::array<KinematicChain, 2> arms;

    static RobotKeypointModel default_model();
};

/// Serial-chain forward kinematics; returns the 7 joint keypoints in the
/// robot frame. Throws JointLimitError for out-of-range angles.
inline std::array<Point3, KinematicChain::kJointCount> forward_kinematics(
    const KinematicChain& chain, std::span<const double> joint_angles) {
    if (joint_angles.size() != KinematicChain::kJointCount) {
        throw JointLimitError("expected 7 joint angles, got " +
                              std::to_string(joint_angles.size()));
    }
    std::array<Point3, KinematicChain::kJointCount> keypoints{};
    RigidTransform t = RigidTransform::identity();
    for (std::size_t i = 0; i < KinematicChain::kJointCount; ++i) {
        const JointSpec& j = chain.joints[i];
        const double angle = joint_angles[i];
        if (angle < j.min_angle || angle > j.max_angle) {
            throw JointLimitError("joint " + std::to_string(i) + " of chain '" +
                                  chain.name + "' out of range");
        }
        t = compose(t, RigidTransform{UnitQuaternion::from_axis_angle(j.axis, angle),
                                      j.offset});
        keypoints[i] = t.translation;
    }
    return keypoints;
}

/// All 24 robot keypoints for a 14-element joint vector (arm 0 then arm 1).
inline std::vector<Point3> robot_keypoints(const RobotKeypointModel& model,
                                           std::span<const double> joint_angles) {
    if (model.torso_keypoints.size() != RobotKeypointModel::kTorsoCount) {
        throw ConfigError("robot model must have exactly 10 torso keypoints");
    }
    if (joint_angles.size() != 2 * KinematicChain::kJointCount) {
        throw ConfigError("expected 14 joint angles, got " +
                          std::to_string(joint_angles.size()));
    }
    std::vector<Point3> pts = model.torso_keypoints;
    pts.reserve(RobotKeypointModel::kKeypointCount);
    for (std::size_t arm = 0; arm < 2; ++arm) {
        const auto chain_pts = forward_kinematics(
            model.arms[arm], joint_angles.subspan(arm * KinematicChain::kJointCount,
                                                  KinematicChain::kJointCount));
        pts.insert(pts.end(), chain_pts.begin(), chain_pts.end());
    }
    return pts;
}

inline RobotKeypointModel RobotKeypointModel::default_model() {
    RobotKeypointModel m;
    // Two-level torso frame plus a head pair; z up, x toward the workspace.
    m.torso_keypoints = {
        {0.10, 0.18, 0.45}, {0.10, -0.18, 0.45}, {-0.10, 0.18, 0.45},
        {-0.10, -0.18, 0.45}, {0.10, 0.18, 0.70}, {0.10, -0.18, 0.70},
        {-0.10, 0.18, 0.70}, {-0.10, -0.18, 0.70}, {0.08, 0.06, 0.80},
        {0.08, -0.06, 0.80},
    };
    const auto make_arm = [](const std::string& name, double side) {
        KinematicChain c;
        c.name = name;
        const Vec3 zaxis{0.0, 0.0, 1.0};
        const Vec3 yaxis{0.0, 1.0, 0.0};
        const Vec3 xaxis{1.0, 0.0, 0.0};
        c.joints = {
            JointSpec{{0.06, side * 0.26, 0.70}, zaxis},
            JointSpec{{0.11, side * 0.05, 0.00}, yaxis},
            JointSpec{{0.15, side * 0.03, -0.05}, xaxis},
            JointSpec{{0.18, side * 0.02, -0.05}, yaxis},
            JointSpec{{0.15, side * 0.02, -0.05}, xaxis},
            JointSpec{{0.15, side * 0.01, -0.05}, yaxis},
            JointSpec{{0.12, 0.00, -0.03}, xaxis},
        };
        return c;
    };
    m.arms = {make_arm("left", 1.0), make_arm("right", -1.0)};
    return m;
}

/// Joint configuration with both arms folded in front of the torso.
inline std::array<double, 14> default_joint_angles() {
    return {0.3, 0.6, 0.0, 0.8, 0.0, 0.5, 0.0,  //
            -0.3, 0.6, 0.0, 0.8, 0.0, 0.5, 0.0};
}

}  // namespace ipose
