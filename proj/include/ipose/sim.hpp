#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipose/belief.hpp"
#include "ipose/errors.hpp"
#include "ipose/geometry.hpp"
#include "ipose/models.hpp"
#include "ipose/rng.hpp"

namespace ipose {

/// Center of the graspable workspace in the robot frame; the workspace itself
/// is a 0.20 x 0.20 x 0.15 m volume around it.
inline constexpr Point3 kWorkspaceCenter{0.65, 0.0, 0.10};
inline constexpr Vec3 kWorkspaceExtent{0.20, 0.20, 0.15};

/// Default aim point for simulated cameras: between the workspace and the torso.
inline constexpr Point3 kDefaultLookTarget{0.35, 0.0, 0.35};

struct ObjectPlacement {
    std::string model;
    RigidTransform pose_in_robot{};
};

struct SceneConfig {
    CameraIntrinsics intrinsics = CameraIntrinsics::vga_default();
    RigidTransform camera_in_robot{};  // pose of the camera frame in the robot frame
    std::vector<ObjectPlacement> objects;
    std::array<double, 14> joint_angles = default_joint_angles();

    /// The robot's pose in the camera frame (what the robot perception channel
    /// estimates).
    RigidTransform cam_from_robot() const { return invert(camera_in_robot); }
};

/// Perception noise model: isotropic pixel noise, per-keypoint dropout, and
/// (belief rendering only) spurious blobs at the given expected rate per map.
struct NoiseConfig {
    double pixel_sigma{0.0};
    double dropout_prob{0.0};
    double false_positive_rate{0.0};
    double blob_sigma{2.0};  // map-grid cells
    std::uint64_t seed{0};

    static NoiseConfig preset(std::string_view name) {
        if (name == "clean") {
            return {0.0, 0.0, 0.0, 2.0, 0};
        }
        if (name == "nominal") {
            return {2.0, 0.05, 0.1, 2.0, 0};
        }
        if (name == "harsh") {
            return {4.0, 0.2, 0.5, 2.0, 0};
        }
        throw ConfigError("unknown noise preset '" + std::string(name) + "'");
    }
};

/// Allowed camera placements: in front of the robot, 1-2 m away, within 45
/// degrees of frontal, at roughly torso height.
struct CameraEnvelope {
    double min_distance{1.0};
    double max_distance{2.0};
    double max_azimuth{kPi / 4.0};
    double min_height{0.25};
    double max_height{0.80};
};

inline bool camera_in_envelope(const RigidTransform& camera_in_robot,
                               const CameraEnvelope& envelope = {}) {
    const Vec3& p = camera_in_robot.translation;
    const double distance = std::hypot(p.x, p.y);
    const double azimuth = std::atan2(p.y, p.x);
    return distance >= envelope.min_distance && distance <= envelope.max_distance &&
           std::abs(azimuth) <= envelope.max_azimuth && p.z >= envelope.min_height &&
           p.z <= envelope.max_height;
}

/// Camera pose in the robot frame with the optical axis through the target and
/// the image y axis pointing world-down.
inline RigidTransform look_at_camera(const Point3& eye, const Point3& target,
                                     const Vec3& up = {0.0, 0.0, 1.0}) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 ref = up;
    if (std::abs(forward.dot(ref)) > 0.99) {
        ref = {1.0, 0.0, 0.0};
    }
    const Vec3 x_axis = forward.cross(ref).normalized();
    const Vec3 y_axis = forward.cross(x_axis);
    const Mat3 m = {{{x_axis.x, y_axis.x, forward.x},
                     {x_axis.y, y_axis.y, forward.y},
                     {x_axis.z, y_axis.z, forward.z}}};
    return {UnitQuaternion::from_rotation_matrix(m), eye};
}

/// Camera placed on the azimuth arc at the given distance and height, aimed at
/// the default target.
inline RigidTransform place_camera(double distance, double azimuth, double height,
                                   const Point3& target = kDefaultLookTarget) {
    const Point3 eye{distance * std::cos(azimuth), distance * std::sin(azimuth), height};
    return look_at_camera(eye, target);
}

struct KeypointObservation {
    int keypoint_id{0};
    std::optional<Pixel2> pixel{};
};

/// Simulated keypoint detections: exact projections perturbed by Gaussian
/// pixel noise, with per-keypoint dropout; points that land outside the image
/// (or behind the camera) are absent. Deterministic given noise.seed and salt.
inline std::vector<KeypointObservation> observe_keypoints(
    const CameraIntrinsics& k, const RigidTransform& cam_from_frame,
    std::span<const Point3> points, const NoiseConfig& noise, std::uint64_t salt = 0) {
    Rng rng(Rng::derive(noise.seed, salt));
    std::vector<KeypointObservation> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        // Draw for every keypoint so streams stay aligned across visibility changes.
        const double nx = rng.gaussian();
        const double ny = rng.gaussian();
        const double drop = rng.uniform();
        KeypointObservation obs{static_cast<int>(i), std::nullopt};
        const Point3 p = cam_from_frame.transform_point(points[i]);
        if (p.z > kMinProjectionDepth && drop >= noise.dropout_prob) {
            const Pixel2 exact = project_camera_point(k, p);
            const Pixel2 measured{exact.x + noise.pixel_sigma * nx,
                                  exact.y + noise.pixel_sigma * ny};
            if (in_image(k, measured)) {
                obs.pixel = measured;
            }
        }
        out.push_back(obs);
    }
    return out;
}

/// Map resolution for rendered stacks; grid coordinates are image pixels
/// divided by map_to_image_scale.
struct RenderConfig {
    int map_width{50};
    int map_height{50};
    double map_to_image_scale{12.8};

    static RenderConfig for_intrinsics(const CameraIntrinsics& k, int map_size = 50) {
        RenderConfig rc;
        rc.map_width = map_size;
        rc.map_height = map_size;
        rc.map_to_image_scale = static_cast<double>(k.width) / map_size;
        return rc;
    }
};

/// Renders belief and affinity stacks for every placement of the given model
/// in the scene. Each visible keypoint becomes a Gaussian blob (sigma =
/// blob_sigma grid cells) at its noisy grid location, max-composited across
/// instances; affinity support disks (3 sigma) around vertex blobs point
/// toward the owning instance's centroid location. Spurious blobs are added
/// per map at the configured Poisson rate, with no affinity support.
inline std::pair<BeliefMapStack, AffinityFieldStack> render_belief_stacks(
    const SceneConfig& scene, const ObjectModel& model, const NoiseConfig& noise,
    const RenderConfig& rc = {}) {
    constexpr int kMaps = static_cast<int>(ObjectModel::kKeypointCount);
    constexpr int kFields = static_cast<int>(ObjectModel::kVertexCount);
    BeliefMapStack belief = BeliefMapStack::zeros(rc.map_width, rc.map_height, kMaps);
    AffinityFieldStack affinity =
        AffinityFieldStack::zeros(rc.map_width, rc.map_height, kFields);

    struct InstanceBlobs {
        std::array<std::optional<Pixel2>, ObjectModel::kKeypointCount> grid_pos{};
        Pixel2 centroid_grid{};  // defined even when the centroid blob dropped out
    };

    Rng rng(noise.seed);
    const RigidTransform cam_from_robot = scene.cam_from_robot();
    const auto model_points = model.keypoints();
    std::vector<InstanceBlobs> instances;

    for (const auto& placement : scene.objects) {
        if (placement.model != model.name) {
            continue;
        }
        const RigidTransform cam_from_object =
            compose(cam_from_robot, placement.pose_in_robot);
        InstanceBlobs blobs;
        for (std::size_t i = 0; i < model_points.size(); ++i) {
            const double nx = rng.gaussian();
            const double ny = rng.gaussian();
            const double drop = rng.uniform();
            const Point3 p = cam_from_object.transform_point(model_points[i]);
            if (p.z <= kMinProjectionDepth) {
                continue;
            }
            const Pixel2 exact = project_camera_point(scene.intrinsics, p);
            const Pixel2 measured{exact.x + noise.pixel_sigma * nx,
                                  exact.y + noise.pixel_sigma * ny};
            const Pixel2 grid = measured / rc.map_to_image_scale;
            if (i == ObjectModel::kCentroidIndex) {
                blobs.centroid_grid = grid;
            }
            if (drop < noise.dropout_prob || !in_image(scene.intrinsics, measured)) {
                continue;
            }
            blobs.grid_pos[i] = grid;
        }
        instances.push_back(blobs);
    }

    const double sigma = noise.blob_sigma;
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    const auto splat = [&](int map, const Pixel2& center) {
        for (int y = 0; y < rc.map_height; ++y) {
            for (int x = 0; x < rc.map_width; ++x) {
                const double dx = x - center.x;
                const double dy = y - center.y;
                const float v =
                    static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq));
                belief.at(map, x, y) = std::max(belief.at(map, x, y), v);
            }
        }
    };

    for (const auto& inst : instances) {
        for (std::size_t i = 0; i < ObjectModel::kKeypointCount; ++i) {
            if (inst.grid_pos[i]) {
                splat(static_cast<int>(i), *inst.grid_pos[i]);
            }
        }
    }

    // Affinity: each pixel within 3 sigma of a vertex blob points toward the
    // nearest such blob's instance centroid.
    const double support = 3.0 * sigma;
    for (int field = 0; field < kFields; ++field) {
        for (int y = 0; y < rc.map_height; ++y) {
            for (int x = 0; x < rc.map_width; ++x) {
                double best_dist = support;
                const InstanceBlobs* best = nullptr;
                for (const auto& inst : instances) {
                    if (!inst.grid_pos[static_cast<std::size_t>(field)]) {
                        continue;
                    }
                    const Pixel2& c = *inst.grid_pos[static_cast<std::size_t>(field)];
                    const double d = std::hypot(x - c.x, y - c.y);
                    if (d <= best_dist) {
                        best_dist = d;
                        best = &inst;
                    }
                }
                if (best != nullptr) {
                    const Vec2 dir{best->centroid_grid.x - x, best->centroid_grid.y - y};
                    const double n = dir.norm();
                    if (n > 1e-9) {
                        affinity.set(field, x, y, dir / n);
                    }
                }
            }
        }
    }

    // Spurious peaks, uniformly placed, one Poisson draw per map.
    for (int map = 0; map < kMaps; ++map) {
        const int count = rng.poisson(noise.false_positive_rate);
        for (int c = 0; c < count; ++c) {
            const double fx = rng.uniform(0.0, rc.map_width - 1.0);
            const double fy = rng.uniform(0.0, rc.map_height - 1.0);
            splat(map, {fx, fy});
        }
    }

    return {std::move(belief), std::move(affinity)};
}

enum class TrajectoryKind { walk, still };

/// Bounds and smoothness limits for simulated handheld camera motion.
struct TrajectoryConfig {
    Vec3 box_min{1.3, -0.3, 0.3};
    Vec3 box_max{2.0, 0.3, 0.5};
    Point3 look_target = kDefaultLookTarget;
    double max_step{0.02};                         // meters per frame
    double max_rotation_step{2.0 * kPi / 180.0};   // radians per frame
};

/// Seeded smooth random walk inside the configured box, always aimed at the
/// look target. `still` holds the starting pose for the whole duration.
inline std::vector<RigidTransform> camera_trajectory(TrajectoryKind kind, int duration_frames,
                                                     std::uint64_t seed,
                                                     const TrajectoryConfig& cfg = {}) {
    if (duration_frames < 1) {
        throw ConfigError("trajectory duration must be at least one frame");
    }
    Rng rng(seed);
    const auto clamp_box = [&](Point3 p) {
        p.x = std::clamp(p.x, cfg.box_min.x, cfg.box_max.x);
        p.y = std::clamp(p.y, cfg.box_min.y, cfg.box_max.y);
        p.z = std::clamp(p.z, cfg.box_min.z, cfg.box_max.z);
        return p;
    };
    Point3 eye{rng.uniform(cfg.box_min.x, cfg.box_max.x),
               rng.uniform(cfg.box_min.y, cfg.box_max.y),
               rng.uniform(cfg.box_min.z, cfg.box_max.z)};
    std::vector<RigidTransform> poses;
    poses.reserve(static_cast<std::size_t>(duration_frames));
    poses.push_back(look_at_camera(eye, cfg.look_target));
    for (int f = 1; f < duration_frames; ++f) {
        if (kind == TrajectoryKind::walk) {
            Vec3 step;
            do {
                step = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                        rng.uniform(-1.0, 1.0)};
            } while (step.squared_norm() > 1.0);
            eye = clamp_box(eye + step * cfg.max_step);
        }
        poses.push_back(look_at_camera(eye, cfg.look_target));
    }
    return poses;
}

}  // namespace ipose
