#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ipose/filter.hpp"
#include "ipose/geometry.hpp"
#include "ipose/models.hpp"
#include "ipose/pnp.hpp"
#include "ipose/refine.hpp"
#include "ipose/results.hpp"
#include "ipose/sim.hpp"
#include "ipose/stats.hpp"

namespace ipose {

/// Options for the per-frame estimation pipeline: keypoint simulation, one PnP
/// solve per perception channel, optional dense refinement of the object pose,
/// and the indirect composition into the robot frame.
struct PipelineConfig {
    bool refine{false};
    std::size_t dense_samples{200};
    RobustLossConfig robust{};
    RefineConfig pnp{};
    bool include_centroid{true};
};

struct FrameEstimate {
    std::optional<RigidTransform> object_in_robot{};
    bool dropped() const { return !object_in_robot.has_value(); }
};

namespace detail {

inline std::vector<Correspondence> correspondences_from_observations(
    std::span<const Point3> points, std::span<const KeypointObservation> obs) {
    std::vector<Correspondence> corrs;
    for (const auto& o : obs) {
        if (o.pixel) {
            corrs.push_back({points[static_cast<std::size_t>(o.keypoint_id)], *o.pixel, 1.0});
        }
    }
    return corrs;
}

}  // namespace detail

/// Runs one perception + estimation cycle against ground truth. Frames where
/// either PnP solve lacks points (or degenerates) produce a dropped estimate
/// rather than an error.
inline FrameEstimate estimate_frame(const SceneConfig& scene,
                                    const RobotKeypointModel& robot,
                                    const ObjectModel& object, std::size_t placement_index,
                                    const NoiseConfig& noise, std::uint64_t salt,
                                    const PipelineConfig& cfg = {}) {
    const RigidTransform cam_from_robot = scene.cam_from_robot();
    const auto& placement = scene.objects.at(placement_index);
    const RigidTransform cam_from_object = compose(cam_from_robot, placement.pose_in_robot);

    try {
        // Robot channel.
        const std::vector<Point3> robot_pts = robot_keypoints(robot, scene.joint_angles);
        const auto robot_obs = observe_keypoints(scene.intrinsics, cam_from_robot, robot_pts,
                                                 noise, 3 * salt);
        const auto robot_corrs =
            detail::correspondences_from_observations(robot_pts, robot_obs);
        const PnPSolution robot_sol = solve_pnp(robot_corrs, scene.intrinsics, cfg.pnp);

        // Object channel.
        std::vector<Point3> object_pts = object.keypoints();
        if (!cfg.include_centroid) {
            object_pts.pop_back();
        }
        const auto object_obs = observe_keypoints(scene.intrinsics, cam_from_object,
                                                  object_pts, noise, 3 * salt + 1);
        const auto object_corrs =
            detail::correspondences_from_observations(object_pts, object_obs);
        PnPSolution object_sol = solve_pnp(object_corrs, scene.intrinsics, cfg.pnp);

        if (cfg.refine) {
            const DenseModelSample sample = sample_model_surface(
                object, cfg.dense_samples, Rng::derive(noise.seed, 3 * salt + 2));
            const auto dense_obs_raw = observe_keypoints(
                scene.intrinsics, cam_from_object, sample.points, noise, 3 * salt + 2);
            std::vector<DenseObservation> dense_obs(sample.points.size());
            for (const auto& o : dense_obs_raw) {
                if (o.pixel) {
                    dense_obs[static_cast<std::size_t>(o.keypoint_id)] = {*o.pixel, true};
                }
            }
            object_sol = refine_pose(object_sol.pose, sample, dense_obs, scene.intrinsics,
                                     cfg.robust);
        }

        return {object_in_robot_frame(robot_sol.pose, object_sol.pose)};
    } catch (const NotEnoughPointsError&) {
        return {};
    } catch (const DegenerateConfigurationError&) {
        return {};
    } catch (const DivergedBehindCameraError&) {
        return {};
    }
}

namespace detail {

inline ErrorRecord make_record(std::string experiment, int trial, double distance,
                               double yaw, const RigidTransform& truth,
                               const std::optional<RigidTransform>& estimate, bool refined,
                               bool filtered) {
    ErrorRecord r;
    r.experiment = std::move(experiment);
    r.trial = trial;
    r.distance_m = distance;
    r.yaw_rad = yaw;
    r.refined = refined;
    r.filtered = filtered;
    if (estimate) {
        const Vec3 err = estimate->translation - truth.translation;
        r.err_x_m = err.x;
        r.err_y_m = err.y;
        r.err_z_m = err.z;
        r.lateral_err_m = std::hypot(err.x, err.y);
        r.rot_err_rad = geodesic_angle(estimate->rotation, truth.rotation);
    } else {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        r.err_x_m = r.err_y_m = r.err_z_m = r.lateral_err_m = r.rot_err_rad = nan;
        r.dropped = true;
    }
    return r;
}

inline RigidTransform yawed_pose(const Point3& position, double yaw) {
    return {UnitQuaternion::from_axis_angle({0.0, 0.0, 1.0}, yaw), position};
}

}  // namespace detail

/// Camera placement shared by the sweep experiments: on the azimuth arc at a
/// given distance, aimed at the default target.
struct SweepCamera {
    double azimuth{0.0};
    double height{0.45};
};

/// Distance sweep: the object sits at four spots of the workspace at a fixed
/// yaw while the camera distance steps through the configured list.
struct DistanceSweepConfig {
    std::vector<double> distances{1.02, 1.12, 1.22, 1.32, 1.42, 1.52, 1.62};
    std::array<Vec2, 4> object_positions_xy{
        Vec2{kWorkspaceCenter.x - 0.10, kWorkspaceCenter.y - 0.10},
        Vec2{kWorkspaceCenter.x - 0.10, kWorkspaceCenter.y + 0.10},
        Vec2{kWorkspaceCenter.x + 0.10, kWorkspaceCenter.y - 0.10},
        Vec2{kWorkspaceCenter.x + 0.10, kWorkspaceCenter.y + 0.10}};
    double object_z{kWorkspaceCenter.z};
    double object_yaw{kPi / 4.0};
    int trials_per_cell{25};
    ObjectModel object = *find_object("sugar_box");
    RobotKeypointModel robot = RobotKeypointModel::default_model();
    CameraIntrinsics intrinsics = CameraIntrinsics::vga_default();
    SweepCamera camera{};
    NoiseConfig noise{};
    PipelineConfig pipeline{};
};

struct DistanceSweepRow {
    double distance_m{0.0};
    double mean_lateral_m{0.0};
    double std_lateral_m{0.0};
    int dropped{0};
    int total{0};
};

struct DistanceSweepResult {
    std::vector<ErrorRecord> records;
    std::vector<DistanceSweepRow> table;
};

inline DistanceSweepResult run_distance_sweep(const DistanceSweepConfig& cfg) {
    DistanceSweepResult result;
    int trial = 0;
    for (double distance : cfg.distances) {
        std::vector<double> lateral;
        int dropped = 0;
        int total = 0;
        for (const auto& xy : cfg.object_positions_xy) {
            SceneConfig scene;
            scene.intrinsics = cfg.intrinsics;
            scene.camera_in_robot =
                place_camera(distance, cfg.camera.azimuth, cfg.camera.height);
            scene.objects = {{cfg.object.name,
                              detail::yawed_pose({xy.x, xy.y, cfg.object_z}, cfg.object_yaw)}};
            for (int t = 0; t < cfg.trials_per_cell; ++t) {
                const auto est = estimate_frame(scene, cfg.robot, cfg.object, 0, cfg.noise,
                                                static_cast<std::uint64_t>(trial),
                                                cfg.pipeline);
                ErrorRecord rec = detail::make_record(
                    "distance-sweep", trial, distance, cfg.object_yaw,
                    scene.objects[0].pose_in_robot, est.object_in_robot,
                    cfg.pipeline.refine, false);
                if (rec.dropped) {
                    ++dropped;
                } else {
                    lateral.push_back(rec.lateral_err_m);
                }
                ++total;
                result.records.push_back(std::move(rec));
                ++trial;
            }
        }
        result.table.push_back(
            {distance, mean(lateral), stddev(lateral), dropped, total});
    }
    return result;
}

/// Orientation sweep at fixed distance: object yaw steps around the circle.
struct OrientationSweepConfig {
    double distance{1.12};
    std::vector<double> yaws = [] {
        std::vector<double> v;
        for (int deg = 0; deg < 360; deg += 10) {
            v.push_back(deg * kPi / 180.0);
        }
        return v;
    }();
    Point3 object_position = kWorkspaceCenter;
    int trials_per_yaw{10};
    ObjectModel object = *find_object("sugar_box");
    RobotKeypointModel robot = RobotKeypointModel::default_model();
    CameraIntrinsics intrinsics = CameraIntrinsics::vga_default();
    SweepCamera camera{};
    NoiseConfig noise{};
    PipelineConfig pipeline{};
};

struct OrientationSweepRow {
    double yaw_rad{0.0};
    double mean_lateral_m{0.0};
    double std_lateral_m{0.0};
    int dropped{0};
    int total{0};
};

struct OrientationSweepResult {
    std::vector<ErrorRecord> records;
    std::vector<OrientationSweepRow> table;
    double mean_lateral_m{0.0};
    double std_lateral_m{0.0};
};

inline OrientationSweepResult run_orientation_sweep(const OrientationSweepConfig& cfg) {
    OrientationSweepResult result;
    std::vector<double> all_lateral;
    int trial = 0;
    for (double yaw : cfg.yaws) {
        SceneConfig scene;
        scene.intrinsics = cfg.intrinsics;
        scene.camera_in_robot =
            place_camera(cfg.distance, cfg.camera.azimuth, cfg.camera.height);
        scene.objects = {{cfg.object.name, detail::yawed_pose(cfg.object_position, yaw)}};
        std::vector<double> lateral;
        int dropped = 0;
        for (int t = 0; t < cfg.trials_per_yaw; ++t) {
            const auto est = estimate_frame(scene, cfg.robot, cfg.object, 0, cfg.noise,
                                            static_cast<std::uint64_t>(trial), cfg.pipeline);
            ErrorRecord rec = detail::make_record(
                "orientation-sweep", trial, cfg.distance, yaw,
                scene.objects[0].pose_in_robot, est.object_in_robot, cfg.pipeline.refine,
                false);
            if (rec.dropped) {
                ++dropped;
            } else {
                lateral.push_back(rec.lateral_err_m);
                all_lateral.push_back(rec.lateral_err_m);
            }
            result.records.push_back(std::move(rec));
            ++trial;
        }
        result.table.push_back(
            {yaw, mean(lateral), stddev(lateral), dropped, cfg.trials_per_yaw});
    }
    result.mean_lateral_m = mean(all_lateral);
    result.std_lateral_m = stddev(all_lateral);
    return result;
}

/// Camera-motion run: stationary object, camera on a random walk; every frame
/// is estimated raw and through the exponential filter.
struct CameraMotionConfig {
    int frames{500};
    TrajectoryKind kind{TrajectoryKind::walk};
    TrajectoryConfig trajectory{};
    ObjectModel object = *find_object("sugar_box");
    RigidTransform object_pose = {UnitQuaternion::identity(), kWorkspaceCenter};
    RobotKeypointModel robot = RobotKeypointModel::default_model();
    CameraIntrinsics intrinsics = CameraIntrinsics::vga_default();
    NoiseConfig noise{};
    PipelineConfig pipeline{};
    double filter_alpha{0.095};
    std::optional<double> filter_gate{};  // disabled by default for raw accuracy runs
};

struct CameraMotionResult {
    std::vector<ErrorRecord> records;  // one raw + one filtered record per frame
    std::array<std::vector<double>, 3> raw_abs_err;  // |x|, |y|, |z| per solved frame
    std::array<std::vector<double>, 3> filtered_abs_err;
    int dropped_frames{0};
    int total_frames{0};

    double fraction_within(int axis, double threshold, bool filtered) const {
        const auto& samples = filtered ? filtered_abs_err[static_cast<std::size_t>(axis)]
                                       : raw_abs_err[static_cast<std::size_t>(axis)];
        return ipose::fraction_within(samples, threshold);
    }
};

inline CameraMotionResult run_camera_motion(const CameraMotionConfig& cfg) {
    if (cfg.frames < 1) {
        throw ConfigError("camera motion needs at least one frame");
    }
    CameraMotionResult result;
    result.total_frames = cfg.frames;
    const auto trajectory =
        camera_trajectory(cfg.kind, cfg.frames, Rng::derive(cfg.noise.seed, 0x7261u),
                          cfg.trajectory);

    SceneConfig scene;
    scene.intrinsics = cfg.intrinsics;
    scene.objects = {{cfg.object.name, cfg.object_pose}};

    FilterState filter{cfg.filter_alpha, std::nullopt, cfg.filter_gate};
    std::optional<RigidTransform> last_raw;
    for (int f = 0; f < cfg.frames; ++f) {
        scene.camera_in_robot = trajectory[static_cast<std::size_t>(f)];
        const auto est = estimate_frame(scene, cfg.robot, cfg.object, 0, cfg.noise,
                                        static_cast<std::uint64_t>(f), cfg.pipeline);
        bool frame_dropped = est.dropped();
        std::optional<RigidTransform> raw = est.object_in_robot;
        std::optional<RigidTransform> filtered;
        if (raw) {
            last_raw = raw;
            auto [next, f_pose] = update(filter, *raw);
            filter = std::move(next);
            filtered = f_pose;
        } else {
            ++result.dropped_frames;
            raw = last_raw;             // carry the last solved pose forward
            filtered = filter.current;  // filter holds its previous output
        }

        ErrorRecord raw_rec =
            detail::make_record("camera-motion", f, 0.0, 0.0, cfg.object_pose, raw,
                                cfg.pipeline.refine, false);
        raw_rec.dropped = frame_dropped;
        ErrorRecord filt_rec =
            detail::make_record("camera-motion", f, 0.0, 0.0, cfg.object_pose, filtered,
                                cfg.pipeline.refine, true);
        filt_rec.dropped = frame_dropped;

        if (raw) {
            result.raw_abs_err[0].push_back(std::abs(raw_rec.err_x_m));
            result.raw_abs_err[1].push_back(std::abs(raw_rec.err_y_m));
            result.raw_abs_err[2].push_back(std::abs(raw_rec.err_z_m));
        }
        if (filtered) {
            result.filtered_abs_err[0].push_back(std::abs(filt_rec.err_x_m));
            result.filtered_abs_err[1].push_back(std::abs(filt_rec.err_y_m));
            result.filtered_abs_err[2].push_back(std::abs(filt_rec.err_z_m));
        }
        result.records.push_back(std::move(raw_rec));
        result.records.push_back(std::move(filt_rec));
    }
    return result;
}

/// Anisotropic grasp gate: tight along the finger-closing axis, looser in the
/// orthogonal horizontal direction, loosest along the (vertical) approach.
struct GraspToleranceConfig {
    double finger_tolerance{0.02};
    double orthogonal_tolerance{0.05};
    double approach_tolerance{0.10};
    ObjectModel::Shape shape{ObjectModel::Shape::cuboid};

    static GraspToleranceConfig for_shape(ObjectModel::Shape shape) {
        GraspToleranceConfig cfg;
        cfg.shape = shape;
        if (shape == ObjectModel::Shape::cylinder) {
            cfg.orthogonal_tolerance = cfg.finger_tolerance;
        }
        return cfg;
    }
};

/// Success predicate for a top-down grasp commanded at the given yaw: the
/// robot-frame position error, rotated into the gripper frame, must fit inside
/// the anisotropic tolerances.
inline bool grasp_success(const Vec3& err_robot, double grasp_yaw,
                          const GraspToleranceConfig& tol) {
    const double c = std::cos(grasp_yaw);
    const double s = std::sin(grasp_yaw);
    const double finger = c * err_robot.x + s * err_robot.y;
    const double orthogonal = -s * err_robot.x + c * err_robot.y;
    return std::abs(finger) <= tol.finger_tolerance &&
           std::abs(orthogonal) <= tol.orthogonal_tolerance &&
           std::abs(err_robot.z) <= tol.approach_tolerance;
}

struct GraspTrialConfig {
    std::vector<ObjectModel> objects = [] {
        std::vector<ObjectModel> v;
        for (const char* name :
             {"sugar_box", "cracker_box", "soup_can", "meat_can", "mustard"}) {
            v.push_back(*find_object(name));
        }
        return v;
    }();
    int grasps_per_camera{5};
    std::vector<SweepCamera> cameras{{0.0, 0.45}, {kPi / 6.0, 0.40}};
    double camera_distance{1.30};
    RobotKeypointModel robot = RobotKeypointModel::default_model();
    CameraIntrinsics intrinsics = CameraIntrinsics::vga_default();
    NoiseConfig noise{};
    PipelineConfig pipeline{};
};

struct GraspObjectResult {
    std::string object;
    int successes{0};
    int trials{0};
    double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct GraspTrialResult {
    std::vector<ErrorRecord> records;
    std::vector<GraspObjectResult> per_object;
    int successes{0};
    int trials{0};
    double overall_rate() const {
        return trials > 0 ? static_cast<double>(successes) / trials : 0.0;
    }
};

/// Grasp trials: each object placed at seeded random workspace poses, viewed
/// from each configured camera; a trial succeeds when the estimated pose error
/// passes the grasp gate for the object's shape. Dropped frames count as
/// failures.
inline GraspTrialResult run_grasp_trials(const GraspTrialConfig& cfg) {
    GraspTrialResult result;
    Rng placement_rng(Rng::derive(cfg.noise.seed, 0x6772u));
    int trial = 0;
    for (const auto& object : cfg.objects) {
        GraspObjectResult obj_result;
        obj_result.object = object.name;
        const GraspToleranceConfig tol = GraspToleranceConfig::for_shape(object.shape);
        for (const auto& camera : cfg.cameras) {
            for (int g = 0; g < cfg.grasps_per_camera; ++g) {
                const Point3 position{
                    placement_rng.uniform(kWorkspaceCenter.x - 0.5 * kWorkspaceExtent.x,
                                          kWorkspaceCenter.x + 0.5 * kWorkspaceExtent.x),
                    placement_rng.uniform(kWorkspaceCenter.y - 0.5 * kWorkspaceExtent.y,
                                          kWorkspaceCenter.y + 0.5 * kWorkspaceExtent.y),
                    placement_rng.uniform(kWorkspaceCenter.z - 0.5 * kWorkspaceExtent.z,
                                          kWorkspaceCenter.z + 0.5 * kWorkspaceExtent.z)};
                const double yaw = placement_rng.uniform(-kPi, kPi);

                SceneConfig scene;
                scene.intrinsics = cfg.intrinsics;
                scene.camera_in_robot =
                    place_camera(cfg.camera_distance, camera.azimuth, camera.height);
                scene.objects = {{object.name, detail::yawed_pose(position, yaw)}};

                const auto est = estimate_frame(scene, cfg.robot, object, 0, cfg.noise,
                                                static_cast<std::uint64_t>(trial),
                                                cfg.pipeline);
                ErrorRecord rec = detail::make_record(
                    "grasp-trials", trial, cfg.camera_distance, yaw,
                    scene.objects[0].pose_in_robot, est.object_in_robot,
                    cfg.pipeline.refine, false);
                const bool success =
                    est.object_in_robot.has_value() &&
                    grasp_success({rec.err_x_m, rec.err_y_m, rec.err_z_m}, yaw, tol);
                obj_result.successes += success ? 1 : 0;
                ++obj_result.trials;
                result.records.push_back(std::move(rec));
                ++trial;
            }
        }
        result.successes += obj_result.successes;
        result.trials += obj_result.trials;
        result.per_object.push_back(std::move(obj_result));
    }
    return result;
}

}  // namespace ipose
