#include "ipose/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ipose/belief.hpp"
#include "ipose/stats.hpp"
#include "support/oracles.hpp"

namespace ipose {
namespace {

const CameraIntrinsics kCam = CameraIntrinsics::vga_default();

TEST(ForwardKinematics, ZeroAnglesGiveCumulativeOffsets) {
    const RobotKeypointModel robot = RobotKeypointModel::default_model();
    const std::array<double, 7> zeros{};
    const auto pts = forward_kinematics(robot.arms[0], zeros);
    Point3 acc{};
    for (std::size_t i = 0; i < 7; ++i) {
        acc = acc + robot.arms[0].joints[i].offset;
        EXPECT_LT((pts[i] - acc).norm(), 1e-12);
    }
}

TEST(ForwardKinematics, BaseJointRotationPreservesDistanceToAxis) {
    const RobotKeypointModel robot = RobotKeypointModel::default_model();
    const KinematicChain& chain = robot.arms[0];
    const std::array<double, 7> zeros{};
    const auto rest = forward_kinematics(chain, zeros);
    std::array<double, 7> rotated_angles{};
    rotated_angles[0] = 0.9;
    const auto rotated = forward_kinematics(chain, rotated_angles);
    // The base axis is z through the first joint's position.
    const Point3 base = rest[0];
    EXPECT_LT((rotated[0] - base).norm(), 1e-12);
    for (std::size_t i = 1; i < 7; ++i) {
        const double d_rest = std::hypot(rest[i].x - base.x, rest[i].y - base.y);
        const double d_rot = std::hypot(rotated[i].x - base.x, rotated[i].y - base.y);
        EXPECT_NEAR(d_rest, d_rot, 1e-12);
        EXPECT_NEAR(rest[i].z, rotated[i].z, 1e-12);  // rotation about z keeps height
    }
}

TEST(ForwardKinematics, MatchesMatrixChainOracle) {
    const RobotKeypointModel robot = RobotKeypointModel::default_model();
    Rng rng(80);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 7> angles{};
        for (auto& a : angles) {
            a = rng.uniform(-2.0, 2.0);
        }
        for (const auto& chain : robot.arms) {
            const auto got = forward_kinematics(chain, angles);
            const auto expected = testing::fk_matrix_oracle(chain, angles);
            for (std::size_t i = 0; i < 7; ++i) {
                EXPECT_LT((got[i] - expected[i]).norm(), 1e-10);
            }
        }
    }
}

TEST(ForwardKinematics, EnforcesJointLimits) {
    const RobotKeypointModel robot = RobotKeypointModel::default_model();
    std::array<double, 7> angles{};
    angles[3] = 3.5;  // beyond the default 2.8 rad limit
    EXPECT_THROW(forward_kinematics(robot.arms[0], angles), JointLimitError);
}

TEST(RobotKeypoints, CountsAndLayout) {
    const RobotKeypointModel robot = RobotKeypointModel::default_model();
    const auto pts = robot_keypoints(robot, default_joint_angles());
    ASSERT_EQ(pts.size(), RobotKeypointModel::kKeypointCount);
    EXPECT_EQ(robot.torso_keypoints.size(), 10u);
}

TEST(ObserveKeypoints, ZeroNoiseGivesExactProjections) {
    SceneConfig scene;
    scene.camera_in_robot = place_camera(1.3, 0.0, 0.45);
    const RobotKeypointModel robot = RobotKeypointModel::default_model();
    const auto pts = robot_keypoints(robot, scene.joint_angles);
    const auto obs =
        observe_keypoints(kCam, scene.cam_from_robot(), pts, NoiseConfig::preset("clean"));
    ASSERT_EQ(obs.size(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ASSERT_TRUE(obs[i].pixel.has_value()) << "keypoint " << i << " not visible";
        const Pixel2 expected = project(kCam, scene.cam_from_robot(), pts[i]);
        EXPECT_NEAR(obs[i].pixel->x, expected.x, 1e-12);
        EXPECT_NEAR(obs[i].pixel->y, expected.y, 1e-12);
    }
}

TEST(ObserveKeypoints, FullDropoutRemovesEverything) {
    SceneConfig scene;
    scene.camera_in_robot = place_camera(1.3, 0.0, 0.45);
    const auto pts = robot_keypoints(RobotKeypointModel::default_model(), scene.joint_angles);
    NoiseConfig noise;
    noise.dropout_prob = 1.0;
    const auto obs = observe_keypoints(kCam, scene.cam_from_robot(), pts, noise);
    for (const auto& o : obs) {
        EXPECT_FALSE(o.pixel.has_value());
    }
}

TEST(ObserveKeypoints, EmpiricalSigmaMatchesConfigured) {
    SceneConfig scene;
    scene.camera_in_robot = place_camera(1.5, 0.0, 0.45);
    const std::vector<Point3> pts{kWorkspaceCenter};
    NoiseConfig noise;
    noise.pixel_sigma = 2.0;
    noise.seed = 4;
    const Pixel2 exact = project(kCam, scene.cam_from_robot(), pts[0]);
    std::vector<double> dx;
    std::vector<double> dy;
    for (int i = 0; i < 10000; ++i) {
        const auto obs = observe_keypoints(kCam, scene.cam_from_robot(), pts, noise,
                                           static_cast<std::uint64_t>(i));
        ASSERT_TRUE(obs[0].pixel.has_value());
        dx.push_back(obs[0].pixel->x - exact.x);
        dy.push_back(obs[0].pixel->y - exact.y);
    }
    EXPECT_GT(stddev(dx), 1.9);
    EXPECT_LT(stddev(dx), 2.1);
    EXPECT_GT(stddev(dy), 1.9);
    EXPECT_LT(stddev(dy), 2.1);
}

TEST(ObserveKeypoints, NoDetectionOutsideImageBounds) {
    Rng rng(81);
    const auto pts = robot_keypoints(RobotKeypointModel::default_model(),
                                     default_joint_angles());
    for (int trial = 0; trial < 100; ++trial) {
        SceneConfig scene;
        scene.camera_in_robot = place_camera(rng.uniform(1.0, 2.0), rng.uniform(-0.8, 0.8),
                                             rng.uniform(0.3, 0.7));
        NoiseConfig noise;
        noise.pixel_sigma = 30.0;  // push many detections toward the borders
        noise.seed = static_cast<std::uint64_t>(trial);
        const auto obs = observe_keypoints(kCam, scene.cam_from_robot(), pts, noise);
        for (const auto& o : obs) {
            if (o.pixel) {
                EXPECT_TRUE(in_image(kCam, *o.pixel));
            }
        }
    }
}

TEST(ObserveKeypoints, DeterministicForIdenticalSeedAndSalt) {
    SceneConfig scene;
    scene.camera_in_robot = place_camera(1.4, 0.1, 0.4);
    const auto pts = robot_keypoints(RobotKeypointModel::default_model(), scene.joint_angles);
    NoiseConfig noise = NoiseConfig::preset("nominal");
    noise.seed = 77;
    const auto a = observe_keypoints(kCam, scene.cam_from_robot(), pts, noise, 5);
    const auto b = observe_keypoints(kCam, scene.cam_from_robot(), pts, noise, 5);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].pixel.has_value(), b[i].pixel.has_value());
        if (a[i].pixel) {
            EXPECT_EQ(a[i].pixel->x, b[i].pixel->x);
            EXPECT_EQ(a[i].pixel->y, b[i].pixel->y);
        }
    }
}

SceneConfig single_object_scene(const ObjectModel& model, const RigidTransform& pose,
                                double distance = 1.2, double azimuth = 0.0) {
    SceneConfig scene;
    scene.camera_in_robot = place_camera(distance, azimuth, 0.45);
    scene.objects = {{model.name, pose}};
    return scene;
}

TEST(RenderBeliefStacks, CleanRenderHasOnePeakPerMap) {
    const ObjectModel model = *find_object("sugar_box");
    const SceneConfig scene = single_object_scene(
        model, {UnitQuaternion::from_axis_angle({0, 0, 1}, 0.5), kWorkspaceCenter});
    const auto [belief, affinity] =
        render_belief_stacks(scene, model, NoiseConfig::preset("clean"));
    const auto peaks = extract_peaks(belief, 0.1);
    EXPECT_EQ(peaks.size(), ObjectModel::kKeypointCount);
    for (int map = 0; map < belief.n; ++map) {
        int count = 0;
        for (const auto& p : peaks) {
            count += p.map_index == map ? 1 : 0;
        }
        EXPECT_EQ(count, 1) << "map " << map;
    }
    // Affinity magnitudes stay within the unit bound.
    for (std::size_t i = 0; i < affinity.x_values.size(); ++i) {
        const double mag = std::hypot(affinity.x_values[i], affinity.y_values[i]);
        EXPECT_LE(mag, 1.0 + 1e-6);
    }
}

TEST(RenderBeliefStacks, DecodePipelineRecoversPoseWithinQuarterPixel) {
    const ObjectModel model = *find_object("sugar_box");
    const RigidTransform truth{UnitQuaternion::from_axis_angle({0, 0, 1}, 0.7),
                               kWorkspaceCenter};
    const SceneConfig scene = single_object_scene(model, truth);
    const RenderConfig rc = RenderConfig::for_intrinsics(scene.intrinsics, 50);
    const auto [belief, affinity] =
        render_belief_stacks(scene, model, NoiseConfig::preset("clean"), rc);
    const auto peaks = extract_peaks(belief, 0.1);
    const auto instances = associate_vertices(peaks, affinity, 0.5);
    ASSERT_EQ(instances.size(), 1u);
    const auto corrs =
        instance_correspondences(instances[0], model, rc.map_to_image_scale);
    ASSERT_GE(corrs.size(), 6u);
    const PnPSolution sol = solve_pnp(corrs, scene.intrinsics);

    // Pixel-equivalent bound: reprojections of the estimated camera-frame pose
    // stay within a quarter of a map cell (in image pixels) of ground truth.
    const RigidTransform cam_from_object =
        compose(scene.cam_from_robot(), truth);
    for (const auto& p : model.keypoints()) {
        const Pixel2 expected = project(scene.intrinsics, cam_from_object, p);
        const Pixel2 got = project(scene.intrinsics, sol.pose, p);
        EXPECT_LT((got - expected).norm(), 0.25 * rc.map_to_image_scale);
    }
}

TEST(RenderBeliefStacks, TwoInstancesAssociateToGroundTruthGrouping) {
    const ObjectModel model = *find_object("sugar_box");
    // Two instances ~20 grid px apart in the 50x50 map.
    const RigidTransform pose_a{UnitQuaternion::from_axis_angle({0, 0, 1}, 0.3),
                                {0.60, -0.12, 0.10}};
    const RigidTransform pose_b{UnitQuaternion::from_axis_angle({0, 0, 1}, -0.4),
                                {0.70, 0.14, 0.16}};
    SceneConfig scene = single_object_scene(model, pose_a);
    scene.objects.push_back({model.name, pose_b});
    const RenderConfig rc = RenderConfig::for_intrinsics(scene.intrinsics, 50);
    const auto [belief, affinity] =
        render_belief_stacks(scene, model, NoiseConfig::preset("clean"), rc);
    const auto instances = associate_vertices(extract_peaks(belief, 0.1), affinity, 0.5);
    ASSERT_EQ(instances.size(), 2u);

    const RigidTransform cam_from_robot = scene.cam_from_robot();
    for (const auto& inst : instances) {
        // Match the instance to its ground-truth placement via the centroid.
        double best = 1e9;
        RigidTransform truth;
        for (const auto& placement : scene.objects) {
            const Pixel2 c = project(scene.intrinsics,
                                     compose(cam_from_robot, placement.pose_in_robot),
                                     model.centroid()) /
                             rc.map_to_image_scale;
            const double d = (c - inst.centroid.position).norm();
            if (d < best) {
                best = d;
                truth = placement.pose_in_robot;
            }
        }
        ASSERT_LT(best, 2.0);
        EXPECT_EQ(inst.assigned_count(), 8u);
        const RigidTransform cam_from_object = compose(cam_from_robot, truth);
        const auto verts = model.vertices();
        for (int v = 0; v < 8; ++v) {
            ASSERT_TRUE(inst.vertices[static_cast<std::size_t>(v)].has_value());
            const Pixel2 expected =
                project(scene.intrinsics, cam_from_object, verts[static_cast<std::size_t>(v)]) /
                rc.map_to_image_scale;
            EXPECT_LT((inst.vertices[static_cast<std::size_t>(v)]->position - expected).norm(),
                      1.0)
                << "vertex " << v << " associated with the wrong instance";
        }
    }
}

TEST(RenderBeliefStacks, NoFalsePositivesAndNoDropoutKeepsPeakCount) {
    const ObjectModel model = *find_object("sugar_box");
    const SceneConfig scene = single_object_scene(
        model, {UnitQuaternion::identity(), kWorkspaceCenter});
    NoiseConfig noise;
    noise.pixel_sigma = 1.0;
    noise.seed = 9;
    const auto [belief, affinity] = render_belief_stacks(scene, model, noise);
    EXPECT_EQ(extract_peaks(belief, 0.1).size(), ObjectModel::kKeypointCount);
}

TEST(RenderBeliefStacks, DeterministicForIdenticalConfig) {
    const ObjectModel model = *find_object("sugar_box");
    const SceneConfig scene = single_object_scene(
        model, {UnitQuaternion::from_axis_angle({0, 0, 1}, 1.0), kWorkspaceCenter});
    NoiseConfig noise = NoiseConfig::preset("nominal");
    noise.seed = 123;
    const auto [belief_a, affinity_a] = render_belief_stacks(scene, model, noise);
    const auto [belief_b, affinity_b] = render_belief_stacks(scene, model, noise);
    EXPECT_EQ(belief_a.values, belief_b.values);
    EXPECT_EQ(affinity_a.x_values, affinity_b.x_values);
    EXPECT_EQ(affinity_a.y_values, affinity_b.y_values);
}

TEST(CameraTrajectory, StaysInsideBoxWithBoundedSteps) {
    const TrajectoryConfig cfg;
    const auto poses = camera_trajectory(TrajectoryKind::walk, 300, 5, cfg);
    ASSERT_EQ(poses.size(), 300u);
    for (std::size_t i = 0; i < poses.size(); ++i) {
        const Vec3& p = poses[i].translation;
        EXPECT_GE(p.x, cfg.box_min.x - 1e-12);
        EXPECT_LE(p.x, cfg.box_max.x + 1e-12);
        EXPECT_GE(p.y, cfg.box_min.y - 1e-12);
        EXPECT_LE(p.y, cfg.box_max.y + 1e-12);
        EXPECT_GE(p.z, cfg.box_min.z - 1e-12);
        EXPECT_LE(p.z, cfg.box_max.z + 1e-12);
        if (i > 0) {
            EXPECT_LE((p - poses[i - 1].translation).norm(), cfg.max_step + 1e-12);
            EXPECT_LE(geodesic_angle(poses[i].rotation, poses[i - 1].rotation),
                      cfg.max_rotation_step + 1e-12);
        }
    }
}

TEST(CameraTrajectory, SingleFrameAndDeterminism) {
    const auto single = camera_trajectory(TrajectoryKind::walk, 1, 8);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_TRUE(camera_in_envelope(single[0], CameraEnvelope{1.0, 2.1, kPi, 0.2, 0.6}));
    const auto a = camera_trajectory(TrajectoryKind::walk, 100, 9);
    const auto b = camera_trajectory(TrajectoryKind::walk, 100, 9);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].translation.x, b[i].translation.x);
        EXPECT_EQ(a[i].rotation.w, b[i].rotation.w);
    }
    const auto still = camera_trajectory(TrajectoryKind::still, 10, 9);
    for (const auto& pose : still) {
        EXPECT_EQ(pose.translation.x, still[0].translation.x);
    }
}

TEST(CameraEnvelopeTest, AcceptsInsideRejectsOutside) {
    EXPECT_TRUE(camera_in_envelope(place_camera(1.3, 0.0, 0.45)));
    EXPECT_TRUE(camera_in_envelope(place_camera(1.9, kPi / 5.0, 0.30)));
    EXPECT_FALSE(camera_in_envelope(place_camera(0.8, 0.0, 0.45)));   // too close
    EXPECT_FALSE(camera_in_envelope(place_camera(2.3, 0.0, 0.45)));   // too far
    EXPECT_FALSE(camera_in_envelope(place_camera(1.5, kPi / 3.0, 0.45)));  // azimuth
    EXPECT_FALSE(camera_in_envelope(place_camera(1.5, 0.0, 1.5)));    // too high
}

TEST(NoisePresets, ValuesAndUnknownName) {
    const NoiseConfig clean = NoiseConfig::preset("clean");
    EXPECT_EQ(clean.pixel_sigma, 0.0);
    EXPECT_EQ(clean.dropout_prob, 0.0);
    EXPECT_EQ(clean.false_positive_rate, 0.0);
    const NoiseConfig nominal = NoiseConfig::preset("nominal");
    EXPECT_EQ(nominal.pixel_sigma, 2.0);
    EXPECT_EQ(nominal.dropout_prob, 0.05);
    const NoiseConfig harsh = NoiseConfig::preset("harsh");
    EXPECT_EQ(harsh.pixel_sigma, 4.0);
    EXPECT_THROW(NoiseConfig::preset("bogus"), ConfigError);
}

}  // namespace
}  // namespace ipose
