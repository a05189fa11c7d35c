#include "ipose/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ipose/stats.hpp"

namespace ipose {
namespace {

TEST(EstimateFrame, ZeroNoiseRecoversGroundTruth) {
    SceneConfig scene;
    scene.camera_in_robot = place_camera(1.3, 0.1, 0.45);
    const ObjectModel object = *find_object("sugar_box");
    const RigidTransform truth{UnitQuaternion::from_axis_angle({0, 0, 1}, kPi / 4.0),
                               kWorkspaceCenter};
    scene.objects = {{object.name, truth}};
    const auto est = estimate_frame(scene, RobotKeypointModel::default_model(), object, 0,
                                    NoiseConfig::preset("clean"), 0);
    ASSERT_FALSE(est.dropped());
    EXPECT_LT((est.object_in_robot->translation - truth.translation).norm(), 1e-6);
    EXPECT_LT(geodesic_angle(est.object_in_robot->rotation, truth.rotation), 1e-6);
}

TEST(DistanceSweep, CleanPresetIsExactEverywhere) {
    DistanceSweepConfig cfg;
    cfg.trials_per_cell = 2;
    cfg.noise = NoiseConfig::preset("clean");
    const auto result = run_distance_sweep(cfg);
    ASSERT_EQ(result.table.size(), 7u);
    for (const auto& row : result.table) {
        EXPECT_EQ(row.dropped, 0);
        EXPECT_LT(row.mean_lateral_m, 1e-6) << "d=" << row.distance_m;
    }
    EXPECT_EQ(result.records.size(), 7u * 4u * 2u);
}

TEST(DistanceSweep, DefaultDistancesMatchProtocol) {
    const DistanceSweepConfig cfg;
    ASSERT_EQ(cfg.distances.size(), 7u);
    for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_NEAR(cfg.distances[i], 0.92 + 0.10 * (i + 1), 1e-12);
        EXPECT_GE(cfg.distances[i], 1.0);
        EXPECT_LE(cfg.distances[i], 2.0);
    }
}

TEST(DistanceSweep, LateralErrorDefinitionHolds) {
    DistanceSweepConfig cfg;
    cfg.trials_per_cell = 3;
    cfg.noise = NoiseConfig::preset("nominal");
    cfg.noise.seed = 21;
    const auto result = run_distance_sweep(cfg);
    int solved = 0;
    for (const auto& r : result.records) {
        if (r.dropped) {
            continue;
        }
        ++solved;
        EXPECT_NEAR(r.lateral_err_m * r.lateral_err_m,
                    r.err_x_m * r.err_x_m + r.err_y_m * r.err_y_m, 1e-15);
    }
    EXPECT_GT(solved, 0);
}

TEST(DistanceSweep, DropAccountingIsConsistent) {
    DistanceSweepConfig cfg;
    cfg.trials_per_cell = 4;
    cfg.noise = NoiseConfig::preset("harsh");
    cfg.noise.seed = 3;
    const auto result = run_distance_sweep(cfg);
    int dropped_records = 0;
    for (const auto& r : result.records) {
        dropped_records += r.dropped ? 1 : 0;
    }
    int dropped_table = 0;
    int total_table = 0;
    for (const auto& row : result.table) {
        dropped_table += row.dropped;
        total_table += row.total;
    }
    EXPECT_EQ(dropped_table, dropped_records);
    EXPECT_EQ(total_table, static_cast<int>(result.records.size()));
}

TEST(DistanceSweep, ErrorGrowsWithDistanceUnderNominalNoise) {
    DistanceSweepConfig cfg;
    cfg.trials_per_cell = 30;
    cfg.noise = NoiseConfig::preset("nominal");
    cfg.noise.seed = 5;
    const auto result = run_distance_sweep(cfg);
    std::vector<double> distances;
    std::vector<double> means;
    for (const auto& row : result.table) {
        distances.push_back(row.distance_m);
        means.push_back(row.mean_lateral_m);
    }
    EXPECT_GT(spearman_rho(distances, means), 0.0);
    EXPECT_GT(means.back(), means.front());
}

TEST(OrientationSweep, CleanPresetIsExact) {
    OrientationSweepConfig cfg;
    cfg.trials_per_yaw = 1;
    cfg.noise = NoiseConfig::preset("clean");
    const auto result = run_orientation_sweep(cfg);
    ASSERT_EQ(result.table.size(), 36u);
    EXPECT_LT(result.mean_lateral_m, 1e-6);
    for (const auto& row : result.table) {
        EXPECT_EQ(row.dropped, 0);
    }
    EXPECT_NEAR(cfg.distance, 1.12, 1e-12);
}

TEST(OrientationSweep, FaceOnYawsAreNotEasierThanMedian) {
    OrientationSweepConfig cfg;
    cfg.trials_per_yaw = 40;
    cfg.noise = NoiseConfig::preset("nominal");
    cfg.noise.seed = 11;
    const auto result = run_orientation_sweep(cfg);
    std::vector<double> all_means;
    double face_on_max = 0.0;
    for (const auto& row : result.table) {
        all_means.push_back(row.mean_lateral_m);
        const double deg = row.yaw_rad * 180.0 / kPi;
        const double mod = std::fmod(deg, 90.0);
        if (mod < 1.0 || mod > 89.0) {  // 0, 90, 180, 270
            face_on_max = std::max(face_on_max, row.mean_lateral_m);
        }
    }
    EXPECT_GT(result.std_lateral_m, 0.0);
    EXPECT_GE(face_on_max, median(all_means));
}

TEST(CameraMotion, CleanRunIsAlwaysWithinTolerance) {
    CameraMotionConfig cfg;
    cfg.frames = 120;
    cfg.noise = NoiseConfig::preset("clean");
    const auto result = run_camera_motion(cfg);
    EXPECT_EQ(result.dropped_frames, 0);
    for (int axis = 0; axis < 3; ++axis) {
        EXPECT_DOUBLE_EQ(result.fraction_within(axis, 0.02, false), 1.0);
        EXPECT_DOUBLE_EQ(result.fraction_within(axis, 0.02, true), 1.0);
    }
    EXPECT_EQ(result.records.size(), 2u * 120u);
}

TEST(CameraMotion, FilteringDoesNotHurtAtNominalNoise) {
    CameraMotionConfig cfg;
    cfg.frames = 250;
    cfg.noise = NoiseConfig::preset("nominal");
    cfg.noise.seed = 2;
    const auto result = run_camera_motion(cfg);
    for (int axis = 0; axis < 2; ++axis) {  // x and y drive grasp success
        EXPECT_GE(result.fraction_within(axis, 0.02, true),
                  result.fraction_within(axis, 0.02, false) - 1e-12);
    }
}

TEST(CameraMotion, CdfMatchesBruteForceCount) {
    CameraMotionConfig cfg;
    cfg.frames = 100;
    cfg.noise = NoiseConfig::preset("nominal");
    cfg.noise.seed = 14;
    const auto result = run_camera_motion(cfg);
    const auto& samples = result.raw_abs_err[0];
    ASSERT_FALSE(samples.empty());
    const EmpiricalCdf cdf(samples);
    for (double t : {0.005, 0.01, 0.02, 0.05}) {
        int count = 0;
        for (double v : samples) {
            count += v <= t ? 1 : 0;
        }
        EXPECT_DOUBLE_EQ(cdf(t), static_cast<double>(count) / samples.size());
        EXPECT_DOUBLE_EQ(result.fraction_within(0, t, false),
                         static_cast<double>(count) / samples.size());
    }
}

TEST(GraspSuccess, FingerAxisBoundary) {
    const GraspToleranceConfig tol;
    EXPECT_TRUE(grasp_success({0.019, 0.0, 0.0}, 0.0, tol));
    EXPECT_FALSE(grasp_success({0.021, 0.0, 0.0}, 0.0, tol));
    // The finger axis follows the commanded yaw.
    const double yaw = kPi / 2.0;
    EXPECT_TRUE(grasp_success({0.04, 0.019, 0.0}, yaw, tol));
    EXPECT_FALSE(grasp_success({0.0, 0.021, 0.0}, yaw, tol));
}

TEST(GraspSuccess, AnisotropyAndShapeRules) {
    const GraspToleranceConfig cuboid = GraspToleranceConfig::for_shape(
        ObjectModel::Shape::cuboid);
    EXPECT_TRUE(grasp_success({0.0, 0.04, 0.0}, 0.0, cuboid));    // orthogonal slack
    EXPECT_TRUE(grasp_success({0.0, 0.0, 0.09}, 0.0, cuboid));    // approach slack
    EXPECT_FALSE(grasp_success({0.0, 0.06, 0.0}, 0.0, cuboid));
    EXPECT_FALSE(grasp_success({0.0, 0.0, 0.11}, 0.0, cuboid));
    const GraspToleranceConfig cylinder = GraspToleranceConfig::for_shape(
        ObjectModel::Shape::cylinder);
    EXPECT_DOUBLE_EQ(cylinder.orthogonal_tolerance, cylinder.finger_tolerance);
    EXPECT_FALSE(grasp_success({0.0, 0.021, 0.0}, 0.0, cylinder));
}

TEST(GraspTrials, CleanPresetSucceedsEverywhere) {
    GraspTrialConfig cfg;
    cfg.grasps_per_camera = 5;
    cfg.noise = NoiseConfig::preset("clean");
    const auto result = run_grasp_trials(cfg);
    EXPECT_EQ(result.trials, 5 * 2 * 5);  // 5 objects x 2 cameras x 5 grasps
    EXPECT_EQ(result.successes, result.trials);
    EXPECT_DOUBLE_EQ(result.overall_rate(), 1.0);
    for (const auto& obj : result.per_object) {
        EXPECT_EQ(obj.trials, 10);
        EXPECT_DOUBLE_EQ(obj.rate(), 1.0);
    }
}

TEST(Reproducibility, IdenticalConfigGivesIdenticalCsvBytes) {
    DistanceSweepConfig cfg;
    cfg.trials_per_cell = 3;
    cfg.noise = NoiseConfig::preset("nominal");
    cfg.noise.seed = 10;
    const auto a = run_distance_sweep(cfg);
    const auto b = run_distance_sweep(cfg);
    std::ostringstream csv_a;
    std::ostringstream csv_b;
    write_results_csv(a.records, csv_a);
    write_results_csv(b.records, csv_b);
    EXPECT_EQ(csv_a.str(), csv_b.str());
}

TEST(RefinementFlag, PropagatesIntoRecords) {
    DistanceSweepConfig cfg;
    cfg.trials_per_cell = 1;
    cfg.distances = {1.02};
    cfg.noise = NoiseConfig::preset("clean");
    cfg.pipeline.refine = true;
    cfg.pipeline.dense_samples = 100;
    const auto result = run_distance_sweep(cfg);
    ASSERT_FALSE(result.records.empty());
    for (const auto& r : result.records) {
        EXPECT_TRUE(r.refined);
        EXPECT_FALSE(r.dropped);
        EXPECT_LT(r.lateral_err_m, 1e-6);  // refinement stays exact on clean input
    }
}

}  // namespace
}  // namespace ipose
