// Command-line harness for the indirect object-in-robot-frame pose pipeline:
// one-shot pose composition and PnP solving, plus the simulated accuracy
// experiments (distance sweep, orientation sweep, camera motion, grasp trials).

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ipose/experiments.hpp"
#include "ipose/json_io.hpp"
#include "ipose/results.hpp"

namespace {

struct CommonOptions {
    std::string scene_path;
    std::string object_spec = "sugar_box";
    std::string robot_path;
    std::string noise_spec = "clean";
    std::uint64_t seed = 0;
    int trials = 0;  // 0: keep the experiment's default
    bool refine = false;
    std::optional<double> filter_alpha;
    std::string out_path;
    std::string format = "csv";
};

void add_common_options(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--scene", opt.scene_path,
                    "Scene JSON (intrinsics, joint angles, object placements)");
    cmd->add_option("--object", opt.object_spec, "Object catalog name or model JSON path");
    cmd->add_option("--robot", opt.robot_path, "Robot keypoint model JSON path");
    cmd->add_option("--noise", opt.noise_spec, "Noise preset (clean|nominal|harsh) or JSON path");
    cmd->add_option("--seed", opt.seed, "Base random seed");
    cmd->add_option("--trials", opt.trials, "Trials per cell / per yaw / per camera");
    cmd->add_flag("--refine", opt.refine, "Enable dense-sample pose refinement");
    cmd->add_option("--filter-alpha", [&opt](const CLI::results_t& vals) {
        opt.filter_alpha = std::stod(vals.at(0));
        return true;
    }, "Exponential filter blend factor");
    cmd->add_option("--out", opt.out_path, "Output file for per-trial records");
    cmd->add_option("--format", opt.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

ipose::NoiseConfig resolve_noise(const CommonOptions& opt) {
    ipose::NoiseConfig noise = ipose::load_noise(opt.noise_spec);
    noise.seed = opt.seed;
    return noise;
}

ipose::RobotKeypointModel resolve_robot(const CommonOptions& opt) {
    if (opt.robot_path.empty()) {
        return ipose::RobotKeypointModel::default_model();
    }
    return ipose::load_robot(opt.robot_path);
}

std::optional<ipose::SceneConfig> resolve_scene(const CommonOptions& opt) {
    if (opt.scene_path.empty()) {
        return std::nullopt;
    }
    return ipose::load_scene(opt.scene_path);
}

void write_records(const std::vector<ipose::ErrorRecord>& records, const CommonOptions& opt) {
    if (opt.out_path.empty()) {
        return;
    }
    ipose::write_results(records, opt.out_path,
                         ipose::output_format_from_string(opt.format));
    std::cout << "wrote " << records.size() << " records to " << opt.out_path << "\n";
}

int run_compose(const std::string& cam_robot_path, const std::string& cam_object_path,
                const std::string& out_path) {
    const ipose::RigidTransform cam_robot = ipose::load_pose(cam_robot_path);
    const ipose::RigidTransform cam_object = ipose::load_pose(cam_object_path);
    const ipose::RigidTransform result =
        ipose::object_in_robot_frame(cam_robot, cam_object);
    if (out_path.empty()) {
        std::cout << ipose::pose_to_json(result).dump(2) << "\n";
    } else {
        ipose::save_pose(result, out_path);
    }
    return 0;
}

int run_solve(const std::string& corr_path, const std::string& out_path) {
    const auto [corrs, intrinsics] = ipose::load_correspondences(corr_path);
    const ipose::PnPSolution sol = ipose::solve_pnp(corrs, intrinsics);
    nlohmann::json doc = ipose::pose_to_json(sol.pose);
    doc["reprojection_rmse_px"] = sol.reprojection_rmse;
    doc["iterations"] = sol.iterations;
    doc["converged"] = sol.converged;
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) {
            throw ipose::IoError("cannot open '" + out_path + "' for writing");
        }
        out << doc.dump(2) << "\n";
    }
    return 0;
}

int run_distance_sweep_cmd(const CommonOptions& opt) {
    ipose::DistanceSweepConfig cfg;
    cfg.object = ipose::load_object(opt.object_spec);
    cfg.robot = resolve_robot(opt);
    cfg.noise = resolve_noise(opt);
    cfg.pipeline.refine = opt.refine;
    if (opt.trials > 0) {
        cfg.trials_per_cell = opt.trials;
    }
    if (const auto scene = resolve_scene(opt)) {
        cfg.intrinsics = scene->intrinsics;
    }
    const auto result = ipose::run_distance_sweep(cfg);
    std::printf("%-12s %-14s %-14s %s\n", "distance_m", "mean_lat_m", "std_lat_m", "dropped");
    for (const auto& row : result.table) {
        std::printf("%-12.3f %-14.6g %-14.6g %d/%d\n", row.distance_m, row.mean_lateral_m,
                    row.std_lateral_m, row.dropped, row.total);
    }
    write_records(result.records, opt);
    return 0;
}

int run_orientation_sweep_cmd(const CommonOptions& opt) {
    ipose::OrientationSweepConfig cfg;
    cfg.object = ipose::load_object(opt.object_spec);
    cfg.robot = resolve_robot(opt);
    cfg.noise = resolve_noise(opt);
    cfg.pipeline.refine = opt.refine;
    if (opt.trials > 0) {
        cfg.trials_per_yaw = opt.trials;
    }
    if (const auto scene = resolve_scene(opt)) {
        cfg.intrinsics = scene->intrinsics;
    }
    const auto result = ipose::run_orientation_sweep(cfg);
    for (const auto& row : result.table) {
        std::printf("yaw %6.1f deg: mean %.6g m, std %.6g m, dropped %d/%d\n",
                    row.yaw_rad * 180.0 / ipose::kPi, row.mean_lateral_m, row.std_lateral_m,
                    row.dropped, row.total);
    }
    std::printf("overall: %.6g +/- %.6g m\n", result.mean_lateral_m, result.std_lateral_m);
    write_records(result.records, opt);
    return 0;
}

int run_camera_motion_cmd(const CommonOptions& opt, int frames) {
    ipose::CameraMotionConfig cfg;
    cfg.object = ipose::load_object(opt.object_spec);
    cfg.robot = resolve_robot(opt);
    cfg.noise = resolve_noise(opt);
    cfg.pipeline.refine = opt.refine;
    if (frames > 0) {
        cfg.frames = frames;
    }
    if (opt.filter_alpha) {
        cfg.filter_alpha = *opt.filter_alpha;
    }
    if (const auto scene = resolve_scene(opt)) {
        cfg.intrinsics = scene->intrinsics;
        if (!scene->objects.empty()) {
            cfg.object_pose = scene->objects.front().pose_in_robot;
        }
    }
    const auto result = ipose::run_camera_motion(cfg);
    const char* axes = "xyz";
    for (int axis = 0; axis < 3; ++axis) {
        std::printf("axis %c: within 2 cm raw %.3f, filtered %.3f\n", axes[axis],
                    result.fraction_within(axis, 0.02, false),
                    result.fraction_within(axis, 0.02, true));
    }
    std::printf("dropped %d/%d frames\n", result.dropped_frames, result.total_frames);
    write_records(result.records, opt);
    return 0;
}

int run_grasp_trials_cmd(const CommonOptions& opt) {
    ipose::GraspTrialConfig cfg;
    cfg.robot = resolve_robot(opt);
    cfg.noise = resolve_noise(opt);
    cfg.pipeline.refine = opt.refine;
    if (opt.trials > 0) {
        cfg.grasps_per_camera = opt.trials;
    }
    if (opt.object_spec != "sugar_box") {  // explicit object: run only that one
        cfg.objects = {ipose::load_object(opt.object_spec)};
    }
    if (const auto scene = resolve_scene(opt)) {
        cfg.intrinsics = scene->intrinsics;
    }
    const auto result = ipose::run_grasp_trials(cfg);
    for (const auto& obj : result.per_object) {
        std::printf("%-16s %d/%d (%.0f%%)\n", obj.object.c_str(), obj.successes, obj.trials,
                    100.0 * obj.rate());
    }
    std::printf("overall: %d/%d (%.0f%%)\n", result.successes, result.trials,
                100.0 * result.overall_rate());
    write_records(result.records, opt);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Indirect object-in-robot-frame pose estimation harness"};
    app.require_subcommand(1);

    std::string compose_cam_robot, compose_cam_object, compose_out;
    auto* compose = app.add_subcommand(
        "compose", "Object pose in the robot frame from two camera-frame pose files");
    compose->add_option("cam_robot", compose_cam_robot, "Robot pose in camera frame (JSON)")
        ->required();
    compose->add_option("cam_object", compose_cam_object, "Object pose in camera frame (JSON)")
        ->required();
    compose->add_option("--out", compose_out, "Write the composed pose here");

    std::string solve_input, solve_out;
    auto* solve = app.add_subcommand("solve", "PnP pose from a correspondence file");
    solve->add_option("correspondences", solve_input, "Correspondence JSON file")->required();
    solve->add_option("--out", solve_out, "Write the solution here");

    CommonOptions dist_opt;
    auto* dist = app.add_subcommand("distance-sweep",
                                    "Lateral error vs camera distance, 4 object positions");
    add_common_options(dist, dist_opt);

    CommonOptions orient_opt;
    auto* orient = app.add_subcommand("orientation-sweep",
                                      "Lateral error over object yaw at fixed distance");
    add_common_options(orient, orient_opt);

    CommonOptions motion_opt;
    int motion_frames = 0;
    auto* motion = app.add_subcommand("camera-motion",
                                      "Moving-camera stability run with filtering and CDFs");
    add_common_options(motion, motion_opt);
    motion->add_option("--frames", motion_frames, "Trajectory length in frames");

    CommonOptions grasp_opt;
    auto* grasp = app.add_subcommand("grasp-trials", "Grasp success against the pose gate");
    add_common_options(grasp, grasp_opt);

    try {
        app.parse(argc, argv);
        if (compose->parsed()) {
            return run_compose(compose_cam_robot, compose_cam_object, compose_out);
        }
        if (solve->parsed()) {
            return run_solve(solve_input, solve_out);
        }
        if (dist->parsed()) {
            return run_distance_sweep_cmd(dist_opt);
        }
        if (orient->parsed()) {
            return run_orientation_sweep_cmd(orient_opt);
        }
        if (motion->parsed()) {
            return run_camera_motion_cmd(motion_opt, motion_frames);
        }
        if (grasp->parsed()) {
            return run_grasp_trials_cmd(grasp_opt);
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ipose::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const ipose::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
