#pragma once

#include <array>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipose/errors.hpp"
#include "ipose/geometry.hpp"
#include "ipose/models.hpp"
#include "ipose/pnp.hpp"
#include "ipose/sim.hpp"

namespace ipose {

// JSON document helpers for the file formats accepted by the CLI. Unreadable
// files raise IoError; structurally invalid content raises ConfigError.

namespace detail {

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw ConfigError("'" + path + "' is not valid JSON");
    }
    return doc;
}

inline Vec3 vec3_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number()) {
        throw ConfigError(what + " must be a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json vec3_to_json(const Vec3& v) {
    return nlohmann::json::array({v.x, v.y, v.z});
}

}  // namespace detail

inline nlohmann::json pose_to_json(const RigidTransform& t) {
    return {{"rotation",
             {{"w", t.rotation.w}, {"x", t.rotation.x}, {"y", t.rotation.y}, {"z", t.rotation.z}}},
            {"translation", detail::vec3_to_json(t.translation)}};
}

inline RigidTransform pose_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rotation") || !j.contains("translation")) {
        throw ConfigError("pose must have 'rotation' and 'translation'");
    }
    const auto& r = j["rotation"];
    for (const char* key : {"w", "x", "y", "z"}) {
        if (!r.contains(key) || !r[key].is_number()) {
            throw ConfigError("pose rotation must have numeric w, x, y, z");
        }
    }
    const UnitQuaternion q{r["w"].get<double>(), r["x"].get<double>(), r["y"].get<double>(),
                           r["z"].get<double>()};
    if (q.norm() < 1e-9) {
        throw ConfigError("pose rotation quaternion is zero");
    }
    return {q.normalized(), detail::vec3_from_json(j["translation"], "pose translation")};
}

inline RigidTransform load_pose(const std::string& path) {
    return pose_from_json(detail::load_json_file(path));
}

inline void save_pose(const RigidTransform& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << pose_to_json(t).dump(2) << '\n';
}

inline CameraIntrinsics intrinsics_from_json(const nlohmann::json& j) {
    for (const char* key : {"fx", "fy", "cx", "cy", "width", "height"}) {
        if (!j.contains(key) || !j[key].is_number()) {
            throw ConfigError("intrinsics must have numeric fx, fy, cx, cy, width, height");
        }
    }
    const CameraIntrinsics k{j["fx"].get<double>(),  j["fy"].get<double>(),
                             j["cx"].get<double>(),  j["cy"].get<double>(),
                             j["width"].get<int>(),  j["height"].get<int>()};
    if (!k.valid()) {
        throw ConfigError("intrinsics out of range");
    }
    return k;
}

inline nlohmann::json intrinsics_to_json(const CameraIntrinsics& k) {
    return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
            {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

inline ObjectModel object_from_json(const nlohmann::json& j) {
    if (!j.contains("name") || !j["name"].is_string()) {
        throw ConfigError("object model must have a string 'name'");
    }
    ObjectModel m;
    m.name = j["name"].get<std::string>();
    const std::string shape = j.value("shape", "cuboid");
    if (shape == "cuboid") {
        m.shape = ObjectModel::Shape::cuboid;
    } else if (shape == "cylinder") {
        m.shape = ObjectModel::Shape::cylinder;
    } else {
        throw ConfigError("object shape must be 'cuboid' or 'cylinder'");
    }
    const Vec3 dims = detail::vec3_from_json(j.at("dims"), "object dims");
    if (dims.x <= 0.0 || dims.y <= 0.0 || dims.z <= 0.0) {
        throw ConfigError("object dims must be positive");
    }
    m.dx = dims.x;
    m.dy = dims.y;
    m.dz = dims.z;
    return m;
}

/// Resolves an object by catalog name or JSON file path.
inline ObjectModel load_object(const std::string& name_or_path) {
    if (auto m = find_object(name_or_path)) {
        return *m;
    }
    if (name_or_path.find(".json") != std::string::npos) {
        return object_from_json(detail::load_json_file(name_or_path));
    }
    throw ConfigError("unknown object '" + name_or_path +
                      "' (not in catalog, not a .json path)");
}

inline RobotKeypointModel robot_from_json(const nlohmann::json& j) {
    RobotKeypointModel m;
    if (!j.contains("torso") || !j["torso"].is_array() ||
        j["torso"].size() != RobotKeypointModel::kTorsoCount) {
        throw ConfigError("robot model must have exactly 10 torso keypoints");
    }
    for (const auto& p : j["torso"]) {
        m.torso_keypoints.push_back(detail::vec3_from_json(p, "torso keypoint"));
    }
    if (!j.contains("arms") || !j["arms"].is_array() || j["arms"].size() != 2) {
        throw ConfigError("robot model must have exactly 2 arms");
    }
    for (std::size_t a = 0; a < 2; ++a) {
        const auto& arm = j["arms"][a];
        KinematicChain chain;
        chain.name = arm.value("name", "arm" + std::to_string(a));
        if (!arm.contains("joints") || !arm["joints"].is_array() ||
            arm["joints"].size() != KinematicChain::kJointCount) {
            throw ConfigError("each arm must have exactly 7 joints");
        }
        for (std::size_t i = 0; i < KinematicChain::kJointCount; ++i) {
            const auto& joint = arm["joints"][i];
            JointSpec spec;
            spec.offset = detail::vec3_from_json(joint.at("offset"), "joint offset");
            spec.axis = detail::vec3_from_json(joint.at("axis"), "joint axis");
            if (spec.axis.norm() < 1e-9) {
                throw ConfigError("joint axis must be nonzero");
            }
            if (joint.contains("limits")) {
                const auto& lim = joint["limits"];
                if (!lim.is_array() || lim.size() != 2 || !lim[0].is_number()) {
                    throw ConfigError("joint limits must be [lo, hi]");
                }
                spec.min_angle = lim[0].get<double>();
                spec.max_angle = lim[1].get<double>();
                if (spec.min_angle > spec.max_angle) {
                    throw ConfigError("joint limit lo must not exceed hi");
                }
            }
            chain.joints[i] = spec;
        }
        m.arms[a] = chain;
    }
    return m;
}

inline RobotKeypointModel load_robot(const std::string& path) {
    return robot_from_json(detail::load_json_file(path));
}

inline nlohmann::json robot_to_json(const RobotKeypointModel& m) {
    nlohmann::json torso = nlohmann::json::array();
    for (const auto& p : m.torso_keypoints) {
        torso.push_back(detail::vec3_to_json(p));
    }
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& arm : m.arms) {
        nlohmann::json joints = nlohmann::json::array();
        for (const auto& j : arm.joints) {
            joints.push_back({{"offset", detail::vec3_to_json(j.offset)},
                              {"axis", detail::vec3_to_json(j.axis)},
                              {"limits", nlohmann::json::array({j.min_angle, j.max_angle})}});
        }
        arms.push_back({{"name", arm.name}, {"joints", joints}});
    }
    return {{"torso", torso}, {"arms", arms}};
}

inline NoiseConfig noise_from_json(const nlohmann::json& j) {
    NoiseConfig n;
    n.pixel_sigma = j.value("pixel_sigma", 0.0);
    n.dropout_prob = j.value("dropout_prob", 0.0);
    n.false_positive_rate = j.value("false_positive_rate", 0.0);
    n.blob_sigma = j.value("blob_sigma", 2.0);
    n.seed = j.value("seed", std::uint64_t{0});
    if (n.pixel_sigma < 0.0 || n.false_positive_rate < 0.0 || n.blob_sigma < 0.0 ||
        n.dropout_prob < 0.0 || n.dropout_prob > 1.0) {
        throw ConfigError("noise parameters out of range");
    }
    return n;
}

/// Resolves a noise spec: preset name ("clean", "nominal", "harsh") or JSON path.
inline NoiseConfig load_noise(const std::string& preset_or_path) {
    if (preset_or_path == "clean" || preset_or_path == "nominal" ||
        preset_or_path == "harsh") {
        return NoiseConfig::preset(preset_or_path);
    }
    return noise_from_json(detail::load_json_file(preset_or_path));
}

inline SceneConfig scene_from_json(const nlohmann::json& j) {
    SceneConfig s;
    if (j.contains("intrinsics")) {
        s.intrinsics = intrinsics_from_json(j["intrinsics"]);
    }
    if (j.contains("camera_in_robot")) {
        s.camera_in_robot = pose_from_json(j["camera_in_robot"]);
    }
    if (j.contains("objects")) {
        if (!j["objects"].is_array()) {
            throw ConfigError("scene objects must be an array");
        }
        for (const auto& o : j["objects"]) {
            if (!o.contains("model") || !o["model"].is_string() || !o.contains("pose")) {
                throw ConfigError("scene object must have 'model' and 'pose'");
            }
            s.objects.push_back({o["model"].get<std::string>(), pose_from_json(o["pose"])});
        }
    }
    if (j.contains("joint_angles")) {
        const auto& angles = j["joint_angles"];
        if (!angles.is_array() || angles.size() != 14) {
            throw ConfigError("scene joint_angles must have 14 entries");
        }
        for (std::size_t i = 0; i < 14; ++i) {
            if (!angles[i].is_number()) {
                throw ConfigError("scene joint_angles must be numeric");
            }
            s.joint_angles[i] = angles[i].get<double>();
        }
    }
    return s;
}

inline SceneConfig load_scene(const std::string& path) {
    return scene_from_json(detail::load_json_file(path));
}

/// Correspondence documents pair intrinsics with 2D-3D matches, for one-shot
/// PnP solving from the CLI.
inline std::pair<std::vector<Correspondence>, CameraIntrinsics> load_correspondences(
    const std::string& path) {
    const nlohmann::json doc = detail::load_json_file(path);
    if (!doc.contains("intrinsics") || !doc.contains("correspondences") ||
        !doc["correspondences"].is_array()) {
        throw ConfigError("correspondence file needs 'intrinsics' and 'correspondences'");
    }
    const CameraIntrinsics k = intrinsics_from_json(doc["intrinsics"]);
    std::vector<Correspondence> corrs;
    for (const auto& c : doc["correspondences"]) {
        if (!c.contains("object_point") || !c.contains("image_point")) {
            throw ConfigError("correspondence needs 'object_point' and 'image_point'");
        }
        const auto& img = c["image_point"];
        if (!img.is_array() || img.size() != 2 || !img[0].is_number()) {
            throw ConfigError("image_point must be a 2-element array");
        }
        Correspondence corr;
        corr.object_point = detail::vec3_from_json(c["object_point"], "object_point");
        corr.image_point = {img[0].get<double>(), img[1].get<double>()};
        corr.weight = c.value("weight", 1.0);
        if (corr.weight < 0.0) {
            throw ConfigError("correspondence weight must be non-negative");
        }
        corrs.push_back(corr);
    }
    return {corrs, k};
}

}  // namespace ipose
