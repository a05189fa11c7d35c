#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ipose/errors.hpp"
#include "ipose/geometry.hpp"
#include "ipose/models.hpp"
#include "ipose/pnp.hpp"
#include "ipose/rng.hpp"

namespace ipose {

/// Points sampled on the model surface, in the model frame.
struct DenseModelSample {
    std::vector<Point3> points;
};

struct RobustLossConfig {
    double huber_delta{5.0};  // pixels
    int max_iterations{100};
};

/// An image observation for one sampled model point; invalid entries are skipped.
struct DenseObservation {
    Pixel2 pixel{};
    bool valid{false};
};

inline constexpr std::size_t kMinSurfaceSamples = 50;

/// Seeded uniform-by-area sampling of the model's cuboid faces. Zero-area
/// faces (degenerate extents) are never drawn.
inline DenseModelSample sample_model_surface(const ObjectModel& model, std::size_t count,
                                             std::uint64_t seed) {
    if (count < kMinSurfaceSamples) {
        throw ConfigError("surface sample count must be at least " +
                          std::to_string(kMinSurfaceSamples));
    }
    // Face order: -x, +x, -y, +y, -z, +z.
    const std::array<double, 6> areas = {
        model.dy * model.dz, model.dy * model.dz, model.dx * model.dz,
        model.dx * model.dz, model.dx * model.dy, model.dx * model.dy,
    };
    double total = 0.0;
    for (double a : areas) {
        total += a;
    }
    if (total <= 0.0) {
        throw ConfigError("model '" + model.name + "' has no surface area");
    }

    Rng rng(seed);
    DenseModelSample sample;
    sample.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double pick = rng.uniform() * total;
        std::size_t face = 0;
        while (face + 1 < areas.size() && pick >= areas[face]) {
            pick -= areas[face];
            ++face;
        }
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform() - 0.5;
        const double sign = (face % 2 == 0) ? -0.5 : 0.5;
        Point3 p;
        switch (face / 2) {
            case 0:
                p = {sign * model.dx, u * model.dy, v * model.dz};
                break;
            case 1:
                p = {u * model.dx, sign * model.dy, v * model.dz};
                break;
            default:
                p = {u * model.dx, v * model.dy, sign * model.dz};
                break;
        }
        sample.points.push_back(p);
    }
    return sample;
}

/// Robust pose refinement: Levenberg-Marquardt on the Huber-penalized
/// reprojection error of the dense sample against its observations. With
/// huber_delta -> infinity the loss degenerates to plain least squares.
inline PnPSolution refine_pose(const RigidTransform& initial, const DenseModelSample& sample,
                               std::span<const DenseObservation> observed,
                               const CameraIntrinsics& k, const RobustLossConfig& cfg = {}) {
    if (cfg.huber_delta <= 0.0) {
        throw ConfigError("huber_delta must be positive");
    }
    if (observed.size() != sample.points.size()) {
        throw ConfigError("observation count does not match sample count");
    }
    std::vector<Correspondence> corrs;
    corrs.reserve(sample.points.size());
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        if (observed[i].valid) {
            corrs.push_back({sample.points[i], observed[i].pixel, 1.0});
        }
    }
    if (corrs.size() < kMinDltPoints) {
        throw NotEnoughPointsError(corrs.size(), kMinDltPoints);
    }
    RefineConfig lm_cfg;
    lm_cfg.max_iterations = cfg.max_iterations;
    return detail::levenberg_marquardt(initial, corrs, k, lm_cfg, cfg.huber_delta);
}

}  // namespace ipose
