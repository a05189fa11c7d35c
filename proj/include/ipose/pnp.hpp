#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ipose/errors.hpp"
#include "ipose/geometry.hpp"

namespace ipose {

/// One 2D-3D match: a model-frame point, its image observation, and a
/// non-negative weight (detection confidence when wired from belief decoding).
struct Correspondence {
    Point3 object_point{};
    Pixel2 image_point{};
    double weight{1.0};
};

struct RefineConfig {
    int max_iterations{100};
    double step_tolerance{1e-10};
    /// Mean-squared pixel error improvement below which a step counts as converged.
    double mse_tolerance{1e-12};
    double initial_lambda{1e-3};
};

struct PnPSolution {
    RigidTransform pose{};
    double reprojection_rmse{0.0};
    int iterations{0};
    bool converged{false};
};

inline constexpr std::size_t kMinDltPoints = 6;
inline constexpr std::size_t kMinRefinePoints = 4;

/// Weighted RMS pixel distance between projections and observations.
inline double reprojection_rmse(const RigidTransform& pose,
                                std::span<const Correspondence> corrs,
                                const CameraIntrinsics& k) {
    double sum_w = 0.0;
    double sum_e = 0.0;
    for (const auto& c : corrs) {
        const Pixel2 proj = project(k, pose, c.object_point);
        sum_e += c.weight * (proj - c.image_point).squared_norm();
        sum_w += c.weight;
    }
    return sum_w > 0.0 ? std::sqrt(sum_e / sum_w) : 0.0;
}

namespace detail {

inline Point3 model_centroid(std::span<const Correspondence> corrs) {
    Point3 c{};
    for (const auto& corr : corrs) {
        c = c + corr.object_point;
    }
    return c / static_cast<double>(corrs.size());
}

/// Residuals (and optionally the analytic Jacobian) of the weighted
/// reprojection error under a left-multiplied se(3) perturbation
/// [rotation tangent | translation]. Row weights are sqrt(weight).
/// Returns false if any point falls at or behind the camera plane.
inline bool reprojection_residuals(const RigidTransform& pose,
                                   std::span<const Correspondence> corrs,
                                   const CameraIntrinsics& k,
                                   std::span<const double> row_weights,
                                   Eigen::VectorXd& residuals, Eigen::MatrixXd* jacobian) {
    const auto n = static_cast<Eigen::Index>(corrs.size());
    residuals.resize(2 * n);
    if (jacobian != nullptr) {
        jacobian->resize(2 * n, 6);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& c = corrs[static_cast<std::size_t>(i)];
        const Point3 p = pose.transform_point(c.object_point);
        if (p.z <= kMinProjectionDepth) {
            return false;
        }
        const double w = std::sqrt(row_weights[static_cast<std::size_t>(i)]);
        const double inv_z = 1.0 / p.z;
        const double u = k.fx * p.x * inv_z + k.cx;
        const double v = k.fy * p.y * inv_z + k.cy;
        residuals(2 * i) = w * (u - c.image_point.x);
        residuals(2 * i + 1) = w * (v - c.image_point.y);
        if (jacobian != nullptr) {
            // d(u,v)/dP for the pinhole model.
            Eigen::Matrix<double, 2, 3> de_dp;
            de_dp << k.fx * inv_z, 0.0, -k.fx * p.x * inv_z * inv_z,  //
                0.0, k.fy * inv_z, -k.fy * p.y * inv_z * inv_z;
            // dP/d(omega) = -[P]x for the left perturbation, dP/d(dt) = I.
            Eigen::Matrix3d neg_hat;
            neg_hat << 0.0, p.z, -p.y,  //
                -p.z, 0.0, p.x,         //
                p.y, -p.x, 0.0;
            jacobian->block<2, 3>(2 * i, 0) = w * de_dp * neg_hat;
            jacobian->block<2, 3>(2 * i, 3) = w * de_dp;
        }
    }
    return true;
}

inline RigidTransform apply_step(const RigidTransform& pose,
                                 const Eigen::Matrix<double, 6, 1>& delta) {
    const UnitQuaternion dq =
        UnitQuaternion::from_rotation_vector({delta(0), delta(1), delta(2)});
    return {dq * pose.rotation,
            dq.rotate(pose.translation) + Vec3{delta(3), delta(4), delta(5)}};
}

/// Huber penalty on the pixel-distance residual; quadratic inside delta so the
/// delta -> infinity limit is plain weighted least squares.
inline double huber_rho(double e, double delta) {
    return e <= delta ? e * e : 2.0 * delta * e - delta * delta;
}

inline double huber_weight(double e, double delta) {
    return e <= delta ? 1.0 : delta / e;
}

/// Damped Gauss-Newton over a 6-dof local parameterization. The objective is
/// the weighted squared reprojection error, optionally Huber-robustified with
/// per-iteration IRLS weights. Steps are accepted only if the true objective
/// decreases, so the accepted-step objective sequence is non-increasing.
inline PnPSolution levenberg_marquardt(const RigidTransform& initial,
                                       std::span<const Correspondence> corrs,
                                       const CameraIntrinsics& k, const RefineConfig& cfg,
                                       std::optional<double> huber_delta) {
    const Point3 centroid = model_centroid(corrs);
    if (initial.transform_point(centroid).z <= kMinProjectionDepth) {
        throw DivergedBehindCameraError{};
    }

    double total_weight = 0.0;
    for (const auto& c : corrs) {
        total_weight += c.weight;
    }
    if (total_weight <= 0.0) {
        throw NotEnoughPointsError("all correspondence weights are zero");
    }

    // Robust objective (or plain weighted SSE); nullopt if a point is behind the camera.
    const auto objective = [&](const RigidTransform& pose) -> std::optional<double> {
        double acc = 0.0;
        for (const auto& c : corrs) {
            const Point3 p = pose.transform_point(c.object_point);
            if (p.z <= kMinProjectionDepth) {
                return std::nullopt;
            }
            const Pixel2 proj{k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
            const double e = (proj - c.image_point).norm();
            acc += c.weight * (huber_delta ? huber_rho(e, *huber_delta) : e * e);
        }
        return acc;
    };

    // IRLS row weights frozen at the current pose.
    std::vector<double> row_weights(corrs.size(), 1.0);
    const auto refresh_row_weights = [&](const RigidTransform& pose) {
        for (std::size_t i = 0; i < corrs.size(); ++i) {
            const auto& c = corrs[i];
            double w = c.weight;
            if (huber_delta) {
                const Pixel2 proj = project(k, pose, c.object_point);
                const double e = (proj - c.image_point).norm();
                w *= huber_weight(e, *huber_delta);
            }
            row_weights[i] = w;
        }
    };

    PnPSolution out;
    out.pose = initial;
    auto maybe_obj = objective(initial);
    if (!maybe_obj) {
        throw DivergedBehindCameraError{};
    }
    double obj = *maybe_obj;

    double lambda = cfg.initial_lambda;
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        out.iterations = it;
        refresh_row_weights(out.pose);
        if (!reprojection_residuals(out.pose, corrs, k, row_weights, r, &jac)) {
            throw DivergedBehindCameraError{};
        }
        const Eigen::Matrix<double, 6, 6> hessian = jac.transpose() * jac;
        const Eigen::Matrix<double, 6, 1> gradient = jac.transpose() * r;

        bool accepted = false;
        while (lambda <= 1e12) {
            Eigen::Matrix<double, 6, 6> damped = hessian;
            damped.diagonal().array() += lambda;
            const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-gradient);
            if (!delta.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            if (delta.norm() < cfg.step_tolerance) {
                out.converged = true;
                break;
            }
            const RigidTransform candidate = apply_step(out.pose, delta);
            const auto cand_obj = objective(candidate);
            if (cand_obj && *cand_obj < obj) {
                const double improvement = (obj - *cand_obj) / total_weight;
                out.pose = candidate;
                obj = *cand_obj;
                lambda = std::max(lambda * 0.1, 1e-12);
                accepted = true;
                if (improvement < cfg.mse_tolerance) {
                    out.converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (out.converged) {
            break;
        }
        if (!accepted) {
            // No improving step exists within the damping range: at a minimum
            // to numerical precision.
            out.converged = true;
            break;
        }
    }
    out.reprojection_rmse = reprojection_rmse(out.pose, corrs, k);
    return out;
}

}  // namespace detail

/// Linear pose initialization: direct linear transform on normalized
/// coordinates followed by SVD orthonormalization of the rotation block.
inline RigidTransform solve_dlt(std::span<const Correspondence> corrs,
                                const CameraIntrinsics& k) {
    if (corrs.size() < kMinDltPoints) {
        throw NotEnoughPointsError(corrs.size(), kMinDltPoints);
    }
    const auto n = static_cast<Eigen::Index>(corrs.size());

    // Condition the system: center the model points and scale their mean
    // radius to sqrt(3); image points go to normalized camera coordinates.
    const Point3 centroid = detail::model_centroid(corrs);
    double mean_radius = 0.0;
    for (const auto& c : corrs) {
        mean_radius += (c.object_point - centroid).norm();
    }
    mean_radius /= static_cast<double>(corrs.size());
    if (mean_radius <= 0.0) {
        throw DegenerateConfigurationError{};
    }
    const double scale = std::sqrt(3.0) / mean_radius;

    Eigen::MatrixXd a(2 * n, 12);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& c = corrs[static_cast<std::size_t>(i)];
        const Point3 p = (c.object_point - centroid) * scale;
        const double xn = (c.image_point.x - k.cx) / k.fx;
        const double yn = (c.image_point.y - k.cy) / k.fy;
        const double w = std::sqrt(std::max(c.weight, 0.0));
        a.row(2 * i) << p.x, p.y, p.z, 1.0, 0.0, 0.0, 0.0, 0.0,  //
            -xn * p.x, -xn * p.y, -xn * p.z, -xn;
        a.row(2 * i) *= w;
        a.row(2 * i + 1) << 0.0, 0.0, 0.0, 0.0, p.x, p.y, p.z, 1.0,  //
            -yn * p.x, -yn * p.y, -yn * p.z, -yn;
        a.row(2 * i + 1) *= w;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // A unique solution direction needs rank 11; anything lower is degenerate.
    if (sv(0) <= 0.0 || sv(10) < 1e-8 * sv(0)) {
        throw DegenerateConfigurationError{};
    }
    const Eigen::VectorXd p = svd.matrixV().col(11);

    Eigen::Matrix3d b;
    b << p(0), p(1), p(2), p(4), p(5), p(6), p(8), p(9), p(10);
    Eigen::Vector3d t(p(3), p(7), p(11));
    if (b.determinant() < 0.0) {
        b = -b;
        t = -t;
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> bsvd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix3d rot = bsvd.matrixU() * bsvd.matrixV().transpose();
    const double projective_scale = bsvd.singularValues().mean();
    if (projective_scale <= 0.0) {
        throw DegenerateConfigurationError{};
    }
    t /= projective_scale;

    Mat3 rm;
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) {
            rm[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] = rot(row, col);
        }
    }
    const UnitQuaternion q = UnitQuaternion::from_rotation_matrix(rm);
    // Undo the model-point normalization.
    const Vec3 translation =
        Vec3{t(0), t(1), t(2)} / scale - q.rotate(centroid);

    RigidTransform pose{q, translation};
    if (pose.transform_point(centroid).z <= kMinProjectionDepth) {
        throw DegenerateConfigurationError{};
    }
    return pose;
}

/// Damped Gauss-Newton refinement of the weighted squared reprojection error.
inline PnPSolution refine_lm(const RigidTransform& initial,
                             std::span<const Correspondence> corrs,
                             const CameraIntrinsics& k, const RefineConfig& cfg = {}) {
    if (corrs.size() < kMinRefinePoints) {
        throw NotEnoughPointsError(corrs.size(), kMinRefinePoints);
    }
    return detail::levenberg_marquardt(initial, corrs, k, cfg, std::nullopt);
}

/// Full pipeline: DLT initialization followed by LM refinement.
inline PnPSolution solve_pnp(std::span<const Correspondence> corrs,
                             const CameraIntrinsics& k, const RefineConfig& cfg = {}) {
    return refine_lm(solve_dlt(corrs, k), corrs, k, cfg);
}

}  // namespace ipose
