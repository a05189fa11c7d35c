#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "ipose/geometry.hpp"
#include "ipose/models.hpp"
#include "ipose/pnp.hpp"

namespace ipose {

/// Per-keypoint confidence grids, values in [0, 1]. Grid cells are sampled at
/// integer coordinates; map index n-1 is the centroid map for cuboid objects.
struct BeliefMapStack {
    int width{0};
    int height{0};
    int n{0};
    std::vector<float> values;  // n planes, row-major

    static BeliefMapStack zeros(int width, int height, int n) {
        return {width, height, n,
                std::vector<float>(static_cast<std::size_t>(width) *
                                   static_cast<std::size_t>(height) *
                                   static_cast<std::size_t>(n))};
    }

    std::size_t index(int map, int x, int y) const {
        return (static_cast<std::size_t>(map) * static_cast<std::size_t>(height) +
                static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }

    float at(int map, int x, int y) const { return values[index(map, x, y)]; }
    float& at(int map, int x, int y) { return values[index(map, x, y)]; }
};

/// Per-vertex-keypoint 2D vector fields; unit vectors point toward the owning
/// instance's centroid inside each keypoint's support region, zero elsewhere.
struct AffinityFieldStack {
    int width{0};
    int height{0};
    int m{0};
    std::vector<float> x_values;  // m planes, row-major
    std::vector<float> y_values;

    static AffinityFieldStack zeros(int width, int height, int m) {
        const std::size_t n = static_cast<std::size_t>(width) *
                              static_cast<std::size_t>(height) *
                              static_cast<std::size_t>(m);
        return {width, height, m, std::vector<float>(n), std::vector<float>(n)};
    }

    std::size_t index(int field, int x, int y) const {
        return (static_cast<std::size_t>(field) * static_cast<std::size_t>(height) +
                static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }

    Vec2 at(int field, int x, int y) const {
        const std::size_t i = index(field, x, y);
        return {static_cast<double>(x_values[i]), static_cast<double>(y_values[i])};
    }

    void set(int field, int x, int y, const Vec2& v) {
        const std::size_t i = index(field, x, y);
        x_values[i] = static_cast<float>(v.x);
        y_values[i] = static_cast<float>(v.y);
    }

    /// Bilinear interpolation of one field at a continuous grid position
    /// (clamped to the grid).
    Vec2 sample(int field, const Pixel2& p) const {
        const double fx = std::clamp(p.x, 0.0, static_cast<double>(width - 1));
        const double fy = std::clamp(p.y, 0.0, static_cast<double>(height - 1));
        const int x0 = std::min(static_cast<int>(fx), width - 2 >= 0 ? width - 2 : 0);
        const int y0 = std::min(static_cast<int>(fy), height - 2 >= 0 ? height - 2 : 0);
        const int x1 = std::min(x0 + 1, width - 1);
        const int y1 = std::min(y0 + 1, height - 1);
        const double ax = fx - x0;
        const double ay = fy - y0;
        const Vec2 v00 = at(field, x0, y0);
        const Vec2 v10 = at(field, x1, y0);
        const Vec2 v01 = at(field, x0, y1);
        const Vec2 v11 = at(field, x1, y1);
        return (v00 * (1.0 - ax) + v10 * ax) * (1.0 - ay) +
               (v01 * (1.0 - ax) + v11 * ax) * ay;
    }
};

struct PeakDetection {
    int map_index{0};
    Pixel2 position{};  // map-grid coordinates, sub-pixel
    double confidence{0.0};
};

/// One individuated object instance: its centroid peak plus up to one vertex
/// peak per vertex map. Unassigned slots stay empty.
struct ObjectInstanceDetection {
    PeakDetection centroid{};
    std::array<std::optional<PeakDetection>, ObjectModel::kVertexCount> vertices{};

    std::size_t assigned_count() const {
        std::size_t n = 0;
        for (const auto& v : vertices) {
            n += v.has_value() ? 1 : 0;
        }
        return n;
    }
};

namespace detail {

/// Sub-pixel offset along one axis from three samples around a strict maximum,
/// using the log-domain parabola (exact for Gaussian-shaped peaks). The offset
/// is bounded by 0.5 cells for a strict maximum.
inline double log_parabola_offset(double left, double center, double right) {
    constexpr double kFloor = 1e-12;
    const double l = std::log(std::max(left, kFloor));
    const double c = std::log(std::max(center, kFloor));
    const double r = std::log(std::max(right, kFloor));
    const double denom = l - 2.0 * c + r;
    if (denom >= -1e-300) {
        return 0.0;
    }
    return std::clamp(0.5 * (l - r) / denom, -1.0, 1.0);
}

}  // namespace detail

/// All strict 8-neighborhood local maxima with confidence >= threshold,
/// refined to sub-pixel from their 3x3 neighborhood and sorted by descending
/// confidence (position as the tiebreak, for determinism).
inline std::vector<PeakDetection> extract_peaks(const BeliefMapStack& stack,
                                                double threshold) {
    std::vector<PeakDetection> peaks;
    for (int map = 0; map < stack.n; ++map) {
        for (int y = 0; y < stack.height; ++y) {
            for (int x = 0; x < stack.width; ++x) {
                const float v = stack.at(map, x, y);
                if (v < threshold) {
                    continue;
                }
                bool strict_max = true;
                for (int dy = -1; dy <= 1 && strict_max; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) {
                            continue;
                        }
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= stack.width || ny >= stack.height) {
                            continue;
                        }
                        if (stack.at(map, nx, ny) >= v) {
                            strict_max = false;
                            break;
                        }
                    }
                }
                if (!strict_max) {
                    continue;
                }
                Pixel2 pos{static_cast<double>(x), static_cast<double>(y)};
                if (x > 0 && x + 1 < stack.width) {
                    pos.x += detail::log_parabola_offset(stack.at(map, x - 1, y), v,
                                                         stack.at(map, x + 1, y));
                }
                if (y > 0 && y + 1 < stack.height) {
                    pos.y += detail::log_parabola_offset(stack.at(map, x, y - 1), v,
                                                         stack.at(map, x, y + 1));
                }
                peaks.push_back({map, pos, static_cast<double>(v)});
            }
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const PeakDetection& a, const PeakDetection& b) {
        if (a.confidence != b.confidence) {
            return a.confidence > b.confidence;
        }
        if (a.map_index != b.map_index) {
            return a.map_index < b.map_index;
        }
        if (a.position.y != b.position.y) {
            return a.position.y < b.position.y;
        }
        return a.position.x < b.position.x;
    });
    return peaks;
}

/// Groups vertex peaks around centroid peaks. Each vertex peak (taken in
/// descending confidence) is assigned to the centroid whose direction best
/// matches the affinity vector sampled at the peak, provided the angular
/// deviation is at most max_angle and the instance's slot for that vertex map
/// is still free. Centroid peaks are the maps with index affinity.m; exactly
/// one instance is produced per centroid peak.
inline std::vector<ObjectInstanceDetection> associate_vertices(
    const std::vector<PeakDetection>& peaks, const AffinityFieldStack& affinity,
    double max_angle = 0.5) {
    const int centroid_map = affinity.m;
    const auto by_confidence = [](const PeakDetection& a, const PeakDetection& b) {
        if (a.confidence != b.confidence) {
            return a.confidence > b.confidence;
        }
        if (a.map_index != b.map_index) {
            return a.map_index < b.map_index;
        }
        if (a.position.y != b.position.y) {
            return a.position.y < b.position.y;
        }
        return a.position.x < b.position.x;
    };

    std::vector<PeakDetection> vertex_peaks;
    std::vector<ObjectInstanceDetection> instances;
    for (const auto& p : peaks) {
        if (p.map_index == centroid_map) {
            instances.push_back(ObjectInstanceDetection{p, {}});
        } else if (p.map_index >= 0 && p.map_index < centroid_map) {
            vertex_peaks.push_back(p);
        }
    }
    std::sort(vertex_peaks.begin(), vertex_peaks.end(), by_confidence);
    std::sort(instances.begin(), instances.end(),
              [&](const ObjectInstanceDetection& a, const ObjectInstanceDetection& b) {
                  return by_confidence(a.centroid, b.centroid);
              });

    for (const auto& p : vertex_peaks) {
        const Vec2 field = affinity.sample(p.map_index, p.position);
        const double field_norm = field.norm();
        if (field_norm < 0.5) {
            continue;  // no affinity support here (e.g. a spurious peak)
        }
        double best_angle = 0.0;
        ObjectInstanceDetection* best = nullptr;
        for (auto& inst : instances) {
            const auto slot = static_cast<std::size_t>(p.map_index);
            if (inst.vertices[slot].has_value()) {
                continue;
            }
            const Vec2 dir = inst.centroid.position - p.position;
            const double dir_norm = dir.norm();
            if (dir_norm < 1e-9) {
                continue;
            }
            const double cosine =
                std::clamp(field.dot(dir) / (field_norm * dir_norm), -1.0, 1.0);
            const double angle = std::acos(cosine);
            if (angle > max_angle) {
                continue;
            }
            if (best == nullptr || angle < best_angle) {
                best_angle = angle;
                best = &inst;
            }
        }
        if (best != nullptr) {
            best->vertices[static_cast<std::size_t>(p.map_index)] = p;
        }
    }
    return instances;
}

/// Correspondences for one detected instance: each assigned vertex (and the
/// centroid, when included) paired with its canonical model point. Map-grid
/// coordinates are scaled to image pixels by map_to_image_scale; detection
/// confidences become correspondence weights.
inline std::vector<Correspondence> instance_correspondences(
    const ObjectInstanceDetection& instance, const ObjectModel& model,
    double map_to_image_scale, bool include_centroid = true) {
    std::vector<Correspondence> corrs;
    const auto verts = model.vertices();
    for (std::size_t i = 0; i < verts.size(); ++i) {
        if (!instance.vertices[i].has_value()) {
            continue;
        }
        const auto& peak = *instance.vertices[i];
        corrs.push_back({verts[i], peak.position * map_to_image_scale, peak.confidence});
    }
    if (include_centroid) {
        corrs.push_back({model.centroid(), instance.centroid.position * map_to_image_scale,
                         instance.centroid.confidence});
    }
    return corrs;
}

}  // namespace ipose
