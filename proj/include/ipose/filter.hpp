#pragma once

#include <optional>
#include <utility>

#include "ipose/errors.hpp"
#include "ipose/geometry.hpp"

namespace ipose {

/// Exponentially weighted pose filter state. Translation blends linearly with
/// factor alpha, rotation follows the geodesic toward the measurement by the
/// same factor. An optional gate rejects measurements whose translation jump
/// from the current filtered pose exceeds gate_distance.
struct FilterState {
    double alpha{0.095};
    std::optional<RigidTransform> current{};
    std::optional<double> gate_distance{};
};

/// One filter step. The first measurement passes through unchanged; gated
/// measurements leave the state untouched and return the previous filtered pose.
inline std::pair<FilterState, RigidTransform> update(FilterState state,
                                                     const RigidTransform& measurement) {
    if (!(state.alpha > 0.0 && state.alpha <= 1.0)) {
        throw ConfigError("filter alpha must be in (0, 1]");
    }
    if (state.gate_distance && *state.gate_distance <= 0.0) {
        throw ConfigError("filter gate distance must be positive");
    }
    if (!state.current) {
        state.current = measurement;
        return {state, measurement};
    }
    const RigidTransform& prev = *state.current;
    if (state.gate_distance &&
        (measurement.translation - prev.translation).norm() > *state.gate_distance) {
        return {state, prev};
    }
    const double a = state.alpha;
    // Incremental form: exact fixed point when the measurement equals the state.
    const RigidTransform filtered{
        slerp(prev.rotation, measurement.rotation, a),
        prev.translation + a * (measurement.translation - prev.translation)};
    state.current = filtered;
    return {state, filtered};
}

/// Smallest n with 1 - (1 - alpha)^n >= fraction: the number of constant-input
/// frames needed to cover the given fraction of a step change.
inline int step_response_frames(double alpha, double fraction) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ConfigError("alpha must be in (0, 1]");
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("fraction must be in (0, 1)");
    }
    int n = 0;
    double remaining = 1.0;
    do {
        remaining *= 1.0 - alpha;
        ++n;
    } while (1.0 - remaining < fraction && n < 100000000);
    return n;
}

}  // namespace ipose
