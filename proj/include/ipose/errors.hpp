#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ipose {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point to be projected lies at or behind the camera plane.
class BehindCameraError : public Error {
public:
    using Error::Error;
    BehindCameraError() : Error("point is behind the camera") {}
};

class NotEnoughPointsError : public Error {
public:
    using Error::Error;
    NotEnoughPointsError(std::size_t got, std::size_t need)
        : Error("not enough points: got " + std::to_string(got) + ", need " +
                std::to_string(need)) {}
};

/// The linear system has no unique solution (e.g. collinear model points).
class DegenerateConfigurationError : public Error {
public:
    using Error::Error;
    DegenerateConfigurationError() : Error("degenerate point configuration") {}
};

class DivergedBehindCameraError : public Error {
public:
    using Error::Error;
    DivergedBehindCameraError() : Error("pose diverged behind the camera") {}
};

class JointLimitError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid user-supplied configuration (bad preset name, malformed document, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ipose
