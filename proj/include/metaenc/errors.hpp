#pragma once

#include <stdexcept>
#include <string>

namespace metaenc {

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a CG curvature term is <= 0; callers may retry with more damping.
struct NonSpdError : std::runtime_error {
    explicit NonSpdError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CgConvergenceError : std::runtime_error {
    explicit CgConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RankDeficiencyError : std::runtime_error {
    explicit RankDeficiencyError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace metaenc
