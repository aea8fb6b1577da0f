#pragma once

#include <stdexcept>
#include <string>

namespace latwave {

// Error kinds map 1:1 onto C API status codes and CLI exit codes.
enum class errc {
    ok = 0,
    validation = 2,
    convergence = 3,
    verification = 4,
    simulation = 5,
    domain = 6,
    order = 7,
    window = 8,
    io = 9,
    invalid_argument = 10,
    internal = 11,
};

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error(errc::validation, m) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error(errc::domain, m) {}
};
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& m) : Error(errc::convergence, m) {}
};
struct OrderViolation : Error {
    explicit OrderViolation(const std::string& m) : Error(errc::order, m) {}
};
struct StabilityError : Error {
    explicit StabilityError(const std::string& m) : Error(errc::simulation, m) {}
};
struct BoundaryError : Error {
    explicit BoundaryError(const std::string& m) : Error(errc::simulation, m) {}
};
struct WindowError : Error {
    explicit WindowError(const std::string& m) : Error(errc::window, m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error(errc::io, m) {}
};

} // namespace latwave
