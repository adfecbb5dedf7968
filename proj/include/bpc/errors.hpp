#pragma once

#include <stdexcept>
#include <string>

namespace bpc {

/// Invalid or non-finite input rejected before any computation.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// CRRA value function is infinite at the queried time (t <= t_tilde).
class BlowupError : public std::runtime_error {
public:
    BlowupError(const std::string& what, double t_tilde)
        : std::runtime_error(what), t_tilde_(t_tilde) {}
    double t_tilde() const { return t_tilde_; }

private:
    double t_tilde_;
};

/// Backward Riccati integration escaped to infinity before reaching t=0.
class RiccatiEscapeError : public std::runtime_error {
public:
    RiccatiEscapeError(const std::string& what, double escape_time)
        : std::runtime_error(what), escape_time_(escape_time) {}
    double escape_time() const { return escape_time_; }

private:
    double escape_time_;
};

}  // namespace bpc
