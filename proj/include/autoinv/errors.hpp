#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autoinv {

// Thrown whenever a vector/matrix arrives with the wrong extent. Carries the
// expected and actual sizes so callers and tests can inspect them.
class DimensionError : public std::invalid_argument {
public:
    DimensionError(const std::string& what_arg, std::size_t expected, std::size_t actual)
        : std::invalid_argument(what_arg + ": expected " + std::to_string(expected) +
                                ", got " + std::to_string(actual)),
          expected_(expected),
          actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

// Non-finite loss during an optimization loop.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& stage, long epoch)
        : std::runtime_error(stage + " diverged (non-finite loss) at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}

    long epoch() const noexcept { return epoch_; }

private:
    long epoch_;
};

inline void require_dim(const char* what, std::size_t expected, std::size_t actual) {
    if (expected != actual) throw DimensionError(what, expected, actual);
}

}  // namespace autoinv
