#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace composa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// Raised when the smooth part returns a non-finite value. Carries the point.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, std::vector<double> x)
        : Error(what), x_(std::move(x)) {}

    const std::vector<double>& point() const noexcept { return x_; }

private:
    std::vector<double> x_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NonQuadraticSmoothPart : public Error {
public:
    using Error::Error;
};

}  // namespace composa
