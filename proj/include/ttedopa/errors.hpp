// errors.hpp: Exception types shared by all modules

#pragma once

#include <stdexcept>
#include <string>

namespace ttedopa {

// Caller supplied something outside an operation's domain.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure did not reach its target accuracy.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved " + std::to_string(achieved) + ")"), achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ttedopa
