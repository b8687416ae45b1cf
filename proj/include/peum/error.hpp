#pragma once

#include <stdexcept>
#include <string>

namespace peum {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument or state outside an operation's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed configuration or family description.
class ConfigError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

// A work budget (laps, pullback components) was exhausted.
class BudgetError : public Error {
public:
    using Error::Error;
};

// An orbit point landed within tolerance of the critical point where a smooth
// branch quantity was required.
class CriticalHitError : public Error {
public:
    using Error::Error;
};

}  // namespace peum
