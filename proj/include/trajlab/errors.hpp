#pragma once

#include <stdexcept>
#include <string>

namespace trajlab {

// Bad user-supplied configuration (files, flags, parameter ranges).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract (shape mismatch, bad index).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace trajlab
