#pragma once

#include <stdexcept>
#include <string>

namespace nlfa {

// Bad data: unreadable files, malformed triples, dimension mismatches.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration: invalid hyperparameters, conflicting flags, ranges.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nlfa
