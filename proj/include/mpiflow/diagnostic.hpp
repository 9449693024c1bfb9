#pragma once

#include <string>
#include <vector>

#include "mpiflow/error.hpp"

namespace mpiflow {

enum class Level { Error, Warning };

struct Diagnostic {
    Level level = Level::Warning;
    Line line = 0;
    std::string message;

    friend bool operator==(const Diagnostic &, const Diagnostic &) = default;
};

using Diagnostics = std::vector<Diagnostic>;

std::string_view to_string(Level level);

// `LEVEL line N: message`
std::string format(const Diagnostic &d);

} // namespace mpiflow
