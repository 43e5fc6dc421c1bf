#pragma once

#include <spdlog/spdlog.h>

namespace qfd {

// Reads QFD_LOG_LEVEL (trace|debug|info|warn|error|off) once and configures
// the default spdlog logger to write to stderr. Safe to call repeatedly.
void init_logging();

}  // namespace qfd
