#include "qfd/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <mutex>

namespace qfd {

void init_logging() {
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::stderr_color_mt("qfd");
        spdlog::set_default_logger(logger);
        spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
        spdlog::level::level_enum level = spdlog::level::info;
        if (const char* env = std::getenv("QFD_LOG_LEVEL")) {
            level = spdlog::level::from_str(env);
        }
        spdlog::set_level(level);
    });
}

}  // namespace qfd
