#include "jetlag/logging.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace jetlag {

void init_logging() {
  auto logger = spdlog::stderr_logger_mt("jetlag");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("JETLAG_LOG")) {
    const auto parsed = spdlog::level::from_str(env);
    if (parsed != spdlog::level::off || std::string_view(env) == "off") level = parsed;
  }
  spdlog::set_level(level);
}

}  // namespace jetlag
