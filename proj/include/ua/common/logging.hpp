#pragma once

#include <spdlog/spdlog.h>

namespace ua {

// Reads UA_LOG (trace|debug|info|warn|error|off) and configures the default
// spdlog logger. Safe to call more than once.
void init_logging();

}  // namespace ua
