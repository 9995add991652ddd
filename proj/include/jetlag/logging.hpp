#pragma once

namespace jetlag {

/// Routes library logging to stderr at the level named by JETLAG_LOG
/// (trace, debug, info, warn, error, off). Unset or unknown means warn.
void init_logging();

}  // namespace jetlag
