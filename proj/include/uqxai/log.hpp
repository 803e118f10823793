#pragma once

#include <string_view>

namespace uqxai {

/// Writes "warning: <msg>" to stderr unless warnings are muted.
void log_warning(std::string_view msg);

/// Mutes warnings process-wide (used by tests).
void set_warnings_muted(bool muted);

}  // namespace uqxai
