#include "uqxai/log.hpp"

#include <atomic>
#include <iostream>

namespace uqxai {

namespace {
std::atomic<bool> g_muted{false};
}

void log_warning(std::string_view msg) {
  if (g_muted.load(std::memory_order_relaxed)) return;
  std::cerr << "warning: " << msg << '\n';
}

void set_warnings_muted(bool muted) { g_muted.store(muted, std::memory_order_relaxed); }

}  // namespace uqxai
