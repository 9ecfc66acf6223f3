#include "nanode/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace nanode {

std::size_t thread_budget() {
  if (const char* env = std::getenv("NANODE_THREADS")) {
    std::string_view s(env);
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc{} && ptr == s.data() + s.size() && n > 0) return n;
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace nanode
