#include "tnt/rng.hpp"

#include <limits>

namespace tnt {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng make_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t a,
                std::uint64_t b) {
  const std::uint64_t h = fnv1a(name);
  std::seed_seq seq{
      static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
      static_cast<std::uint32_t>(h),         static_cast<std::uint32_t>(h >> 32),
      static_cast<std::uint32_t>(a),         static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b),         static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace tnt
