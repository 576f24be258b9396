#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace kgamc {

// Worker count: KGAMC_THREADS if set and positive, else hardware concurrency.
std::size_t worker_threads();

// Runs body(i) for i in [0, count) on up to worker_threads() threads.
// Iterations must be independent; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  return mix_seed(mix_seed(mix_seed(mix_seed(base) ^ a) ^ b) ^ c);
}

}  // namespace kgamc
