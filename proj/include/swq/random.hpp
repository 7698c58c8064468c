// Copyright 2026 The swq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Deterministic seed splitting and an order-independent parallel map.
//
// A root seed is expanded into per-task substreams with splitmix64 so that
// task k always draws the same numbers no matter which thread runs it or how
// many threads exist. Results are written to slot k and reduced by the caller
// in index order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

namespace swq {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of substream `index` under `root`.
inline std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Seed of the named child stream `tag` under `root`.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                 std::uint64_t index = 0) {
  return substream_seed(root ^ hash_tag(tag), index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

/// Process-wide worker count used by parallel_map; 0 means hardware concurrency.
inline unsigned& thread_count_setting() {
  static unsigned threads = 1;
  return threads;
}

inline void set_thread_count(unsigned threads) { thread_count_setting() = threads; }

inline unsigned effective_threads() {
  unsigned t = thread_count_setting();
  if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
  return t;
}

/// out[k] = fn(k) for k in [0, n). Tasks are claimed by index; the output is
/// identical for every thread count as long as fn(k) depends only on k.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  const unsigned threads = std::min<std::size_t>(effective_threads(), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) out[k] = fn(k);
    return out;
  }
  std::size_t next = 0;
  std::mutex lock;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard guard(lock);
        if (next >= n || failure) return;
        k = next++;
      }
      try {
        out[k] = fn(k);
      } catch (...) {
        std::lock_guard guard(lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace swq
