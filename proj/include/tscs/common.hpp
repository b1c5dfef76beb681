// Copyright 2026 The tscs Authors
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

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tscs {

inline constexpr const char* kVersion = "0.1.0";

/// Buyer subset; bit i set means buyer i (0-based) is in the set.
using Subset = std::uint32_t;

inline constexpr std::size_t kMaxBuyers = 24;

/// Tolerance for every inequality the library checks.
inline constexpr double kTol = 1e-9;

inline constexpr Subset full_set(std::size_t n) { return n == 0 ? 0u : static_cast<Subset>((std::uint64_t{1} << n) - 1); }
inline constexpr bool contains(Subset s, std::size_t i) { return ((s >> i) & 1u) != 0; }
inline constexpr std::size_t cardinality(Subset s) { return static_cast<std::size_t>(std::popcount(s)); }
inline constexpr Subset singleton(std::size_t i) { return Subset{1} << i; }

/// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An enumeration, LP, or instance exceeded a configured cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An assignment violates disjointness or capacities.
class AssignmentError : public Error {
 public:
  using Error::Error;
};

/// The instance does not belong to the model class an algorithm requires.
class ModelMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario or configuration input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Size caps shared by enumeration-based routines. Never silently truncated.
struct Caps {
  std::size_t realizations = 1'000'000;
  std::size_t assignments = 20'000'000;
  std::size_t lp_columns = 2'000'000;
  std::size_t lottery_atoms = 200'000;
};

inline void require_buyers(std::size_t n) {
  if (n > kMaxBuyers) {
    throw SizeError("instance has " + std::to_string(n) + " buyers; at most " + std::to_string(kMaxBuyers) +
                    " are supported");
  }
}

/// Worker count: explicit request, else TSCS_THREADS, else 1.
inline std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TSCS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

/// Runs fn(begin, end, worker) over contiguous index blocks. Callers reduce
/// per-index results in ascending index order, so output never depends on
/// the worker count.
template <typename Fn>
void parallel_blocks(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads <= 1) {
    if (count > 0) fn(std::size_t{0}, count, std::size_t{0});
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
  }
  for (auto& t : pool) t.join();
}

/// Counter-based generator: one 64-bit draw per (seed, stream, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace tscs
