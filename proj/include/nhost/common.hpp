// Copyright 2026 The nhsim Authors
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

#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace nhost {

// All accounting is done in integer micro-units. No floating point touches
// balances anywhere.
using Currency = std::uint64_t;
using Tick = std::uint64_t;

struct AccountId {
  std::uint64_t value = 0;
  auto operator<=>(const AccountId&) const = default;
};

struct ContractId {
  std::uint64_t value = 0;
  auto operator<=>(const ContractId&) const = default;
};

// 64-bit FNV-1a, used for block digests, trace digests and shadowing keys.
// Stable across platforms and runs, unlike std::hash.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline constexpr std::uint64_t fnv1a(std::string_view data,
                                     std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

inline constexpr std::uint64_t fnv1a_u64(std::uint64_t v,
                                         std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (int i = 0; i < 8; ++i) {
    h ^= v & 0xff;
    h *= kFnvPrime;
    v >>= 8;
  }
  return h;
}

inline std::string hex_digest(std::uint64_t d) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(d));
  return std::string(buf);
}

}  // namespace nhost
