//
// Copyright 2026 The SA2 Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Non-cryptographic hashing and seed derivation shared by the simulation.

#ifndef SA2_HASHING_H_
#define SA2_HASHING_H_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>

#include "sa2/field.h"

namespace sa2 {

// SplitMix64 finalizer.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (master, coordinates...).
constexpr uint64_t DeriveSeed(uint64_t master,
                              std::initializer_list<uint64_t> coords) {
  uint64_t h = Mix64(master);
  for (uint64_t c : coords) h = Mix64(h ^ Mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

class Fnv1a {
 public:
  Fnv1a& Update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ = (state_ ^ c) * 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& Update(uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      state_ = (state_ ^ ((word >> (8 * i)) & 0xff)) * 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& Update(std::span<const FieldElement> v) {
    Update(static_cast<uint64_t>(v.size()));
    for (const FieldElement& e : v) Update(e.value);
    return *this;
  }
  uint64_t digest() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace sa2

#endif  // SA2_HASHING_H_
