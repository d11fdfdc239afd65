// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace medcorpus {

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

// First 8 bytes of the SHA-256 digest, big-endian.
std::uint64_t sha256_u64(std::string_view bytes);

// Stable content key for a QA pair: SHA-256 of the normalized question and
// answer. Inputs are normalized here, so spelling variants collide.
std::string content_hash(std::string_view question, std::string_view answer);

}  // namespace medcorpus
