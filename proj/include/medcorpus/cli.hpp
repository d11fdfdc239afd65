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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "medcorpus/cleaner.hpp"
#include "medcorpus/dataset.hpp"

namespace medcorpus::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

struct ToolConfig {
  // Relative paths in the file are resolved against the file's directory.
  std::string rules_path;
  std::string pii_patterns_path;
  std::string quality_rules_path;
  std::string state_path;
  std::string output_dir;
  clean::CleaningConfig cleaning;
  dataset::SplitPolicy split_policy;
  std::string tokenizer = std::string(kDefaultTokenizer);
  int verbosity = 0;
  std::optional<std::uint64_t> seed;
};

// JSON config. Every referenced file that does not exist is listed in one
// ConfigError.
ToolConfig load_tool_config(const std::string& path);

// argv without the program name. 0 ok, 1 invalid input, 2 I/O failure.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace medcorpus::cli
