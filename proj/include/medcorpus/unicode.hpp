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

#include <string>
#include <string_view>

namespace medcorpus::unicode {

inline constexpr char32_t kZwnj = 0x200C;
inline constexpr std::string_view kZwnjUtf8 = "\xE2\x80\x8C";

// Strict decoding. Throws DecodeError carrying the byte offset of the first
// ill-formed sequence (overlongs, surrogates and values above U+10FFFF
// included).
std::u32string decode_utf8(std::string_view bytes);

// Replaces every ill-formed sequence with U+FFFD. Never throws.
std::u32string decode_utf8_lenient(std::string_view bytes);

std::string encode_utf8(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);

// Canonical composition (NFC), backed by ICU.
std::u32string to_nfc(std::u32string_view text);

bool is_whitespace(char32_t cp);
bool is_control(char32_t cp);
// Letters of the scripts the toolkit cares about: Latin, Arabic/Persian and
// anything ICU classifies as alphabetic.
bool is_letter(char32_t cp);
// ASCII value 0-9 of a decimal digit in ASCII, Arabic-Indic or Extended
// Arabic-Indic form, or -1.
int digit_value(char32_t cp);

}  // namespace medcorpus::unicode
