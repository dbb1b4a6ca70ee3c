// Copyright 2026 The deepsent Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEEPSENT_LABELS_HPP_
#define DEEPSENT_LABELS_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace deepsent {

// Class indices are fixed: they index model outputs and file labels.
enum class SentimentLabel : int { kNegative = 0, kNeutral = 1, kPositive = 2 };

inline constexpr int kNumSentimentClasses = 3;
inline constexpr std::array<std::string_view, kNumSentimentClasses>
    kSentimentNames = {"negative", "neutral", "positive"};

inline std::string_view label_name(SentimentLabel label) {
  return kSentimentNames[static_cast<int>(label)];
}

inline std::string_view class_name(int index) {
  if (index >= 0 && index < kNumSentimentClasses) return kSentimentNames[index];
  return "unknown";
}

// Case-insensitive; nullopt for anything outside the three names.
inline std::optional<SentimentLabel> parse_label(std::string_view token) {
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (int i = 0; i < kNumSentimentClasses; ++i) {
    if (lower == kSentimentNames[i]) return static_cast<SentimentLabel>(i);
  }
  return std::nullopt;
}

}  // namespace deepsent

#endif  // DEEPSENT_LABELS_HPP_
