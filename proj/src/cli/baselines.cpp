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

#include <array>

#include "deepsent/cli.hpp"

namespace deepsent::cli {

std::span<const BaselineRow> literature_baselines() {
  static constexpr std::array<BaselineRow, 6> kRows = {{
      {"BiLSTM with feature fusion", "EmotionROI", 0.6086, "60.86%", 2022},
      {"VGG19", "CrowdFlower", 0.73, "73%", 2022},
      {"ResNet50V2", "CrowdFlower", 0.75, "75%", 2022},
      {"EfficientNet-B7", "EMOTIC", 0.738, "73.80%", 2022},
      {"CNN with affective regions", "Self-collected", 0.7601, "76.01%", 2020},
      {"Event concepts with object detection", "CrowdFlower", 0.74, "74%", 2023},
  }};
  return kRows;
}

}  // namespace deepsent::cli
