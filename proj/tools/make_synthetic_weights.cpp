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

// Writes a DFWS container of random ResNet50 weights, for trying the
// pipeline without converted pretrained weights.

#include <cstdlib>
#include <iostream>
#include <string>

#include "deepsent/binary_io.hpp"
#include "deepsent/resnet50.hpp"

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::cerr << "usage: make_synthetic_weights <out.dfws> [seed]\n";
    return 1;
  }
  const std::uint64_t seed = argc == 3 ? std::strtoull(argv[2], nullptr, 10) : 0;
  try {
    const auto store =
        deepsent::resnet::random_weight_store(deepsent::resnet::NetworkConfig{}, seed);
    deepsent::write_file_atomic(argv[1], deepsent::resnet::save_weights(store));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
