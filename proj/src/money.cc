// Copyright 2026 The Authors.
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

#include "textal/money.h"

#include <cmath>
#include <cstdio>

namespace textal {

Money Money::FromDouble(double amount) {
  return Money(static_cast<int64_t>(
      std::llround(amount * static_cast<double>(kUnitsPerWhole))));
}

std::string Money::ToString() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", ToDouble());
  return buf;
}

}  // namespace textal
