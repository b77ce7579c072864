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

#ifndef TEXTAL_MONEY_H_
#define TEXTAL_MONEY_H_

#include <compare>
#include <cstdint>
#include <string>

namespace textal {

// Fixed-point currency amount in units of 1e-12. Sums are exact, so a ledger
// never drifts from the per-call costs it was built from.
class Money {
 public:
  static constexpr int64_t kUnitsPerWhole = 1'000'000'000'000LL;

  constexpr Money() = default;
  static constexpr Money FromUnits(int64_t units) { return Money(units); }
  // Rounds to the nearest representable unit.
  static Money FromDouble(double amount);

  constexpr int64_t units() const { return units_; }
  double ToDouble() const {
    return static_cast<double>(units_) / static_cast<double>(kUnitsPerWhole);
  }
  std::string ToString() const;

  constexpr Money& operator+=(Money other) {
    units_ += other.units_;
    return *this;
  }
  constexpr Money& operator-=(Money other) {
    units_ -= other.units_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return a += b; }
  friend constexpr Money operator-(Money a, Money b) { return a -= b; }
  friend constexpr auto operator<=>(Money a, Money b) = default;

 private:
  constexpr explicit Money(int64_t units) : units_(units) {}
  int64_t units_ = 0;
};

}  // namespace textal

#endif  // TEXTAL_MONEY_H_
