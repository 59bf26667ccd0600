// Copyright 2026 The arraylight Authors
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

// Spherical Hankel functions evaluated in 50-digit arithmetic from the
// elementary closed forms, as an accuracy reference for the double versions.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <utility>

namespace testutil {

using hp = boost::multiprecision::cpp_bin_float_50;

inline std::pair<double, double> hankel_h0_hp(double s_in) {
  const hp s(s_in);
  return {static_cast<double>(sin(s) / s), static_cast<double>(-cos(s) / s)};
}

inline std::pair<double, double> hankel_h2_hp(double s_in) {
  const hp s(s_in);
  const hp a = 3 / (s * s * s) - 1 / s;
  const hp b = 3 / (s * s);
  return {static_cast<double>(a * sin(s) - b * cos(s)), static_cast<double>(-a * cos(s) - b * sin(s))};
}

}  // namespace testutil
