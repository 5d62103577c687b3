// Copyright 2026 The Kinoplan Authors
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

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace kinoplan {

using State = Eigen::VectorXd;
using Control = Eigen::VectorXd;
// Sample batches are row-major in spirit: one row per sample.
using Batch = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Maps any angle into [-pi, pi).
inline double wrap_angle(double a) {
  return a - kTwoPi * std::floor((a + kPi) / kTwoPi);
}

// Shortest signed angular difference a - b, in [-pi, pi).
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

// Thrown when a caller breaks a documented precondition (dimension
// mismatches, invalid parameter ranges, and the like).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Thrown by the text parsers (scene files, model configs, data files).
// Line numbers are 1-based; line 0 means the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

// Deterministic RNG. The engine is mt19937_64 with the usual seeding, but
// all conversions to floats/ints are done by hand so that identical seeds
// give identical streams on every platform and standard library. The std
// distribution classes make no such promise.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi); a degenerate interval returns lo.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Requires n > 0.
  int uniform_int(int n) {
    if (n <= 0) throw ContractViolation("uniform_int requires n > 0");
    return static_cast<int>(uniform() * static_cast<double>(n));
  }

  // Derives an independent stream, e.g. one per trial from a base seed.
  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace kinoplan
