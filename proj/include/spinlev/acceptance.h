// Copyright 2026 The spinlev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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
#include <vector>

namespace spinlev {

struct Check {
    int criterion = 0;
    std::string name;
    double expected = 0.0;
    double observed = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct AcceptanceOptions {
    uint64_t seed = 1;
    int threads = 1;
    // rerun at 1, 4 and 8 threads and compare the serialized reports
    bool determinism = true;
    // multiplies every tolerance; 0 turns each check into an exact comparison
    double tolerance_scale = 1.0;
};

inline constexpr int kCriteria = 12;

std::string_view criterion_title(int criterion);

std::vector<Check> run_acceptance(const AcceptanceOptions &options);

/// Pass iff every check of the criterion passes (and it has at least one).
bool criterion_passed(const std::vector<Check> &checks, int criterion);

/// {"checks": [{check_name, criterion, expected, observed, tolerance, pass}...],
///  "passed": n, "failed": m}. Non-finite numbers are written as null.
std::string report_json(const std::vector<Check> &checks);

}  // namespace spinlev
