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

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace spinlev {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;   // J / K
inline constexpr double kDefaultGammaE = 2.0 * kPi * 27.0e9;  // rad / (s T)

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CutoffError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// e^z - 1 without cancellation for small |z|.
cplx expm1(cplx z);

/// (e^z - 1) / z, equal to 1 at z = 0.
cplx phi1(cplx z);

/// Divided differences of exp. exp_dd(a, b) = (e^b - e^a)/(b - a) and
/// exp_dd(a, b, c) is the second divided difference; both are continuous
/// through coincident nodes.
cplx exp_dd(cplx a, cplx b);
cplx exp_dd(cplx a, cplx b, cplx c);

/// 1 - sin(x)/x.
double one_minus_sinc(double x);

/// Neumaier compensated accumulator. Summing the same sequence in the same
/// order always gives the same bits, whatever thread produced the terms.
template <typename T>
struct CompensatedSum {
    T sum{};
    T carry{};

    void add(T x) {
        if constexpr (std::is_same_v<T, cplx>) {
            double re = sum.real(), ce = carry.real();
            double im = sum.imag(), ci = carry.imag();
            step(re, ce, x.real());
            step(im, ci, x.imag());
            sum = {re, im};
            carry = {ce, ci};
        } else {
            step(sum, carry, x);
        }
    }
    T value() const {
        return sum + carry;
    }

   private:
    static void step(double &s, double &c, double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x)) {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
};

/// SplitMix64 finalizer; used to derive per-trajectory seeds.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline uint64_t stream_seed(uint64_t seed, uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL));
}

}  // namespace spinlev
