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

#include "spinlev/numerics.h"

#include <algorithm>
#include <cmath>

namespace spinlev {

cplx expm1(cplx z) {
    double x = z.real(), y = z.imag();
    double s = std::sin(0.5 * y);
    double cos_m1 = -2.0 * s * s;
    double em1 = std::expm1(x);
    return {em1 * std::cos(y) + cos_m1, std::exp(x) * std::sin(y)};
}

cplx phi1(cplx z) {
    if (std::abs(z) < 1e-5) {
        // 1 + z/2 + z^2/6 + z^3/24, truncation below 1e-21.
        return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0)));
    }
    return expm1(z) / z;
}

cplx exp_dd(cplx a, cplx b) {
    return std::exp(a) * phi1(b - a);
}

namespace {

// Series around the centroid: e^m * sum_n h_n(y0,y1,y2) / (n+2)!, where h_n is
// the complete homogeneous symmetric polynomial of degree n.
cplx exp_dd_series(cplx a, cplx b, cplx c) {
    cplx m = (a + b + c) / 3.0;
    cplx y0 = a - m, y1 = b - m, y2 = c - m;
    double r = std::max({std::abs(y0), std::abs(y1), std::abs(y2)});
    cplx p0 = 1.0, h1 = 1.0, h2 = 1.0;
    cplx total = 0.5;
    double fact = 2.0, rn = 1.0;
    for (int n = 1; n < 40; n++) {
        p0 *= y0;
        h1 = y1 * h1 + p0;
        h2 = y2 * h2 + h1;
        fact *= (n + 2);
        total += h2 / fact;
        // |h_n| <= C(n+2, 2) r^n; the first-order term vanishes at the centroid,
        // so stop on the bound rather than on the term itself.
        rn *= r;
        if (0.5 * (n + 1) * (n + 2) * rn / fact < 1e-18) {
            break;
        }
    }
    return std::exp(m) * total;
}

}  // namespace

cplx exp_dd(cplx a, cplx b, cplx c) {
    double ab = std::abs(a - b), bc = std::abs(b - c), ac = std::abs(a - c);
    double widest = std::max({ab, bc, ac});
    if (widest < 0.25) {
        return exp_dd_series(a, b, c);
    }
    // Put the widest pair in the denominator.
    if (ab == widest) {
        std::swap(b, c);
    } else if (bc == widest) {
        std::swap(a, b);
    }
    return (exp_dd(b, c) - exp_dd(a, b)) / (c - a);
}

double one_minus_sinc(double x) {
    if (std::abs(x) < 1.0) {
        double x2 = x * x;
        double term = x2 / 6.0;
        double total = term;
        for (int k = 2; k < 12; k++) {
            term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
            total += term;
        }
        return total;
    }
    return (x - std::sin(x)) / x;
}

}  // namespace spinlev
