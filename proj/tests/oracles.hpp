/*
* Copyright (C) 2026 The straingrid authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#pragma once

#include <array>
#include <numeric>

namespace straingrid::test
{

/// Exact arithmetic for patches with small integer rates.
struct Fraction {
    long long num = 0;
    long long den = 1;

    Fraction(long long n = 0, long long d = 1)
        : num(n)
        , den(d)
    {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long long g = std::gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    double value() const
    {
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

inline Fraction operator+(Fraction a, Fraction b)
{
    return {a.num * b.den + b.num * a.den, a.den * b.den};
}
inline Fraction operator-(Fraction a, Fraction b)
{
    return {a.num * b.den - b.num * a.den, a.den * b.den};
}
inline Fraction operator*(Fraction a, Fraction b)
{
    return {a.num * b.num, a.den * b.den};
}
inline Fraction operator/(Fraction a, Fraction b)
{
    return {a.num * b.den, a.den * b.num};
}
inline bool operator==(Fraction a, Fraction b)
{
    return a.num == b.num && a.den == b.den;
}

struct ExactPatch {
    Fraction S, I, D, T, phi, psi;
    std::array<Fraction, 5> Theta_s;
    Fraction Theta;
};

/// Equilibrium by successive substitution (S from the total-carriage balance, then I + D = T
/// with D proportional to I), the left kernel from the first column of the drift matrix.
inline ExactPatch exact_patch(long long r, long long gamma, long long beta, long long k)
{
    ExactPatch e;
    const Fraction m = r + gamma;
    e.S = m / Fraction(beta);
    e.T = Fraction(1) - e.S;
    const Fraction ratio = Fraction(k * beta) * e.T / m; // D / I
    e.I = e.T / (Fraction(1) + ratio);
    e.D = ratio * e.I;
    // -k beta T phi + (1/2) k beta (T + I) psi = 0
    const Fraction phi_over_psi = (e.T + e.I) / (Fraction(2) * e.T);
    e.psi = Fraction(1) / (phi_over_psi * e.I + e.D);
    e.phi = phi_over_psi * e.psi;
    // with phi I + psi D = 1: 2 T^2 - I D = (T + I) / phi
    const Fraction den = (e.T + e.I) / e.phi;
    e.Theta_s = {Fraction(2) * m * e.T * e.T / den, Fraction(gamma) * e.I * (e.I + e.T) / den,
                 Fraction(gamma) * e.T * e.D / den, Fraction(2) * m * e.T * e.D / den,
                 Fraction(beta) * e.I * e.T / den};
    e.Theta = Fraction(0);
    for (const auto& t : e.Theta_s) {
        e.Theta = e.Theta + t;
    }
    return e;
}

} // namespace straingrid::test
