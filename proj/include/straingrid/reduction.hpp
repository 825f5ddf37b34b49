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

#include "straingrid/model_core.hpp"

#include <array>
#include <span>

namespace straingrid
{

/// Endemic equilibrium of a single strain-neutral patch without migration.
struct NeutralEquilibrium {
    double S = 1.0;
    double I = 0.0;
    double D = 0.0;
    double T = 0.0; ///< 1 - S = I + D

    Eigen::Vector2d X() const
    {
        return {I, D};
    }
};

/// S* = (r+gamma)/beta, I* = beta T* S* / (r+gamma+k beta T*), D* = k beta T* I* / (r+gamma).
/// Throws SubcriticalPatch when beta <= r + gamma.
inline NeutralEquilibrium neutral_equilibrium(const PatchParams& p, std::size_t patch_index = 0)
{
    if (!p.supercritical()) {
        throw SubcriticalPatch(patch_index, "patch " + std::to_string(patch_index) +
                                                " is subcritical (beta <= r + gamma): no endemic equilibrium");
    }
    const double m = p.r + p.gamma;
    NeutralEquilibrium eq;
    eq.S = m / p.beta;
    eq.T = 1.0 - eq.S;
    eq.I = p.beta * eq.T * eq.S / (m + p.k * p.beta * eq.T);
    eq.D = p.k * p.beta * eq.T * eq.I / m;
    return eq;
}

/// Linear drift of X_p^i = (I_p^i, D_p^i) at the neutral equilibrium. X* spans its kernel.
inline Eigen::Matrix2d drift_matrix(const NeutralEquilibrium& eq, const PatchParams& p)
{
    const double kb = p.k * p.beta;
    Eigen::Matrix2d a;
    a << -kb * eq.T, p.beta * eq.S,
        0.5 * kb * (eq.T + eq.I), 0.5 * kb * eq.I - (p.r + p.gamma);
    return a;
}

/// 2 (T*)^2 - I* D*, the common denominator of the eigenvector and of the speeds.
inline double kernel_denominator(const NeutralEquilibrium& eq)
{
    return 2.0 * eq.T * eq.T - eq.I * eq.D;
}

/// Positive left kernel vector (phi, psi) of the drift matrix, normalized by phi I* + psi D* = 1.
struct LeftEigenvector {
    double phi = 0.0;
    double psi = 0.0;

    double dot(double i, double d) const
    {
        return phi * i + psi * d;
    }
    double dot(const NeutralEquilibrium& eq) const
    {
        return dot(eq.I, eq.D);
    }
    Eigen::RowVector2d row() const
    {
        return {phi, psi};
    }
};

inline LeftEigenvector left_eigenvector(const NeutralEquilibrium& eq)
{
    const double den = kernel_denominator(eq);
    return {(eq.T + eq.I) / den, 2.0 * eq.T / den};
}

/// Mean selection speed Theta of a patch and its split over the five trait dimensions
/// (transmission, single clearance, co-colonization clearance, transmission priority,
/// co-colonization susceptibility).
struct SpeedWeights {
    double Theta = 0.0;
    std::array<double, 5> Theta_s{};
    std::array<double, 5> theta{};
};

inline SpeedWeights speed_and_weights(const NeutralEquilibrium& eq, const PatchParams& p)
{
    const double den = kernel_denominator(eq);
    const double m   = p.r + p.gamma;
    SpeedWeights out;
    out.Theta_s = {
        2.0 * m * eq.T * eq.T / den,
        p.gamma * eq.I * (eq.I + eq.T) / den,
        p.gamma * eq.T * eq.D / den,
        2.0 * m * eq.T * eq.D / den,
        p.beta * eq.I * eq.T / den,
    };
    out.Theta = 0.0;
    for (double v : out.Theta_s) {
        out.Theta += v;
    }
    for (std::size_t s = 0; s < 5; ++s) {
        out.theta[s] = out.Theta_s[s] / out.Theta;
    }
    return out;
}

/// Pairwise invasion fitness matrix of one patch:
///   lambda^ij = th1 (b_i - b_j) + th2 (nu_j - nu_i) + th3 (2 c_jj - c_ij - c_ji)
///             + th4 (w_ij - w_ji) + th5 (I* (a_ji - a_ij) + D* (a_ji - a_jj)).
inline Matrix fitness_matrix(const NeutralEquilibrium& eq, const PatchPerturbation& pert, const SpeedWeights& sw)
{
    const auto n = pert.b.size();
    if (pert.nu.size() != n || pert.c_pair.rows() != n || pert.c_pair.cols() != n || pert.w.rows() != n ||
        pert.w.cols() != n || pert.alpha.rows() != n || pert.alpha.cols() != n) {
        throw InvalidArgument("fitness_matrix: perturbation dimensions disagree");
    }
    const auto& th = sw.theta;
    const auto& c  = pert.c_pair;
    const auto& w  = pert.w;
    const auto& a  = pert.alpha;
    Matrix lambda(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            lambda(i, j) = th[0] * (pert.b[i] - pert.b[j]) + th[1] * (-pert.nu[i] + pert.nu[j]) +
                           th[2] * (-c(i, j) - c(j, i) + 2.0 * c(j, j)) + th[3] * (w(i, j) - w(j, i)) +
                           th[4] * (eq.I * (a(j, i) - a(i, j)) + eq.D * (a(j, i) - a(j, j)));
        }
    }
    return lambda;
}

/// Speed, weights and fitness matrix of one patch.
struct FitnessStructure {
    double Theta = 0.0;
    std::array<double, 5> theta{};
    Matrix Lambda;
};

inline FitnessStructure fitness_structure(const NeutralEquilibrium& eq, const PatchParams& p,
                                          const PatchPerturbation& pert)
{
    const auto sw = speed_and_weights(eq, p);
    return {sw.Theta, sw.theta, fitness_matrix(eq, pert, sw)};
}

/// Coupling of the reduced system: m_pk = d_pk (omega_p* . X_k*) off the diagonal, zero
/// row sums. `advection(p, k)` = omega_p* . (X_k* - X_p*), so m_pk = d_pk (1 + advection(p, k)).
struct MigrationMatrix {
    Matrix entries;
    Matrix advection;
};

inline MigrationMatrix migration_matrix(const ConnectivityMatrix& conn, std::span<const NeutralEquilibrium> eqs,
                                        std::span<const LeftEigenvector> omegas)
{
    const std::size_t n = conn.size();
    if (eqs.size() != n || omegas.size() != n) {
        throw InvalidArgument("migration_matrix: need one equilibrium and eigenvector per patch");
    }
    const auto en = static_cast<Eigen::Index>(n);
    MigrationMatrix out{Matrix::Zero(en, en), Matrix::Zero(en, en)};
    for (std::size_t p = 0; p < n; ++p) {
        const auto ep = static_cast<Eigen::Index>(p);
        double off = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto ek = static_cast<Eigen::Index>(k);
            out.advection(ep, ek) = omegas[p].dot(eqs[k].I - eqs[p].I, eqs[k].D - eqs[p].D);
            if (k == p) {
                continue;
            }
            out.entries(ep, ek) = conn(p, k) * omegas[p].dot(eqs[k]);
            off += out.entries(ep, ek);
        }
        out.entries(ep, ep) = -off;
    }
    return out;
}

} // namespace straingrid
