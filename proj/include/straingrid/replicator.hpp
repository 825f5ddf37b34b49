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

#include "straingrid/full_sim.hpp"
#include "straingrid/reduction.hpp"

#include <vector>

namespace straingrid
{

/// Everything the reduced (slow-time) frequency dynamics needs. Independent of eps.
struct ReplicatorSetup {
    std::size_t patches = 0;
    std::size_t strains = 0;
    Vector Theta;                ///< per-patch speed
    std::vector<Matrix> Lambda;  ///< per-patch N x N fitness matrices
    MigrationMatrix migration;   ///< M and the advection coefficients
    Matrix connectivity;         ///< the original D
    double d = 0.0;
};

/// Closed-form reduction of a full model.
inline ReplicatorSetup reduce(const FullModel& model)
{
    ReplicatorSetup out;
    out.patches = model.patches();
    out.strains = model.strains();
    out.d       = model.scale().d;
    out.connectivity = model.connectivity().entries();

    const auto eqs    = model.equilibria();
    const auto omegas = model.left_eigenvectors();
    out.Theta.resize(static_cast<Eigen::Index>(out.patches));
    for (std::size_t p = 0; p < out.patches; ++p) {
        const auto fs = fitness_structure(eqs[p], model.patch_params()[p], model.perturbations()[p]);
        out.Theta[static_cast<Eigen::Index>(p)] = fs.Theta;
        out.Lambda.push_back(fs.Lambda);
    }
    out.migration = migration_matrix(model.connectivity(), eqs, omegas);
    return out;
}

namespace detail
{

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline void add_replicator_terms(const Vector& Theta, const std::vector<Matrix>& Lambdas, std::size_t strains,
                                 const Vector& z, Vector& dz)
{
    const auto n = static_cast<Eigen::Index>(strains);
    for (Eigen::Index p = 0; p < Theta.size(); ++p) {
        const auto zp    = z.segment(p * n, n);
        const Vector lz  = Lambdas[static_cast<std::size_t>(p)] * zp;
        const double avg = zp.dot(lz);
        dz.segment(p * n, n).array() += Theta[p] * zp.array() * (lz.array() - avg);
    }
}

} // namespace detail

/// dz_p^i/dtau = Theta_p z_p^i ((Lambda_p z_p)_i - z_p Lambda_p z_p) + d (M z^i)_p.
/// z is flat row-major P x N.
inline void rhs_replicator(const Vector& z, const Vector& Theta, const std::vector<Matrix>& Lambdas,
                           const Matrix& M, double d, Vector& dz)
{
    const auto P = Theta.size();
    if (P == 0 || static_cast<std::size_t>(P) != Lambdas.size() || M.rows() != P || M.cols() != P ||
        z.size() % P != 0) {
        throw InvalidArgument("rhs_replicator: inconsistent dimensions");
    }
    const auto strains = static_cast<std::size_t>(z.size() / P);
    dz.setZero(z.size());
    detail::add_replicator_terms(Theta, Lambdas, strains, z, dz);
    if (d != 0.0) {
        const auto n = static_cast<Eigen::Index>(strains);
        Eigen::Map<const detail::RowMat> Z(z.data(), P, n);
        Eigen::Map<detail::RowMat> DZ(dz.data(), P, n);
        DZ.noalias() += d * M * Z;
    }
}

inline void rhs_replicator(const ReplicatorSetup& s, const Vector& z, Vector& dz)
{
    rhs_replicator(z, s.Theta, s.Lambda, s.migration.entries, s.d, dz);
}

/// Same flow written as diffusion through D plus heterogeneity-induced transport:
///   Theta_p z_p^i (...) + d (D z^i)_p + d sum_k d_pk nu_pk (z_k^i - z_p^i).
inline void rhs_replicator_advection(const Vector& z, const Vector& Theta, const std::vector<Matrix>& Lambdas,
                                     const Matrix& D, const Matrix& nu, double d, Vector& dz)
{
    const auto P = Theta.size();
    if (P == 0 || static_cast<std::size_t>(P) != Lambdas.size() || D.rows() != P || D.cols() != P ||
        nu.rows() != P || nu.cols() != P || z.size() % P != 0) {
        throw InvalidArgument("rhs_replicator_advection: inconsistent dimensions");
    }
    const auto strains = static_cast<std::size_t>(z.size() / P);
    const auto n       = static_cast<Eigen::Index>(strains);
    dz.setZero(z.size());
    detail::add_replicator_terms(Theta, Lambdas, strains, z, dz);
    if (d == 0.0) {
        return;
    }
    Eigen::Map<const detail::RowMat> Z(z.data(), P, n);
    Eigen::Map<detail::RowMat> DZ(dz.data(), P, n);
    DZ.noalias() += d * D * Z;
    for (Eigen::Index p = 0; p < P; ++p) {
        for (Eigen::Index k = 0; k < P; ++k) {
            if (k == p) {
                continue;
            }
            const double c = d * D(p, k) * nu(p, k);
            if (c != 0.0) {
                DZ.row(p) += c * (Z.row(k) - Z.row(p));
            }
        }
    }
}

inline void rhs_replicator_advection(const ReplicatorSetup& s, const Vector& z, Vector& dz)
{
    rhs_replicator_advection(z, s.Theta, s.Lambda, s.connectivity, s.migration.advection, s.d, dz);
}

/// Integrates the reduced system in slow time tau (cfg.t_end is the tau horizon).
/// Monitors: "simplex_defect" (max) and "min_z" (min).
inline Trajectory simulate_replicator(const ReplicatorSetup& setup, const FrequencyState& z0,
                                      const IntegratorConfig& cfg)
{
    if (z0.patches() != setup.patches || z0.strains() != setup.strains) {
        throw InvalidArgument("simulate_replicator: initial frequencies do not match the setup");
    }
    const std::size_t P = setup.patches, N = setup.strains;
    const std::vector<Monitor> monitors{
        {"simplex_defect", [P, N](const Vector& z) { return simplex_defect(P, N, z); }, Monitor::Extremum::max},
        {"min_z", [](const Vector& z) { return min_entry(z); }, Monitor::Extremum::min},
    };
    return integrate([&setup](double, const Vector& z, Vector& dz) { rhs_replicator(setup, z, dz); }, z0.values(),
                     cfg, monitors);
}

} // namespace straingrid
