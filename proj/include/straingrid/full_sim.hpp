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
#include "straingrid/ode.hpp"
#include "straingrid/reduction.hpp"

#include <span>
#include <string>
#include <vector>

namespace straingrid
{

/// Physical rates of one patch at a given eps.
struct PatchRates {
    double r = 0.0;
    Vector beta;           ///< beta^i = beta (1 + eps b^i)
    Vector gamma;          ///< gamma^i = gamma (1 + eps nu^i)
    Matrix gamma_pair;     ///< gamma^ij = gamma (1 + eps c^ij)
    Matrix k;              ///< k^ij = k + eps alpha^ij
    Matrix transmit_first; ///< P^{(i,j)->i} = 1/2 + eps w^ij
};

inline PatchRates assemble_rates(const PatchParams& p, const PatchPerturbation& pert, double eps)
{
    const auto n = pert.b.size();
    PatchRates out;
    out.r              = p.r;
    out.beta           = p.beta * (Vector::Ones(n) + eps * pert.b);
    out.gamma          = p.gamma * (Vector::Ones(n) + eps * pert.nu);
    out.gamma_pair     = p.gamma * (Matrix::Ones(n, n) + eps * pert.c_pair);
    out.k              = Matrix::Constant(n, n, p.k) + eps * pert.alpha;
    out.transmit_first = Matrix::Constant(n, n, 0.5) + eps * pert.w;
    return out;
}

/// Violations of positivity / probability constraints of assembled rates.
inline std::vector<std::string> rate_issues(const PatchRates& rates)
{
    std::vector<std::string> out;
    if ((rates.beta.array() <= 0).any()) {
        out.emplace_back("assembled transmission rate beta^i <= 0");
    }
    if ((rates.gamma.array() < 0).any()) {
        out.emplace_back("assembled clearance rate gamma^i < 0");
    }
    if ((rates.gamma_pair.array() < 0).any()) {
        out.emplace_back("assembled co-colonization clearance gamma^ij < 0");
    }
    if ((rates.k.array() < 0).any()) {
        out.emplace_back("assembled co-colonization susceptibility k^ij < 0");
    }
    if ((rates.transmit_first.array() < 0).any() || (rates.transmit_first.array() > 1).any()) {
        out.emplace_back("transmission probability 1/2 + eps w^ij outside [0, 1]");
    }
    return out;
}

/// N strains, P patches, quasi-neutral traits, slow migration.
///
/// Dynamics in patch p (delta = eps d, migration acts on every compartment):
///   S'    = r (1 - S) + sum_i gamma^i I^i + sum_ij gamma^ij D^ij - S sum_i beta^i J^i + delta (D S)_p
///   I^i'  = beta^i J^i S - (r + gamma^i) I^i - I^i sum_j k^ij beta^j J^j          + delta (D I^i)_p
///   D^ij' = k^ij beta^j I^i J^j - (r + gamma^ij) D^ij                              + delta (D D^ij)_p
/// with J^i = I^i + sum_j (P^{(i,j)->i} D^ij + P^{(j,i)->i} D^ji) and P^{(j,i)->i} = 1 - P^{(j,i)->j}.
/// An i-carrier is co-colonized by j at the force k^ij beta^j J^j of the incoming strain.
class FullModel
{
public:
    FullModel(std::vector<PatchParams> patches, StrainPerturbations pert, ScaleParams scale,
              ConnectivityMatrix connectivity)
        : patches_(std::move(patches))
        , pert_(std::move(pert))
        , scale_(scale)
        , connectivity_(std::move(connectivity))
    {
        if (patches_.empty()) {
            throw InvalidArgument("at least one patch is required");
        }
        if (pert_.patches() != patches_.size()) {
            throw InvalidArgument("perturbations must be given for every patch");
        }
        if (connectivity_.size() != patches_.size()) {
            throw InvalidArgument("connectivity matrix size must equal the number of patches");
        }
        if (!(scale_.eps >= 0) || !std::isfinite(scale_.eps) || !(scale_.d >= 0) || !std::isfinite(scale_.d)) {
            throw InvalidArgument("scale: eps and d must be finite and >= 0");
        }
        std::string msg;
        for (std::size_t p = 0; p < patches_.size(); ++p) {
            for (const auto& s : patch_issues(patches_[p])) {
                msg += " patch " + std::to_string(p) + ": " + s + ";";
            }
        }
        if (!msg.empty()) {
            throw InvalidArgument("invalid patch parameters:" + msg);
        }
        rates_.reserve(patches_.size());
        for (std::size_t p = 0; p < patches_.size(); ++p) {
            rates_.push_back(assemble_rates(patches_[p], pert_[p], scale_.eps));
            for (const auto& s : rate_issues(rates_.back())) {
                msg += " patch " + std::to_string(p) + ": " + s + ";";
            }
        }
        if (!msg.empty()) {
            throw InvalidArgument("invalid quasi-neutral rates at eps = " + std::to_string(scale_.eps) + ":" + msg);
        }
    }

    /// Same traits and connectivity at another scale.
    FullModel with_scale(ScaleParams scale) const
    {
        return FullModel(patches_, pert_, scale, connectivity_);
    }
    FullModel with_eps(double eps) const
    {
        return with_scale({eps, scale_.d});
    }

    std::size_t patches() const
    {
        return patches_.size();
    }
    std::size_t strains() const
    {
        return pert_.strains();
    }
    FullLayout layout() const
    {
        return {patches(), strains()};
    }
    const std::vector<PatchParams>& patch_params() const
    {
        return patches_;
    }
    const StrainPerturbations& perturbations() const
    {
        return pert_;
    }
    const ScaleParams& scale() const
    {
        return scale_;
    }
    const ConnectivityMatrix& connectivity() const
    {
        return connectivity_;
    }
    const PatchRates& rates(std::size_t p) const
    {
        return rates_.at(p);
    }

    std::vector<NeutralEquilibrium> equilibria() const
    {
        std::vector<NeutralEquilibrium> out;
        out.reserve(patches_.size());
        for (std::size_t p = 0; p < patches_.size(); ++p) {
            out.push_back(neutral_equilibrium(patches_[p], p));
        }
        return out;
    }

    std::vector<LeftEigenvector> left_eigenvectors() const
    {
        std::vector<LeftEigenvector> out;
        for (const auto& eq : equilibria()) {
            out.push_back(left_eigenvector(eq));
        }
        return out;
    }

private:
    std::vector<PatchParams> patches_;
    StrainPerturbations pert_;
    ScaleParams scale_;
    ConnectivityMatrix connectivity_;
    std::vector<PatchRates> rates_;
};

/// Right-hand side of the full model on the flat state (see FullLayout).
inline void rhs_full(const FullModel& model, const Vector& y, Vector& dy)
{
    const auto lay = model.layout();
    const std::size_t n = lay.strains;
    const auto en = static_cast<Eigen::Index>(n);
    dy.resize(y.size());

    Vector J(en), force(en);
    for (std::size_t p = 0; p < lay.patches; ++p) {
        const auto& rt = model.rates(p);
        const auto at  = [&](std::size_t k) {
            return static_cast<Eigen::Index>(k);
        };
        const double S = y[at(lay.s(p))];
        auto I         = [&](std::size_t i) {
            return y[at(lay.i(p, i))];
        };
        auto Dij = [&](std::size_t i, std::size_t j) {
            return y[at(lay.d(p, i, j))];
        };

        for (std::size_t i = 0; i < n; ++i) {
            double ji = I(i);
            for (std::size_t j = 0; j < n; ++j) {
                const auto ei = at(i), ej = at(j);
                ji += rt.transmit_first(ei, ej) * Dij(i, j) + (1.0 - rt.transmit_first(ej, ei)) * Dij(j, i);
            }
            J[at(i)] = ji;
        }
        force = rt.beta.cwiseProduct(J);

        double dS = rt.r * (1.0 - S) - S * force.sum();
        for (std::size_t i = 0; i < n; ++i) {
            const auto ei = at(i);
            dS += rt.gamma[ei] * I(i);
            double co = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const auto ej = at(j);
                const double gain = rt.k(ei, ej) * I(i) * force[ej];
                co += gain;
                dy[at(lay.d(p, i, j))] = gain - (rt.r + rt.gamma_pair(ei, ej)) * Dij(i, j);
                dS += rt.gamma_pair(ei, ej) * Dij(i, j);
            }
            dy[at(lay.i(p, i))] = force[ei] * S - (rt.r + rt.gamma[ei]) * I(i) - co;
        }
        dy[at(lay.s(p))] = dS;
    }

    const double delta = model.scale().delta();
    if (delta != 0.0 && lay.patches > 1) {
        using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        const auto P = static_cast<Eigen::Index>(lay.patches);
        const auto B = static_cast<Eigen::Index>(lay.block());
        Eigen::Map<const RowMat> Y(y.data(), P, B);
        Eigen::Map<RowMat> DY(dy.data(), P, B);
        DY.noalias() += delta * model.connectivity().entries() * Y;
    }
}

inline FullState rhs_full(const FullModel& model, const FullState& x)
{
    Vector dy;
    rhs_full(model, x.values(), dy);
    return FullState(x.patches(), x.strains(), std::move(dy));
}

/// Point of the neutral manifold: S = S*, I^i = I* z^i, D^ij = D* z^i z^j.
inline FullState init_on_manifold(const FrequencyState& z0, std::span<const NeutralEquilibrium> eqs)
{
    if (eqs.size() != z0.patches()) {
        throw InvalidArgument("init_on_manifold: one equilibrium per patch is required");
    }
    if (!on_simplex_product(z0, 1e-12)) {
        throw InvalidArgument("init_on_manifold: initial frequencies are not on the simplex product");
    }
    const std::size_t n = z0.strains();
    FullState x(z0.patches(), n);
    for (std::size_t p = 0; p < z0.patches(); ++p) {
        x.S(p) = eqs[p].S;
        for (std::size_t i = 0; i < n; ++i) {
            x.I(p, i) = eqs[p].I * z0(p, i);
            for (std::size_t j = 0; j < n; ++j) {
                x.D(p, i, j) = eqs[p].D * z0(p, i) * z0(p, j);
            }
        }
    }
    return x;
}

/// Frequencies read off a full state: u_p^i = phi_p I_p^i + psi_p D_p^i with
/// D_p^i = (1/2) sum_j (D_p^ij + D_p^ji), renormalized over i.
inline FrequencyState extract_frequencies(const FullState& x, std::span<const LeftEigenvector> omegas)
{
    if (omegas.size() != x.patches()) {
        throw InvalidArgument("extract_frequencies: one eigenvector per patch is required");
    }
    const std::size_t n = x.strains();
    FrequencyState z(x.patches(), n);
    for (std::size_t p = 0; p < x.patches(); ++p) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double di = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                di += x.D(p, i, j) + x.D(p, j, i);
            }
            const double u = omegas[p].dot(x.I(p, i), 0.5 * di);
            z(p, i)        = u;
            total += u;
        }
        if (!(total >= 1e-300)) {
            throw ExtinctPatch(p, "all strains extinct in patch " + std::to_string(p));
        }
        z.patch(p) /= total;
    }
    return z;
}

/// Integrates the full model from y0. Monitors: "mass_defect" (max over accepted steps of
/// max_p |Sigma_p - 1|) and "min_entry" (min over accepted steps).
inline Trajectory simulate_full(const FullModel& model, const FullState& y0, const IntegratorConfig& cfg)
{
    if (y0.patches() != model.patches() || y0.strains() != model.strains()) {
        throw InvalidArgument("simulate_full: initial state dimensions do not match the model");
    }
    const auto lay = model.layout();
    const std::vector<Monitor> monitors{
        {"mass_defect", [lay](const Vector& y) { return mass_defect(lay, y); }, Monitor::Extremum::max},
        {"min_entry", [](const Vector& y) { return min_entry(y); }, Monitor::Extremum::min},
    };
    return integrate([&model](double, const Vector& y, Vector& dy) { rhs_full(model, y, dy); }, y0.values(), cfg,
                     monitors);
}

} // namespace straingrid
