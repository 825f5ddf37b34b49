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

#include "straingrid/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace straingrid
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Neutral epidemiological rates of one patch.
struct PatchParams {
    double r     = 1.0; ///< birth = death rate
    double beta  = 1.0; ///< transmission rate
    double gamma = 0.0; ///< clearance rate
    double k     = 0.0; ///< relative susceptibility to co-colonization

    double basic_reproduction_number() const
    {
        return beta / (r + gamma);
    }
    bool supercritical() const
    {
        return beta > r + gamma;
    }
};

/// Human-readable list of violated invariants; empty when the patch is usable.
inline std::vector<std::string> patch_issues(const PatchParams& p)
{
    std::vector<std::string> out;
    auto finite = [](double x) {
        return std::isfinite(x);
    };
    if (!finite(p.r) || !finite(p.beta) || !finite(p.gamma) || !finite(p.k)) {
        out.emplace_back("non-finite rate");
        return out;
    }
    if (p.r <= 0) {
        out.emplace_back("r must be > 0");
    }
    if (p.beta <= 0) {
        out.emplace_back("beta must be > 0");
    }
    if (p.gamma < 0) {
        out.emplace_back("gamma must be >= 0");
    }
    if (p.k < 0) {
        out.emplace_back("k must be >= 0");
    }
    if (out.empty() && !p.supercritical()) {
        out.emplace_back("subcritical: beta = " + std::to_string(p.beta) + " <= r + gamma = " +
                         std::to_string(p.r + p.gamma));
    }
    return out;
}

/// Trait deviations of the N strains in one patch, stored unscaled (the factor eps is
/// applied when the physical rates are assembled).
///
/// b, nu and c_pair are relative deviations of beta, gamma (single) and gamma (pair);
/// w and alpha are absolute deviations of the transmission probability and of k.
struct PatchPerturbation {
    Vector b;      ///< transmission
    Vector nu;     ///< clearance of single colonization
    Matrix c_pair; ///< clearance of co-colonization (i then j)
    Matrix w;      ///< probability that an (i,j) host transmits i, minus 1/2
    Matrix alpha;  ///< susceptibility of an i-carrier to j

    static PatchPerturbation zero(std::size_t strains)
    {
        const auto n = static_cast<Eigen::Index>(strains);
        return {Vector::Zero(n), Vector::Zero(n), Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
    }

    bool all_finite() const
    {
        return b.allFinite() && nu.allFinite() && c_pair.allFinite() && w.allFinite() && alpha.allFinite();
    }
};

/// Per-patch trait deviations for all strains.
class StrainPerturbations
{
public:
    StrainPerturbations() = default;

    StrainPerturbations(std::size_t strains, std::vector<PatchPerturbation> patches)
        : strains_(strains)
        , patches_(std::move(patches))
    {
        if (strains_ == 0) {
            throw InvalidArgument("at least one strain is required");
        }
        const auto n = static_cast<Eigen::Index>(strains_);
        for (std::size_t p = 0; p < patches_.size(); ++p) {
            const auto& pp = patches_[p];
            const bool sized = pp.b.size() == n && pp.nu.size() == n && pp.c_pair.rows() == n &&
                               pp.c_pair.cols() == n && pp.w.rows() == n && pp.w.cols() == n &&
                               pp.alpha.rows() == n && pp.alpha.cols() == n;
            if (!sized) {
                throw InvalidArgument("perturbation arrays of patch " + std::to_string(p) +
                                      " do not match N = " + std::to_string(strains_));
            }
            if (!pp.all_finite()) {
                throw InvalidArgument("non-finite perturbation in patch " + std::to_string(p));
            }
        }
    }

    static StrainPerturbations neutral(std::size_t patches, std::size_t strains)
    {
        return StrainPerturbations(strains, std::vector<PatchPerturbation>(patches, PatchPerturbation::zero(strains)));
    }

    std::size_t strains() const
    {
        return strains_;
    }
    std::size_t patches() const
    {
        return patches_.size();
    }
    const PatchPerturbation& operator[](std::size_t p) const
    {
        return patches_.at(p);
    }

private:
    std::size_t strains_ = 0;
    std::vector<PatchPerturbation> patches_;
};

/// Quasi-neutrality scale and rescaled migration intensity; the physical migration
/// rate is delta = eps * d.
struct ScaleParams {
    double eps = 0.0;
    double d   = 0.0;

    double delta() const
    {
        return eps * d;
    }
};

/// Outcome of the three structural checks on a connectivity matrix.
struct ConnectivityReport {
    bool metzler      = false;
    bool irreducible  = false;
    bool row_sum_zero = false;

    bool ok() const
    {
        return metzler && irreducible && row_sum_zero;
    }

    std::vector<std::string> issues() const
    {
        std::vector<std::string> out;
        if (!metzler) {
            out.emplace_back("Metzler violation: negative off-diagonal entry");
        }
        if (!irreducible) {
            out.emplace_back("not irreducible: patch graph is not strongly connected");
        }
        if (!row_sum_zero) {
            out.emplace_back("row sums are not zero");
        }
        return out;
    }
};

namespace detail
{

inline double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require_square_finite(const Matrix& m, const char* what)
{
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw InvalidArgument(std::string(what) + ": expected a non-empty square matrix");
    }
    if (!m.allFinite()) {
        throw InvalidArgument(std::string(what) + ": non-finite entry");
    }
}

} // namespace detail

/// Strong connectivity of the directed graph k -> p whenever m(k, p) > 0 (k != p).
/// Warshall closure, O(P^3).
inline bool is_irreducible(const Matrix& m)
{
    const auto n = static_cast<std::size_t>(m.rows());
    if (n <= 1) {
        return true;
    }
    std::vector<char> reach(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        reach[i * n + i] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0) {
                reach[i * n + j] = 1;
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!reach[i * n + k]) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                reach[i * n + j] |= reach[k * n + j];
            }
        }
    }
    return std::all_of(reach.begin(), reach.end(), [](char c) {
        return c != 0;
    });
}

/// Checks the connectivity hypotheses independently. Throws only when the input is not
/// a finite square matrix.
inline ConnectivityReport validate_connectivity(const Matrix& m)
{
    detail::require_square_finite(m, "validate_connectivity");
    ConnectivityReport rep;
    const auto n = m.rows();

    rep.metzler = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && m(i, j) < 0) {
                rep.metzler = false;
            }
        }
    }

    rep.irreducible = is_irreducible(m);

    const double tol = 1e-12 * detail::max_abs(m);
    rep.row_sum_zero = (m.rowwise().sum().cwiseAbs().array() <= tol).all();
    return rep;
}

/// The P x P matrix D coupling patches. Construction enforces all three checks.
class ConnectivityMatrix
{
public:
    explicit ConnectivityMatrix(Matrix entries)
        : entries_(std::move(entries))
    {
        const auto rep = validate_connectivity(entries_);
        if (!rep.ok()) {
            std::string msg = "invalid connectivity matrix:";
            for (const auto& s : rep.issues()) {
                msg += " " + s + ";";
            }
            throw InvalidArgument(msg);
        }
    }

    /// Single isolated patch, D = (0).
    static ConnectivityMatrix isolated()
    {
        return ConnectivityMatrix(Matrix::Zero(1, 1));
    }

    /// All-to-all coupling with unit rates.
    static ConnectivityMatrix complete(std::size_t patches)
    {
        const auto n = static_cast<Eigen::Index>(patches);
        Matrix m     = Matrix::Ones(n, n);
        m.diagonal().setConstant(-(static_cast<double>(n) - 1.0));
        return ConnectivityMatrix(m);
    }

    const Matrix& entries() const
    {
        return entries_;
    }
    std::size_t size() const
    {
        return static_cast<std::size_t>(entries_.rows());
    }
    double operator()(std::size_t p, std::size_t k) const
    {
        return entries_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
    }

private:
    Matrix entries_;
};

/// Volume-preserving coupling sum_{i<j} x_ij M_ij for tanks of fixed volumes V.
/// Only the strict upper triangle of `weights` is read. The result satisfies
/// 1^T M = 0 and M V = 0.
inline Matrix volume_matrix(const Vector& volumes, const Matrix& weights)
{
    const auto n = volumes.size();
    if (n == 0 || weights.rows() != n || weights.cols() != n) {
        throw InvalidArgument("volume_matrix: weights must be P x P with P = number of volumes");
    }
    if (!volumes.allFinite() || !weights.allFinite()) {
        throw InvalidArgument("volume_matrix: non-finite input");
    }
    if ((volumes.array() <= 0).any()) {
        throw InvalidArgument("volume_matrix: volumes must be > 0");
    }
    Matrix m   = Matrix::Zero(n, n);
    bool any   = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double x = weights(i, j);
            if (x < 0) {
                throw InvalidArgument("volume_matrix: weights must be >= 0");
            }
            if (x == 0) {
                continue;
            }
            any = true;
            m(i, i) -= x * volumes(j);
            m(i, j) += x * volumes(i);
            m(j, i) += x * volumes(j);
            m(j, j) -= x * volumes(i);
        }
    }
    if (!any) {
        throw InvalidArgument("volume_matrix: all weights are zero");
    }
    return m;
}

/// Conjugates an abundance coupling M (1^T M = 0, M V = 0) into the density coupling
/// diag(V)^-1 M diag(V), whose rows sum to zero.
inline Matrix renormalize_to_density(const Matrix& m, const Vector& volumes)
{
    detail::require_square_finite(m, "renormalize_to_density");
    if (volumes.size() != m.rows() || !volumes.allFinite() || (volumes.array() <= 0).any()) {
        throw InvalidArgument("renormalize_to_density: need P positive volumes");
    }
    const double scale = detail::max_abs(m);
    const double col_res = m.colwise().sum().cwiseAbs().maxCoeff();
    const double vol_res = (m * volumes).cwiseAbs().maxCoeff();
    if (col_res > 1e-10 * scale || vol_res > 1e-10 * scale * volumes.cwiseAbs().maxCoeff()) {
        throw InvalidArgument("renormalize_to_density: matrix does not conserve total volume and V");
    }
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out(i, j) = m(i, j) * volumes(j) / volumes(i);
        }
    }
    return out;
}

/// Index arithmetic for the flat full-model state. Each patch occupies one contiguous
/// block [S, I_1..I_N, D_11, D_12, .., D_NN] (D row-major, D_ij = "i then j").
struct FullLayout {
    std::size_t patches = 0;
    std::size_t strains = 0;

    std::size_t block() const
    {
        return 1 + strains + strains * strains;
    }
    std::size_t size() const
    {
        return patches * block();
    }
    std::size_t s(std::size_t p) const
    {
        return p * block();
    }
    std::size_t i(std::size_t p, std::size_t strain) const
    {
        return p * block() + 1 + strain;
    }
    std::size_t d(std::size_t p, std::size_t first, std::size_t second) const
    {
        return p * block() + 1 + strains + first * strains + second;
    }
};

/// (S_p, I_p^i, D_p^ij) for all patches, as proportions.
class FullState
{
public:
    FullState() = default;
    FullState(std::size_t patches, std::size_t strains)
        : layout_{patches, strains}
        , values_(Vector::Zero(static_cast<Eigen::Index>(layout_.size())))
    {
    }
    FullState(std::size_t patches, std::size_t strains, Vector values)
        : layout_{patches, strains}
        , values_(std::move(values))
    {
        if (static_cast<std::size_t>(values_.size()) != layout_.size()) {
            throw InvalidArgument("FullState: expected " + std::to_string(layout_.size()) + " values");
        }
    }

    const FullLayout& layout() const
    {
        return layout_;
    }
    std::size_t patches() const
    {
        return layout_.patches;
    }
    std::size_t strains() const
    {
        return layout_.strains;
    }
    const Vector& values() const
    {
        return values_;
    }
    Vector& values()
    {
        return values_;
    }

    double& S(std::size_t p)
    {
        return values_[idx(layout_.s(p))];
    }
    double S(std::size_t p) const
    {
        return values_[idx(layout_.s(p))];
    }
    double& I(std::size_t p, std::size_t i)
    {
        return values_[idx(layout_.i(p, i))];
    }
    double I(std::size_t p, std::size_t i) const
    {
        return values_[idx(layout_.i(p, i))];
    }
    double& D(std::size_t p, std::size_t i, std::size_t j)
    {
        return values_[idx(layout_.d(p, i, j))];
    }
    double D(std::size_t p, std::size_t i, std::size_t j) const
    {
        return values_[idx(layout_.d(p, i, j))];
    }

    /// Sigma_p = S_p + sum_i I_p^i + sum_ij D_p^ij.
    double patch_mass(std::size_t p) const
    {
        return values_.segment(idx(layout_.s(p)), idx(layout_.block())).sum();
    }

private:
    static Eigen::Index idx(std::size_t k)
    {
        return static_cast<Eigen::Index>(k);
    }

    FullLayout layout_;
    Vector values_;
};

/// Strain frequencies z_p^i, flat row-major P x N.
class FrequencyState
{
public:
    FrequencyState() = default;
    FrequencyState(std::size_t patches, std::size_t strains)
        : patches_(patches)
        , strains_(strains)
        , values_(Vector::Zero(static_cast<Eigen::Index>(patches * strains)))
    {
    }
    FrequencyState(std::size_t patches, std::size_t strains, Vector values)
        : patches_(patches)
        , strains_(strains)
        , values_(std::move(values))
    {
        if (static_cast<std::size_t>(values_.size()) != patches * strains) {
            throw InvalidArgument("FrequencyState: expected P*N values");
        }
    }

    /// Same frequency vector in every patch.
    static FrequencyState uniform_in_space(std::size_t patches, const Vector& z)
    {
        const auto n = static_cast<std::size_t>(z.size());
        FrequencyState out(patches, n);
        for (std::size_t p = 0; p < patches; ++p) {
            out.patch(p) = z;
        }
        return out;
    }

    std::size_t patches() const
    {
        return patches_;
    }
    std::size_t strains() const
    {
        return strains_;
    }
    const Vector& values() const
    {
        return values_;
    }
    Vector& values()
    {
        return values_;
    }
    double& operator()(std::size_t p, std::size_t i)
    {
        return values_[static_cast<Eigen::Index>(p * strains_ + i)];
    }
    double operator()(std::size_t p, std::size_t i) const
    {
        return values_[static_cast<Eigen::Index>(p * strains_ + i)];
    }
    Eigen::VectorBlock<Vector> patch(std::size_t p)
    {
        return values_.segment(static_cast<Eigen::Index>(p * strains_), static_cast<Eigen::Index>(strains_));
    }
    Eigen::VectorBlock<const Vector> patch(std::size_t p) const
    {
        return values_.segment(static_cast<Eigen::Index>(p * strains_), static_cast<Eigen::Index>(strains_));
    }

private:
    std::size_t patches_ = 0;
    std::size_t strains_ = 0;
    Vector values_;
};

// Invariant predicates. The raw-vector forms are used as integration monitors.

inline double mass_defect(const FullLayout& layout, const Vector& y)
{
    double worst = 0.0;
    for (std::size_t p = 0; p < layout.patches; ++p) {
        const double sigma = y.segment(static_cast<Eigen::Index>(layout.s(p)),
                                       static_cast<Eigen::Index>(layout.block())).sum();
        worst = std::max(worst, std::abs(sigma - 1.0));
    }
    return worst;
}

inline double mass_defect(const FullState& x)
{
    return mass_defect(x.layout(), x.values());
}

inline double min_entry(const Vector& y)
{
    return y.size() == 0 ? 0.0 : y.minCoeff();
}

inline double simplex_defect(std::size_t patches, std::size_t strains, const Vector& z)
{
    double worst = 0.0;
    for (std::size_t p = 0; p < patches; ++p) {
        const double s =
            z.segment(static_cast<Eigen::Index>(p * strains), static_cast<Eigen::Index>(strains)).sum();
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

inline double simplex_defect(const FrequencyState& z)
{
    return simplex_defect(z.patches(), z.strains(), z.values());
}

/// Membership in Omega: entries in [-tol, 1 + tol] and every patch mass within tol of 1.
inline bool in_omega(const FullState& x, double tol)
{
    const auto& v = x.values();
    return v.allFinite() && (v.array() >= -tol).all() && (v.array() <= 1.0 + tol).all() && mass_defect(x) <= tol;
}

/// Membership in the simplex product: z in [-tol, 1 + tol], rows summing to 1 within tol.
inline bool on_simplex_product(const FrequencyState& z, double tol)
{
    const auto& v = z.values();
    return v.allFinite() && (v.array() >= -tol).all() && (v.array() <= 1.0 + tol).all() && simplex_defect(z) <= tol;
}

} // namespace straingrid
