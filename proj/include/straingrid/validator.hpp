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
#include "straingrid/replicator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace straingrid
{

/// Slow-time comparison window [tau0, T].
struct TauWindow {
    double tau0 = 0.0;
    double T    = 1.0;
};

struct ValidationOptions {
    double rel_tol      = 1e-10;
    double abs_tol      = 1e-12;
    std::size_t samples = 200; ///< tau grid intervals on [0, T]
    unsigned jobs       = 1;   ///< concurrent eps runs in convergence_study
};

/// T = 10 / (max_p Theta_p * max |lambda|) so selection visibly moves frequencies,
/// tau0 = T / 10 to skip the initial layer. Falls back to 10 / max Theta when all
/// fitness matrices vanish.
inline TauWindow default_window(const ReplicatorSetup& setup)
{
    const double theta = setup.Theta.maxCoeff();
    double lam         = 0.0;
    for (const auto& L : setup.Lambda) {
        lam = std::max(lam, L.cwiseAbs().maxCoeff());
    }
    const double T = lam > 0 ? 10.0 / (theta * lam) : 10.0 / theta;
    return {0.1 * T, T};
}

/// One eps run: per-sample frequency error and aggregate deviation on the tau grid.
struct ReductionSample {
    double eps = 0.0;
    double error = 0.0;               ///< sup over tau in [tau0, T] of max_{p,i} |z~ - z|
    double aggregate_deviation = 0.0; ///< sup over tau in [tau0, T] of max_p |S_p - S_p*|
    std::vector<double> tau;
    std::vector<double> frequency_error; ///< max_{p,i} |z~ - z| at each tau
    std::vector<double> susceptible_error;

    /// Error restricted to tau >= from.
    double error_on(double from) const
    {
        double out = 0.0;
        for (std::size_t k = 0; k < tau.size(); ++k) {
            if (tau[k] >= from) {
                out = std::max(out, frequency_error[k]);
            }
        }
        return out;
    }
};

/// Runs the full model at `eps` from the neutral manifold point over z0 for t in [0, T/eps]
/// and the reduced system from z0 over tau in [0, T]; compares frequencies at t = tau/eps.
inline ReductionSample reduction_run(const FullModel& model, const FrequencyState& z0, double eps,
                                     const TauWindow& window, const ValidationOptions& opts = {})
{
    if (!(eps > 0)) {
        throw InvalidArgument("reduction_run: eps must be > 0");
    }
    if (!(window.T > 0) || window.tau0 < 0 || window.tau0 > window.T) {
        throw InvalidArgument("reduction_run: need 0 <= tau0 <= T and T > 0");
    }
    if (opts.samples == 0) {
        throw InvalidArgument("reduction_run: need at least one sample interval");
    }
    const FullModel m  = model.with_eps(eps);
    const auto setup   = reduce(m);
    const auto eqs     = m.equilibria();
    const auto omegas  = m.left_eigenvectors();
    const double dtau  = window.T / static_cast<double>(opts.samples);

    IntegratorConfig slow;
    slow.rel_tol        = opts.rel_tol;
    slow.abs_tol        = opts.abs_tol;
    slow.t_end          = window.T;
    slow.monitor_period = dtau;
    IntegratorConfig fast = slow;
    fast.t_end            = window.T / eps;
    fast.monitor_period   = dtau / eps;

    const auto reduced = simulate_replicator(setup, z0, slow);
    const auto full    = simulate_full(m, init_on_manifold(z0, eqs), fast);
    if (reduced.times.size() != full.times.size()) {
        throw Error("reduction_run: sample grids of the two systems differ");
    }

    ReductionSample out;
    out.eps = eps;
    for (std::size_t k = 0; k < full.times.size(); ++k) {
        const double tau = k + 1 == full.times.size() ? window.T : static_cast<double>(k) * dtau;
        const FullState x(m.patches(), m.strains(), full.states[k]);
        const FrequencyState zt = extract_frequencies(x, omegas);
        const double fe = (zt.values() - reduced.states[k]).cwiseAbs().maxCoeff();
        double se       = 0.0;
        for (std::size_t p = 0; p < m.patches(); ++p) {
            se = std::max(se, std::abs(x.S(p) - eqs[p].S));
        }
        out.tau.push_back(tau);
        out.frequency_error.push_back(fe);
        out.susceptible_error.push_back(se);
        if (tau >= window.tau0) {
            out.error               = std::max(out.error, fe);
            out.aggregate_deviation = std::max(out.aggregate_deviation, se);
        }
    }
    return out;
}

inline double reduction_error(const FullModel& model, const FrequencyState& z0, double eps, const TauWindow& window,
                              const ValidationOptions& opts = {})
{
    return reduction_run(model, z0, eps, window, opts).error;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("loglog_slope: need at least two paired values");
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0) || !(y[k] > 0) || !std::isfinite(x[k]) || !std::isfinite(y[k])) {
            throw InvalidArgument("loglog_slope: values must be finite and > 0");
        }
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (!(den > 0)) {
        throw InvalidArgument("loglog_slope: x values must not all coincide");
    }
    return (n * sxy - sx * sy) / den;
}

struct ReductionReport {
    std::vector<double> eps_values; ///< strictly decreasing
    std::vector<double> errors;
    std::vector<double> aggregate_deviations;
    std::vector<double> error_ratios;     ///< errors[k+1] / errors[k]
    std::vector<double> aggregate_ratios; ///< same for aggregate deviations
    std::optional<double> fitted_order;   ///< empty when errors are at integration noise level
    std::optional<double> aggregate_order;
    TauWindow tau_window;
};

/// Reduction error and aggregate deviation for each eps, with the empirical order.
inline ReductionReport convergence_study(const FullModel& model, const FrequencyState& z0, std::vector<double> eps_list,
                                         const TauWindow& window, const ValidationOptions& opts = {})
{
    std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
    if (std::adjacent_find(eps_list.begin(), eps_list.end()) != eps_list.end()) {
        throw InvalidArgument("convergence_study: eps values must be distinct");
    }
    if (eps_list.size() < 3) {
        throw InvalidArgument("convergence_study: at least three eps values are required");
    }
    if (!(eps_list.back() > 0)) {
        throw InvalidArgument("convergence_study: eps values must be > 0");
    }
    // Every eps must give admissible rates before any work starts.
    for (double e : eps_list) {
        (void)model.with_eps(e);
    }

    std::vector<ReductionSample> runs(eps_list.size());
    std::vector<std::exception_ptr> failures(eps_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < eps_list.size(); k = next++) {
            try {
                runs[k] = reduction_run(model, z0, eps_list[k], window, opts);
            } catch (...) {
                failures[k] = std::current_exception();
            }
        }
    };
    const unsigned jobs = std::clamp<unsigned>(opts.jobs, 1u, static_cast<unsigned>(eps_list.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned j = 1; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        worker();
    }
    for (const auto& f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }

    ReductionReport rep;
    rep.eps_values = eps_list;
    rep.tau_window = window;
    for (const auto& r : runs) {
        rep.errors.push_back(r.error);
        rep.aggregate_deviations.push_back(r.aggregate_deviation);
    }
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        rep.error_ratios.push_back(rep.errors[k + 1] / rep.errors[k]);
        rep.aggregate_ratios.push_back(rep.aggregate_deviations[k + 1] / rep.aggregate_deviations[k]);
    }
    const double noise = 1e3 * (opts.rel_tol + opts.abs_tol);
    auto resolvable    = [noise](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [noise](double e) { return e > noise; });
    };
    if (resolvable(rep.errors)) {
        rep.fitted_order = loglog_slope(rep.eps_values, rep.errors);
    }
    if (resolvable(rep.aggregate_deviations)) {
        rep.aggregate_order = loglog_slope(rep.eps_values, rep.aggregate_deviations);
    }
    return rep;
}

/// max_{p,i,j} |D_p^ij - D_p* z_p^i z_p^j| + max_{p,i} |I_p^i - I_p* z_p^i| + max_p |S_p - S_p*|
/// with z read from the state itself.
inline double product_structure_residual(const FullState& x, std::span<const NeutralEquilibrium> eqs,
                                         std::span<const LeftEigenvector> omegas)
{
    const auto z = extract_frequencies(x, omegas);
    double rd = 0.0, ri = 0.0, rs = 0.0;
    for (std::size_t p = 0; p < x.patches(); ++p) {
        rs = std::max(rs, std::abs(x.S(p) - eqs[p].S));
        for (std::size_t i = 0; i < x.strains(); ++i) {
            ri = std::max(ri, std::abs(x.I(p, i) - eqs[p].I * z(p, i)));
            for (std::size_t j = 0; j < x.strains(); ++j) {
                rd = std::max(rd, std::abs(x.D(p, i, j) - eqs[p].D * z(p, i) * z(p, j)));
            }
        }
    }
    return rd + ri + rs;
}

/// Integrates the strain-neutral, migration-free model to cfg.t_end and returns the
/// distance of the final state from the product structure of the neutral manifold.
inline double neutral_limit_check(const FullModel& model, const FullState& y0, const IntegratorConfig& cfg)
{
    if (model.scale().eps != 0.0 || model.scale().delta() != 0.0) {
        throw InvalidArgument("neutral_limit_check: requires eps = 0 and delta = 0");
    }
    const auto traj = simulate_full(model, y0, cfg);
    const FullState x(model.patches(), model.strains(), traj.final_state());
    const auto eqs    = model.equilibria();
    const auto omegas = model.left_eigenvectors();
    return product_structure_residual(x, eqs, omegas);
}

} // namespace straingrid
