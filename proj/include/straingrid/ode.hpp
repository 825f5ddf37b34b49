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
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace straingrid
{

struct IntegratorConfig {
    double rel_tol        = 1e-8;
    double abs_tol        = 1e-10;
    double max_step       = std::numeric_limits<double>::infinity();
    double initial_step   = 0.0; ///< 0 selects the step automatically
    double t_end          = 1.0;
    double monitor_period = 0.0; ///< 0 records only t = 0 and t_end
    std::size_t max_steps = 50'000'000;

    void validate() const
    {
        if (!(rel_tol > 0) || !(abs_tol > 0)) {
            throw InvalidArgument("integrator tolerances must be > 0");
        }
        if (!(t_end > 0) || !std::isfinite(t_end)) {
            throw InvalidArgument("integrator t_end must be finite and > 0");
        }
        if (!(max_step > 0)) {
            throw InvalidArgument("integrator max_step must be > 0");
        }
        if (initial_step < 0 || initial_step > max_step) {
            throw InvalidArgument("integrator initial_step must lie in [0, max_step]");
        }
        if (monitor_period < 0) {
            throw InvalidArgument("integrator monitor_period must be >= 0");
        }
    }
};

/// Scalar functional of the state, tracked over every accepted step.
struct Monitor {
    enum class Extremum { max, min };

    std::string name;
    std::function<double(const Eigen::VectorXd&)> eval;
    Extremum track = Extremum::max;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<std::string> monitor_names;
    /// diagnostics[k][m]: monitor m evaluated on states[k]
    std::vector<std::vector<double>> diagnostics;
    /// extremum of each monitor over all accepted steps (and t = 0)
    std::vector<double> monitor_extrema;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    const Eigen::VectorXd& final_state() const
    {
        return states.back();
    }
};

namespace detail
{

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    // fifth minus fourth order weights
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
};

inline std::vector<double> sample_times(double t_end, double period)
{
    std::vector<double> out{0.0};
    if (period > 0) {
        for (std::size_t k = 1;; ++k) {
            const double t = static_cast<double>(k) * period;
            if (t >= t_end * (1.0 - 1e-12)) {
                break;
            }
            out.push_back(t);
        }
    }
    out.push_back(t_end);
    return out;
}

} // namespace detail

/// Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4), FSAL, PI step control).
///
/// `rhs(t, y, dydt)` must fill dydt. Steps are clipped so that every sample time
/// k * monitor_period (and t_end) is hit exactly; samples are therefore exact step
/// values, not interpolants. Throws StiffnessFailure on step underflow
/// (h < 1e-14 t_end) or when max_steps is exceeded, NumericalBlowup on a non-finite rhs.
template <class Rhs>
Trajectory integrate(Rhs&& rhs, const Eigen::VectorXd& y0, const IntegratorConfig& cfg,
                     std::span<const Monitor> monitors = {})
{
    using Vec = Eigen::VectorXd;
    using DP  = detail::DormandPrince;
    cfg.validate();
    if (!y0.allFinite()) {
        throw InvalidArgument("integrate: non-finite initial state");
    }

    const auto n         = y0.size();
    const auto samples   = detail::sample_times(cfg.t_end, cfg.monitor_period);
    const double h_min   = 1e-14 * cfg.t_end;
    const double rtol    = cfg.rel_tol;
    const double atol    = cfg.abs_tol;
    constexpr double beta_pi = 0.04;
    constexpr double expo1   = 0.2 - beta_pi * 0.75;
    constexpr double safe    = 0.9;
    constexpr double fac_min = 0.2; // h_new >= 0.2 h
    constexpr double fac_max = 10.0; // h_new <= 10 h

    Trajectory traj;
    for (const auto& m : monitors) {
        traj.monitor_names.push_back(m.name);
        traj.monitor_extrema.push_back(m.eval(y0));
    }
    auto track = [&](const Vec& y) {
        for (std::size_t m = 0; m < monitors.size(); ++m) {
            const double v = monitors[m].eval(y);
            auto& ext      = traj.monitor_extrema[m];
            ext = monitors[m].track == Monitor::Extremum::max ? std::max(ext, v) : std::min(ext, v);
        }
    };
    auto record = [&](double t, const Vec& y) {
        traj.times.push_back(t);
        traj.states.push_back(y);
        std::vector<double> diag;
        diag.reserve(monitors.size());
        for (const auto& m : monitors) {
            diag.push_back(m.eval(y));
        }
        traj.diagnostics.push_back(std::move(diag));
    };

    Vec y = y0;
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    double t = 0.0;

    auto eval = [&](double tt, const Vec& yy, Vec& out) {
        rhs(tt, yy, out);
        if (!out.allFinite()) {
            throw NumericalBlowup(tt, "non-finite right-hand side at t = " + std::to_string(tt));
        }
    };

    eval(t, y, k1);
    record(t, y);

    auto norm = [&](const Vec& e, const Vec& ya, const Vec& yb) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < e.size(); ++i) {
            const double sc = atol + rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            worst           = std::max(worst, std::abs(e[i]) / sc);
        }
        return worst;
    };

    double h = cfg.initial_step;
    if (h == 0.0) {
        // Hairer-Norsett-Wanner starting step heuristic.
        Vec scale = (atol + rtol * y.array().abs()).matrix();
        const double d0 = (y.array() / scale.array()).abs().maxCoeff();
        const double d1 = (k1.array() / scale.array()).abs().maxCoeff();
        double h0       = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0              = std::min(h0, cfg.max_step);
        ytmp            = y + h0 * k1;
        eval(t + h0, ytmp, k2);
        const double d2 = ((k2 - k1).array() / scale.array()).abs().maxCoeff() / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h               = std::min({100.0 * h0, h1, cfg.max_step});
    }
    h = std::min({h, cfg.max_step, cfg.t_end});

    double facold     = 1e-4;
    bool last_reject  = false;
    std::size_t next  = 1;
    std::size_t steps = 0;

    while (next < samples.size()) {
        if (++steps > cfg.max_steps) {
            throw StiffnessFailure(t, h, "step budget exhausted at t = " + std::to_string(t));
        }
        const double target = samples[next];
        bool clipped        = false;
        double h_step       = h;
        if (t + h_step >= target) {
            h_step  = target - t;
            clipped = true;
        }
        if (h_step < h_min) {
            if (!clipped) {
                throw StiffnessFailure(t, h_step, "step size underflow at t = " + std::to_string(t));
            }
        }

        ytmp = y + h_step * DP::a21 * k1;
        eval(t + DP::c2 * h_step, ytmp, k2);
        ytmp = y + h_step * (DP::a31 * k1 + DP::a32 * k2);
        eval(t + DP::c3 * h_step, ytmp, k3);
        ytmp = y + h_step * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3);
        eval(t + DP::c4 * h_step, ytmp, k4);
        ytmp = y + h_step * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4);
        eval(t + DP::c5 * h_step, ytmp, k5);
        ytmp = y + h_step * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5);
        eval(t + h_step, ytmp, k6);
        ynew = y + h_step * (DP::a71 * k1 + DP::a73 * k3 + DP::a74 * k4 + DP::a75 * k5 + DP::a76 * k6);
        eval(t + h_step, ynew, k7);
        err = h_step * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 + DP::e6 * k6 + DP::e7 * k7);

        const double e   = norm(err, y, ynew);
        const double f11 = std::pow(e, expo1);

        if (e <= 1.0) {
            double fac = f11 / std::pow(facold, beta_pi);
            fac        = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
            double h_new = h_step / fac;
            if (last_reject) {
                h_new = std::min(h_new, h_step);
            }
            facold      = std::max(e, 1e-4);
            last_reject = false;

            t = clipped ? target : t + h_step;
            y.swap(ynew);
            k1.swap(k7);
            ++traj.accepted_steps;
            track(y);
            if (clipped) {
                record(t, y);
                ++next;
                // a clipped step says nothing about the admissible step length
                h_new = std::max(h_new, h);
            }
            h = std::min(h_new, cfg.max_step);
        } else {
            h           = h_step / std::min(1.0 / fac_min, f11 / safe);
            last_reject = true;
            ++traj.rejected_steps;
            if (h < h_min) {
                throw StiffnessFailure(t, h, "step size underflow at t = " + std::to_string(t));
            }
        }
    }
    return traj;
}

} // namespace straingrid
