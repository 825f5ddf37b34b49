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
#include "straingrid/validator.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace straingrid
{

/// Malformed document: JSON syntax or wrong value types. Distinct from domain validation.
class ConfigParseError : public Error
{
public:
    using Error::Error;
};

struct SimulationSettings {
    double t_end          = 200.0; ///< full model horizon (fast time)
    double monitor_period = 1.0;
    double tau_end        = 10.0;  ///< reduced model horizon (slow time)
    double tau_period     = 0.1;
    double rel_tol        = 1e-10;
    double abs_tol        = 1e-12;
};

struct CompareSettings {
    std::optional<double> tau0;
    std::optional<double> T;
    std::size_t samples = 200;
};

/// Parsed configuration document. `issues` lists domain problems found while reading
/// (dimension mismatches, invalid connectivity, ...); the model can only be built
/// when validate_config() returns nothing.
struct Config {
    std::vector<PatchParams> patches;
    std::size_t strains = 1;
    std::vector<PatchPerturbation> perturbations;
    Matrix connectivity;
    ScaleParams scale;
    std::uint64_t seed = 0;
    std::optional<FrequencyState> z0;
    bool random_z0 = false;
    std::optional<FullState> full_state;
    SimulationSettings simulation;
    CompareSettings compare;
    std::vector<std::string> issues;
};

namespace detail
{

using json = nlohmann::json;

inline double num(const json& j, const std::string& where)
{
    if (!j.is_number()) {
        throw ConfigParseError(where + ": expected a number");
    }
    return j.get<double>();
}

inline const json& field(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key)) {
        throw ConfigParseError(where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

inline std::vector<double> vec(const json& j, const std::string& where)
{
    if (!j.is_array()) {
        throw ConfigParseError(where + ": expected an array");
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        out.push_back(num(j[k], where + "[" + std::to_string(k) + "]"));
    }
    return out;
}

inline std::vector<std::vector<double>> mat(const json& j, const std::string& where)
{
    if (!j.is_array()) {
        throw ConfigParseError(where + ": expected an array of arrays");
    }
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        out.push_back(vec(j[k], where + "[" + std::to_string(k) + "]"));
    }
    return out;
}

inline std::optional<Matrix> to_matrix(const std::vector<std::vector<double>>& rows, std::size_t r, std::size_t c)
{
    if (rows.size() != r) {
        return std::nullopt;
    }
    Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c) {
            return std::nullopt;
        }
        for (std::size_t j = 0; j < c; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

inline double opt_num(const json& obj, const char* key, double fallback, const std::string& where)
{
    return obj.contains(key) ? num(obj.at(key), where + "." + key) : fallback;
}

} // namespace detail

/// Dirichlet(1) frequencies per patch from std::mt19937_64 (whose output sequence is fixed
/// by the standard). Uniforms use the top 53 bits. Generator id: "mt19937_64/dirichlet1/v1".
inline FrequencyState random_frequencies(std::size_t patches, std::size_t strains, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    FrequencyState z(patches, strains);
    for (std::size_t p = 0; p < patches; ++p) {
        double total = 0.0;
        for (std::size_t i = 0; i < strains; ++i) {
            const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            z(p, i)        = -std::log1p(-u);
            total += z(p, i);
        }
        z.patch(p) /= total;
    }
    return z;
}

inline constexpr const char* random_generator_id = "mt19937_64/dirichlet1/v1";

/// Reads the configuration document. Throws ConfigParseError on structural problems.
inline Config parse_config(const nlohmann::json& doc)
{
    using detail::field;
    using detail::num;
    Config cfg;
    if (!doc.is_object()) {
        throw ConfigParseError("config: top level must be an object");
    }

    const auto& patches = field(doc, "patches", "config");
    if (!patches.is_array() || patches.empty()) {
        throw ConfigParseError("patches: expected a non-empty array");
    }
    for (std::size_t p = 0; p < patches.size(); ++p) {
        const std::string w = "patches[" + std::to_string(p) + "]";
        const auto& e       = patches[p];
        cfg.patches.push_back({num(field(e, "r", w), w + ".r"), num(field(e, "beta", w), w + ".beta"),
                               num(field(e, "gamma", w), w + ".gamma"), num(field(e, "k", w), w + ".k")});
    }
    const std::size_t P = cfg.patches.size();

    const auto& strains = field(doc, "strains", "config");
    const auto& nj      = field(strains, "N", "strains");
    if (!nj.is_number_integer() || nj.get<long long>() < 1) {
        throw ConfigParseError("strains.N: expected a positive integer");
    }
    cfg.strains   = static_cast<std::size_t>(nj.get<long long>());
    const auto N  = cfg.strains;
    cfg.perturbations.assign(P, PatchPerturbation::zero(N));
    auto read_vectors = [&](const char* key, Vector PatchPerturbation::*member) {
        if (!strains.contains(key)) {
            return;
        }
        const auto rows = detail::mat(strains.at(key), std::string("strains.") + key);
        auto m          = detail::to_matrix(rows, P, N);
        if (!m) {
            cfg.issues.push_back(std::string("strains.") + key + ": expected a P x N array");
            return;
        }
        for (std::size_t p = 0; p < P; ++p) {
            cfg.perturbations[p].*member = m->row(static_cast<Eigen::Index>(p)).transpose();
        }
    };
    auto read_matrices = [&](const char* key, Matrix PatchPerturbation::*member) {
        if (!strains.contains(key)) {
            return;
        }
        const auto& arr = strains.at(key);
        if (!arr.is_array()) {
            throw ConfigParseError(std::string("strains.") + key + ": expected an array");
        }
        if (arr.size() != P) {
            cfg.issues.push_back(std::string("strains.") + key + ": expected one N x N array per patch");
            return;
        }
        for (std::size_t p = 0; p < P; ++p) {
            const auto rows = detail::mat(arr[p], std::string("strains.") + key + "[" + std::to_string(p) + "]");
            auto m          = detail::to_matrix(rows, N, N);
            if (!m) {
                cfg.issues.push_back(std::string("strains.") + key + "[" + std::to_string(p) +
                                     "]: expected an N x N array");
                continue;
            }
            cfg.perturbations[p].*member = *m;
        }
    };
    read_vectors("b", &PatchPerturbation::b);
    read_vectors("nu", &PatchPerturbation::nu);
    read_matrices("c_pair", &PatchPerturbation::c_pair);
    read_matrices("w", &PatchPerturbation::w);
    read_matrices("alpha", &PatchPerturbation::alpha);
    for (std::size_t p = 0; p < P; ++p) {
        if (!cfg.perturbations[p].all_finite()) {
            cfg.issues.push_back("strains: non-finite perturbation in patch " + std::to_string(p));
        }
    }

    const auto& conn      = field(doc, "connectivity", "config");
    const bool has_matrix = conn.is_object() && conn.contains("matrix");
    const bool has_volume = conn.is_object() && (conn.contains("volumes") || conn.contains("weights"));
    if (has_matrix && has_volume) {
        cfg.issues.emplace_back("connectivity: give either 'matrix' or 'volumes'+'weights', not both");
    } else if (has_matrix) {
        auto m = detail::to_matrix(detail::mat(conn.at("matrix"), "connectivity.matrix"), P, P);
        if (!m) {
            cfg.issues.emplace_back("connectivity.matrix: expected a P x P array");
        } else {
            cfg.connectivity = *m;
        }
    } else if (has_volume) {
        const auto V = detail::vec(field(conn, "volumes", "connectivity"), "connectivity.volumes");
        auto x = detail::to_matrix(detail::mat(field(conn, "weights", "connectivity"), "connectivity.weights"), P, P);
        if (V.size() != P || !x) {
            cfg.issues.emplace_back("connectivity: volumes must have P entries and weights must be P x P");
        } else {
            try {
                const Vector vol = Eigen::Map<const Vector>(V.data(), static_cast<Eigen::Index>(P));
                cfg.connectivity = renormalize_to_density(volume_matrix(vol, *x), vol);
            } catch (const InvalidArgument& e) {
                cfg.issues.emplace_back(std::string("connectivity: ") + e.what());
            }
        }
    } else {
        throw ConfigParseError("connectivity: expected 'matrix' or 'volumes'+'weights'");
    }
    if (cfg.connectivity.size() > 0) {
        if (!cfg.connectivity.allFinite()) {
            cfg.issues.emplace_back("connectivity: non-finite entry");
        } else {
            for (const auto& s : validate_connectivity(cfg.connectivity).issues()) {
                cfg.issues.push_back("connectivity: " + s);
            }
        }
    }

    const auto& scale = field(doc, "scale", "config");
    cfg.scale = {num(field(scale, "eps", "scale"), "scale.eps"), num(field(scale, "d", "scale"), "scale.d")};

    if (doc.contains("seed")) {
        const auto& s = doc.at("seed");
        if (!s.is_number_unsigned()) {
            throw ConfigParseError("seed: expected a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }

    if (doc.contains("initial")) {
        const auto& init = doc.at("initial");
        if (!init.is_object()) {
            throw ConfigParseError("initial: expected an object");
        }
        if (init.contains("z")) {
            auto m = detail::to_matrix(detail::mat(init.at("z"), "initial.z"), P, N);
            if (!m) {
                cfg.issues.emplace_back("initial.z: expected a P x N array");
            } else {
                FrequencyState z(P, N);
                for (std::size_t p = 0; p < P; ++p) {
                    z.patch(p) = m->row(static_cast<Eigen::Index>(p)).transpose();
                }
                if (!on_simplex_product(z, 1e-12)) {
                    cfg.issues.emplace_back("initial.z: every row must be a probability vector");
                }
                cfg.z0 = z;
            }
        }
        if (init.contains("random")) {
            if (!init.at("random").is_boolean()) {
                throw ConfigParseError("initial.random: expected a boolean");
            }
            cfg.random_z0 = init.at("random").get<bool>();
        }
        if (init.contains("full_state")) {
            const auto& fs = init.at("full_state");
            const auto S   = detail::vec(field(fs, "S", "initial.full_state"), "initial.full_state.S");
            auto I = detail::to_matrix(detail::mat(field(fs, "I", "initial.full_state"), "initial.full_state.I"), P, N);
            const auto& Dj = field(fs, "D", "initial.full_state");
            if (S.size() != P || !I || !Dj.is_array() || Dj.size() != P) {
                cfg.issues.emplace_back("initial.full_state: expected S[P], I[P][N], D[P][N][N]");
            } else {
                FullState x(P, N);
                bool ok = true;
                for (std::size_t p = 0; p < P && ok; ++p) {
                    x.S(p) = S[p];
                    auto Dp = detail::to_matrix(detail::mat(Dj[p], "initial.full_state.D"), N, N);
                    if (!Dp) {
                        ok = false;
                        break;
                    }
                    for (std::size_t i = 0; i < N; ++i) {
                        x.I(p, i) = (*I)(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i));
                        for (std::size_t j = 0; j < N; ++j) {
                            x.D(p, i, j) = (*Dp)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                        }
                    }
                }
                if (!ok) {
                    cfg.issues.emplace_back("initial.full_state.D: expected N x N arrays");
                } else if (!in_omega(x, 1e-12)) {
                    cfg.issues.emplace_back("initial.full_state: entries must lie in [0,1] with unit patch mass");
                } else {
                    cfg.full_state = x;
                }
            }
        }
    }

    if (doc.contains("simulation")) {
        const auto& s = doc.at("simulation");
        auto& out     = cfg.simulation;
        out.t_end          = detail::opt_num(s, "t_end", out.t_end, "simulation");
        out.monitor_period = detail::opt_num(s, "monitor_period", out.monitor_period, "simulation");
        out.tau_end        = detail::opt_num(s, "tau_end", out.tau_end, "simulation");
        out.tau_period     = detail::opt_num(s, "tau_period", out.tau_period, "simulation");
        out.rel_tol        = detail::opt_num(s, "rel_tol", out.rel_tol, "simulation");
        out.abs_tol        = detail::opt_num(s, "abs_tol", out.abs_tol, "simulation");
    }
    if (doc.contains("compare")) {
        const auto& c = doc.at("compare");
        if (c.contains("tau0")) {
            cfg.compare.tau0 = num(c.at("tau0"), "compare.tau0");
        }
        if (c.contains("T")) {
            cfg.compare.T = num(c.at("T"), "compare.T");
        }
        if (c.contains("samples")) {
            if (!c.at("samples").is_number_unsigned() || c.at("samples").get<std::size_t>() == 0) {
                throw ConfigParseError("compare.samples: expected a positive integer");
            }
            cfg.compare.samples = c.at("samples").get<std::size_t>();
        }
    }
    return cfg;
}

inline Config parse_config_text(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigParseError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

/// All domain problems of a parsed config, one human-readable line each.
inline std::vector<std::string> validate_config(const Config& cfg)
{
    std::vector<std::string> out = cfg.issues;
    for (std::size_t p = 0; p < cfg.patches.size(); ++p) {
        for (const auto& s : patch_issues(cfg.patches[p])) {
            out.push_back("patch " + std::to_string(p) + ": " + s);
        }
    }
    if (!std::isfinite(cfg.scale.eps) || cfg.scale.eps < 0) {
        out.emplace_back("scale.eps must be finite and >= 0");
    }
    if (!std::isfinite(cfg.scale.d) || cfg.scale.d < 0) {
        out.emplace_back("scale.d must be finite and >= 0");
    }
    if (out.empty()) {
        for (std::size_t p = 0; p < cfg.patches.size(); ++p) {
            const auto rates = assemble_rates(cfg.patches[p], cfg.perturbations[p], cfg.scale.eps);
            for (const auto& s : rate_issues(rates)) {
                out.push_back("patch " + std::to_string(p) + ": " + s);
            }
        }
    }
    const auto& s = cfg.simulation;
    if (!(s.t_end > 0) || !(s.tau_end > 0) || !(s.rel_tol > 0) || !(s.abs_tol > 0) || s.monitor_period < 0 ||
        s.tau_period < 0) {
        out.emplace_back("simulation: horizons and tolerances must be > 0, periods >= 0");
    }
    return out;
}

/// Builds the model; throws InvalidArgument listing every validation issue.
inline FullModel make_model(const Config& cfg)
{
    const auto issues = validate_config(cfg);
    if (!issues.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& s : issues) {
            msg += "\n  " + s;
        }
        throw InvalidArgument(msg);
    }
    return FullModel(cfg.patches, StrainPerturbations(cfg.strains, cfg.perturbations), cfg.scale,
                     ConnectivityMatrix(cfg.connectivity));
}

/// Initial frequencies: explicit `initial.z`, else seeded random, else uniform.
inline FrequencyState initial_frequencies(const Config& cfg)
{
    const std::size_t P = cfg.patches.size(), N = cfg.strains;
    if (cfg.z0) {
        return *cfg.z0;
    }
    if (cfg.random_z0) {
        return random_frequencies(P, N, cfg.seed);
    }
    return FrequencyState::uniform_in_space(P, Vector::Constant(static_cast<Eigen::Index>(N), 1.0 / N));
}

/// Rounds to 15 significant digits (used for JSON dumps of closed-form objects).
inline double round_sig15(double x)
{
    if (!std::isfinite(x) || x == 0.0) {
        return x;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return std::strtod(buf, nullptr);
}

inline nlohmann::json to_json(const Matrix& m)
{
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(round_sig15(m(i, j)));
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline nlohmann::json to_json(const ReductionReport& rep)
{
    auto arr = [](const std::vector<double>& v) {
        auto out = nlohmann::json::array();
        for (double x : v) {
            out.push_back(round_sig15(x));
        }
        return out;
    };
    nlohmann::json j;
    j["eps_values"]           = arr(rep.eps_values);
    j["errors"]               = arr(rep.errors);
    j["aggregate_deviations"] = arr(rep.aggregate_deviations);
    j["error_ratios"]         = arr(rep.error_ratios);
    j["aggregate_ratios"]     = arr(rep.aggregate_ratios);
    j["fitted_order_applicable"] = rep.fitted_order.has_value();
    j["fitted_order"]         = rep.fitted_order ? nlohmann::json(round_sig15(*rep.fitted_order)) : nlohmann::json();
    j["aggregate_order"] = rep.aggregate_order ? nlohmann::json(round_sig15(*rep.aggregate_order)) : nlohmann::json();
    j["tau_window"]      = {{"tau0", round_sig15(rep.tau_window.tau0)}, {"T", round_sig15(rep.tau_window.T)}};
    return j;
}

} // namespace straingrid
