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
#include "commands.hpp"

#include "straingrid/config.hpp"
#include "straingrid/io.hpp"
#include "straingrid/straingrid.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#ifndef STRAINGRID_VERSION
#define STRAINGRID_VERSION "0.0.0"
#endif

namespace straingrid::cli
{

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

json load_document(const fs::path& path)
{
    if (!fs::is_regular_file(path)) {
        throw UsageError("config file not found: " + path.string());
    }
    try {
        return json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("invalid JSON in ") + path.string() + ": " + e.what());
    }
}

std::string sha256_hex(const std::string& data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    std::ostringstream out;
    for (unsigned int k = 0; k < len; ++k) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
    }
    return out.str();
}

/// json objects keep keys sorted, so the dump is independent of the key order in the file.
std::string config_hash(const json& doc)
{
    return sha256_hex(doc.dump());
}

void write_manifest(const fs::path& dir, const json& doc, const Config& cfg, const std::string& command,
                    double wall_seconds, const std::vector<std::string>& outputs)
{
    json m;
    m["tool"]             = "straingrid";
    m["version"]          = STRAINGRID_VERSION;
    m["command"]          = command;
    m["config_sha256"]    = config_hash(doc);
    m["seed"]             = cfg.seed;
    m["random_generator"] = random_generator_id;
    m["wall_time_s"]      = wall_seconds;
    m["outputs"]          = outputs;
    io::atomic_write(dir / "manifest.json", m.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Parses and validates; returns the config or writes the report and signals failure.
std::optional<Config> load_valid(const json& doc, std::ostream& err)
{
    Config cfg;
    try {
        cfg = parse_config(doc);
    } catch (const ConfigParseError& e) {
        throw UsageError(e.what());
    }
    const auto issues = validate_config(cfg);
    if (!issues.empty()) {
        err << "invalid configuration (" << issues.size() << " issue" << (issues.size() == 1 ? "" : "s") << "):\n";
        for (const auto& s : issues) {
            err << "  - " << s << "\n";
        }
        return std::nullopt;
    }
    return cfg;
}

template <class F>
int guarded(const Context& ctx, F&& body)
{
    try {
        return body();
    } catch (const UsageError& e) {
        *ctx.err << "usage error: " << e.what() << "\n";
        return usage_failure;
    } catch (const ConfigParseError& e) {
        *ctx.err << "config error: " << e.what() << "\n";
        return usage_failure;
    } catch (const std::exception& e) {
        *ctx.err << "error: " << e.what() << "\n";
        return domain_failure;
    }
}

json num_array(const std::vector<double>& v)
{
    auto out = json::array();
    for (double x : v) {
        out.push_back(round_sig15(x));
    }
    return out;
}

json vector_json(const Vector& v)
{
    return num_array(std::vector<double>(v.data(), v.data() + v.size()));
}

IntegratorConfig full_integrator(const Config& cfg)
{
    IntegratorConfig ic;
    ic.rel_tol        = cfg.simulation.rel_tol;
    ic.abs_tol        = cfg.simulation.abs_tol;
    ic.t_end          = cfg.simulation.t_end;
    ic.monitor_period = cfg.simulation.monitor_period;
    return ic;
}

IntegratorConfig reduced_integrator(const Config& cfg)
{
    IntegratorConfig ic;
    ic.rel_tol        = cfg.simulation.rel_tol;
    ic.abs_tol        = cfg.simulation.abs_tol;
    ic.t_end          = cfg.simulation.tau_end;
    ic.monitor_period = cfg.simulation.tau_period;
    return ic;
}

struct RunSummary {
    std::string file;
    std::vector<std::string> monitor_names;
    std::vector<double> monitor_extrema;
    FrequencyState final_z;
};

RunSummary run_simulation(const Config& cfg, const std::string& mode, const fs::path& dir)
{
    const FullModel model = make_model(cfg);
    fs::create_directories(dir);
    RunSummary out;
    if (mode == "full") {
        const FullState y0 = cfg.full_state ? *cfg.full_state : init_on_manifold(initial_frequencies(cfg), model.equilibria());
        const auto traj    = simulate_full(model, y0, full_integrator(cfg));
        out.file           = "trajectory_full.csv";
        io::atomic_write(dir / out.file, io::full_trajectory_csv(traj, model.layout()));
        out.monitor_names   = traj.monitor_names;
        out.monitor_extrema = traj.monitor_extrema;
        const auto omegas   = model.left_eigenvectors();
        out.final_z = extract_frequencies(FullState(model.patches(), model.strains(), traj.final_state()), omegas);
    } else {
        const auto setup = reduce(model);
        const auto traj  = simulate_replicator(setup, initial_frequencies(cfg), reduced_integrator(cfg));
        out.file         = "trajectory_reduced.csv";
        io::atomic_write(dir / out.file, io::replicator_trajectory_csv(traj, setup.patches, setup.strains));
        out.monitor_names   = traj.monitor_names;
        out.monitor_extrema = traj.monitor_extrema;
        out.final_z         = FrequencyState(setup.patches, setup.strains, traj.final_state());
    }
    return out;
}

std::string join_command(std::initializer_list<std::string> parts)
{
    std::string out;
    for (const auto& p : parts) {
        if (p.empty()) {
            continue;
        }
        out += out.empty() ? p : " " + p;
    }
    return out;
}

std::string format_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        out += (k ? "," : "") + io::format_double(v[k]);
    }
    return out;
}

json::json_pointer axis_pointer(const std::string& axis)
{
    if (axis.empty()) {
        throw UsageError("empty sweep axis");
    }
    std::string ptr;
    std::size_t pos = 0;
    while (true) {
        const auto dot = axis.find('.', pos);
        const auto key = axis.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (key.empty()) {
            throw UsageError("malformed sweep axis: " + axis);
        }
        ptr += "/" + key;
        if (dot == std::string::npos) {
            break;
        }
        pos = dot + 1;
    }
    return json::json_pointer(ptr);
}

std::string csv_field(std::string s)
{
    std::replace(s.begin(), s.end(), '\n', ' ');
    if (s.find_first_of(",\"") != std::string::npos) {
        std::string q = "\"";
        for (char c : s) {
            q += c == '"' ? std::string("\"\"") : std::string(1, c);
        }
        return q + "\"";
    }
    return s;
}

} // namespace

int cmd_validate(const Context& ctx, const fs::path& config)
{
    return guarded(ctx, [&] {
        const json doc = load_document(config);
        const auto cfg = load_valid(doc, *ctx.out);
        if (!cfg) {
            return static_cast<int>(domain_failure);
        }
        *ctx.out << "configuration is valid: " << cfg->patches.size() << " patch"
                 << (cfg->patches.size() == 1 ? "" : "es") << ", " << cfg->strains << " strain"
                 << (cfg->strains == 1 ? "" : "s") << "\n";
        return static_cast<int>(ok);
    });
}

int cmd_equilibria(const Context& ctx, const fs::path& config)
{
    return guarded(ctx, [&] {
        const json doc = load_document(config);
        const auto cfg = load_valid(doc, *ctx.err);
        if (!cfg) {
            return static_cast<int>(domain_failure);
        }
        const FullModel model = make_model(*cfg);
        json out;
        out["patches"] = json::array();
        for (std::size_t p = 0; p < model.patches(); ++p) {
            const auto& params = model.patch_params()[p];
            const auto eq      = neutral_equilibrium(params, p);
            const auto om      = left_eigenvector(eq);
            const Eigen::Matrix2d A = drift_matrix(eq, params);
            json e;
            e["patch"]       = p;
            e["R0"]          = round_sig15(params.basic_reproduction_number());
            e["S"]           = round_sig15(eq.S);
            e["I"]           = round_sig15(eq.I);
            e["D"]           = round_sig15(eq.D);
            e["T"]           = round_sig15(eq.T);
            e["drift_matrix"] = to_json(Matrix(A));
            e["left_eigenvector"] = {round_sig15(om.phi), round_sig15(om.psi)};
            e["kernel_denominator"] = round_sig15(kernel_denominator(eq));
            out["patches"].push_back(std::move(e));
        }
        *ctx.out << out.dump(2) << "\n";
        return static_cast<int>(ok);
    });
}

int cmd_fitness(const Context& ctx, const fs::path& config)
{
    return guarded(ctx, [&] {
        const json doc = load_document(config);
        const auto cfg = load_valid(doc, *ctx.err);
        if (!cfg) {
            return static_cast<int>(domain_failure);
        }
        const FullModel model = make_model(*cfg);
        const auto setup      = reduce(model);
        const auto eqs        = model.equilibria();
        json out;
        out["patches"] = json::array();
        for (std::size_t p = 0; p < model.patches(); ++p) {
            const auto fs = fitness_structure(eqs[p], model.patch_params()[p], model.perturbations()[p]);
            json e;
            e["patch"]   = p;
            e["Theta"]   = round_sig15(fs.Theta);
            e["theta"]   = num_array(std::vector<double>(fs.theta.begin(), fs.theta.end()));
            e["Lambda"]  = to_json(fs.Lambda);
            out["patches"].push_back(std::move(e));
        }
        out["migration_matrix"] = to_json(setup.migration.entries);
        out["advection"]        = to_json(setup.migration.advection);
        out["Theta"]            = vector_json(setup.Theta);
        *ctx.out << out.dump(2) << "\n";
        return static_cast<int>(ok);
    });
}

int cmd_simulate(const Context& ctx, const fs::path& config, const std::string& mode)
{
    return guarded(ctx, [&] {
        if (mode != "full" && mode != "reduced") {
            throw UsageError("mode must be full or reduced");
        }
        const auto start = std::chrono::steady_clock::now();
        const json doc   = load_document(config);
        const auto cfg   = load_valid(doc, *ctx.err);
        if (!cfg) {
            return static_cast<int>(domain_failure);
        }
        const auto run = run_simulation(*cfg, mode, ctx.out_root);
        write_manifest(ctx.out_root, doc, *cfg, join_command({"simulate", "--mode", mode}), seconds_since(start),
                       {run.file});
        *ctx.out << "wrote " << (ctx.out_root / run.file).string() << "\n";
        for (std::size_t k = 0; k < run.monitor_names.size(); ++k) {
            *ctx.out << "  " << run.monitor_names[k] << " = " << io::format_double(run.monitor_extrema[k]) << "\n";
        }
        return static_cast<int>(ok);
    });
}

int cmd_compare(const Context& ctx, const fs::path& config, const std::vector<double>& eps, unsigned jobs)
{
    return guarded(ctx, [&] {
        if (eps.size() < 3) {
            throw UsageError("compare needs at least three eps values");
        }
        const auto start = std::chrono::steady_clock::now();
        const json doc   = load_document(config);
        const auto cfg   = load_valid(doc, *ctx.err);
        if (!cfg) {
            return static_cast<int>(domain_failure);
        }
        const FullModel model = make_model(*cfg);
        const auto setup      = reduce(model);
        TauWindow window      = default_window(setup);
        if (cfg->compare.T) {
            window.T = *cfg->compare.T;
            window.tau0 = 0.1 * window.T;
        }
        if (cfg->compare.tau0) {
            window.tau0 = *cfg->compare.tau0;
        }
        ValidationOptions opts;
        opts.rel_tol = cfg->simulation.rel_tol;
        opts.abs_tol = cfg->simulation.abs_tol;
        opts.samples = cfg->compare.samples;
        opts.jobs    = std::max(1u, jobs);
        const auto rep = convergence_study(model, initial_frequencies(*cfg), eps, window, opts);

        fs::create_directories(ctx.out_root);
        io::atomic_write(ctx.out_root / "report.json", to_json(rep).dump(2) + "\n");
        std::string csv = "eps,error,aggregate_deviation\n";
        for (std::size_t k = 0; k < rep.eps_values.size(); ++k) {
            csv += io::format_double(rep.eps_values[k]) + "," + io::format_double(rep.errors[k]) + "," +
                   io::format_double(rep.aggregate_deviations[k]) + "\n";
        }
        io::atomic_write(ctx.out_root / "convergence.csv", csv);
        io::atomic_write(ctx.out_root / "convergence.svg",
                         io::svg_loglog("reduction error against eps", "eps", "sup error",
                                        {{"frequency error", "#1f77b4", rep.eps_values, rep.errors},
                                         {"aggregate deviation", "#d62728", rep.eps_values,
                                          rep.aggregate_deviations}}));
        write_manifest(ctx.out_root, doc, *cfg, join_command({"compare", "--eps", format_list(rep.eps_values)}),
                       seconds_since(start), {"report.json", "convergence.csv", "convergence.svg"});

        *ctx.out << "eps,error,ratio\n";
        for (std::size_t k = 0; k < rep.eps_values.size(); ++k) {
            *ctx.out << io::format_double(rep.eps_values[k]) << "," << io::format_double(rep.errors[k]) << ","
                     << (k ? io::format_double(rep.error_ratios[k - 1]) : std::string("-")) << "\n";
        }
        *ctx.out << "fitted order: "
                 << (rep.fitted_order ? io::format_double(*rep.fitted_order) : std::string("not applicable")) << "\n";
        return static_cast<int>(ok);
    });
}

int cmd_sweep(const Context& ctx, const fs::path& config, const std::string& axis, const std::vector<double>& values,
              unsigned jobs, const std::string& mode)
{
    return guarded(ctx, [&] {
        if (values.empty()) {
            throw UsageError("sweep needs at least one value");
        }
        if (mode != "full" && mode != "reduced") {
            throw UsageError("mode must be full or reduced");
        }
        const json base = load_document(config);
        const auto ptr  = axis_pointer(axis);
        if (!base.contains(ptr) || !base.at(ptr).is_number()) {
            throw UsageError("sweep axis does not name a numeric config entry: " + axis);
        }

        struct Row {
            bool ok = false;
            std::string message;
            std::vector<std::string> monitor_names;
            std::vector<double> monitor_extrema;
            std::vector<double> final_z;
            std::size_t patches = 0, strains = 0;
        };
        std::vector<Row> rows(values.size());
        auto run_dir = [&](std::size_t k) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%04zu", k);
            return ctx.out_root / name;
        };

        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t k = next++; k < values.size(); k = next++) {
                const auto start = std::chrono::steady_clock::now();
                Row& row         = rows[k];
                try {
                    json doc       = base;
                    doc.at(ptr)    = values[k];
                    const auto dir = run_dir(k);
                    Config cfg;
                    try {
                        cfg = parse_config(doc);
                    } catch (const ConfigParseError& e) {
                        throw Error(std::string("config error: ") + e.what());
                    }
                    const auto run = run_simulation(cfg, mode, dir);
                    write_manifest(dir, doc, cfg,
                                   join_command({"sweep", "--axis", axis, "--value", io::format_double(values[k]),
                                                 "--mode", mode}),
                                   seconds_since(start), {run.file});
                    row.ok              = true;
                    row.monitor_names   = run.monitor_names;
                    row.monitor_extrema = run.monitor_extrema;
                    row.patches         = run.final_z.patches();
                    row.strains         = run.final_z.strains();
                    const Vector& z     = run.final_z.values();
                    row.final_z.assign(z.data(), z.data() + z.size());
                } catch (const std::exception& e) {
                    row.ok      = false;
                    row.message = e.what();
                }
            }
        };
        {
            const unsigned n = std::clamp<unsigned>(jobs, 1u, static_cast<unsigned>(values.size()));
            std::vector<std::jthread> pool;
            for (unsigned j = 1; j < n; ++j) {
                pool.emplace_back(worker);
            }
            worker();
        }

        // Header from the first successful run; every successful run shares the same dimensions.
        std::vector<std::string> monitor_names;
        std::size_t P = 0, N = 0;
        for (const auto& r : rows) {
            if (r.ok) {
                monitor_names = r.monitor_names;
                P             = r.patches;
                N             = r.strains;
                break;
            }
        }
        std::string csv = "value,status,run_dir";
        for (const auto& m : monitor_names) {
            csv += "," + m;
        }
        for (std::size_t p = 0; p < P; ++p) {
            for (std::size_t i = 0; i < N; ++i) {
                csv += ",z_" + std::to_string(p + 1) + "_" + std::to_string(i + 1);
            }
        }
        csv += ",message\n";
        bool failed = false;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto& r = rows[k];
            csv += io::format_double(values[k]) + "," + (r.ok ? "ok" : "failed") + "," +
                   run_dir(k).filename().string();
            const std::size_t width = monitor_names.size() + P * N;
            if (r.ok && r.monitor_extrema.size() + r.final_z.size() == width) {
                for (double x : r.monitor_extrema) {
                    csv += "," + io::format_double(x);
                }
                for (double x : r.final_z) {
                    csv += "," + io::format_double(x);
                }
            } else {
                csv += std::string(width, ',');
            }
            csv += "," + csv_field(r.message) + "\n";
            failed = failed || !r.ok;
        }
        fs::create_directories(ctx.out_root);
        io::atomic_write(ctx.out_root / "sweep.csv", csv);
        std::size_t n_failed = std::count_if(rows.begin(), rows.end(), [](const Row& r) { return !r.ok; });
        *ctx.out << "wrote " << (ctx.out_root / "sweep.csv").string() << ": " << rows.size() << " runs, " << n_failed
                 << " failed\n";
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (!rows[k].ok) {
                *ctx.err << "run " << k << " (" << axis << " = " << io::format_double(values[k])
                         << ") failed: " << rows[k].message << "\n";
            }
        }
        return static_cast<int>(failed ? domain_failure : ok);
    });
}

} // namespace straingrid::cli
