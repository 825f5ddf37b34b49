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

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <thread>

namespace
{

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item  = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t used = 0;
        const double v   = std::stod(item, &used);
        if (used != item.size()) {
            throw std::invalid_argument("bad number: " + item);
        }
        out.push_back(v);
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace straingrid::cli;

    CLI::App app{"straingrid: multi-strain, multi-patch co-colonization model and its replicator reduction"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_dir;
    app.add_option("-o,--out", out_dir, "Output root (default: $STRAINGRID_OUT or ./straingrid_out)");

    std::string config;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("config", config, "Configuration JSON file")->required();
    };

    auto* validate = app.add_subcommand("validate", "Check a configuration against all model hypotheses");
    add_config(validate);
    auto* equilibria = app.add_subcommand("equilibria", "Print neutral equilibria and eigenvectors as JSON");
    add_config(equilibria);
    auto* fitness = app.add_subcommand("fitness", "Print speeds, fitness matrices and migration matrix as JSON");
    add_config(fitness);

    std::string mode = "full";
    auto* simulate = app.add_subcommand("simulate", "Integrate the full or the reduced model");
    add_config(simulate);
    simulate->add_option("--mode", mode, "full or reduced")->check(CLI::IsMember({"full", "reduced"}));

    std::string eps_text;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* compare = app.add_subcommand("compare", "Measure the reduction error over a list of eps values");
    add_config(compare);
    compare->add_option("--eps", eps_text, "Comma-separated eps values (at least three)")->required();
    compare->add_option("--jobs", jobs, "Concurrent eps runs")->check(CLI::PositiveNumber);

    std::string axis, values_text;
    auto* sweep = app.add_subcommand("sweep", "Run one simulation per value of a scalar config entry");
    add_config(sweep);
    sweep->add_option("--axis", axis, "Dotted config path, e.g. scale.d or patches.0.beta")->required();
    sweep->add_option("--values", values_text, "Comma-separated grid values")->required();
    sweep->add_option("--jobs", jobs, "Worker count")->check(CLI::PositiveNumber);
    sweep->add_option("--mode", mode, "full or reduced")->check(CLI::IsMember({"full", "reduced"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ExitCode::ok : ExitCode::usage_failure;
    }

    Context ctx;
    ctx.out = &std::cout;
    ctx.err = &std::cerr;
    if (!out_dir.empty()) {
        ctx.out_root = out_dir;
    } else if (const char* env = std::getenv("STRAINGRID_OUT"); env && *env) {
        ctx.out_root = env;
    } else {
        ctx.out_root = "straingrid_out";
    }

    std::vector<double> numbers;
    try {
        if (*compare) {
            numbers = parse_list(eps_text);
        } else if (*sweep) {
            numbers = parse_list(values_text);
        }
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return ExitCode::usage_failure;
    }

    if (*validate) {
        return cmd_validate(ctx, config);
    }
    if (*equilibria) {
        return cmd_equilibria(ctx, config);
    }
    if (*fitness) {
        return cmd_fitness(ctx, config);
    }
    if (*simulate) {
        return cmd_simulate(ctx, config, mode);
    }
    if (*compare) {
        return cmd_compare(ctx, config, numbers, jobs);
    }
    return cmd_sweep(ctx, config, axis, numbers, jobs, mode);
}
