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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace straingrid::cli
{

enum ExitCode : int { ok = 0, domain_failure = 1, usage_failure = 2 };

struct Context {
    std::filesystem::path out_root;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

int cmd_validate(const Context& ctx, const std::filesystem::path& config);
int cmd_equilibria(const Context& ctx, const std::filesystem::path& config);
int cmd_fitness(const Context& ctx, const std::filesystem::path& config);
int cmd_simulate(const Context& ctx, const std::filesystem::path& config, const std::string& mode);
int cmd_compare(const Context& ctx, const std::filesystem::path& config, const std::vector<double>& eps,
                unsigned jobs);
int cmd_sweep(const Context& ctx, const std::filesystem::path& config, const std::string& axis,
              const std::vector<double>& values, unsigned jobs, const std::string& mode);

} // namespace straingrid::cli
