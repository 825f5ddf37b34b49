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
#include "straingrid/config.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace straingrid;
using nlohmann::json;

namespace
{

json load(const std::string& name)
{
    std::ifstream in(std::string(STRAINGRID_CONFIG_DIR) + "/" + name);
    return json::parse(in);
}

} // namespace

TEST(TestConfig, twoPatchSampleParses)
{
    const auto cfg = parse_config(load("two_patch.json"));
    EXPECT_TRUE(validate_config(cfg).empty());
    ASSERT_EQ(cfg.patches.size(), 2u);
    EXPECT_EQ(cfg.strains, 2u);
    EXPECT_EQ(cfg.patches[1].k, 2.0);
    EXPECT_EQ(cfg.perturbations[0].alpha(0, 1), -0.5);
    EXPECT_EQ(cfg.perturbations[1].b[1], 0.5);
    EXPECT_EQ(cfg.connectivity, test::two_patch_exchange());
    EXPECT_EQ(cfg.scale.eps, 0.05);
    ASSERT_TRUE(cfg.z0.has_value());
    EXPECT_EQ((*cfg.z0)(1, 0), 0.6);

    const auto model = make_model(cfg);
    const auto ref   = test::two_patch_model();
    EXPECT_EQ(reduce(model).Lambda[0], reduce(ref).Lambda[0]);
    EXPECT_EQ(reduce(model).Lambda[1], reduce(ref).Lambda[1]);
}

TEST(TestConfig, omittedTraitsAreNeutral)
{
    const auto cfg = parse_config(load("neutral_one_patch.json"));
    EXPECT_TRUE(validate_config(cfg).empty());
    EXPECT_EQ(cfg.perturbations[0].alpha, Matrix::Zero(3, 3));
    EXPECT_EQ(cfg.simulation.tau_end, 5.0);
    EXPECT_EQ(cfg.simulation.t_end, SimulationSettings{}.t_end);
}

TEST(TestConfig, validationIssuesAreNamed)
{
    auto issues = validate_config(parse_config(load("subcritical.json")));
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].find("patch 1"), std::string::npos);
    EXPECT_NE(issues[0].find("subcritical"), std::string::npos);

    issues = validate_config(parse_config(load("negative_offdiagonal.json")));
    ASSERT_FALSE(issues.empty());
    EXPECT_NE(issues[0].find("Metzler"), std::string::npos);
    EXPECT_THROW(make_model(parse_config(load("negative_offdiagonal.json"))), InvalidArgument);
}

TEST(TestConfig, volumeConnectivity)
{
    const auto cfg = parse_config(load("three_patch_random.json"));
    EXPECT_TRUE(validate_config(cfg).empty());
    EXPECT_LT(cfg.connectivity.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);

    auto doc                               = load("three_patch_random.json");
    doc["connectivity"]["matrix"]          = json::array({json::array({0.0})});
    EXPECT_FALSE(validate_config(parse_config(doc)).empty());
    doc                                    = load("three_patch_random.json");
    doc["connectivity"]["volumes"][1]      = -1.0;
    EXPECT_FALSE(validate_config(parse_config(doc)).empty());
}

TEST(TestConfig, structuralErrors)
{
    auto doc = load("two_patch.json");
    doc.erase("scale");
    EXPECT_THROW(parse_config(doc), ConfigParseError);
    doc                    = load("two_patch.json");
    doc["patches"][0]["r"] = "one";
    EXPECT_THROW(parse_config(doc), ConfigParseError);
    doc               = load("two_patch.json");
    doc["strains"]["N"] = 0;
    EXPECT_THROW(parse_config(doc), ConfigParseError);
    doc         = load("two_patch.json");
    doc["seed"] = -3;
    EXPECT_THROW(parse_config(doc), ConfigParseError);
    EXPECT_THROW(parse_config_text("{\"patches\": ["), ConfigParseError);

    doc                    = load("two_patch.json");
    doc["strains"]["b"][0] = json::array({1.0});
    EXPECT_FALSE(validate_config(parse_config(doc)).empty());
    doc                    = load("two_patch.json");
    doc["initial"]["z"][0] = json::array({0.5, 0.6});
    EXPECT_FALSE(validate_config(parse_config(doc)).empty());
}

TEST(TestConfig, randomFrequenciesAreSeeded)
{
    const auto a = random_frequencies(3, 4, 42);
    const auto b = random_frequencies(3, 4, 42);
    const auto c = random_frequencies(3, 4, 43);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_NE(a.values(), c.values());
    EXPECT_TRUE(on_simplex_product(a, 1e-15));
    EXPECT_GT(min_entry(a.values()), 0.0);

    // flat Dirichlet: each coordinate has mean 1/N
    Vector mean = Vector::Zero(4);
    const int draws = 4000;
    for (int s = 0; s < draws; ++s) {
        mean += random_frequencies(1, 4, static_cast<std::uint64_t>(s)).values();
    }
    mean /= draws;
    EXPECT_LT((mean.array() - 0.25).abs().maxCoeff(), 0.01);

    const auto cfg = parse_config(load("three_patch_random.json"));
    EXPECT_TRUE(cfg.random_z0);
    EXPECT_EQ(initial_frequencies(cfg).values(), random_frequencies(3, 3, 20260101).values());
}

TEST(TestConfig, fullStateStart)
{
    const auto cfg = parse_config(load("neutral_full_start.json"));
    EXPECT_TRUE(validate_config(cfg).empty());
    ASSERT_TRUE(cfg.full_state.has_value());
    EXPECT_EQ(cfg.full_state->S(0), 0.9);
    EXPECT_EQ(cfg.full_state->D(0, 0, 0), 0.02);
}

TEST(TestConfig, reportSerialization)
{
    ReductionReport rep;
    rep.eps_values           = {0.1, 0.05, 0.025};
    rep.errors               = {0.4, 0.2, 0.1};
    rep.aggregate_deviations = {1.0 / 3.0, 0.2, 0.1};
    rep.error_ratios         = {0.5, 0.5};
    rep.aggregate_ratios     = {0.6, 0.5};
    rep.tau_window           = {0.5, 5.0};
    auto j                   = to_json(rep);
    EXPECT_FALSE(j["fitted_order_applicable"].get<bool>());
    EXPECT_TRUE(j["fitted_order"].is_null());
    EXPECT_EQ(j["aggregate_deviations"][0].get<double>(), 0.333333333333333);
    EXPECT_EQ(j["tau_window"]["T"].get<double>(), 5.0);
    rep.fitted_order = 1.0;
    j                = to_json(rep);
    EXPECT_TRUE(j["fitted_order_applicable"].get<bool>());
    EXPECT_EQ(j["fitted_order"].get<double>(), 1.0);

    EXPECT_EQ(round_sig15(2.0 / 3.0), 0.666666666666667);
    EXPECT_EQ(round_sig15(0.0), 0.0);
}
