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
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace straingrid;

namespace
{

/// Random point of Omega: every patch block sums to one, with a fraction of exact zeros.
FullState random_state(test::Gen& gen, std::size_t patches, std::size_t strains, double zero_share = 0.0)
{
    FullState x(patches, strains);
    const auto block = static_cast<Eigen::Index>(FullLayout{patches, strains}.block());
    for (std::size_t p = 0; p < patches; ++p) {
        Vector v = gen.simplex(static_cast<std::size_t>(block));
        for (auto& e : v) {
            if (gen.uniform(0, 1) < zero_share) {
                e = 0.0;
            }
        }
        v /= v.sum();
        x.values().segment(static_cast<Eigen::Index>(p) * block, block) = v;
    }
    return x;
}

} // namespace

TEST(TestFullModel, assembledRates)
{
    auto pert = PatchPerturbation::zero(2);
    pert.b << 1.0, -0.5;
    pert.nu << 0.2, 0.0;
    pert.c_pair << 0.0, 1.0, 0.0, 0.0;
    pert.alpha << 0.0, 2.0, 0.0, 0.0;
    pert.w << 0.0, 0.3, -0.3, 0.0;
    const auto rates = assemble_rates(test::worked_patch(), pert, 0.1);
    EXPECT_DOUBLE_EQ(rates.beta[0], 4.4);
    EXPECT_DOUBLE_EQ(rates.beta[1], 3.8);
    EXPECT_DOUBLE_EQ(rates.gamma[0], 1.02);
    EXPECT_DOUBLE_EQ(rates.gamma_pair(0, 1), 1.1);
    EXPECT_DOUBLE_EQ(rates.k(0, 1), 1.2);
    EXPECT_DOUBLE_EQ(rates.transmit_first(0, 1), 0.53);
    EXPECT_DOUBLE_EQ(rates.transmit_first(1, 0), 0.47);
    EXPECT_TRUE(rate_issues(rates).empty());
}

TEST(TestFullModel, constructionErrors)
{
    const auto traits = test::two_patch_traits();
    const ConnectivityMatrix D(test::two_patch_exchange());
    EXPECT_THROW(FullModel({test::worked_patch(), {1.0, 2.0, 1.0, 1.0}}, traits, {0.05, 1.0}, D), InvalidArgument);
    EXPECT_THROW(FullModel({test::worked_patch()}, traits, {0.05, 1.0}, D), InvalidArgument);
    EXPECT_THROW(FullModel({test::worked_patch(), test::second_patch()}, traits, {0.05, 1.0},
                           ConnectivityMatrix::complete(3)),
                 InvalidArgument);
    EXPECT_THROW(FullModel({test::worked_patch(), test::second_patch()}, traits, {-0.1, 1.0}, D), InvalidArgument);
    // eps = 2 drives the transmission priority 1/2 + eps w outside [0, 1]
    EXPECT_THROW(FullModel({test::worked_patch(), test::second_patch()}, traits, {2.0, 1.0}, D), InvalidArgument);
    EXPECT_NO_THROW(test::two_patch_model().with_eps(0.0));
}

TEST(TestFullModel, neutralManifoldIsStationaryWithoutMigration)
{
    test::Gen gen(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t P = gen.index(1, 3), N = gen.index(1, 4);
        std::vector<PatchParams> patches;
        for (std::size_t p = 0; p < P; ++p) {
            patches.push_back(gen.patch());
        }
        const FullModel model(patches, StrainPerturbations::neutral(P, N), {0.0, 0.0},
                              ConnectivityMatrix(gen.connectivity(P)));
        const auto x  = init_on_manifold(gen.frequencies(P, N), model.equilibria());
        const auto dx = rhs_full(model, x);
        EXPECT_LT(dx.values().cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(TestFullModel, identicalPatchesWithUniformFrequenciesAreStationary)
{
    test::Gen gen(4);
    const auto p = gen.patch();
    const FullModel model({p, p, p}, StrainPerturbations::neutral(3, 3), {0.0, 2.0},
                          ConnectivityMatrix(gen.connectivity(3)));
    const auto z  = FrequencyState::uniform_in_space(3, gen.simplex(3));
    const auto dx = rhs_full(model, init_on_manifold(z, model.equilibria()));
    EXPECT_LT(dx.values().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TestFullModel, patchMassIsConservedByTheVectorField)
{
    test::Gen gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t P = gen.index(1, 4), N = gen.index(1, 4);
        std::vector<PatchParams> patches;
        std::vector<PatchPerturbation> perts;
        for (std::size_t p = 0; p < P; ++p) {
            patches.push_back(gen.patch());
            perts.push_back(gen.perturbation(N));
        }
        const FullModel model(patches, StrainPerturbations(N, perts), {0.05, gen.uniform(0, 3)},
                              ConnectivityMatrix(gen.connectivity(P)));
        const auto x  = random_state(gen, P, N);
        const auto dx = rhs_full(model, x);
        for (std::size_t p = 0; p < P; ++p) {
            EXPECT_NEAR(dx.patch_mass(p), 0.0, 1e-13);
        }
    }
}

TEST(TestFullModel, vectorFieldPointsInwardOnTheBoundary)
{
    test::Gen gen(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t P = gen.index(1, 3), N = gen.index(2, 4);
        std::vector<PatchParams> patches;
        std::vector<PatchPerturbation> perts;
        for (std::size_t p = 0; p < P; ++p) {
            patches.push_back(gen.patch());
            perts.push_back(gen.perturbation(N));
        }
        const FullModel model(patches, StrainPerturbations(N, perts), {0.05, 1.0},
                              ConnectivityMatrix(gen.connectivity(P)));
        const auto x  = random_state(gen, P, N, 0.4);
        const auto dx = rhs_full(model, x);
        for (Eigen::Index k = 0; k < x.values().size(); ++k) {
            if (x.values()[k] == 0.0) {
                EXPECT_GE(dx.values()[k], -1e-15);
            }
        }
    }
}

TEST(TestFullModel, frequenciesRoundTripThroughManifold)
{
    test::Gen gen(7);
    const auto model = test::two_patch_model();
    for (int trial = 0; trial < 20; ++trial) {
        const auto z  = gen.frequencies(2, 2);
        const auto x  = init_on_manifold(z, model.equilibria());
        const auto zt = extract_frequencies(x, model.left_eigenvectors());
        EXPECT_LT((zt.values() - z.values()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_NEAR(mass_defect(x), 0.0, 1e-14);
    }
}

TEST(TestFullModel, extinctPatchAndOffSimplexStart)
{
    const auto model = test::two_patch_model();
    FullState x(2, 2);
    x.S(0) = 1.0;
    x.S(1) = 0.5;
    x.I(1, 0) = 0.5;
    EXPECT_THROW(extract_frequencies(x, model.left_eigenvectors()), ExtinctPatch);

    FrequencyState z(2, 2);
    z.patch(0) << 0.5, 0.6;
    z.patch(1) << 0.5, 0.5;
    EXPECT_THROW(init_on_manifold(z, model.equilibria()), InvalidArgument);
}

TEST(TestFullModel, singleStrainConvergesToEndemicEquilibrium)
{
    const FullModel model({test::worked_patch()}, StrainPerturbations::neutral(1, 1), {0.0, 0.0},
                          ConnectivityMatrix::isolated());
    FullState x(1, 1);
    x.S(0)       = 0.9;
    x.I(0, 0)    = 0.08;
    x.D(0, 0, 0) = 0.02;
    IntegratorConfig cfg;
    cfg.t_end   = 60.0;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-12;
    const auto traj = simulate_full(model, x, cfg);
    const FullState y(1, 1, traj.final_state());
    EXPECT_NEAR(y.S(0), 0.5, 1e-6);
    EXPECT_NEAR(y.I(0, 0), 0.25, 1e-6);
    EXPECT_NEAR(y.D(0, 0, 0), 0.25, 1e-6);
    ASSERT_EQ(traj.monitor_names.size(), 2u);
    EXPECT_EQ(traj.monitor_names[0], "mass_defect");
    EXPECT_LT(traj.monitor_extrema[0], 1e-12);
    EXPECT_GE(traj.monitor_extrema[1], 0.0);
}

TEST(TestFullModel, neutralLimitReachesProductStructure)
{
    test::Gen gen(8);
    const FullModel model({test::worked_patch()}, StrainPerturbations::neutral(1, 3), {0.0, 0.0},
                          ConnectivityMatrix::isolated());
    const auto x0 = random_state(gen, 1, 3);
    IntegratorConfig cfg;
    cfg.t_end   = 50.0;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    const auto traj = simulate_full(model, x0, cfg);
    const FullState y(1, 3, traj.final_state());
    const auto eqs  = model.equilibria();
    const auto oms  = model.left_eigenvectors();
    EXPECT_LT(simplex_defect(extract_frequencies(y, oms)), 1e-14);
    EXPECT_LT(product_structure_residual(y, eqs, oms), 1e-6);
}
