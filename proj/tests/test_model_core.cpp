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

TEST(TestPatchParams, reproductionNumberAndThreshold)
{
    PatchParams p{1.0, 4.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(p.basic_reproduction_number(), 2.0);
    EXPECT_TRUE(p.supercritical());
    EXPECT_TRUE(patch_issues(p).empty());

    p.beta = 2.0;
    EXPECT_FALSE(p.supercritical());
    const auto issues = patch_issues(p);
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].find("subcritical"), std::string::npos);
}

TEST(TestPatchParams, positivityViolations)
{
    EXPECT_FALSE(patch_issues({0.0, 4.0, 1.0, 1.0}).empty());
    EXPECT_FALSE(patch_issues({1.0, -1.0, 1.0, 1.0}).empty());
    EXPECT_FALSE(patch_issues({1.0, 4.0, -0.1, 1.0}).empty());
    EXPECT_FALSE(patch_issues({1.0, 4.0, 1.0, -1.0}).empty());
    EXPECT_FALSE(patch_issues({1.0, NAN, 1.0, 1.0}).empty());
    // gamma = 0 and k = 0 are admissible
    EXPECT_TRUE(patch_issues({1.0, 4.0, 0.0, 0.0}).empty());
}

TEST(TestStrainPerturbations, shapesAreChecked)
{
    auto p = PatchPerturbation::zero(3);
    EXPECT_EQ(p.b.size(), 3);
    EXPECT_TRUE(p.all_finite());
    auto sp = StrainPerturbations::neutral(2, 3);
    EXPECT_EQ(sp.patches(), 2u);
    EXPECT_EQ(sp.strains(), 3u);

    auto bad = PatchPerturbation::zero(2);
    EXPECT_THROW(StrainPerturbations(3, {bad}), InvalidArgument);
    bad = PatchPerturbation::zero(3);
    bad.alpha(1, 2) = INFINITY;
    EXPECT_FALSE(bad.all_finite());
    EXPECT_THROW(StrainPerturbations(3, {bad}), InvalidArgument);
}

TEST(TestConnectivity, validMatrices)
{
    EXPECT_TRUE(validate_connectivity(test::two_patch_exchange()).ok());
    EXPECT_TRUE(validate_connectivity(ConnectivityMatrix::complete(4).entries()).ok());
    EXPECT_EQ(ConnectivityMatrix::isolated().size(), 1u);

    // directed ring 0 -> 1 -> 2 -> 0
    Matrix ring(3, 3);
    ring << -1, 0, 1, 1, -1, 0, 0, 1, -1;
    EXPECT_TRUE(validate_connectivity(ring).ok());
}

TEST(TestConnectivity, negativeOffDiagonalIsMetzlerViolation)
{
    Matrix m(2, 2);
    m << 1.0, -1.0, 1.0, -1.0;
    const auto rep = validate_connectivity(m);
    EXPECT_FALSE(rep.metzler);
    EXPECT_TRUE(rep.row_sum_zero);
    bool named = false;
    for (const auto& s : rep.issues()) {
        named = named || s.find("Metzler") != std::string::npos;
    }
    EXPECT_TRUE(named);
    EXPECT_THROW(ConnectivityMatrix{m}, InvalidArgument);
}

TEST(TestConnectivity, reducibleAndUnbalanced)
{
    Matrix chain(3, 3);
    chain << -1, 1, 0, 0, -1, 1, 0, 0, 0;
    auto rep = validate_connectivity(chain);
    EXPECT_TRUE(rep.metzler);
    EXPECT_FALSE(rep.irreducible);

    Matrix unbalanced = test::two_patch_exchange();
    unbalanced(0, 0)  = -0.5;
    rep               = validate_connectivity(unbalanced);
    EXPECT_FALSE(rep.row_sum_zero);

    EXPECT_THROW(validate_connectivity(Matrix(2, 3)), InvalidArgument);
    Matrix nan = test::two_patch_exchange();
    nan(0, 1)  = NAN;
    EXPECT_THROW(validate_connectivity(nan), InvalidArgument);
}

TEST(TestConnectivity, twoTankHandExample)
{
    Vector V(2);
    V << 1.0, 2.0;
    Matrix x = Matrix::Zero(2, 2);
    x(0, 1)  = 1.0;
    Matrix expected(2, 2);
    expected << -2.0, 1.0, 2.0, -1.0;
    const Matrix M = volume_matrix(V, x);
    EXPECT_EQ(M, expected);

    Matrix density(2, 2);
    density << -2.0, 2.0, 1.0, -1.0;
    EXPECT_EQ(renormalize_to_density(M, V), density);
}

TEST(TestConnectivity, volumeMatrixProperties)
{
    test::Gen gen(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = gen.index(2, 7);
        const auto en       = static_cast<Eigen::Index>(n);
        Vector V(en);
        for (auto& v : V) {
            v = gen.uniform(0.1, 10.0);
        }
        Matrix x = Matrix::Zero(en, en);
        for (Eigen::Index i = 0; i < en; ++i) {
            for (Eigen::Index j = i + 1; j < en; ++j) {
                x(i, j) = gen.uniform(0.0, 3.0);
            }
        }
        const Matrix M = volume_matrix(V, x);
        const double scale = M.cwiseAbs().maxCoeff();
        EXPECT_LT(M.colwise().sum().cwiseAbs().maxCoeff(), 1e-12 * scale);
        EXPECT_LT((M * V).cwiseAbs().maxCoeff(), 1e-12 * scale * V.maxCoeff());
        const Matrix Dh = renormalize_to_density(M, V);
        EXPECT_LT(Dh.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12 * Dh.cwiseAbs().maxCoeff());
        EXPECT_TRUE(validate_connectivity(Dh).metzler);
    }
}

TEST(TestConnectivity, volumeMatrixErrors)
{
    Vector V(2);
    V << 1.0, 0.0;
    Matrix x = Matrix::Zero(2, 2);
    x(0, 1)  = 1.0;
    EXPECT_THROW(volume_matrix(V, x), InvalidArgument);
    V << 1.0, 2.0;
    x(0, 1) = -1.0;
    EXPECT_THROW(volume_matrix(V, x), InvalidArgument);
    x(0, 1) = 0.0;
    EXPECT_THROW(volume_matrix(V, x), InvalidArgument);
    EXPECT_THROW(renormalize_to_density(test::two_patch_exchange() * 2.0 + Matrix::Identity(2, 2), V),
                 InvalidArgument);
}

TEST(TestLayout, blockIndexing)
{
    FullLayout lay{2, 3};
    EXPECT_EQ(lay.block(), 1u + 3u + 9u);
    EXPECT_EQ(lay.size(), 26u);
    EXPECT_EQ(lay.s(1), 13u);
    EXPECT_EQ(lay.i(1, 2), 16u);
    EXPECT_EQ(lay.d(0, 1, 2), 1u + 3u + 5u);

    FullState x(2, 3);
    x.S(1)       = 0.5;
    x.I(1, 2)    = 0.25;
    x.D(0, 1, 2) = 0.125;
    EXPECT_EQ(x.values()[13], 0.5);
    EXPECT_EQ(x.values()[16], 0.25);
    EXPECT_EQ(x.values()[9], 0.125);
}

TEST(TestPredicates, massAndSimplex)
{
    FullState x(1, 2);
    x.S(0)       = 0.5;
    x.I(0, 0)    = 0.2;
    x.I(0, 1)    = 0.1;
    x.D(0, 0, 1) = 0.2;
    EXPECT_NEAR(mass_defect(x), 0.0, 1e-15);
    EXPECT_TRUE(in_omega(x, 1e-12));
    x.D(0, 1, 1) = 0.1;
    EXPECT_NEAR(mass_defect(x), 0.1, 1e-15);
    EXPECT_FALSE(in_omega(x, 1e-12));

    auto z = FrequencyState::uniform_in_space(3, Vector::Constant(4, 0.25));
    EXPECT_EQ(simplex_defect(z), 0.0);
    EXPECT_TRUE(on_simplex_product(z, 1e-14));
    z(2, 0) = -0.1;
    z(2, 1) = 0.6;
    EXPECT_FALSE(on_simplex_product(z, 1e-14));
    EXPECT_EQ(min_entry(z.values()), -0.1);
}
