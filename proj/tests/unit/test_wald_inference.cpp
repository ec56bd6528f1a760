#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "instances.hpp"
#include "oracles.hpp"
#include "svyglm/distributions.hpp"
#include "svyglm/error.hpp"
#include "svyglm/wald_inference.hpp"

using namespace svyglm;

namespace {

DesignSummary design(std::size_t H, std::size_t n_psu, double sum_w) {
    DesignSummary d;
    d.H = H;
    d.n_psu = n_psu;
    d.n = n_psu;
    d.sum_weights = sum_w;
    return d;
}

ContrastMatrix contrast(Eigen::MatrixXd L) {
    ContrastMatrix c;
    c.L = std::move(L);
    c.name = "t";
    return c;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(FSurvival, Examples) {
    EXPECT_EQ(f_survival(0.0, 3.0, 7.0), 1.0);
    EXPECT_NEAR(f_survival(1.0, 2.0, 2.0), 0.5, 1e-10);
    EXPECT_NEAR(f_survival(1.0, 1.0, 1e8), oracle::normal_two_sided(1.0), 1e-8);
    for (double f : {0.3, 1.0, 4.0, 25.0}) EXPECT_NEAR(f_survival(f, 2.0, 2.0), 1.0 / (1.0 + f), 1e-14);
    EXPECT_THROW(f_survival(-1.0, 1.0, 1.0), Error);
    EXPECT_THROW(f_survival(1.0, 0.0, 1.0), Error);
}

TEST(FSurvival, MatchesQuadratureOnGrid) {
    for (double f : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0})
        for (int d1 = 1; d1 <= 5; ++d1)
            for (int d2 : {1, 2, 3, 5, 8, 12, 20, 30})
                EXPECT_NEAR(f_survival(f, d1, d2), oracle::f_survival_quadrature(f, d1, d2), 1e-8)
                    << f << " " << d1 << " " << d2;
}

TEST(FSurvival, MonotoneAndBounded) {
    for (double d1 : {1.0, 2.5, 7.0})
        for (double d2 : {1.0, 4.0, 60.0, 1e5}) {
            double prev = 1.0;
            for (double f = 0.0; f < 50.0; f += 0.37) {
                const double p = f_survival(f, d1, d2);
                EXPECT_GE(p, 0.0);
                EXPECT_LE(p, prev);
                prev = p;
            }
        }
}

TEST(IncompleteBeta, AgreesWithBoost) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ab(0.05, 400.0), xs(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const double a = ab(rng), b = ab(rng), x = xs(rng);
        const auto tail = incomplete_beta(a, b, x, 1.0 - x);
        const double lo = boost::math::ibeta(a, b, x), up = boost::math::ibetac(a, b, x);
        EXPECT_NEAR(tail.lower, lo, 1e-12 + 1e-9 * lo) << a << " " << b << " " << x;
        EXPECT_NEAR(tail.upper, up, 1e-12 + 1e-9 * up) << a << " " << b << " " << x;
    }
    EXPECT_NEAR(log_beta(3.0, 4.0), std::log(1.0 / 60.0), 1e-14);
    EXPECT_NEAR(log_beta(1e8, 0.5), std::log(boost::math::beta(1e8, 0.5)), 1e-9);
}

TEST(TDistribution, ExamplesAndBoost) {
    EXPECT_NEAR(t_two_sided_p(2.0, kInf), 0.04550026389635842, 1e-12);
    EXPECT_NEAR(t_two_sided_p(2.0, 1e9), 0.04550026389635842, 1e-8);
    EXPECT_NEAR(t_two_sided_p(1.0, 1.0), 0.5, 1e-14);
    for (double df : {1.0, 3.0, 12.5, 200.0}) {
        boost::math::students_t dist(df);
        for (double t : {0.1, 1.0, 2.5, 8.0})
            EXPECT_NEAR(t_two_sided_p(t, df), 2.0 * boost::math::cdf(boost::math::complement(dist, t)), 1e-12);
        EXPECT_NEAR(t_quantile_upper(0.025, df), boost::math::quantile(boost::math::complement(dist, 0.025)),
                    1e-9 * boost::math::quantile(boost::math::complement(dist, 0.025)));
    }
    EXPECT_NEAR(t_quantile_upper(0.025, kInf), 1.959963984540054, 1e-9);
}

TEST(Wald, ScalarExample) {
    const Eigen::Vector2d beta(0, 2);
    const Eigen::Matrix2d V = Eigen::Vector2d(1, 4).asDiagonal();
    Eigen::MatrixXd L(1, 2);
    L << 0, 1;
    const auto r = wald_test(beta, V, contrast(L), DfMode::fixed(10), design(1, 2, 2));
    EXPECT_NEAR(r.f_stat, 1.0, 1e-15);
    EXPECT_EQ(r.ndf, 1.0);
    EXPECT_EQ(r.ddf, 10.0);
    EXPECT_NEAR(r.p_value, t_two_sided_p(1.0, 10.0), 1e-12);

    Eigen::MatrixXd dup(2, 2);
    dup << 0, 1, 0, 1;
    const auto d = wald_test(beta, V, contrast(dup), DfMode::fixed(10), design(1, 2, 2));
    EXPECT_EQ(d.ndf, 1.0);
    EXPECT_NEAR(d.f_stat, 1.0, 1e-12);
}

TEST(Wald, JointTestOfDummies) {
    const std::vector<std::string> labels{"(Intercept)", "educ=16+", "educ=9-15", "age"};
    const auto c = unit_contrast(labels, {"educ=16+", "educ=9-15"});
    EXPECT_EQ(c.name, "educ=16+,educ=9-15");
    Eigen::Vector4d beta(1, 0.5, -0.3, 0.01);
    Eigen::Matrix4d V = Eigen::Matrix4d::Identity() * 0.04;
    V(1, 2) = V(2, 1) = 0.01;
    const auto r = wald_test(beta, V, c, DfMode::design(), design(3, 9, 100));
    EXPECT_EQ(r.ndf, 2.0);
    EXPECT_EQ(r.ddf, 6.0);
    const Eigen::Vector2d lb(0.5, -0.3);
    const Eigen::Matrix2d M = V.block(1, 1, 2, 2);
    EXPECT_NEAR(r.f_stat, lb.dot(M.inverse() * lb) / 2.0, 1e-12);
    EXPECT_THROW(unit_contrast(labels, {"educ=0-8"}), Error);
}

TEST(Wald, DegreesOfFreedomModes) {
    const auto d = design(4, 11, 523.5);
    EXPECT_EQ(denominator_df(DfMode::design(), d, 2), 7.0);
    EXPECT_EQ(denominator_df(DfMode::paper(), d, 2), 521.5);
    EXPECT_EQ(denominator_df(DfMode::fixed(3.5), d, 2), 3.5);
    EXPECT_THROW(denominator_df(DfMode::design(), design(2, 2, 10), 1), Error);
    EXPECT_EQ(parse_df_mode("paper").kind, DfMode::Kind::Paper);
    EXPECT_EQ(parse_df_mode("12").value, 12.0);
    EXPECT_THROW(parse_df_mode("-1"), Error);
    EXPECT_THROW(parse_df_mode("many"), Error);
}

TEST(Wald, ContrastErrors) {
    const Eigen::Vector2d beta(1, 2);
    const Eigen::Matrix2d V = Eigen::Matrix2d::Identity();
    const auto d = design(1, 5, 5);
    try {
        wald_test(beta, V, contrast(Eigen::MatrixXd::Zero(1, 2)), DfMode::design(), d);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularContrast);
    }
    try {
        wald_test(beta, V, contrast(Eigen::MatrixXd::Ones(1, 3)), DfMode::design(), d);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
    Eigen::MatrixXd L(1, 2);
    L << 1, 0;
    try {
        wald_test(beta, Eigen::Matrix2d::Zero(), contrast(L), DfMode::design(), d);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularContrast);
    }
}

namespace {

struct RandomCov {
    Eigen::VectorXd beta;
    Eigen::MatrixXd V;
};

RandomCov random_cov(std::mt19937_64& rng, Eigen::Index p) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd A(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) A(i, j) = z(rng);
    RandomCov r;
    r.V = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(p, p);
    r.beta = Eigen::VectorXd(p);
    for (Eigen::Index j = 0; j < p; ++j) r.beta(j) = z(rng);
    return r;
}

}  // namespace

TEST(WaldProperty, ScalarConsistency) {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const auto c = random_cov(rng, 5);
        for (Eigen::Index j = 0; j < 5; ++j) {
            Eigen::MatrixXd L = Eigen::MatrixXd::Zero(1, 5);
            L(0, j) = 1.0;
            const auto r = wald_test(c.beta, c.V, contrast(L), DfMode::fixed(17), design(1, 5, 5));
            const double t = c.beta(j) / std::sqrt(c.V(j, j));
            EXPECT_NEAR(r.f_stat, t * t, 1e-10 * std::max(1.0, t * t));
            EXPECT_NEAR(r.p_value, t_two_sided_p(t, 17), 1e-10);
        }
    }
}

TEST(WaldProperty, ContrastInvariance) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 50; ++rep) {
        const auto c = random_cov(rng, 6);
        Eigen::MatrixXd L(3, 6), M(3, 3);
        for (Eigen::Index i = 0; i < 3; ++i) {
            for (Eigen::Index j = 0; j < 6; ++j) L(i, j) = z(rng);
            for (Eigen::Index j = 0; j < 3; ++j) M(i, j) = z(rng) + (i == j ? 3.0 : 0.0);
        }
        const auto a = wald_test(c.beta, c.V, contrast(L), DfMode::design(), design(2, 20, 40));
        const auto b = wald_test(c.beta, c.V, contrast(M * L), DfMode::design(), design(2, 20, 40));
        EXPECT_EQ(a.ndf, b.ndf);
        EXPECT_NEAR(a.f_stat, b.f_stat, 1e-9 * std::max(1.0, a.f_stat));
        EXPECT_NEAR(a.p_value, b.p_value, 1e-9);
    }
}

TEST(CoefficientTable, RowsFollowLabelsAndZeroSe) {
    FitResult fit;
    fit.beta = Eigen::Vector3d(2.0, 0.0, -1.5);
    VarianceComponents vc;
    vc.vbeta = Eigen::Vector3d(1.0, 0.0, 0.0).asDiagonal();
    const std::vector<std::string> labels{"(Intercept)", "x", "z"};
    const auto t = coefficient_table(fit, vc, labels, design(1, 5, 5), 0.95, DfMode::fixed(kInf));
    ASSERT_EQ(t.rows.size(), 3u);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(t.rows[j].label, labels[j]);
    EXPECT_EQ(t.rows[0].t, 2.0);
    EXPECT_NEAR(t.rows[0].p, 0.0455002638963584, 1e-12);
    EXPECT_NEAR(t.rows[0].ci_lower, 2.0 - 1.959963984540054, 1e-9);
    EXPECT_EQ(t.rows[1].p, 1.0);
    EXPECT_EQ(t.rows[2].p, 0.0);
    EXPECT_EQ(t.rows[2].ci_lower, -1.5);
    const auto d = coefficient_table(fit, vc, labels, design(2, 6, 5));
    EXPECT_EQ(d.ddf, 4.0);
    EXPECT_NEAR(d.rows[0].p, t_two_sided_p(2.0, 4.0), 1e-15);
}
