#include <gtest/gtest.h>

#include <random>

#include "instances.hpp"
#include "oracles.hpp"
#include "svyglm/error.hpp"
#include "svyglm/taylor_variance.hpp"

using namespace svyglm;

namespace {

struct Fitted {
    ModelFrame frame;
    FitResult fit;
    DesignSummary design;
};

Fitted fit_frame(ModelFrame frame, FamilyKind f = FamilyKind::Normal, LinkKind l = LinkKind::Identity) {
    auto fit = fit_pseudo_mle(frame, make_family(f), {l});
    auto design = design_summary(frame);
    return {std::move(frame), std::move(fit), std::move(design)};
}

Fitted two_point(double fpc = 0.0) {
    return fit_frame(make_frame(Eigen::MatrixXd::Ones(2, 1), Eigen::Vector2d(0, 2), {1, 1}, {"A", "A"}, {"a", "b"},
                                {fpc, fpc}));
}

std::vector<double> as_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST(PsuScores, TwoPointExample) {
    const auto t = two_point();
    const auto e = psu_score_sums(t.fit, t.frame);
    ASSERT_EQ(e.size(), 2u);
    EXPECT_DOUBLE_EQ(e.at({"A", "a"})(0), -1.0);
    EXPECT_DOUBLE_EQ(e.at({"A", "b"})(0), 1.0);
}

TEST(Sandwich, TwoPointHandCase) {
    const auto t = two_point();
    const auto vc = sandwich_variance(t.fit, t.frame, t.design);
    EXPECT_NEAR(vc.Q(0, 0), 2.0, 1e-12);
    EXPECT_EQ(vc.small_sample_factor, 1.0);
    EXPECT_NEAR(vc.G(0, 0), 4.0, 1e-12);
    EXPECT_NEAR(std::sqrt(vc.vbeta(0, 0)), 1.0, 1e-12);
    EXPECT_EQ(vc.df_design, 1.0);
}

TEST(Sandwich, HalfSamplingFractionHalvesG) {
    const auto t = two_point(0.5);
    const auto vc = sandwich_variance(t.fit, t.frame, t.design);
    EXPECT_NEAR(vc.G(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(vc.vbeta(0, 0), 0.5, 1e-12);
}

TEST(Sandwich, ZeroResidualsGiveZeroVariance) {
    Eigen::MatrixXd X(3, 2);
    X << 1, 0, 1, 1, 1, 2;
    const auto t = fit_frame(make_frame(X, Eigen::Vector3d(1, 3, 5), {1, 2, 1}));
    for (const auto& [k, e] : psu_score_sums(t.fit, t.frame)) EXPECT_LT(e.cwiseAbs().maxCoeff(), 1e-10);
    const auto vc = sandwich_variance(t.fit, t.frame, t.design);
    EXPECT_LT(vc.G.cwiseAbs().maxCoeff(), 1e-18);
    EXPECT_LT(vc.vbeta.cwiseAbs().maxCoeff(), 1e-18);
}

TEST(Sandwich, SingletonPolicies) {
    auto frame = make_frame(Eigen::MatrixXd::Ones(3, 1), Eigen::Vector3d(0, 2, 7), {1, 1, 1}, {"A", "A", "B"},
                            {"a1", "a2", "b1"}, {0, 0, 0.25});
    const auto t = fit_frame(frame);
    try {
        sandwich_variance(t.fit, t.frame, t.design);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingletonStratum);
    }
    const auto cert = sandwich_variance(t.fit, t.frame, t.design, {SingletonPolicy::Certainty});
    EXPECT_EQ(cert.stratum_G.at("B")(0, 0), 0.0);

    // mu = 3: scores -3, -1, 4; grand mean 0, so the singleton adds (1 - 0.25) 16.
    const auto cen = sandwich_variance(t.fit, t.frame, t.design, {SingletonPolicy::Centered});
    EXPECT_NEAR(cen.stratum_G.at("B")(0, 0), 12.0, 1e-10);
    EXPECT_NEAR(cen.stratum_G.at("A")(0, 0), 4.0, 1e-10);
    EXPECT_NEAR(cen.G(0, 0), cen.small_sample_factor * 16.0, 1e-10);
}

TEST(Sandwich, FactorOptions) {
    Eigen::MatrixXd X(4, 2);
    X << 1, 0, 1, 1, 1, 2, 1, 4;
    const auto t = fit_frame(make_frame(X, Eigen::Vector4d(0, 1, 3, 6), {1, 1, 1, 1}, {"A", "A", "A", "A"},
                                        {"a", "a", "b", "c"}));
    const auto obs = sandwich_variance(t.fit, t.frame, t.design);
    EXPECT_DOUBLE_EQ(obs.small_sample_factor, 3.0 / 2.0);
    const auto psu = sandwich_variance(t.fit, t.frame, t.design, {SingletonPolicy::Error, SmallSampleFactor::Psus});
    EXPECT_DOUBLE_EQ(psu.small_sample_factor, 2.0);
    const auto none = sandwich_variance(t.fit, t.frame, t.design, {SingletonPolicy::Error, SmallSampleFactor::None});
    EXPECT_EQ(none.small_sample_factor, 1.0);
    EXPECT_LT(oracle::max_rel_err(psu.vbeta, 2.0 * none.vbeta), 1e-14);
    EXPECT_EQ(parse_singleton_policy("centered"), SingletonPolicy::Centered);
    EXPECT_EQ(parse_small_sample_factor("psu"), SmallSampleFactor::Psus);
    EXPECT_THROW(parse_singleton_policy("drop"), Error);
}

TEST(Sandwich, MismatchedDesignIsRejected) {
    const auto t = two_point();
    auto other = t.design;
    other.n_psu = 5;
    EXPECT_THROW(sandwich_variance(t.fit, t.frame, other), Error);
}

TEST(SandwichProperty, MatchesNaiveTripleLoop) {
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int rep = 0; rep < 6; ++rep) {
        for (auto [f, l] : instances::family_link_pairs()) {
            std::uniform_int_distribution<int> H_dist(1, 4), p_dist(1, 3);
            const int H = H_dist(rng);
            const Eigen::Index p = p_dist(rng);
            const Eigen::VectorXd beta = instances::random_beta(rng, f, l, p);
            auto frame = instances::random_survey_frame(rng, f, l, p, H, beta, 0.8);
            if (frame.n() <= p + 1) continue;
            const auto family = make_family(f);
            FitResult fit;
            try {
                fit = fit_pseudo_mle(frame, family, {l});
            } catch (const Error&) {
                continue;   // separation or an unlucky identity-link draw
            }
            if (!fit.converged || fit.floored_means > 0) continue;
            const auto vc = sandwich_variance(fit, frame, design_summary(frame));
            const auto want = oracle::naive_sandwich(oracle::to_mat(frame.X), as_vec(frame.y), frame.weights,
                                                     frame.strata, frame.psus, frame.fpc, as_vec(fit.beta), f, l,
                                                     fit.phi, family.ancillary.value_or(0.0));
            EXPECT_LT(oracle::max_rel_err(vc.vbeta, oracle::to_eigen(want.V)), 1e-10)
                << to_string(f) << "/" << to_string(l);
            EXPECT_LT(oracle::max_rel_err(vc.G, oracle::to_eigen(want.G)), 1e-10);
            ++checked;
        }
    }
    EXPECT_GT(checked, 40);
}

TEST(SandwichProperty, RobustFormReduction) {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const auto inst = instances::random_glm_instance(rng, FamilyKind::Normal, LinkKind::Identity, 6, 30, 4, true);
        const auto t = fit_frame(inst.frame);
        const auto vc = sandwich_variance(t.fit, t.frame, t.design);
        const Eigen::Index n = t.frame.n(), p = t.frame.p();
        const Eigen::VectorXd r = t.frame.y - t.frame.X * t.fit.beta;
        Eigen::MatrixXd E = t.frame.X.array().colwise() * r.array();
        const Eigen::RowVectorXd ebar = E.colwise().mean();
        E.rowwise() -= ebar;
        const double c = static_cast<double>(n) / static_cast<double>(n - p);
        const Eigen::MatrixXd q_inv = (t.frame.X.transpose() * t.frame.X).inverse();
        const Eigen::MatrixXd want = q_inv * (c * E.transpose() * E) * q_inv;
        EXPECT_LT(oracle::max_rel_err(vc.vbeta, want), 1e-10);
    }
}

TEST(SandwichProperty, PsuRelabelingAndWeightScaling) {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::VectorXd beta = instances::random_beta(rng, FamilyKind::Poisson, LinkKind::Log, 3);
        auto frame = instances::random_survey_frame(rng, FamilyKind::Poisson, LinkKind::Log, 3, 3, beta, 1.0);
        const auto t = fit_frame(frame, FamilyKind::Poisson, LinkKind::Log);
        const auto vc = sandwich_variance(t.fit, t.frame, t.design);

        // Reverse the PSU labels inside each stratum.
        auto relabeled = frame;
        for (auto& psu : relabeled.psus) psu = "z" + std::string(psu.rbegin(), psu.rend());
        const auto t2 = fit_frame(relabeled, FamilyKind::Poisson, LinkKind::Log);
        EXPECT_LT(oracle::max_rel_err(sandwich_variance(t2.fit, t2.frame, t2.design).vbeta, vc.vbeta), 1e-12);

        auto scaled = frame;
        for (auto& w : scaled.weights) w *= 123.0;
        const auto t3 = fit_frame(scaled, FamilyKind::Poisson, LinkKind::Log);
        EXPECT_LT(oracle::max_rel_err(sandwich_variance(t3.fit, t3.frame, t3.design).vbeta, vc.vbeta), 1e-9);
    }
}

TEST(SandwichProperty, FpcMonotone) {
    std::mt19937_64 rng(61);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::VectorXd beta = instances::random_beta(rng, FamilyKind::Normal, LinkKind::Identity, 2);
        auto frame = instances::random_survey_frame(rng, FamilyKind::Normal, LinkKind::Identity, 2, 2, beta, 1.0, false);
        const auto t = fit_frame(frame);
        const auto low = sandwich_variance(t.fit, t.frame, t.design);
        auto raised = t.frame;
        for (std::size_t i = 0; i < raised.fpc.size(); ++i)
            if (raised.strata[i] == "h0") raised.fpc[i] = 0.3;
        const auto high = sandwich_variance(t.fit, raised, t.design);
        for (Eigen::Index j = 0; j < 2; ++j) {
            EXPECT_LE(high.stratum_G.at("h0")(j, j), low.stratum_G.at("h0")(j, j));
            EXPECT_NEAR(high.stratum_G.at("h0")(j, j), 0.7 * low.stratum_G.at("h0")(j, j), 1e-12 * low.G(j, j));
            EXPECT_EQ(high.stratum_G.at("h1")(j, j), low.stratum_G.at("h1")(j, j));
        }
    }
}

TEST(SandwichProperty, ScoresSumToZeroAtOptimum) {
    std::mt19937_64 rng(71);
    for (auto [f, l] : instances::family_link_pairs()) {
        const auto inst = instances::random_glm_instance(rng, f, l, 30, 50, 3);
        FitResult fit;
        try {
            fit = fit_pseudo_mle(inst.frame, inst.family, inst.link);
        } catch (const Error&) {
            continue;
        }
        Eigen::VectorXd total = Eigen::VectorXd::Zero(inst.frame.p());
        for (const auto& [k, e] : psu_score_sums(fit, inst.frame)) total += e;
        EXPECT_LT(total.cwiseAbs().maxCoeff(), 1e-8) << to_string(f) << "/" << to_string(l);
    }
}
