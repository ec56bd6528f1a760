#pragma once

// Random problem generators shared by the unit and acceptance suites.

#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svyglm/family_link.hpp"
#include "svyglm/model_frame.hpp"

namespace instances {

using svyglm::FamilyKind;
using svyglm::LinkKind;

inline std::vector<std::pair<FamilyKind, LinkKind>> family_link_pairs() {
    std::vector<std::pair<FamilyKind, LinkKind>> out;
    for (auto f : {FamilyKind::Normal, FamilyKind::Poisson, FamilyKind::Binomial, FamilyKind::Gamma,
                   FamilyKind::NegativeBinomial, FamilyKind::InverseGaussian})
        for (auto l : {LinkKind::Identity, LinkKind::Log, LinkKind::Logit, LinkKind::Inverse})
            if (svyglm::link_supported(f, l)) out.emplace_back(f, l);
    return out;
}

// Range of the linear predictor that keeps the mean well inside the domain.
inline std::pair<double, double> eta_range(FamilyKind f, LinkKind l) {
    switch (l) {
        case LinkKind::Identity:
            if (f == FamilyKind::Normal) return {-5.0, 5.0};
            if (f == FamilyKind::Binomial) return {0.15, 0.85};
            return {0.5, 5.0};
        case LinkKind::Log:
            if (f == FamilyKind::Binomial) return {-3.0, -0.2};
            return {-1.0, 2.0};
        case LinkKind::Logit: return {-3.0, 3.0};
        case LinkKind::Inverse: return {0.2, 2.0};
    }
    return {-1.0, 1.0};
}

inline double draw_response(std::mt19937_64& rng, FamilyKind f, double mu, double phi, double k) {
    switch (f) {
        case FamilyKind::Normal: return mu + std::sqrt(phi) * std::normal_distribution<double>()(rng);
        case FamilyKind::Poisson: return static_cast<double>(std::poisson_distribution<int>(mu)(rng));
        case FamilyKind::Binomial: return std::uniform_real_distribution<double>()(rng) < mu ? 1.0 : 0.0;
        case FamilyKind::Gamma: return std::gamma_distribution<double>(1.0 / phi, mu * phi)(rng);
        case FamilyKind::NegativeBinomial: {
            const double rate = k > 0 ? std::gamma_distribution<double>(1.0 / k, k * mu)(rng) : mu;
            return static_cast<double>(std::poisson_distribution<int>(rate)(rng));
        }
        case FamilyKind::InverseGaussian:
            // Any positive value is in the support; a lognormal around mu suffices.
            return mu * std::exp(0.3 * std::normal_distribution<double>()(rng));
    }
    return mu;
}

struct GlmInstance {
    svyglm::ModelFrame frame;
    svyglm::Family family;
    svyglm::Link link;
    Eigen::VectorXd beta;   // a point with the mean inside the domain
    double phi = 1.0;
};

inline Eigen::VectorXd random_beta(std::mt19937_64& rng, FamilyKind f, LinkKind l, Eigen::Index p) {
    const auto [lo, hi] = eta_range(f, l);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd beta(p);
    beta(0) = 0.5 * (lo + hi);
    // |x_j| <= 1.5, so the other terms move eta by at most 0.9 of the half-width.
    const double half = 0.5 * (hi - lo);
    for (Eigen::Index j = 1; j < p; ++j) beta(j) = u(rng) * 0.9 * half / (1.5 * static_cast<double>(p - 1));
    return beta;
}

// Design with an intercept and covariates uniform in [-1.5, 1.5].
inline Eigen::MatrixXd random_design(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p) {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < p; ++j) X(i, j) = u(rng);
    }
    return X;
}

inline GlmInstance random_glm_instance(std::mt19937_64& rng, FamilyKind f, LinkKind l, int n_min = 5,
                                       int n_max = 20, int p_max = 4, bool unit_weights = false) {
    std::uniform_int_distribution<int> n_dist(n_min, n_max), p_dist(1, p_max);
    std::uniform_real_distribution<double> w_dist(0.2, 3.0), phi_dist(0.5, 2.0), k_dist(0.1, 2.0);
    const Eigen::Index p = p_dist(rng);
    const Eigen::Index n = std::max<Eigen::Index>(n_dist(rng), p + 2);

    GlmInstance inst;
    inst.family = svyglm::make_family(f, f == FamilyKind::NegativeBinomial ? std::optional<double>(k_dist(rng))
                                                                             : std::nullopt);
    inst.link = {l};
    inst.phi = phi_dist(rng);
    const Eigen::MatrixXd X = random_design(rng, n, p);
    inst.beta = random_beta(rng, f, l, p);
    Eigen::VectorXd y(n);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = svyglm::link_invert(inst.link, X.row(i).dot(inst.beta));
        y(i) = draw_response(rng, f, mu, inst.phi, inst.family.ancillary.value_or(0.0));
        w[static_cast<std::size_t>(i)] = unit_weights ? 1.0 : w_dist(rng);
    }
    inst.frame = svyglm::make_frame(X, y, std::move(w));
    return inst;
}

// Stratified cluster sample: H strata, 2..4 PSUs each, 1..3 rows per PSU
// (at most 12 H rows).
inline svyglm::ModelFrame random_survey_frame(std::mt19937_64& rng, FamilyKind f, LinkKind l, Eigen::Index p,
                                              int H, const Eigen::VectorXd& beta, double phi,
                                              bool with_fpc = true) {
    std::uniform_int_distribution<int> psu_dist(2, 4), row_dist(1, 3);
    std::uniform_real_distribution<double> w_dist(0.2, 3.0), fpc_dist(0.0, 0.6);
    std::vector<std::string> strata, psus;
    std::vector<double> fpc;
    for (int h = 0; h < H; ++h) {
        const double fh = with_fpc ? fpc_dist(rng) : 0.0;
        const int n_psu = psu_dist(rng);
        for (int i = 0; i < n_psu; ++i) {
            const int rows = row_dist(rng);
            for (int j = 0; j < rows; ++j) {
                strata.push_back("h" + std::to_string(h));
                psus.push_back("h" + std::to_string(h) + "p" + std::to_string(i));
                fpc.push_back(fh);
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(strata.size());
    const Eigen::MatrixXd X = random_design(rng, n, p);
    Eigen::VectorXd y(n);
    std::vector<double> w;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = svyglm::link_invert({l}, X.row(i).dot(beta));
        y(i) = draw_response(rng, f, mu, phi, 0.0);
        w.push_back(w_dist(rng));
    }
    return svyglm::make_frame(X, y, std::move(w), std::move(strata), std::move(psus), std::move(fpc));
}

}  // namespace instances
