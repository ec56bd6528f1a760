#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "svyglm/family_link.hpp"
#include "svyglm/model_frame.hpp"

namespace svyglm {

struct FitConfig {
    int max_iter = 50;
    double tol = 1e-10;        // relative change in the pseudo log-likelihood
    double beta_tol = 1e-8;    // max |delta beta|
    double ridge_init = 1e-4;
    double ridge_growth = 10.0;
    int max_ridge_steps = 40;
    double mu_floor = 1e-10;
    double phi_floor = 1e-10;
    std::optional<Eigen::VectorXd> start;
    // Moment update of the negative-binomial k between fits, so that the
    // Pearson statistic over (sum w - p) equals one.
    bool estimate_nb_k = false;
    int max_k_updates = 50;

    void validate() const;
};

struct FitResult {
    Eigen::VectorXd beta;
    Eigen::VectorXd eta;
    Eigen::VectorXd mu;
    double phi = 1.0;
    double loglik = 0.0;
    std::vector<double> loglik_trace;   // starting value first, then each accepted step
    int iterations = 0;
    int ridge_retries = 0;
    bool converged = false;
    // Rows whose mean g^-1(eta) had to be moved onto the domain floor; a
    // nonzero count means the optimum lies on the boundary of the mean space.
    int floored_means = 0;
    Eigen::MatrixXd neg_hessian;
    Eigen::VectorXd we_diag;
    Family family;                      // carries the final k when it was estimated
    Link link;
};

struct HessianResult {
    Eigen::MatrixXd H;     // -X' W0 X
    Eigen::VectorXd w0;    // diagonal of W0
    Eigen::VectorXd we;    // expected-information weights w / (V g'^2 phi)
};

// Means g^-1(X beta), floored into the family's mean domain.
Eigen::VectorXd mean_vector(const ModelFrame& frame, const Family& family, Link link,
                            const Eigen::VectorXd& beta, double mu_floor = 1e-10);

double weighted_loglik(const ModelFrame& frame, const Family& family, Link link,
                       const Eigen::VectorXd& beta, double phi, double mu_floor = 1e-10);

Eigen::VectorXd score_vector(const ModelFrame& frame, const Family& family, Link link,
                             const Eigen::VectorXd& beta, double phi, double mu_floor = 1e-10);

HessianResult hessian_matrix(const ModelFrame& frame, const Family& family, Link link,
                             const Eigen::VectorXd& beta, double phi, double mu_floor = 1e-10);

// Ridge-stabilized Newton-Raphson on the weighted log-likelihood. Throws
// RankDeficient for an aliased design; a fit that runs out of iterations is
// returned with converged = false.
FitResult fit_pseudo_mle(const ModelFrame& frame, const Family& family, Link link,
                         const FitConfig& config = {});

}  // namespace svyglm
