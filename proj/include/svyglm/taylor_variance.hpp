#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svyglm/model_frame.hpp"
#include "svyglm/pseudo_mle.hpp"
#include "svyglm/survey_design.hpp"

namespace svyglm {

// Treatment of strata that contain a single PSU.
enum class SingletonPolicy {
    Error,      // refuse (default)
    Centered,   // deviation from the grand mean of all PSU totals
    Certainty,  // stratum contributes nothing
};

// Which n enters the small-sample factor (n - 1) / (n - p).
enum class SmallSampleFactor {
    Observations,   // n = number of observations in the frame (default)
    Psus,           // n = number of PSUs
    None,           // factor fixed at 1
};

struct VarianceOptions {
    SingletonPolicy singleton = SingletonPolicy::Error;
    SmallSampleFactor factor = SmallSampleFactor::Observations;
};

std::string_view to_string(SingletonPolicy p);
SingletonPolicy parse_singleton_policy(std::string_view name);
std::string_view to_string(SmallSampleFactor f);
SmallSampleFactor parse_small_sample_factor(std::string_view name);

using PsuKey = std::pair<std::string, std::string>;   // (stratum, psu)

struct VarianceComponents {
    Eigen::MatrixXd Q;
    std::map<PsuKey, Eigen::VectorXd> score_psu;            // e_hi.
    std::map<std::string, Eigen::VectorXd> stratum_means;   // ebar_h..
    // Per-stratum n_h (1 - f_h) / (n_h - 1) * sum_i (e_hi - ebar)(e_hi - ebar)',
    // before the small-sample factor.
    std::map<std::string, Eigen::MatrixXd> stratum_G;
    double small_sample_factor = 1.0;
    Eigen::MatrixXd G;
    Eigen::MatrixXd vbeta;
    double df_design = 0.0;   // n_psu - H
};

// e_hi. = sum_j w (y - mu) / (V(mu) g'(mu)) x over the rows of each PSU.
std::map<PsuKey, Eigen::VectorXd> psu_score_sums(const FitResult& fit, const ModelFrame& frame);

VarianceComponents sandwich_variance(const FitResult& fit, const ModelFrame& frame,
                                     const DesignSummary& design, const VarianceOptions& options = {});

}  // namespace svyglm
