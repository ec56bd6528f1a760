#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "svyglm/survey_design.hpp"

namespace svyglm {

namespace term {
struct Numeric {
    std::string column;
};
// Indicator coding against a reference level. Without a reference the
// lexicographically first observed level is used.
struct Categorical {
    std::string column;
    std::optional<std::string> reference;
};
struct Centered {
    std::string column;
    bool weighted = true;
};
}  // namespace term

using Term = std::variant<term::Numeric, term::Categorical, term::Centered>;

struct ModelSpec {
    std::string response;
    std::vector<Term> terms;
    bool intercept = true;
};

const std::string& term_column(const Term& t);

struct ModelFrame {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> column_labels;
    std::vector<std::size_t> kept_rows;      // indices into the source dataset
    std::vector<std::size_t> dropped_rows;

    std::vector<double> weights;
    std::vector<std::string> strata;
    std::vector<std::string> psus;
    std::vector<double> fpc;                 // f_h of each kept row's stratum

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
    Eigen::Map<const Eigen::VectorXd> weight_vector() const {
        return {weights.data(), static_cast<Eigen::Index>(weights.size())};
    }
};

ModelFrame build_model_frame(const SurveyDataset& ds, const ModelSpec& spec);

DesignSummary design_summary(const ModelFrame& frame);

// Column labels: "(Intercept)", the column name for numeric terms,
// "name=Level" per indicator, "center(name)" for centered terms.
inline constexpr const char* kInterceptLabel = "(Intercept)";

}  // namespace svyglm

namespace svyglm {

// Frame over an already-built design matrix. Without design vectors every
// row is its own PSU in a single stratum with f = 0.
ModelFrame make_frame(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<double> weights,
                      std::vector<std::string> strata = {}, std::vector<std::string> psus = {},
                      std::vector<double> fpc = {});

}  // namespace svyglm
