#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svyglm/pseudo_mle.hpp"
#include "svyglm/survey_design.hpp"
#include "svyglm/taylor_variance.hpp"

namespace svyglm {

struct ContrastMatrix {
    Eigen::MatrixXd L;                 // q x p
    std::vector<std::string> labels;   // one per row
    std::string name;

    void validate(Eigen::Index p) const;
};

// Denominator degrees of freedom for Wald F and coefficient t tests.
struct DfMode {
    enum class Kind { Design, Paper, Fixed } kind = Kind::Design;
    double value = 0.0;   // used by Fixed

    static DfMode design() { return {Kind::Design, 0.0}; }
    static DfMode paper() { return {Kind::Paper, 0.0}; }
    static DfMode fixed(double v) { return {Kind::Fixed, v}; }
};

std::string to_string(const DfMode& mode);
// "design", "paper", or a positive number (fixed).
DfMode parse_df_mode(std::string_view text);

// ddf for a test of the given rank: n_psu - H (design), sum of weights minus
// rank (paper), or the fixed value.
double denominator_df(const DfMode& mode, const DesignSummary& design, double rank);

struct WaldResult {
    std::string name;
    double f_stat = 0.0;
    double ndf = 0.0;
    double ddf = 0.0;
    double p_value = 1.0;
    DfMode df_mode;
};

// Unit-row contrast over named coefficients; throws UnknownColumn for a
// label that is not a model column.
ContrastMatrix unit_contrast(const std::vector<std::string>& coefficient_labels,
                             const std::vector<std::string>& tested, std::string name = {});

// F = (L b)' (L V L')^+ (L b) / rank(L V L'), rank from a complete
// orthogonal decomposition with relative threshold 1e-12.
WaldResult wald_test(const Eigen::VectorXd& beta, const Eigen::MatrixXd& vbeta, const ContrastMatrix& L,
                     const DfMode& df_mode, const DesignSummary& design);

struct CoefficientRow {
    std::string label;
    double estimate = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p = 1.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
};

struct CoefficientTable {
    std::vector<CoefficientRow> rows;
    double level = 0.95;
    double ddf = 0.0;
};

CoefficientTable coefficient_table(const FitResult& fit, const VarianceComponents& vc,
                                   const std::vector<std::string>& labels, const DesignSummary& design,
                                   double level = 0.95, const DfMode& df_mode = DfMode::design());

}  // namespace svyglm
