#include "svyglm/wald_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svyglm/csv.hpp"
#include "svyglm/distributions.hpp"
#include "svyglm/error.hpp"

namespace svyglm {

void ContrastMatrix::validate(Eigen::Index p) const {
    if (L.rows() < 1) throw Error(ErrorKind::DimensionMismatch, "contrast has no rows");
    if (L.cols() != p)
        throw Error(ErrorKind::DimensionMismatch, "contrast has " + std::to_string(L.cols()) +
                                                      " columns, model has " + std::to_string(p));
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != L.rows())
        throw Error(ErrorKind::DimensionMismatch, "contrast labels do not match its rows");
    if (!L.allFinite()) throw Error(ErrorKind::DimensionMismatch, "contrast has non-finite entries");
    for (Eigen::Index r = 0; r < L.rows(); ++r)
        if ((L.row(r).array() == 0.0).all())
            throw Error(ErrorKind::SingularContrast, "contrast row " + std::to_string(r + 1) + " is all zero");
}

std::string to_string(const DfMode& mode) {
    switch (mode.kind) {
        case DfMode::Kind::Design: return "design";
        case DfMode::Kind::Paper: return "paper";
        case DfMode::Kind::Fixed: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", mode.value);
            return buf;
        }
    }
    return "?";
}

DfMode parse_df_mode(std::string_view text) {
    if (text == "design") return DfMode::design();
    if (text == "paper") return DfMode::paper();
    double v = 0.0;
    if (csv::parse_real(text, v) && v > 0.0) return DfMode::fixed(v);
    throw Error(ErrorKind::InvalidArgument,
                "df mode must be 'design', 'paper' or a positive number, got '" + std::string(text) + "'");
}

double denominator_df(const DfMode& mode, const DesignSummary& design, double rank) {
    double ddf = 0.0;
    switch (mode.kind) {
        case DfMode::Kind::Design:
            ddf = static_cast<double>(design.n_psu) - static_cast<double>(design.H);
            break;
        case DfMode::Kind::Paper: ddf = design.sum_weights - rank; break;
        case DfMode::Kind::Fixed: ddf = mode.value; break;
    }
    if (!(ddf > 0.0))
        throw Error(ErrorKind::NonPositiveDf, "denominator degrees of freedom " + std::to_string(ddf) +
                                                  " are not positive (df mode " + to_string(mode) + ")");
    return ddf;
}

ContrastMatrix unit_contrast(const std::vector<std::string>& coefficient_labels,
                             const std::vector<std::string>& tested, std::string name) {
    ContrastMatrix c;
    c.L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tested.size()),
                                static_cast<Eigen::Index>(coefficient_labels.size()));
    for (std::size_t r = 0; r < tested.size(); ++r) {
        auto it = std::find(coefficient_labels.begin(), coefficient_labels.end(), tested[r]);
        if (it == coefficient_labels.end())
            throw Error(ErrorKind::UnknownColumn, "test names unknown coefficient '" + tested[r] + "'");
        c.L(static_cast<Eigen::Index>(r), it - coefficient_labels.begin()) = 1.0;
        c.labels.push_back(tested[r]);
    }
    if (name.empty())
        for (const auto& t : tested) name += (name.empty() ? "" : ",") + t;
    c.name = std::move(name);
    return c;
}

WaldResult wald_test(const Eigen::VectorXd& beta, const Eigen::MatrixXd& vbeta, const ContrastMatrix& L,
                     const DfMode& df_mode, const DesignSummary& design) {
    const Eigen::Index p = beta.size();
    if (vbeta.rows() != p || vbeta.cols() != p)
        throw Error(ErrorKind::DimensionMismatch, "covariance does not match the coefficient vector");
    L.validate(p);

    const Eigen::VectorXd lb = L.L * beta;
    Eigen::MatrixXd middle = L.L * vbeta * L.L.transpose();
    middle = 0.5 * (middle + middle.transpose()).eval();

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(middle);
    cod.setThreshold(1e-12);
    const Eigen::Index rank = cod.rank();
    if (rank == 0)
        throw Error(ErrorKind::SingularContrast, "L V L' has rank 0 for test '" + L.name + "'");

    WaldResult r;
    r.name = L.name;
    r.df_mode = df_mode;
    r.ndf = static_cast<double>(rank);
    const double quad = lb.dot(cod.pseudoInverse() * lb);
    r.f_stat = std::max(quad, 0.0) / r.ndf;
    r.ddf = denominator_df(df_mode, design, r.ndf);
    r.p_value = f_survival(r.f_stat, r.ndf, r.ddf);
    return r;
}

CoefficientTable coefficient_table(const FitResult& fit, const VarianceComponents& vc,
                                   const std::vector<std::string>& labels, const DesignSummary& design,
                                   double level, const DfMode& df_mode) {
    const Eigen::Index p = fit.beta.size();
    if (vc.vbeta.rows() != p || static_cast<Eigen::Index>(labels.size()) != p)
        throw Error(ErrorKind::DimensionMismatch, "coefficient table inputs disagree on p");
    if (!(level > 0.0 && level < 1.0))
        throw Error(ErrorKind::InvalidArgument, "confidence level must be in (0, 1)");

    CoefficientTable table;
    table.level = level;
    table.ddf = denominator_df(df_mode, design, 1.0);
    const double crit = t_quantile_upper(0.5 * (1.0 - level), table.ddf);
    for (Eigen::Index j = 0; j < p; ++j) {
        CoefficientRow row;
        row.label = labels[static_cast<std::size_t>(j)];
        row.estimate = fit.beta(j);
        row.se = std::sqrt(std::max(vc.vbeta(j, j), 0.0));
        if (row.se > 0.0) {
            row.t = row.estimate / row.se;
            row.p = t_two_sided_p(row.t, table.ddf);
        } else {
            row.t = row.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), row.estimate);
            row.p = row.estimate == 0.0 ? 1.0 : 0.0;
        }
        row.ci_lower = row.estimate - crit * row.se;
        row.ci_upper = row.estimate + crit * row.se;
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace svyglm
