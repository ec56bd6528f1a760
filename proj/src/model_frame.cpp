#include "svyglm/model_frame.hpp"

#include <algorithm>
#include <set>

#include "svyglm/error.hpp"

namespace svyglm {

const std::string& term_column(const Term& t) {
    return std::visit([](const auto& x) -> const std::string& { return x.column; }, t);
}

namespace {

const Column& numeric_column(const SurveyDataset& ds, const std::string& name, const char* role) {
    if (!ds.has_column(name))
        throw Error(ErrorKind::UnknownColumn, std::string(role) + " column '" + name + "' not found");
    const Column& c = ds.column(name);
    if (!c.numeric)
        throw Error(ErrorKind::NonNumericColumn,
                    std::string(role) + " column '" + name + "' has non-numeric values");
    return c;
}

struct Levels {
    std::vector<std::string> kept;   // non-reference levels, lexicographic
    std::string reference;
};

}  // namespace

ModelFrame build_model_frame(const SurveyDataset& ds, const ModelSpec& spec) {
    const Column& response = numeric_column(ds, spec.response, "response");
    for (const auto& t : spec.terms) {
        if (!ds.has_column(term_column(t)))
            throw Error(ErrorKind::UnknownColumn, "term column '" + term_column(t) + "' not found");
        if (!std::holds_alternative<term::Categorical>(t)) numeric_column(ds, term_column(t), "term");
    }

    // Listwise deletion on the response and every term column.
    ModelFrame f;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        bool keep = !response.is_missing(i);
        for (const auto& t : spec.terms) keep = keep && !ds.column(term_column(t)).is_missing(i);
        (keep ? f.kept_rows : f.dropped_rows).push_back(i);
    }
    if (f.kept_rows.empty()) throw Error(ErrorKind::AllRowsDropped, "no complete rows for the model");

    const auto n = static_cast<Eigen::Index>(f.kept_rows.size());
    for (std::size_t i : f.kept_rows) {
        f.weights.push_back(ds.weights()[i]);
        f.strata.push_back(ds.strata()[i]);
        f.psus.push_back(ds.psus()[i]);
        f.fpc.push_back(ds.fpc(ds.strata()[i]));
    }
    double sum_w = 0.0;
    for (double w : f.weights) sum_w += w;

    f.y.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) f.y(r) = response.values[f.kept_rows[r]];

    std::vector<Eigen::VectorXd> cols;
    if (spec.intercept) {
        cols.push_back(Eigen::VectorXd::Ones(n));
        f.column_labels.emplace_back(kInterceptLabel);
    }
    for (const auto& t : spec.terms) {
        const Column& c = ds.column(term_column(t));
        if (const auto* num = std::get_if<term::Numeric>(&t)) {
            Eigen::VectorXd v(n);
            for (Eigen::Index r = 0; r < n; ++r) v(r) = c.values[f.kept_rows[r]];
            cols.push_back(std::move(v));
            f.column_labels.push_back(num->column);
        } else if (const auto* cen = std::get_if<term::Centered>(&t)) {
            Eigen::VectorXd v(n);
            double num_sum = 0.0;
            for (Eigen::Index r = 0; r < n; ++r) {
                v(r) = c.values[f.kept_rows[r]];
                num_sum += (cen->weighted ? f.weights[r] : 1.0) * v(r);
            }
            const double mean = num_sum / (cen->weighted ? sum_w : static_cast<double>(n));
            v.array() -= mean;
            cols.push_back(std::move(v));
            f.column_labels.push_back("center(" + cen->column + ")");
        } else {
            const auto& cat = std::get<term::Categorical>(t);
            std::set<std::string> observed;
            for (std::size_t i : f.kept_rows) observed.insert(c.raw[i]);
            Levels lv;
            lv.reference = cat.reference.value_or(*observed.begin());
            if (!observed.count(lv.reference))
                throw Error(ErrorKind::UnknownReferenceLevel,
                            "reference level '" + lv.reference + "' not observed in column '" +
                                cat.column + "'");
            for (const auto& l : observed)
                if (l != lv.reference) lv.kept.push_back(l);
            for (const auto& level : lv.kept) {
                Eigen::VectorXd v(n);
                for (Eigen::Index r = 0; r < n; ++r) v(r) = c.raw[f.kept_rows[r]] == level ? 1.0 : 0.0;
                cols.push_back(std::move(v));
                f.column_labels.push_back(cat.column + "=" + level);
            }
        }
    }
    if (cols.empty()) throw Error(ErrorKind::Formula, "model has no columns");

    std::vector<std::string> sorted = f.column_labels;
    std::sort(sorted.begin(), sorted.end());
    if (auto it = std::adjacent_find(sorted.begin(), sorted.end()); it != sorted.end())
        throw Error(ErrorKind::Formula, "duplicate model column '" + *it + "'");

    f.X.resize(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) f.X.col(static_cast<Eigen::Index>(j)) = cols[j];
    return f;
}

DesignSummary design_summary(const ModelFrame& frame) {
    return design_summary(frame.weights, frame.strata, frame.psus);
}

}  // namespace svyglm

namespace svyglm {

ModelFrame make_frame(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<double> weights,
                      std::vector<std::string> strata, std::vector<std::string> psus,
                      std::vector<double> fpc) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (static_cast<std::size_t>(y.size()) != n || weights.size() != n ||
        (!strata.empty() && strata.size() != n) || (!psus.empty() && psus.size() != n) ||
        (!fpc.empty() && fpc.size() != n))
        throw Error(ErrorKind::DimensionMismatch, "frame vectors do not match the design rows");
    ModelFrame f;
    f.X = std::move(X);
    f.y = std::move(y);
    f.weights = std::move(weights);
    f.strata = strata.empty() ? std::vector<std::string>(n, "0") : std::move(strata);
    if (psus.empty())
        for (std::size_t i = 0; i < n; ++i) f.psus.push_back("row" + std::to_string(i + 1));
    else
        f.psus = std::move(psus);
    f.fpc = fpc.empty() ? std::vector<double>(n, 0.0) : std::move(fpc);
    for (Eigen::Index j = 0; j < f.X.cols(); ++j)
        f.column_labels.push_back("x" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) f.kept_rows.push_back(i);
    return f;
}

}  // namespace svyglm
