#include "svyglm/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>

#include "svyglm/csv.hpp"

namespace svyglm {

namespace {

// Non-finite values have no JSON representation and become null.
nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string g6(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string g17(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

nlohmann::json to_json(const FitReport& r) {
    using nlohmann::json;
    json j;
    j["schema"] = kReportSchema;
    j["schema_version"] = kReportSchemaVersion;
    j["data"] = r.data_path;
    j["model"] = {{"formula", r.formula},
                  {"family", to_string(r.fit.family.kind)},
                  {"link", to_string(r.fit.link.kind)},
                  {"dispersion_rule", to_string(r.fit.family.dispersion)},
                  {"columns", r.column_labels}};
    if (r.fit.family.ancillary) j["model"]["negative_binomial_k"] = *r.fit.family.ancillary;

    json strata = json::array();
    for (const auto& s : r.design.n_h) strata.push_back({{"stratum", s.label}, {"psus", s.psus}});
    j["design"] = {{"rows_read", r.rows_read},       {"rows_dropped", r.rows_dropped},
                   {"n", r.design.n},                {"strata", r.design.H},
                   {"psus", r.design.n_psu},         {"sum_weights", r.design.sum_weights},
                   {"psus_per_stratum", strata},     {"singleton_policy", to_string(r.variance_options.singleton)},
                   {"small_sample_factor", to_string(r.variance_options.factor)}};

    j["fit"] = {{"converged", r.fit.converged},
                {"iterations", r.fit.iterations},
                {"ridge_retries", r.fit.ridge_retries},
                {"floored_means", r.fit.floored_means},
                {"loglik", num(r.fit.loglik)},
                {"dispersion", num(r.fit.phi)},
                {"beta", json::array()}};
    for (Eigen::Index k = 0; k < r.fit.beta.size(); ++k) j["fit"]["beta"].push_back(num(r.fit.beta(k)));

    if (!r.has_variance) {
        j["variance_error"] = r.variance_error;
        j["coefficients"] = json::array();
        j["tests"] = json::array();
        return j;
    }
    j["inference"] = {{"df_mode", to_string(r.df_mode)}, {"ddf", num(r.table.ddf)}, {"level", r.table.level}};
    json coefs = json::array();
    for (const auto& row : r.table.rows) {
        json c = {{"label", row.label}, {"estimate", num(row.estimate)}, {"se", num(row.se)},
                  {"t", num(row.t)},    {"p", num(row.p)},               {"ci_lower", num(row.ci_lower)},
                  {"ci_upper", num(row.ci_upper)}};
        if (r.ratio_column()) {
            c["risk_ratio"] = num(std::exp(row.estimate));
            c["risk_ratio_ci_lower"] = num(std::exp(row.ci_lower));
            c["risk_ratio_ci_upper"] = num(std::exp(row.ci_upper));
        }
        coefs.push_back(std::move(c));
    }
    j["coefficients"] = std::move(coefs);
    json tests = json::array();
    for (const auto& t : r.tests)
        tests.push_back({{"name", t.name}, {"f", num(t.f_stat)}, {"ndf", num(t.ndf)}, {"ddf", num(t.ddf)},
                         {"p", num(t.p_value)}, {"df_mode", to_string(t.df_mode)}});
    j["tests"] = std::move(tests);
    return j;
}

void write_text(std::ostream& out, const FitReport& r) {
    out << "Survey-weighted GLM: " << r.formula << "\n";
    out << "Family: " << to_string(r.fit.family.kind) << "   Link: " << to_string(r.fit.link.kind)
        << "   Dispersion rule: " << to_string(r.fit.family.dispersion) << "\n";
    if (r.fit.family.ancillary) out << "Negative binomial k: " << g6(*r.fit.family.ancillary) << "\n";
    out << "\nDesign\n";
    out << "  observations: " << r.design.n << " (" << r.rows_dropped << " dropped of " << r.rows_read << ")\n";
    out << "  strata: " << r.design.H << "   PSUs: " << r.design.n_psu
        << "   sum of weights: " << g6(r.design.sum_weights) << "\n";
    out << "\nFit\n";
    out << "  converged: " << (r.fit.converged ? "yes" : "no") << "   iterations: " << r.fit.iterations
        << "   ridge retries: " << r.fit.ridge_retries << "\n";
    out << "  pseudo log-likelihood: " << g6(r.fit.loglik) << "   dispersion: " << g6(r.fit.phi) << "\n";
    if (r.fit.floored_means > 0)
        out << "  warning: " << r.fit.floored_means
            << " fitted means sit on the domain boundary; the linearization assumes an interior optimum\n";

    if (!r.has_variance) {
        out << "\nCovariance unavailable: " << r.variance_error << "\n";
        out << "\nEstimates\n";
        for (std::size_t k = 0; k < r.column_labels.size(); ++k)
            out << "  " << pad(r.column_labels[k], 24, true) << pad(g6(r.fit.beta(static_cast<Eigen::Index>(k))), 14)
                << "\n";
        return;
    }

    const int pct = static_cast<int>(std::lround(100.0 * r.table.level));
    out << "\nCoefficients (Taylor linearization SE, ddf = " << g6(r.table.ddf) << ", df mode "
        << to_string(r.df_mode) << ")\n";
    std::size_t width = 12;
    for (const auto& row : r.table.rows) width = std::max(width, row.label.size() + 2);
    out << "  " << pad("Term", width, true) << pad("Est", 13) << pad("SE", 13) << pad("t", 13) << pad("p", 13)
        << pad("CI" + std::to_string(pct) + " lo", 13) << pad("CI" + std::to_string(pct) + " hi", 13);
    if (r.ratio_column()) out << pad("RR", 13);
    out << "\n";
    for (const auto& row : r.table.rows) {
        out << "  " << pad(row.label, width, true) << pad(g6(row.estimate), 13) << pad(g6(row.se), 13)
            << pad(g6(row.t), 13) << pad(g6(row.p), 13) << pad(g6(row.ci_lower), 13) << pad(g6(row.ci_upper), 13);
        if (r.ratio_column()) out << pad(g6(std::exp(row.estimate)), 13);
        out << "\n";
    }
    if (r.ratio_column()) out << "  RR = exp(Est), risk ratio\n";

    if (!r.tests.empty()) {
        out << "\nWald tests\n";
        for (const auto& t : r.tests)
            out << "  " << t.name << ": F = " << g6(t.f_stat) << ", ndf = " << g6(t.ndf) << ", ddf = " << g6(t.ddf)
                << ", p = " << g6(t.p_value) << "\n";
    }
}

void write_csv(std::ostream& out, const FitReport& r) {
    std::vector<std::string> header{"label", "estimate", "se", "t", "p", "ci_lower", "ci_upper"};
    if (r.ratio_column()) header.push_back("risk_ratio");
    csv::write_row(out, header);
    if (!r.has_variance) {
        for (std::size_t k = 0; k < r.column_labels.size(); ++k) {
            std::vector<std::string> cells(header.size());
            cells[0] = r.column_labels[k];
            cells[1] = g17(r.fit.beta(static_cast<Eigen::Index>(k)));
            csv::write_row(out, cells);
        }
        return;
    }
    for (const auto& row : r.table.rows) {
        std::vector<std::string> cells{row.label, g17(row.estimate), g17(row.se),      g17(row.t),
                                       g17(row.p), g17(row.ci_lower), g17(row.ci_upper)};
        if (r.ratio_column()) cells.push_back(g17(std::exp(row.estimate)));
        csv::write_row(out, cells);
    }
}

}  // namespace svyglm
