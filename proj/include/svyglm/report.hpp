#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "svyglm/family_link.hpp"
#include "svyglm/pseudo_mle.hpp"
#include "svyglm/survey_design.hpp"
#include "svyglm/taylor_variance.hpp"
#include "svyglm/wald_inference.hpp"

namespace svyglm {

inline constexpr const char* kReportSchema = "svyglm.fit-report";
inline constexpr int kReportSchemaVersion = 1;

struct FitReport {
    std::string data_path;
    std::string formula;
    std::vector<std::string> column_labels;
    std::size_t rows_read = 0;
    std::size_t rows_dropped = 0;
    DesignSummary design;
    VarianceOptions variance_options;
    DfMode df_mode;
    FitResult fit;
    bool has_variance = false;
    std::string variance_error;   // why the covariance is absent
    CoefficientTable table;
    std::vector<WaldResult> tests;

    // exp(beta) is reported for log links; "risk_ratio" names it.
    bool ratio_column() const { return fit.link.kind == LinkKind::Log; }
};

nlohmann::json to_json(const FitReport& report);
void write_text(std::ostream& out, const FitReport& report);
void write_csv(std::ostream& out, const FitReport& report);

}  // namespace svyglm
