#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace svyglm {

// One column of the input table. Raw cell text is kept for every column so
// categorical levels and round-trip serialization see exactly what was read.
struct Column {
    std::string name;
    bool numeric = false;
    std::vector<std::string> raw;
    std::vector<double> values;   // NaN where missing or non-numeric
    std::vector<bool> missing;

    bool is_missing(std::size_t row) const { return missing[row]; }
};

// Names of the design columns. An unset binding selects the default:
// unit weights, a single stratum "0", one PSU per row, f_h = 0.
struct DesignBindings {
    std::optional<std::string> weight;
    std::optional<std::string> stratum;
    std::optional<std::string> psu;
    std::optional<std::string> fpc;
};

// Immutable after load. Row-aligned design vectors sit next to the data
// columns; the PSU label is unique only within its stratum's namespace
// after validation guarantees it maps to one stratum.
class SurveyDataset {
public:
    std::size_t rows() const { return weight_.size(); }

    const std::vector<Column>& columns() const { return columns_; }
    const Column& column(const std::string& name) const;
    bool has_column(const std::string& name) const;

    const std::vector<double>& weights() const { return weight_; }
    const std::vector<std::string>& strata() const { return stratum_; }
    const std::vector<std::string>& psus() const { return psu_; }
    double fpc(const std::string& stratum) const { return fpc_.at(stratum); }
    const std::map<std::string, double>& fpc_by_stratum() const { return fpc_; }
    const DesignBindings& bindings() const { return bindings_; }

private:
    friend SurveyDataset load_dataset(std::istream&, const DesignBindings&);

    std::vector<Column> columns_;
    std::vector<double> weight_;
    std::vector<std::string> stratum_;
    std::vector<std::string> psu_;
    std::map<std::string, double> fpc_;
    DesignBindings bindings_;
};

struct StratumCount {
    std::string label;
    std::size_t psus = 0;
};

struct DesignSummary {
    std::size_t H = 0;                    // strata
    std::vector<StratumCount> n_h;        // lexicographic by stratum label
    std::size_t n = 0;                    // observations
    std::size_t n_psu = 0;
    double sum_weights = 0.0;
};

SurveyDataset load_dataset(std::istream& source, const DesignBindings& design = {});
SurveyDataset load_dataset_file(const std::string& path, const DesignBindings& design = {});

DesignSummary design_summary(const SurveyDataset& ds);

// Design counts over an arbitrary row-aligned design (used for the rows a
// model frame keeps after listwise deletion).
DesignSummary design_summary(const std::vector<double>& weights,
                             const std::vector<std::string>& strata,
                             const std::vector<std::string>& psus);

// Writes the dataset as CSV. Design variables that used defaults are emitted
// as extra columns (_weight, _stratum, _psu, _fpc); the returned bindings
// reload the file to an equivalent design.
DesignBindings write_dataset(std::ostream& out, const SurveyDataset& ds);

}  // namespace svyglm
