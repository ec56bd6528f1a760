#include "svyglm/survey_design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include "svyglm/csv.hpp"
#include "svyglm/error.hpp"

namespace svyglm {

namespace {

Column make_column(const csv::Table& table, std::size_t j) {
    Column col;
    col.name = table.header[j];
    const std::size_t n = table.rows.size();
    col.raw.reserve(n);
    col.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    col.missing.assign(n, false);
    bool numeric = true;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& cell = table.rows[i][j];
        col.raw.push_back(cell);
        if (csv::is_missing(cell)) {
            col.missing[i] = true;
            continue;
        }
        double v = 0.0;
        if (csv::parse_real(cell, v))
            col.values[i] = v;
        else
            numeric = false;
    }
    col.numeric = numeric;
    if (!numeric) std::fill(col.values.begin(), col.values.end(), std::numeric_limits<double>::quiet_NaN());
    return col;
}

const Column& bound_column(const std::vector<Column>& cols, const std::string& name,
                           const char* role) {
    for (const auto& c : cols)
        if (c.name == name) return c;
    throw Error(ErrorKind::MissingColumn,
                std::string(role) + " column '" + name + "' not found in input");
}

std::string line_ref(const csv::Table& t, std::size_t row) {
    return "line " + std::to_string(t.lines[row]);
}

std::string unused_name(const SurveyDataset& ds, std::string name) {
    while (ds.has_column(name)) name.insert(name.begin(), '_');
    return name;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

const Column& SurveyDataset::column(const std::string& name) const {
    for (const auto& c : columns_)
        if (c.name == name) return c;
    throw Error(ErrorKind::UnknownColumn, "unknown column '" + name + "'");
}

bool SurveyDataset::has_column(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const Column& c) { return c.name == name; });
}

SurveyDataset load_dataset(std::istream& source, const DesignBindings& design) {
    const csv::Table table = csv::read(source);
    const std::size_t n = table.rows.size();
    if (n == 0) throw Error(ErrorKind::EmptyData, "input has a header but no data rows");

    SurveyDataset ds;
    ds.bindings_ = design;
    ds.columns_.reserve(table.header.size());
    for (std::size_t j = 0; j < table.header.size(); ++j) ds.columns_.push_back(make_column(table, j));

    // Resolve every binding before validating values so a missing column is
    // reported ahead of bad cells in another one.
    const Column* wcol = design.weight ? &bound_column(ds.columns_, *design.weight, "weight") : nullptr;
    const Column* scol = design.stratum ? &bound_column(ds.columns_, *design.stratum, "stratum") : nullptr;
    const Column* pcol = design.psu ? &bound_column(ds.columns_, *design.psu, "psu") : nullptr;
    const Column* fcol = design.fpc ? &bound_column(ds.columns_, *design.fpc, "fpc") : nullptr;

    ds.weight_.assign(n, 1.0);
    if (wcol) {
        for (std::size_t i = 0; i < n; ++i) {
            double w = 0.0;
            if (!csv::parse_real(wcol->raw[i], w) || !(w > 0.0))
                throw Error(ErrorKind::BadWeight, line_ref(table, i) + ": weight '" + wcol->raw[i] +
                                                      "' is not a positive finite number");
            ds.weight_[i] = w;
        }
    }

    ds.stratum_.assign(n, "0");
    if (scol) {
        for (std::size_t i = 0; i < n; ++i) {
            if (csv::is_missing(scol->raw[i]))
                throw Error(ErrorKind::MissingDesignValue, line_ref(table, i) + ": missing stratum");
            ds.stratum_[i] = scol->raw[i];
        }
    }

    ds.psu_.resize(n);
    if (pcol) {
        std::map<std::string, std::string> owner;
        for (std::size_t i = 0; i < n; ++i) {
            if (csv::is_missing(pcol->raw[i]))
                throw Error(ErrorKind::MissingDesignValue, line_ref(table, i) + ": missing psu");
            ds.psu_[i] = pcol->raw[i];
            auto [it, inserted] = owner.emplace(ds.psu_[i], ds.stratum_[i]);
            if (!inserted && it->second != ds.stratum_[i])
                throw Error(ErrorKind::PsuStratumConflict,
                            line_ref(table, i) + ": psu '" + ds.psu_[i] + "' appears in strata '" +
                                it->second + "' and '" + ds.stratum_[i] + "'");
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) ds.psu_[i] = "row" + std::to_string(i + 1);
    }

    for (const auto& h : ds.stratum_) ds.fpc_.emplace(h, 0.0);
    if (fcol) {
        std::map<std::string, double> seen;
        for (std::size_t i = 0; i < n; ++i) {
            double f = 0.0;
            if (!csv::parse_real(fcol->raw[i], f) || f < 0.0 || f >= 1.0)
                throw Error(ErrorKind::BadFpc, line_ref(table, i) + ": fpc '" + fcol->raw[i] +
                                                   "' is not in [0, 1)");
            auto [it, inserted] = seen.emplace(ds.stratum_[i], f);
            if (!inserted && it->second != f)
                throw Error(ErrorKind::BadFpc, line_ref(table, i) + ": fpc differs within stratum '" +
                                                   ds.stratum_[i] + "'");
            ds.fpc_[ds.stratum_[i]] = f;
        }
    }
    return ds;
}

SurveyDataset load_dataset_file(const std::string& path, const DesignBindings& design) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
    try {
        return load_dataset(in, design);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

DesignSummary design_summary(const std::vector<double>& weights,
                             const std::vector<std::string>& strata,
                             const std::vector<std::string>& psus) {
    DesignSummary s;
    s.n = weights.size();
    std::map<std::string, std::set<std::string>> members;
    for (std::size_t i = 0; i < s.n; ++i) {
        members[strata[i]].insert(psus[i]);
        s.sum_weights += weights[i];
    }
    s.H = members.size();
    for (const auto& [label, set] : members) {
        s.n_h.push_back({label, set.size()});
        s.n_psu += set.size();
    }
    return s;
}

DesignSummary design_summary(const SurveyDataset& ds) {
    return design_summary(ds.weights(), ds.strata(), ds.psus());
}

DesignBindings write_dataset(std::ostream& out, const SurveyDataset& ds) {
    DesignBindings b = ds.bindings();
    std::vector<std::string> header;
    for (const auto& c : ds.columns()) header.push_back(c.name);
    if (!b.weight) header.push_back(*(b.weight = unused_name(ds, "_weight")));
    if (!b.stratum) header.push_back(*(b.stratum = unused_name(ds, "_stratum")));
    if (!b.psu) header.push_back(*(b.psu = unused_name(ds, "_psu")));
    if (!b.fpc) header.push_back(*(b.fpc = unused_name(ds, "_fpc")));
    csv::write_row(out, header);

    const auto& given = ds.bindings();
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        cells.clear();
        for (const auto& c : ds.columns()) cells.push_back(c.raw[i]);
        if (!given.weight) cells.push_back(format_real(ds.weights()[i]));
        if (!given.stratum) cells.push_back(ds.strata()[i]);
        if (!given.psu) cells.push_back(ds.psus()[i]);
        if (!given.fpc) cells.push_back(format_real(ds.fpc(ds.strata()[i])));
        csv::write_row(out, cells);
    }
    return b;
}

}  // namespace svyglm
