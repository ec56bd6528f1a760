#include "svyglm/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "svyglm/csv.hpp"
#include "svyglm/error.hpp"
#include "svyglm/formula.hpp"
#include "svyglm/model_frame.hpp"
#include "svyglm/report.hpp"
#include "svyglm/taylor_variance.hpp"
#include "svyglm/wald_inference.hpp"

namespace svyglm::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        auto b = cur.find_first_not_of(" \t");
        auto e = cur.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    }
    return out;
}

ContrastMatrix read_contrast_file(const std::string& path, const std::vector<std::string>& labels) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open contrast file '" + path + "'");
    ContrastMatrix c;
    c.name = path;
    std::vector<std::vector<double>> rows;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        for (const auto& cell : split(line, ',')) {
            double v = 0.0;
            std::string trimmed = cell;
            while (!trimmed.empty() && trimmed.back() == '\r') trimmed.pop_back();
            if (!csv::parse_real(trimmed, v))
                throw Error(ErrorKind::Parse, path + ": line " + std::to_string(lineno) + ": '" + cell +
                                                  "' is not a number");
            row.push_back(v);
        }
        if (row.size() != labels.size())
            throw Error(ErrorKind::DimensionMismatch, path + ": line " + std::to_string(lineno) + ": expected " +
                                                          std::to_string(labels.size()) + " values");
        rows.push_back(std::move(row));
    }
    c.L.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < labels.size(); ++k)
            c.L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
        c.labels.push_back("row" + std::to_string(r + 1));
    }
    return c;
}

void report_error(std::ostream& err, const Error& e) {
    err << "svyglm: " << to_string(e.kind()) << ": " << e.what() << "\n";
}

}  // namespace

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.out_format != "text" && cfg.out_format != "json" && cfg.out_format != "csv")
            throw Error(ErrorKind::InvalidArgument, "output format must be text, json or csv");
        if (cfg.model.empty()) throw Error(ErrorKind::InvalidArgument, "a model formula is required (--model)");

        const SurveyDataset ds = cfg.data == "-" ? load_dataset(std::cin, cfg.design)
                                                 : load_dataset_file(cfg.data, cfg.design);
        const ModelSpec spec = parse_formula(cfg.model);
        const ModelFrame frame = build_model_frame(ds, spec);

        Family family = make_family(parse_family(cfg.family), cfg.nb_k);
        if (cfg.dispersion) family.dispersion = parse_dispersion(*cfg.dispersion);
        const Link link = cfg.link ? Link{parse_link(*cfg.link)} : canonical_link(family.kind);
        FitConfig fit_cfg = cfg.fit;
        fit_cfg.estimate_nb_k = cfg.estimate_nb_k;

        VarianceOptions vopt;
        vopt.singleton = parse_singleton_policy(cfg.singleton);
        vopt.factor = parse_small_sample_factor(cfg.df_factor);
        const DfMode df_mode = parse_df_mode(cfg.df_mode);

        FitReport report;
        report.data_path = cfg.data;
        report.formula = cfg.model;
        report.column_labels = frame.column_labels;
        report.rows_read = ds.rows();
        report.rows_dropped = frame.dropped_rows.size();
        report.design = design_summary(frame);
        report.variance_options = vopt;
        report.df_mode = df_mode;
        report.fit = fit_pseudo_mle(frame, family, link, fit_cfg);

        std::vector<ContrastMatrix> contrasts;
        for (const auto& t : cfg.tests) contrasts.push_back(unit_contrast(frame.column_labels, split(t, ','), t));
        for (const auto& f : cfg.test_files) contrasts.push_back(read_contrast_file(f, frame.column_labels));

        try {
            const VarianceComponents vc = sandwich_variance(report.fit, frame, report.design, vopt);
            report.table = coefficient_table(report.fit, vc, frame.column_labels, report.design, cfg.level, df_mode);
            for (const auto& c : contrasts)
                report.tests.push_back(wald_test(report.fit.beta, vc.vbeta, c, df_mode, report.design));
            report.has_variance = true;
        } catch (const Error& e) {
            // A fit that did not converge still gets its best iterate
            // reported; a converged fit must produce inference.
            if (report.fit.converged) throw;
            report.variance_error = std::string(to_string(e.kind())) + ": " + e.what();
        }

        if (cfg.out_format == "json")
            out << to_json(report).dump(2) << "\n";
        else if (cfg.out_format == "csv")
            write_csv(out, report);
        else
            write_text(out, report);

        if (!report.fit.converged) {
            err << "svyglm: NotConverged: no convergence after " << report.fit.iterations << " iterations\n";
            return kExitNotConverged;
        }
        return kExitOk;
    } catch (const Error& e) {
        report_error(err, e);
        return kExitInputError;
    }
}

int cmd_simulate(const SimulationConfig& config, const std::optional<std::string>& truth_path, std::ostream& out,
                 std::ostream& err) {
    try {
        std::ostringstream buffer;
        const SimulationTruth truth = simulate(config, buffer);
        if (truth_path) {
            nlohmann::json j = {{"seed", config.seed},
                                {"strata", config.strata},
                                {"psus_per_stratum", config.psus_per_stratum},
                                {"obs_per_psu", config.obs_per_psu},
                                {"formula", config.formula},
                                {"columns", truth.column_labels},
                                {"beta", config.beta},
                                {"family", to_string(config.family)},
                                {"link", to_string(config.link)},
                                {"dispersion", config.dispersion},
                                {"negative_binomial_k", config.nb_k},
                                {"unit_weights", config.unit_weights},
                                {"psu_sd", config.psu_sd},
                                {"sampling_fraction", config.fpc},
                                {"rows", truth.rows}};
            std::ofstream side(*truth_path);
            if (!side) throw Error(ErrorKind::Parse, "cannot write '" + *truth_path + "'");
            side << j.dump(2) << "\n";
        }
        out << buffer.str();
        return kExitOk;
    } catch (const Error& e) {
        report_error(err, e);
        return kExitInputError;
    }
}

namespace {

// Reads key=value lines into "--key value" argument pairs.
std::vector<std::string> config_arguments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open config file '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        while (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#' || line[first] == ';' || line[first] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::Parse, path + ": line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config")
            throw Error(ErrorKind::Parse, path + ": line " + std::to_string(lineno) + ": invalid key");
        if (value == "true" || value == "false") {
            if (value == "true") args.push_back("--" + key);
            continue;
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    // Splice config-file arguments right after the subcommand so that flags
    // typed later on the command line override them.
    std::vector<std::string> args(argv, argv + argc);
    try {
        for (std::size_t k = 1; k < args.size(); ++k) {
            std::string path;
            std::size_t span = 0;
            if (args[k] == "--config" && k + 1 < args.size()) {
                path = args[k + 1];
                span = 2;
            } else if (args[k].rfind("--config=", 0) == 0) {
                path = args[k].substr(9);
                span = 1;
            } else {
                continue;
            }
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(k), args.begin() + static_cast<std::ptrdiff_t>(k + span));
            const auto extra = config_arguments(path);
            const std::size_t at = args.size() > 1 ? 2 : args.size();
            args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
            break;
        }
    } catch (const Error& e) {
        report_error(err, e);
        return kExitInputError;
    }

    CLI::App app{"Survey-weighted generalized linear models with Taylor linearization variance", "svyglm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "svyglm 1.0");
    app.add_flag("--config", "key=value file of default flags (handled before parsing)");

    RunConfig fit;
    std::string weight, strata, psu, fpc;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a survey-weighted GLM and report linearization inference");
    fit_cmd->add_option("--data", fit.data, "Input CSV path ('-' for standard input)")->required();
    fit_cmd->add_option("--weight", weight, "Sampling weight column");
    fit_cmd->add_option("--strata", strata, "Stratum column");
    fit_cmd->add_option("--psu", psu, "PSU (cluster) column");
    fit_cmd->add_option("--fpc", fpc, "Sampling fraction column, constant within stratum");
    fit_cmd->add_option("--model", fit.model, "Model formula, e.g. 'y ~ 1 + center(age) + C(sex, ref=M)'")->required();
    fit_cmd->add_option("--family", fit.family, "normal|poisson|binomial|gamma|negative_binomial|inverse_gaussian");
    fit_cmd->add_option("--link", fit.link, "identity|log|logit|inverse (default canonical)");
    fit_cmd->add_option("--dispersion", fit.dispersion, "fixed|moments|mle (default per family)");
    fit_cmd->add_option("--nb-k", fit.nb_k, "Negative binomial k (default 1)");
    fit_cmd->add_flag("--estimate-k", fit.estimate_nb_k, "Moment-update the negative binomial k");
    fit_cmd->add_option("--test", fit.tests, "Joint Wald test over comma-separated coefficient labels");
    fit_cmd->add_option("--test-file", fit.test_files, "Wald test with contrast rows read from a file");
    fit_cmd->add_option("--df-mode", fit.df_mode, "design | paper | <number>");
    fit_cmd->add_option("--singleton", fit.singleton, "error | centered | certainty");
    fit_cmd->add_option("--df-factor", fit.df_factor, "n in (n-1)/(n-p): obs | psu | none");
    fit_cmd->add_option("--level", fit.level, "Confidence level");
    fit_cmd->add_option("--out-format", fit.out_format, "text | json | csv");
    fit_cmd->add_option("--max-iter", fit.fit.max_iter, "Newton iteration limit");
    fit_cmd->add_option("--tol", fit.fit.tol, "Relative log-likelihood tolerance");
    fit_cmd->add_option("--beta-tol", fit.fit.beta_tol, "Coefficient change tolerance");

    SimulationConfig sim;
    std::string beta_text;
    std::optional<std::string> truth;
    std::string sim_family = "poisson";
    std::optional<std::string> sim_link;
    std::optional<std::string> sim_out;
    auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic stratified cluster sample as CSV");
    sim_cmd->add_option("--seed", sim.seed, "Random seed")->required();
    sim_cmd->add_option("--strata", sim.strata, "Number of strata");
    sim_cmd->add_option("--psus", sim.psus_per_stratum, "PSUs per stratum");
    sim_cmd->add_option("--obs", sim.obs_per_psu, "Observations per PSU");
    sim_cmd->add_option("--model", sim.formula, "Formula over x, age, gender, educ");
    sim_cmd->add_option("--beta", beta_text, "True coefficients, comma-separated");
    sim_cmd->add_option("--family", sim_family, "Response family");
    sim_cmd->add_option("--link", sim_link, "Link (default canonical)");
    sim_cmd->add_option("--dispersion", sim.dispersion, "Normal variance or gamma/inverse-gaussian phi");
    sim_cmd->add_option("--nb-k", sim.nb_k, "Negative binomial k");
    sim_cmd->add_flag("--unit-weights", sim.unit_weights, "All weights equal to 1");
    sim_cmd->add_option("--weight-min", sim.weight_min, "Smallest weight");
    sim_cmd->add_option("--weight-max", sim.weight_max, "Largest weight");
    sim_cmd->add_option("--psu-sd", sim.psu_sd, "SD of a normal PSU effect on the linear predictor");
    sim_cmd->add_option("--sampling-fraction", sim.fpc, "f_h written to the fpc column");
    sim_cmd->add_option("--out", sim_out, "Output CSV path (default standard output)");
    sim_cmd->add_option("--truth", truth, "Side file for the true parameters (default <out>.truth.json)");

    for (auto* cmd : {fit_cmd, sim_cmd})
        for (auto* opt : cmd->get_options())
            if (opt->get_expected_max() == 1) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help(); 
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << "svyglm 1.0\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "svyglm: " << e.what() << "\n";
        return kExitInputError;
    }

    if (fit_cmd->parsed()) {
        if (!weight.empty()) fit.design.weight = weight;
        if (!strata.empty()) fit.design.stratum = strata;
        if (!psu.empty()) fit.design.psu = psu;
        if (!fpc.empty()) fit.design.fpc = fpc;
        return cmd_fit(fit, out, err);
    }

    try {
        sim.family = parse_family(sim_family);
        sim.link = sim_link ? parse_link(*sim_link) : canonical_link(sim.family).kind;
        if (!beta_text.empty()) {
            sim.beta.clear();
            for (const auto& cell : split(beta_text, ',')) {
                double v = 0.0;
                if (!csv::parse_real(cell, v))
                    throw Error(ErrorKind::InvalidArgument, "--beta value '" + cell + "' is not a number");
                sim.beta.push_back(v);
            }
        }
    } catch (const Error& e) {
        report_error(err, e);
        return kExitInputError;
    }
    if (!truth && sim_out) truth = *sim_out + ".truth.json";
    if (sim_out) {
        std::ofstream file(*sim_out);
        if (!file) {
            err << "svyglm: cannot write '" << *sim_out << "'\n";
            return kExitInputError;
        }
        return cmd_simulate(sim, truth, file, err);
    }
    return cmd_simulate(sim, truth, out, err);
}

}  // namespace svyglm::cli
