#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svyglm/pseudo_mle.hpp"
#include "svyglm/simulate.hpp"
#include "svyglm/survey_design.hpp"

namespace svyglm::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

struct RunConfig {
    std::string data;
    DesignBindings design;
    std::string model;
    std::string family = "normal";
    std::optional<std::string> link;          // canonical link when absent
    std::optional<std::string> dispersion;    // family default when absent
    std::optional<double> nb_k;
    bool estimate_nb_k = false;
    FitConfig fit;
    std::vector<std::string> tests;           // comma-separated coefficient labels
    std::vector<std::string> test_files;      // numeric contrast rows
    std::string df_mode = "design";
    std::string singleton = "error";
    std::string df_factor = "obs";
    double level = 0.95;
    std::string out_format = "text";          // text | json | csv
};

int cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& err);

// CSV on `out`; the true parameters go to `truth_path` as JSON when given.
int cmd_simulate(const SimulationConfig& config, const std::optional<std::string>& truth_path,
                 std::ostream& out, std::ostream& err);

// Parses `svyglm <fit|simulate> [flags]`. `--config FILE` supplies
// key=value lines that behave like the corresponding flags; flags given on
// the command line take precedence.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svyglm::cli
