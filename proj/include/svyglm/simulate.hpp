#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "svyglm/family_link.hpp"

namespace svyglm {

// Synthetic stratified cluster sample. Every run generates the covariates
//   x       standard normal
//   age     integer in [18, 90]
//   gender  Male / Female / Other
//   educ    9-15 / 16+ / 0-8
// plus design columns stratum, psu, weight, fpc, and a response drawn from
// the family at mu = g^-1(X beta) where X comes from `formula`.
struct SimulationConfig {
    std::uint64_t seed = 1;
    int strata = 2;
    int psus_per_stratum = 2;
    int obs_per_psu = 50;
    std::string formula = "y ~ 1 + x";
    std::vector<double> beta{0.5, -0.2};
    FamilyKind family = FamilyKind::Poisson;
    LinkKind link = LinkKind::Log;
    double dispersion = 1.0;     // normal variance, gamma/inverse-gaussian phi
    double nb_k = 1.0;
    bool unit_weights = false;
    double weight_min = 0.5;
    double weight_max = 3.0;
    double psu_sd = 0.0;         // normal PSU effect added to eta
    double fpc = 0.0;

    void validate() const;
};

struct SimulationTruth {
    SimulationConfig config;
    std::vector<std::string> column_labels;
    std::size_t rows = 0;
};

// Writes the CSV to `out`. Byte-identical output for identical configs.
SimulationTruth simulate(const SimulationConfig& config, std::ostream& out);

}  // namespace svyglm
