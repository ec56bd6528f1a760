#include "svyglm/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "svyglm/csv.hpp"
#include "svyglm/error.hpp"
#include "svyglm/formula.hpp"
#include "svyglm/model_frame.hpp"

namespace svyglm {

namespace {

std::string fmt(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double draw_inverse_gaussian(std::mt19937_64& rng, double mu, double lambda) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const double v = normal(rng);
    const double y = v * v;
    const double x = mu + mu * mu * y / (2.0 * lambda) -
                     mu / (2.0 * lambda) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
    return unif(rng) <= mu / (mu + x) ? x : mu * mu / x;
}

double draw_response(std::mt19937_64& rng, const SimulationConfig& c, double mu) {
    switch (c.family) {
        case FamilyKind::Normal: return mu + std::sqrt(c.dispersion) * std::normal_distribution<double>()(rng);
        case FamilyKind::Poisson: return static_cast<double>(std::poisson_distribution<long>(mu)(rng));
        case FamilyKind::Binomial: return std::uniform_real_distribution<double>()(rng) < mu ? 1.0 : 0.0;
        case FamilyKind::Gamma: {
            const double shape = 1.0 / c.dispersion;
            return std::gamma_distribution<double>(shape, mu / shape)(rng);
        }
        case FamilyKind::NegativeBinomial: {
            double rate = mu;
            if (c.nb_k > 0.0) rate = std::gamma_distribution<double>(1.0 / c.nb_k, c.nb_k * mu)(rng);
            return static_cast<double>(std::poisson_distribution<long>(rate)(rng));
        }
        case FamilyKind::InverseGaussian: return draw_inverse_gaussian(rng, mu, 1.0 / c.dispersion);
    }
    return mu;
}

}  // namespace

void SimulationConfig::validate() const {
    if (strata < 1 || psus_per_stratum < 1 || obs_per_psu < 1)
        throw Error(ErrorKind::InvalidArgument, "strata, PSUs per stratum and observations per PSU must be >= 1");
    if (!(weight_min > 0.0) || !(weight_max >= weight_min))
        throw Error(ErrorKind::InvalidArgument, "weight range must satisfy 0 < min <= max");
    if (!(dispersion > 0.0) || !(nb_k >= 0.0) || !(psu_sd >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "dispersion must be > 0, k and psu sd >= 0");
    if (!(fpc >= 0.0 && fpc < 1.0)) throw Error(ErrorKind::InvalidArgument, "fpc must be in [0, 1)");
    if (!link_supported(family, link))
        throw Error(ErrorKind::InvalidArgument, "link not supported for this family");
}

SimulationTruth simulate(const SimulationConfig& c, std::ostream& out) {
    c.validate();
    const ModelSpec spec = parse_formula(c.formula);
    static const char* kGender[] = {"Male", "Female", "Other"};
    static const char* kEduc[] = {"9-15", "16+", "0-8"};

    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    std::uniform_int_distribution<int> age_dist(18, 90);

    const std::vector<std::string> header{"stratum", "psu", "weight", "fpc", "x", "age", "gender", "educ"};
    for (const auto& h : header)
        if (h == spec.response)
            throw Error(ErrorKind::InvalidArgument, "response name '" + h + "' collides with a generated column");

    std::vector<std::vector<std::string>> rows;
    std::vector<double> psu_effect;
    for (int h = 1; h <= c.strata; ++h) {
        for (int i = 1; i <= c.psus_per_stratum; ++i) {
            const double effect = c.psu_sd * normal(rng);
            for (int j = 0; j < c.obs_per_psu; ++j) {
                const double w = c.unit_weights ? 1.0 : c.weight_min + (c.weight_max - c.weight_min) * unif(rng);
                const double u_gender = unif(rng), u_educ = unif(rng);
                const int g = u_gender < 0.49 ? 0 : (u_gender < 0.96 ? 1 : 2);
                const int e = u_educ < 0.5 ? 0 : (u_educ < 0.8 ? 1 : 2);
                rows.push_back({"S" + std::to_string(h), "S" + std::to_string(h) + "P" + std::to_string(i),
                                fmt(w, 8), fmt(c.fpc), fmt(normal(rng)), std::to_string(age_dist(rng)),
                                kGender[g], kEduc[e]});
                psu_effect.push_back(effect);
            }
        }
    }

    // Build the design matrix through the regular model-frame path, with a
    // placeholder response.
    std::stringstream staging;
    std::vector<std::string> full_header = header;
    full_header.push_back(spec.response);
    csv::write_row(staging, full_header);
    for (auto row : rows) {
        row.push_back("0");
        csv::write_row(staging, row);
    }
    const SurveyDataset ds = load_dataset(staging, {"weight", "stratum", "psu", "fpc"});
    const ModelFrame frame = build_model_frame(ds, spec);
    if (static_cast<std::size_t>(frame.p()) != c.beta.size())
        throw Error(ErrorKind::InvalidArgument, "model has " + std::to_string(frame.p()) + " columns but " +
                                                    std::to_string(c.beta.size()) + " true coefficients were given");

    const Eigen::Map<const Eigen::VectorXd> beta(c.beta.data(), static_cast<Eigen::Index>(c.beta.size()));
    const Eigen::VectorXd eta = frame.X * beta;
    const Link link{c.link};
    csv::write_row(out, full_header);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double mu = link_invert(link, eta(static_cast<Eigen::Index>(r)) + psu_effect[r]);
        if (!in_mean_domain(c.family, mu))
            throw Error(ErrorKind::InvalidArgument, "true mean " + fmt(mu) + " at row " + std::to_string(r + 1) +
                                                        " is outside the " + std::string(to_string(c.family)) +
                                                        " domain");
        rows[r].push_back(fmt(draw_response(rng, c, mu)));
        csv::write_row(out, rows[r]);
    }
    return {c, frame.column_labels, rows.size()};
}

}  // namespace svyglm
