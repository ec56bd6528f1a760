#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace svyglm {

enum class LinkKind { Identity, Log, Logit, Inverse };

enum class FamilyKind { Normal, Poisson, Binomial, Gamma, NegativeBinomial, InverseGaussian };

enum class DispersionRule { Fixed, Moments, Mle };

struct Link {
    LinkKind kind = LinkKind::Identity;
};

struct Family {
    FamilyKind kind = FamilyKind::Normal;
    // Negative-binomial k in V(mu) = mu + k mu^2; absent for every other kind.
    std::optional<double> ancillary;
    DispersionRule dispersion = DispersionRule::Mle;
};

// Family with its default dispersion rule: mle for normal, moments for
// gamma and inverse gaussian, fixed for the rest. Negative binomial gets k.
Family make_family(FamilyKind kind, std::optional<double> nb_k = std::nullopt);
Link canonical_link(FamilyKind kind);
bool link_supported(FamilyKind family, LinkKind link);

std::string_view to_string(FamilyKind kind);
std::string_view to_string(LinkKind kind);
std::string_view to_string(DispersionRule rule);
FamilyKind parse_family(std::string_view name);
LinkKind parse_link(std::string_view name);
DispersionRule parse_dispersion(std::string_view name);

inline constexpr double kLogitClamp = 1e-12;

double link_apply(Link link, double mu);
double link_invert(Link link, double eta);

struct LinkDerivs {
    double gprime;
    double gsecond;
};
LinkDerivs link_derivs(Link link, double mu);

struct VarianceValue {
    double V;
    double Vprime;
};
VarianceValue variance_fn(const Family& family, double mu);

bool in_mean_domain(FamilyKind kind, double mu);
bool in_response_domain(FamilyKind kind, double y);

// Moves mu into the family's mean domain keeping it at least `floor` away
// from each boundary.
double floor_mean(FamilyKind kind, double mu, double floor);

// Log density (or mass) of one observation. For families whose density has
// no dispersion parameter (poisson, binomial, negative binomial) phi divides
// the log-likelihood, the quasi-likelihood reading that keeps the score
// (y - mu) / (V g' phi) an exact derivative.
double log_density(const Family& family, double y, double mu, double phi);

// Dispersion for the family's rule; p is the number of model columns.
double estimate_dispersion(const Family& family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& w, Eigen::Index p);

// Weighted Pearson statistic sum w (y - mu)^2 / V(mu).
double pearson_chi2(const Family& family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& w);

}  // namespace svyglm
