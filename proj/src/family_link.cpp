#include "svyglm/family_link.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

#include "svyglm/error.hpp"

namespace svyglm {

namespace {

[[noreturn]] void domain_error(const std::string& what, double value) {
    throw Error(ErrorKind::Domain, what + " (value " + std::to_string(value) + ")");
}

double nb_k(const Family& f) { return f.ancillary.value_or(0.0); }

// Solves log(nu) - digamma(nu) = target for the gamma shape; the left side
// decreases monotonically from +inf to 0 on (0, inf).
double gamma_shape_mle(double target) {
    double lo = 1e-12, hi = 1e12;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double v = std::log(mid) - boost::math::digamma(mid);
        (v > target ? lo : hi) = mid;
        if (hi / lo < 1.0 + 1e-15) break;
    }
    return std::sqrt(lo * hi);
}

}  // namespace

Family make_family(FamilyKind kind, std::optional<double> nb_k_value) {
    Family f;
    f.kind = kind;
    switch (kind) {
        case FamilyKind::Normal: f.dispersion = DispersionRule::Mle; break;
        case FamilyKind::Gamma:
        case FamilyKind::InverseGaussian: f.dispersion = DispersionRule::Moments; break;
        case FamilyKind::NegativeBinomial:
            f.ancillary = nb_k_value.value_or(1.0);
            if (!(*f.ancillary >= 0.0) || !std::isfinite(*f.ancillary))
                throw Error(ErrorKind::InvalidArgument, "negative binomial k must be >= 0");
            f.dispersion = DispersionRule::Fixed;
            break;
        default: f.dispersion = DispersionRule::Fixed; break;
    }
    return f;
}

Link canonical_link(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::Normal: return {LinkKind::Identity};
        case FamilyKind::Binomial: return {LinkKind::Logit};
        case FamilyKind::Gamma:
        case FamilyKind::InverseGaussian: return {LinkKind::Inverse};
        default: return {LinkKind::Log};
    }
}

bool link_supported(FamilyKind family, LinkKind link) {
    if (family == FamilyKind::Binomial) return link != LinkKind::Inverse;
    return link != LinkKind::Logit;
}

std::string_view to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::Normal: return "normal";
        case FamilyKind::Poisson: return "poisson";
        case FamilyKind::Binomial: return "binomial";
        case FamilyKind::Gamma: return "gamma";
        case FamilyKind::NegativeBinomial: return "negative_binomial";
        case FamilyKind::InverseGaussian: return "inverse_gaussian";
    }
    return "?";
}

std::string_view to_string(LinkKind kind) {
    switch (kind) {
        case LinkKind::Identity: return "identity";
        case LinkKind::Log: return "log";
        case LinkKind::Logit: return "logit";
        case LinkKind::Inverse: return "inverse";
    }
    return "?";
}

std::string_view to_string(DispersionRule rule) {
    switch (rule) {
        case DispersionRule::Fixed: return "fixed";
        case DispersionRule::Moments: return "moments";
        case DispersionRule::Mle: return "mle";
    }
    return "?";
}

FamilyKind parse_family(std::string_view name) {
    for (auto k : {FamilyKind::Normal, FamilyKind::Poisson, FamilyKind::Binomial, FamilyKind::Gamma,
                   FamilyKind::NegativeBinomial, FamilyKind::InverseGaussian})
        if (to_string(k) == name) return k;
    if (name == "gaussian") return FamilyKind::Normal;
    if (name == "negbin") return FamilyKind::NegativeBinomial;
    if (name == "inverse_normal" || name == "ig") return FamilyKind::InverseGaussian;
    throw Error(ErrorKind::InvalidArgument, "unknown family '" + std::string(name) + "'");
}

LinkKind parse_link(std::string_view name) {
    for (auto k : {LinkKind::Identity, LinkKind::Log, LinkKind::Logit, LinkKind::Inverse})
        if (to_string(k) == name) return k;
    throw Error(ErrorKind::InvalidArgument, "unknown link '" + std::string(name) + "'");
}

DispersionRule parse_dispersion(std::string_view name) {
    for (auto r : {DispersionRule::Fixed, DispersionRule::Moments, DispersionRule::Mle})
        if (to_string(r) == name) return r;
    throw Error(ErrorKind::InvalidArgument, "unknown dispersion rule '" + std::string(name) + "'");
}

double link_apply(Link link, double mu) {
    switch (link.kind) {
        case LinkKind::Identity: return mu;
        case LinkKind::Log:
            if (!(mu > 0.0)) domain_error("log link needs mu > 0", mu);
            return std::log(mu);
        case LinkKind::Logit:
            if (!(mu > 0.0 && mu < 1.0)) domain_error("logit link needs 0 < mu < 1", mu);
            return std::log(mu) - std::log1p(-mu);
        case LinkKind::Inverse:
            if (mu == 0.0 || !std::isfinite(mu)) domain_error("inverse link needs mu != 0", mu);
            return 1.0 / mu;
    }
    return mu;
}

double link_invert(Link link, double eta) {
    switch (link.kind) {
        case LinkKind::Identity: return eta;
        case LinkKind::Log: return std::exp(eta);
        case LinkKind::Logit: {
            const double mu = eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta))
                                         : std::exp(eta) / (1.0 + std::exp(eta));
            return std::clamp(mu, kLogitClamp, 1.0 - kLogitClamp);
        }
        case LinkKind::Inverse:
            if (eta == 0.0) domain_error("inverse link undefined at eta = 0", eta);
            return 1.0 / eta;
    }
    return eta;
}

LinkDerivs link_derivs(Link link, double mu) {
    switch (link.kind) {
        case LinkKind::Identity: return {1.0, 0.0};
        case LinkKind::Log:
            if (!(mu > 0.0)) domain_error("log link needs mu > 0", mu);
            return {1.0 / mu, -1.0 / (mu * mu)};
        case LinkKind::Logit: {
            if (!(mu > 0.0 && mu < 1.0)) domain_error("logit link needs 0 < mu < 1", mu);
            const double v = mu * (1.0 - mu);
            return {1.0 / v, (2.0 * mu - 1.0) / (v * v)};
        }
        case LinkKind::Inverse:
            if (mu == 0.0 || !std::isfinite(mu)) domain_error("inverse link needs mu != 0", mu);
            return {-1.0 / (mu * mu), 2.0 / (mu * mu * mu)};
    }
    return {1.0, 0.0};
}

bool in_mean_domain(FamilyKind kind, double mu) {
    if (!std::isfinite(mu)) return false;
    switch (kind) {
        case FamilyKind::Normal: return true;
        case FamilyKind::Binomial: return mu > 0.0 && mu < 1.0;
        default: return mu > 0.0;
    }
}

bool in_response_domain(FamilyKind kind, double y) {
    if (!std::isfinite(y)) return false;
    switch (kind) {
        case FamilyKind::Normal: return true;
        case FamilyKind::Poisson:
        case FamilyKind::NegativeBinomial: return y >= 0.0;
        case FamilyKind::Binomial: return y >= 0.0 && y <= 1.0;
        case FamilyKind::Gamma:
        case FamilyKind::InverseGaussian: return y > 0.0;
    }
    return false;
}

double floor_mean(FamilyKind kind, double mu, double floor) {
    switch (kind) {
        case FamilyKind::Normal: return mu;
        case FamilyKind::Binomial: return std::clamp(mu, floor, 1.0 - floor);
        default: return std::max(mu, floor);
    }
}

VarianceValue variance_fn(const Family& family, double mu) {
    if (!in_mean_domain(family.kind, mu))
        domain_error(std::string("mean outside the ") + std::string(to_string(family.kind)) +
                         " domain",
                     mu);
    switch (family.kind) {
        case FamilyKind::Normal: return {1.0, 0.0};
        case FamilyKind::Poisson: return {mu, 1.0};
        case FamilyKind::Binomial: return {mu * (1.0 - mu), 1.0 - 2.0 * mu};
        case FamilyKind::Gamma: return {mu * mu, 2.0 * mu};
        case FamilyKind::NegativeBinomial: {
            const double k = nb_k(family);
            return {mu + k * mu * mu, 1.0 + 2.0 * k * mu};
        }
        case FamilyKind::InverseGaussian: return {mu * mu * mu, 3.0 * mu * mu};
    }
    return {1.0, 0.0};
}

double log_density(const Family& family, double y, double mu, double phi) {
    if (!in_response_domain(family.kind, y))
        domain_error(std::string("response outside the ") + std::string(to_string(family.kind)) +
                         " support",
                     y);
    if (!in_mean_domain(family.kind, mu))
        domain_error(std::string("mean outside the ") + std::string(to_string(family.kind)) +
                         " domain",
                     mu);
    if (!(phi > 0.0)) domain_error("dispersion must be positive", phi);
    constexpr double log_2pi = 1.8378770664093454836;
    switch (family.kind) {
        case FamilyKind::Normal: {
            const double r = y - mu;
            return -0.5 * (log_2pi + std::log(phi)) - r * r / (2.0 * phi);
        }
        case FamilyKind::Poisson:
            return (y * std::log(mu) - mu - std::lgamma(y + 1.0)) / phi;
        case FamilyKind::Binomial: {
            double ll = 0.0;
            if (y > 0.0) ll += y * std::log(mu);
            if (y < 1.0) ll += (1.0 - y) * std::log1p(-mu);
            return ll / phi;
        }
        case FamilyKind::Gamma: {
            const double nu = 1.0 / phi;
            return nu * std::log(nu * y / mu) - nu * y / mu - std::log(y) - std::lgamma(nu);
        }
        case FamilyKind::NegativeBinomial: {
            const double k = nb_k(family);
            if (k == 0.0) return (y * std::log(mu) - mu - std::lgamma(y + 1.0)) / phi;
            const double r = 1.0 / k;
            const double ll = std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1.0) +
                              y * (std::log(k * mu) - std::log1p(k * mu)) - r * std::log1p(k * mu);
            return ll / phi;
        }
        case FamilyKind::InverseGaussian: {
            const double r = y - mu;
            return -0.5 * (log_2pi + std::log(phi) + 3.0 * std::log(y)) -
                   r * r / (2.0 * phi * mu * mu * y);
        }
    }
    return 0.0;
}

double pearson_chi2(const Family& family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                    const Eigen::VectorXd& w) {
    double chi2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double r = y(i) - mu(i);
        chi2 += w(i) * r * r / variance_fn(family, mu(i)).V;
    }
    return chi2;
}

double estimate_dispersion(const Family& family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& w, Eigen::Index p) {
    const double sum_w = w.sum();
    switch (family.dispersion) {
        case DispersionRule::Fixed: return 1.0;
        case DispersionRule::Moments: {
            const double df = sum_w - static_cast<double>(p);
            if (!(df > 0.0))
                throw Error(ErrorKind::NonPositiveDf,
                            "sum of weights " + std::to_string(sum_w) +
                                " does not exceed the number of parameters " + std::to_string(p));
            return pearson_chi2(family, y, mu, w) / df;
        }
        case DispersionRule::Mle: break;
    }
    switch (family.kind) {
        case FamilyKind::Normal: {
            double ss = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) ss += w(i) * (y(i) - mu(i)) * (y(i) - mu(i));
            return ss / sum_w;
        }
        case FamilyKind::InverseGaussian: {
            double ss = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double r = y(i) - mu(i);
                ss += w(i) * r * r / (mu(i) * mu(i) * y(i));
            }
            return ss / sum_w;
        }
        case FamilyKind::Gamma: {
            double d = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double ratio = y(i) / mu(i);
                d += w(i) * (ratio - std::log(ratio) - 1.0);
            }
            d /= sum_w;
            if (!(d > 0.0)) return 0.0;
            return 1.0 / gamma_shape_mle(d);
        }
        default: return 1.0;  // no free dispersion in the density
    }
}

}  // namespace svyglm
