#include "svyglm/pseudo_mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svyglm/error.hpp"

namespace svyglm {

namespace {

struct ObsDerivs {
    double mu, V, Vprime, gprime, gsecond;
};

ObsDerivs obs_derivs(const Family& family, Link link, double mu) {
    const auto [V, Vp] = variance_fn(family, mu);
    const auto [g1, g2] = link_derivs(link, mu);
    return {mu, V, Vp, g1, g2};
}

void check_frame(const ModelFrame& frame, const Eigen::VectorXd& beta) {
    if (beta.size() != frame.p())
        throw Error(ErrorKind::DimensionMismatch, "beta has " + std::to_string(beta.size()) +
                                                      " entries, design has " +
                                                      std::to_string(frame.p()) + " columns");
    if (static_cast<Eigen::Index>(frame.weights.size()) != frame.n() || frame.y.size() != frame.n())
        throw Error(ErrorKind::DimensionMismatch, "frame vectors do not match the design rows");
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Loglik at a trial point; a point where the mean leaves the link or family
// domain counts as no improvement rather than an error.
std::optional<double> try_loglik(const ModelFrame& frame, const Family& family, Link link,
                                 const Eigen::VectorXd& beta, double mu_floor) {
    try {
        const double ll = weighted_loglik(frame, family, link, beta, 1.0, mu_floor);
        if (std::isfinite(ll)) return ll;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Domain) throw;
    }
    return std::nullopt;
}

void check_rank(const ModelFrame& frame) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(frame.X);
    qr.setThreshold(1e-10);
    if (qr.rank() == frame.p()) return;
    std::string aliased;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < frame.p(); ++k) {
        const auto j = static_cast<std::size_t>(perm(k));
        if (!aliased.empty()) aliased += ", ";
        aliased += j < frame.column_labels.size() ? frame.column_labels[j] : std::to_string(j);
    }
    throw Error(ErrorKind::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) +
                                              " < " + std::to_string(frame.p()) +
                                              "; aliased columns: " + aliased);
}

Eigen::VectorXd starting_values(const ModelFrame& frame, const Family& family, Link link,
                                const FitConfig& cfg) {
    const auto w = frame.weight_vector();
    const double ybar = w.dot(frame.y) / w.sum();
    const Eigen::Index n = frame.n();
    Eigen::VectorXd z(n), we(n), eta0(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double mu = floor_mean(family.kind, 0.5 * (frame.y(i) + ybar), cfg.mu_floor);
        if (link.kind == LinkKind::Log || link.kind == LinkKind::Inverse) mu = std::max(mu, cfg.mu_floor);
        if (link.kind == LinkKind::Logit) mu = std::clamp(mu, cfg.mu_floor, 1.0 - cfg.mu_floor);
        const auto d = obs_derivs(family, link, mu);
        eta0(i) = link_apply(link, mu);
        z(i) = eta0(i) + (frame.y(i) - mu) * d.gprime;
        we(i) = w(i) / (d.V * d.gprime * d.gprime);
    }
    const Eigen::MatrixXd xtwx = frame.X.transpose() * we.asDiagonal() * frame.X;
    Eigen::VectorXd beta = xtwx.ldlt().solve(frame.X.transpose() * we.asDiagonal() * z);
    if (beta.allFinite() && try_loglik(frame, family, link, beta, cfg.mu_floor)) return beta;
    // The linearized response can overshoot the mean domain; regress the
    // link of the starting means instead.
    beta = frame.X.colPivHouseholderQr().solve(eta0);
    if (beta.allFinite() && try_loglik(frame, family, link, beta, cfg.mu_floor)) return beta;
    throw Error(ErrorKind::Domain, "no starting values inside the mean domain");
}

struct NewtonOutcome {
    Eigen::VectorXd beta;
    double loglik;
    std::vector<double> trace;
    int iterations = 0;
    int ridge_retries = 0;
    bool converged = false;
};

// Iterates at phi = 1; phi scales the score and Hessian together so the
// step and the ordering of loglik values do not depend on it.
NewtonOutcome newton(const ModelFrame& frame, const Family& family, Link link,
                     Eigen::VectorXd beta, const FitConfig& cfg) {
    NewtonOutcome out;
    auto ll0 = try_loglik(frame, family, link, beta, cfg.mu_floor);
    if (!ll0) throw Error(ErrorKind::Domain, "starting values give a mean outside the domain");
    double ll = *ll0;
    out.trace.push_back(ll);
    // Set once a step is taken on the score alone; the trace then stops
    // so that it only records strict ascent.
    bool polishing = false;

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const Eigen::VectorXd s = score_vector(frame, family, link, beta, 1.0, cfg.mu_floor);
        const Eigen::MatrixXd neg_h = -hessian_matrix(frame, family, link, beta, 1.0, cfg.mu_floor).H;

        Eigen::VectorXd step;
        double ll_new = 0.0;
        bool accepted = false;
        double newton_size = std::numeric_limits<double>::infinity();

        Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
        if (llt.info() == Eigen::Success) {
            step = llt.solve(s);
            newton_size = max_abs(step);
            auto trial = try_loglik(frame, family, link, beta + step, cfg.mu_floor);
            if (trial && *trial >= ll) {
                ll_new = *trial;
                accepted = true;
            } else if (trial && *trial >= ll - 1e-12 * (1.0 + std::abs(ll)) &&
                       max_abs(score_vector(frame, family, link, beta + step, 1.0, cfg.mu_floor)) < max_abs(s)) {
                // Near the optimum the gain of a Newton step falls below the
                // rounding of the log-likelihood; a smaller score decides.
                ll_new = *trial;
                accepted = true;
                polishing = true;
            }
        }
        if (!accepted) {
            Eigen::VectorXd scale = neg_h.diagonal().cwiseAbs();
            const double floor = std::max(max_abs(scale), 1.0) * 1e-12;
            scale = scale.cwiseMax(floor);
            double lambda = cfg.ridge_init;
            for (int m = 0; m < cfg.max_ridge_steps && !accepted; ++m, lambda *= cfg.ridge_growth) {
                ++out.ridge_retries;
                Eigen::MatrixXd damped = neg_h;
                damped.diagonal() += lambda * scale;
                Eigen::LLT<Eigen::MatrixXd> dl(damped);
                if (dl.info() != Eigen::Success) continue;
                step = dl.solve(s);
                if (auto trial = try_loglik(frame, family, link, beta + step, cfg.mu_floor);
                    trial && *trial >= ll) {
                    ll_new = *trial;
                    accepted = true;
                }
            }
        }
        if (!accepted) {
            // No ascent direction improves the objective in floating point:
            // stationary when the undamped Newton step is already negligible.
            out.converged = newton_size < cfg.beta_tol;
            break;
        }

        const double dll = ll_new - ll;
        beta += step;
        ll = ll_new;
        if (!polishing) out.trace.push_back(ll);
        ++out.iterations;
        // A damped step is short because of the ridge, so the undamped
        // Newton step decides the parameter criterion.
        const double size = std::isfinite(newton_size) ? std::max(newton_size, max_abs(step)) : max_abs(step);
        if (std::abs(dll) <= cfg.tol * std::max(std::abs(ll), 1.0) && size < cfg.beta_tol) {
            out.converged = true;
            break;
        }
    }
    out.beta = std::move(beta);
    out.loglik = ll;
    if (out.converged) {
        // Stationarity at the returned point.
        const Eigen::VectorXd s = score_vector(frame, family, link, out.beta, 1.0, cfg.mu_floor);
        out.converged = max_abs(s) <= 1e-6 * (1.0 + std::abs(ll));
    }
    return out;
}

// k such that Pearson chi2 / df = 1; the statistic decreases in k.
double moment_nb_k(const ModelFrame& frame, Family family, const Eigen::VectorXd& mu) {
    const Eigen::VectorXd w = frame.weight_vector();
    const double df = w.sum() - static_cast<double>(frame.p());
    if (!(df > 0.0)) throw Error(ErrorKind::NonPositiveDf, "sum of weights does not exceed p");
    auto ratio = [&](double k) {
        family.ancillary = k;
        return pearson_chi2(family, frame.y, mu, w) / df;
    };
    double lo = 0.0, hi = 1e6;
    if (ratio(lo) <= 1.0) return 0.0;
    if (ratio(hi) >= 1.0) return hi;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (ratio(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void FitConfig::validate() const {
    if (max_iter < 1 || !(tol > 0.0) || !(beta_tol > 0.0) || !(ridge_init > 0.0) ||
        !(ridge_growth > 1.0) || !(mu_floor > 0.0) || !(phi_floor > 0.0) || max_ridge_steps < 1)
        throw Error(ErrorKind::InvalidArgument, "fit options must be positive (ridge growth > 1)");
}

Eigen::VectorXd mean_vector(const ModelFrame& frame, const Family& family, Link link,
                            const Eigen::VectorXd& beta, double mu_floor) {
    check_frame(frame, beta);
    const Eigen::VectorXd eta = frame.X * beta;
    Eigen::VectorXd mu(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        mu(i) = floor_mean(family.kind, link_invert(link, eta(i)), mu_floor);
    return mu;
}

double weighted_loglik(const ModelFrame& frame, const Family& family, Link link,
                       const Eigen::VectorXd& beta, double phi, double mu_floor) {
    const Eigen::VectorXd mu = mean_vector(frame, family, link, beta, mu_floor);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        ll += frame.weights[i] * log_density(family, frame.y(i), mu(i), phi);
    return ll;
}

Eigen::VectorXd score_vector(const ModelFrame& frame, const Family& family, Link link,
                             const Eigen::VectorXd& beta, double phi, double mu_floor) {
    const Eigen::VectorXd mu = mean_vector(frame, family, link, beta, mu_floor);
    Eigen::VectorXd u(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const auto d = obs_derivs(family, link, mu(i));
        u(i) = frame.weights[i] * (frame.y(i) - mu(i)) / (d.V * d.gprime * phi);
    }
    return frame.X.transpose() * u;
}

HessianResult hessian_matrix(const ModelFrame& frame, const Family& family, Link link,
                             const Eigen::VectorXd& beta, double phi, double mu_floor) {
    const Eigen::VectorXd mu = mean_vector(frame, family, link, beta, mu_floor);
    HessianResult r;
    r.w0.resize(mu.size());
    r.we.resize(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const auto d = obs_derivs(family, link, mu(i));
        const double w = frame.weights[i];
        r.we(i) = w / (d.V * d.gprime * d.gprime * phi);
        r.w0(i) = r.we(i) + w * (frame.y(i) - mu(i)) * (d.V * d.gsecond + d.Vprime * d.gprime) /
                                (d.V * d.V * d.gprime * d.gprime * d.gprime * phi);
    }
    r.H = -(frame.X.transpose() * r.w0.asDiagonal() * frame.X);
    r.H = 0.5 * (r.H + r.H.transpose()).eval();
    return r;
}

FitResult fit_pseudo_mle(const ModelFrame& frame, const Family& family, Link link,
                         const FitConfig& config) {
    config.validate();
    const Eigen::Index n = frame.n(), p = frame.p();
    if (p < 1) throw Error(ErrorKind::InvalidArgument, "model has no columns");
    if (n < p)
        throw Error(ErrorKind::RankDeficient, "fewer observations (" + std::to_string(n) +
                                                  ") than parameters (" + std::to_string(p) + ")");
    if (!link_supported(family.kind, link.kind))
        throw Error(ErrorKind::InvalidArgument, std::string("link '") + std::string(to_string(link.kind)) +
                                                    "' is not supported for family '" +
                                                    std::string(to_string(family.kind)) + "'");
    check_frame(frame, Eigen::VectorXd::Zero(p));
    for (Eigen::Index i = 0; i < n; ++i)
        if (!in_response_domain(family.kind, frame.y(i)))
            throw Error(ErrorKind::Domain, "response value " + std::to_string(frame.y(i)) + " at row " +
                                               std::to_string(i + 1) + " is outside the " +
                                               std::string(to_string(family.kind)) + " support");
    check_rank(frame);

    FitResult res;
    res.family = family;
    res.link = link;
    Eigen::VectorXd beta = config.start ? *config.start : starting_values(frame, family, link, config);
    if (beta.size() != p) throw Error(ErrorKind::DimensionMismatch, "starting vector has wrong length");

    NewtonOutcome nr = newton(frame, family, link, beta, config);
    res.iterations = nr.iterations;
    res.ridge_retries = nr.ridge_retries;
    res.loglik_trace = nr.trace;

    if (family.kind == FamilyKind::NegativeBinomial && config.estimate_nb_k) {
        for (int round = 0; round < config.max_k_updates; ++round) {
            const double k_old = res.family.ancillary.value_or(0.0);
            const double k_new =
                moment_nb_k(frame, res.family, mean_vector(frame, res.family, link, nr.beta, config.mu_floor));
            res.family.ancillary = k_new;
            if (std::abs(k_new - k_old) <= 1e-8 * (1.0 + k_old)) break;
            nr = newton(frame, res.family, link, nr.beta, config);
            res.iterations += nr.iterations;
            res.ridge_retries += nr.ridge_retries;
            res.loglik_trace.insert(res.loglik_trace.end(), nr.trace.begin(), nr.trace.end());
        }
    }

    res.beta = nr.beta;
    res.converged = nr.converged;
    res.eta = frame.X * res.beta;
    res.mu = mean_vector(frame, res.family, link, res.beta, config.mu_floor);
    for (Eigen::Index i = 0; i < n; ++i)
        if (res.mu(i) != link_invert(link, res.eta(i))) ++res.floored_means;
    res.phi = std::max(estimate_dispersion(res.family, frame.y, res.mu, frame.weight_vector(), p),
                       config.phi_floor);
    res.loglik = weighted_loglik(frame, res.family, link, res.beta, res.phi, config.mu_floor);
    const HessianResult h = hessian_matrix(frame, res.family, link, res.beta, res.phi, config.mu_floor);
    res.neg_hessian = -h.H;
    res.we_diag = h.we;
    return res;
}

}  // namespace svyglm
