#include "svyglm/taylor_variance.hpp"

#include <cmath>

#include "svyglm/error.hpp"

namespace svyglm {

std::string_view to_string(SingletonPolicy p) {
    switch (p) {
        case SingletonPolicy::Error: return "error";
        case SingletonPolicy::Centered: return "centered";
        case SingletonPolicy::Certainty: return "certainty";
    }
    return "?";
}

SingletonPolicy parse_singleton_policy(std::string_view name) {
    for (auto p : {SingletonPolicy::Error, SingletonPolicy::Centered, SingletonPolicy::Certainty})
        if (to_string(p) == name) return p;
    throw Error(ErrorKind::InvalidArgument, "unknown singleton policy '" + std::string(name) + "'");
}

std::string_view to_string(SmallSampleFactor f) {
    switch (f) {
        case SmallSampleFactor::Observations: return "obs";
        case SmallSampleFactor::Psus: return "psu";
        case SmallSampleFactor::None: return "none";
    }
    return "?";
}

SmallSampleFactor parse_small_sample_factor(std::string_view name) {
    for (auto f : {SmallSampleFactor::Observations, SmallSampleFactor::Psus, SmallSampleFactor::None})
        if (to_string(f) == name) return f;
    throw Error(ErrorKind::InvalidArgument, "unknown small-sample factor '" + std::string(name) + "'");
}

std::map<PsuKey, Eigen::VectorXd> psu_score_sums(const FitResult& fit, const ModelFrame& frame) {
    const Eigen::Index n = frame.n(), p = frame.p();
    if (fit.mu.size() != n || fit.beta.size() != p)
        throw Error(ErrorKind::DimensionMismatch, "fit does not belong to this frame");
    std::map<PsuKey, Eigen::VectorXd> totals;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = fit.mu(i);
        const double V = variance_fn(fit.family, mu).V;
        const double g1 = link_derivs(fit.link, mu).gprime;
        const double u = frame.weights[i] * (frame.y(i) - mu) / (V * g1);
        auto [it, inserted] = totals.try_emplace({frame.strata[i], frame.psus[i]}, Eigen::VectorXd::Zero(p));
        it->second.noalias() += u * frame.X.row(i).transpose();
    }
    return totals;
}

VarianceComponents sandwich_variance(const FitResult& fit, const ModelFrame& frame,
                                     const DesignSummary& design, const VarianceOptions& options) {
    const Eigen::Index n = frame.n(), p = frame.p();
    VarianceComponents vc;

    Eigen::VectorXd we(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = fit.mu(i);
        const double g1 = link_derivs(fit.link, mu).gprime;
        we(i) = frame.weights[i] / (variance_fn(fit.family, mu).V * g1 * g1);
    }
    vc.Q = frame.X.transpose() * we.asDiagonal() * frame.X;
    vc.Q = 0.5 * (vc.Q + vc.Q.transpose()).eval();

    vc.score_psu = psu_score_sums(fit, frame);

    std::map<std::string, std::vector<const Eigen::VectorXd*>> by_stratum;
    std::map<std::string, double> fpc_of;
    for (Eigen::Index i = 0; i < n; ++i) fpc_of.emplace(frame.strata[i], frame.fpc[i]);
    for (const auto& [key, e] : vc.score_psu) by_stratum[key.first].push_back(&e);

    std::size_t n_psu = vc.score_psu.size();
    if (by_stratum.size() != design.H || n_psu != design.n_psu ||
        static_cast<std::size_t>(n) != design.n)
        throw Error(ErrorKind::DimensionMismatch, "design summary does not describe this frame");

    Eigen::VectorXd grand = Eigen::VectorXd::Zero(p);
    for (const auto& [key, e] : vc.score_psu) grand += e;
    grand /= static_cast<double>(n_psu);

    vc.G = Eigen::MatrixXd::Zero(p, p);
    for (const auto& [h, totals] : by_stratum) {
        const double nh = static_cast<double>(totals.size());
        const double fh = fpc_of.at(h);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
        for (const auto* e : totals) mean += *e;
        mean /= nh;
        vc.stratum_means[h] = mean;

        Eigen::MatrixXd contrib = Eigen::MatrixXd::Zero(p, p);
        if (totals.size() == 1) {
            switch (options.singleton) {
                case SingletonPolicy::Error:
                    throw Error(ErrorKind::SingletonStratum,
                                "stratum '" + h + "' has a single PSU; choose a singleton policy");
                case SingletonPolicy::Certainty: break;
                case SingletonPolicy::Centered: {
                    const Eigen::VectorXd d = *totals.front() - grand;
                    contrib = (1.0 - fh) * d * d.transpose();
                    break;
                }
            }
        } else {
            for (const auto* e : totals) {
                const Eigen::VectorXd d = *e - mean;
                contrib.noalias() += d * d.transpose();
            }
            contrib *= nh * (1.0 - fh) / (nh - 1.0);
        }
        vc.G += contrib;
        vc.stratum_G.emplace(h, std::move(contrib));
    }

    double count = 0.0;
    switch (options.factor) {
        case SmallSampleFactor::Observations: count = static_cast<double>(n); break;
        case SmallSampleFactor::Psus: count = static_cast<double>(n_psu); break;
        case SmallSampleFactor::None: break;
    }
    if (options.factor != SmallSampleFactor::None) {
        if (!(count > static_cast<double>(p)))
            throw Error(ErrorKind::NonPositiveDf,
                        "small-sample factor needs n > p (n = " + std::to_string(count) + ")");
        vc.small_sample_factor = (count - 1.0) / (count - static_cast<double>(p));
    }
    vc.G *= vc.small_sample_factor;
    vc.G = 0.5 * (vc.G + vc.G.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> llt(vc.Q);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::RankDeficient, "Q is not positive definite at the fitted values");
    const Eigen::MatrixXd q_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    vc.vbeta = q_inv * vc.G * q_inv;
    vc.vbeta = 0.5 * (vc.vbeta + vc.vbeta.transpose()).eval();
    vc.df_design = static_cast<double>(design.n_psu) - static_cast<double>(design.H);
    return vc;
}

}  // namespace svyglm
