#include "svyglm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "svyglm/error.hpp"

namespace svyglm {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 200000;

// lgamma(x) - [(x - 1/2) log x - x + log(2 pi)/2], Stirling series for x >= 10.
double stirling_remainder(double x) {
    const double r = 1.0 / x, r2 = r * r;
    return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b),
// convergent for x < (a + 1) / (a + b + 2).
double beta_fraction(double a, double b, double x) {
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxTerms; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw Error(ErrorKind::Domain, "incomplete beta continued fraction did not converge (a=" +
                                       std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

}  // namespace

double log_beta(double a, double b) {
    if (a < b) std::swap(a, b);   // a >= b
    if (a < 10.0) return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double s = a + b;
    if (b < 10.0) {
        // lgamma(a) - lgamma(a + b) without the cancellation of two huge terms.
        return std::lgamma(b) - (a - 0.5) * std::log1p(b / a) - b * std::log(s) + b +
               stirling_remainder(a) - stirling_remainder(s);
    }
    constexpr double half_log_2pi = 0.91893853320467274178;
    return half_log_2pi - (a - 0.5) * std::log1p(b / a) + b * std::log(b / s) - 0.5 * std::log(b) +
           stirling_remainder(a) + stirling_remainder(b) - stirling_remainder(s);
}

BetaTail incomplete_beta(double a, double b, double x, double y) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0) || !(y >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw Error(ErrorKind::Domain, "incomplete beta needs a, b > 0 and 0 <= x <= 1");
    if (x == 0.0) return {0.0, 1.0};
    if (y == 0.0) return {1.0, 0.0};
    const double log_x = x > 0.5 ? std::log1p(-y) : std::log(x);
    const double log_y = y > 0.5 ? std::log1p(-x) : std::log(y);
    const double log_front = a * log_x + b * log_y - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double lower = std::exp(log_front) * beta_fraction(a, b, x) / a;
        return {lower, 1.0 - lower};
    }
    const double upper = std::exp(log_front) * beta_fraction(b, a, y) / b;
    return {1.0 - upper, upper};
}

double incomplete_beta(double a, double b, double x) {
    return incomplete_beta(a, b, x, 1.0 - x).lower;
}

double f_survival(double f, double d1, double d2) {
    if (!(f >= 0.0) || !(d1 > 0.0) || !(d2 > 0.0) || !std::isfinite(d1) || !std::isfinite(d2))
        throw Error(ErrorKind::Domain, "F survival needs f >= 0 and finite positive degrees of freedom");
    if (f == 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double denom = d2 + d1 * f;
    const double p = incomplete_beta(0.5 * d2, 0.5 * d1, d2 / denom, d1 * f / denom).lower;
    return std::clamp(p, 0.0, 1.0);
}

double t_two_sided_p(double t, double df) {
    if (!(df > 0.0) || std::isnan(t)) throw Error(ErrorKind::Domain, "t tail needs df > 0");
    if (std::isinf(df)) return std::erfc(std::abs(t) / std::numbers::sqrt2);
    return f_survival(t * t, 1.0, df);
}

double t_quantile_upper(double alpha, double df) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw Error(ErrorKind::Domain, "quantile needs 0 < alpha < 1/2");
    const double target = 2.0 * alpha;
    double lo = 0.0, hi = 1.0;
    while (t_two_sided_p(hi, df) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 300 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (t_two_sided_p(mid, df) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace svyglm
