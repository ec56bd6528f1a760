#pragma once

namespace svyglm {

// Regularized incomplete beta I_x(a, b) and its complement 1 - I_x(a, b).
// The caller passes both x and 1 - x so that a tail probability computed
// from a ratio keeps full relative precision near either endpoint.
struct BetaTail {
    double lower;   // I_x(a, b)
    double upper;   // 1 - I_x(a, b)
};
BetaTail incomplete_beta(double a, double b, double x, double one_minus_x);
double incomplete_beta(double a, double b, double x);

// log B(a, b), accurate when one or both arguments are large.
double log_beta(double a, double b);

// P(F > f) for F ~ F(d1, d2).
double f_survival(double f, double d1, double d2);

// Two-sided P(|T| > |t|) for T ~ t(df); df = +inf gives the normal tail.
double t_two_sided_p(double t, double df);

// Upper quantile: P(T > q) = alpha, for 0 < alpha < 1/2.
double t_quantile_upper(double alpha, double df);

}  // namespace svyglm
