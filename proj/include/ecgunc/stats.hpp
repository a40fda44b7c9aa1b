#pragma once

#include <span>

namespace ecgunc {

enum class Alternative { AGreater, BGreater, TwoSided };

struct WelchResult {
    double t = 0.0;
    double dof = 0.0; // Welch-Satterthwaite
    double p = 0.0;
};

/// Two-sample t-test without the equal-variance assumption. Sample variances
/// use the n-1 denominator. Requires n >= 2 per sample and nonzero variance
/// in at least one of them.
WelchResult welch_t(std::span<const double> a, std::span<const double> b,
                    Alternative alternative);

struct PearsonResult {
    double r = 0.0;
    double p = 0.0; // two-sided, non-correlation null
};

/// Pearson correlation with p-value from t = r*sqrt((n-2)/(1-r^2)) against
/// the t-distribution with n-2 dof. Requires n >= 3 and nonzero variances.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Upper-tail probability P(T > t) for Student's t with `dof` degrees of
/// freedom, via the regularized incomplete beta function.
double t_tail(double t, double dof);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_inc_beta(double x, double a, double b);

/// Smallest p-value ever reported (never exactly 0).
inline constexpr double kPFloor = 1e-300;

} // namespace ecgunc
