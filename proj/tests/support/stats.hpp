#pragma once

// Test-only statistics helpers: p-values for the chi-squared and Student-t
// tests via the standard incomplete gamma / beta continued fractions
// (Numerical Recipes style). Independent of the library under test.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace teststats {

inline double gammln(double x) { return std::lgamma(x); }

// Regularized lower incomplete gamma P(a, x) by series expansion.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gammln(a));
}

// Regularized upper incomplete gamma Q(a, x) by continued fraction.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gammln(a)) * h;
}

inline double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0) return 1.0;
    return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

// P(chi2 >= stat) with the given degrees of freedom.
inline double chi_squared_sf(double stat, int dof) {
    return gamma_q(0.5 * dof, 0.5 * stat);
}

// Incomplete beta by continued fraction.
inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h;
}

inline double ibeta(double a, double b, double x) {
    if (x < 0 || x > 1) throw std::invalid_argument("ibeta: x outside [0,1]");
    if (x == 0 || x == 1) return x;
    const double bt = std::exp(gammln(a + b) - gammln(a) - gammln(b) + a * std::log(x) +
                               b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// One-sided P(T >= t) for Student's t with dof degrees of freedom.
inline double student_t_sf(double t, double dof) {
    const double p_two = ibeta(0.5 * dof, 0.5, dof / (dof + t * t));
    return t >= 0 ? 0.5 * p_two : 1.0 - 0.5 * p_two;
}

// One-sided paired t-test p-value for mean(d) < 0.
inline double paired_t_test_less(const std::vector<double>& d) {
    const int n = static_cast<int>(d.size());
    if (n < 2) throw std::invalid_argument("paired_t_test_less: need at least two pairs");
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    var /= (n - 1);
    if (var == 0.0) return mean < 0 ? 0.0 : 1.0;
    const double t = mean / std::sqrt(var / n);
    // mean < 0 evidence corresponds to the left tail.
    return student_t_sf(-t, n - 1);
}

// Pearson chi-squared goodness-of-fit p-value against uniform expected counts.
inline double chi_squared_uniform_pvalue(const std::vector<long>& counts) {
    const int k = static_cast<int>(counts.size());
    if (k < 2) throw std::invalid_argument("chi_squared_uniform_pvalue: need >= 2 bins");
    double total = 0.0;
    for (long c : counts) total += static_cast<double>(c);
    const double expected = total / k;
    double stat = 0.0;
    for (long c : counts) {
        const double diff = static_cast<double>(c) - expected;
        stat += diff * diff / expected;
    }
    return chi_squared_sf(stat, k - 1);
}

}  // namespace teststats
