#include "tposeen/wake.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace tposeen {

double wake(const Vec3& x) {
    const double r = x.norm();
    if (x.x >= 0) return r + x.x;
    const double perp2 = x.y * x.y + x.z * x.z;
    if (perp2 == 0) return 0.0;
    return perp2 / (r - x.x);
}

Vec3 wake_gradient(const Vec3& x) {
    const double r = x.norm();
    return {x.x / r + 1.0, x.y / r, x.z / r};
}

namespace {

// double-double arithmetic; the alternating ein series needs both its terms
// and the accumulator carried to ~1e-32 so the z < 30 branch stays below
// 1e-12 absolute while terms reach ~2.6e10.
struct DD {
    double hi = 0, lo = 0;

    static DD two_sum(double a, double b) {
        double s = a + b;
        double bb = s - a;
        double err = (a - (s - bb)) + (b - bb);
        return {s, err};
    }
    DD plus(const DD& o) const {
        DD s = two_sum(hi, o.hi);
        s.lo += lo + o.lo;
        DD r = two_sum(s.hi, s.lo);
        return r;
    }
    DD times(double b) const {
        double p = hi * b;
        double err = std::fma(hi, b, -p);
        err += lo * b;
        return two_sum(p, err);
    }
    DD over(double b) const {
        double q = hi / b;
        double r = std::fma(-q, b, hi) + lo;
        DD s = two_sum(q, r / b);
        return s;
    }
    double value() const { return hi + lo; }
};

}  // namespace

double expint_e1(double z) {
    if (!(z > 0)) throw std::invalid_argument("expint_e1: z must be positive");
    if (z <= 1.0) {
        // E1(z) = -gamma - log z + sum_{n>=1} (-1)^{n+1} z^n/(n n!)
        double sum = 0, f = 1;
        for (int n = 1; n <= 40; ++n) {
            f *= n;
            double t = std::pow(z, n) / (n * f);
            sum += (n % 2 == 1) ? t : -t;
            if (t < 1e-18) break;
        }
        constexpr double gamma = 0.57721566490153286060651209008240243;
        return -gamma - std::log(z) + sum;
    }
    // modified Lentz continued fraction: E1(z) = e^{-z} / (z + 1/(1 + 1/(z + 2/(1 + ...))))
    const double tiny = 1e-300;
    double b = z + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-z);
}

double ein(double z) {
    if (z < 0) throw std::invalid_argument("ein: negative argument");
    if (z == 0) return 0.0;
    if (z < 30.0) {
        DD acc;
        DD term{1.0, 0.0};  // z^n / n!
        for (int n = 1; n <= 160; ++n) {
            term = term.times(z).over(n);
            DD t = term.over(n);
            acc = acc.plus(n % 2 == 1 ? t : DD{-t.hi, -t.lo});
            if (n > z && t.hi < 1e-18) break;
        }
        return acc.value();
    }
    constexpr double gamma = 0.57721566490153286060651209008240243;
    double e1 = (z > 700.0) ? 0.0 : expint_e1(z);
    return gamma + std::log(z) + e1;
}

// ein'(z) and higher derivatives. Direct formulas cancel catastrophically for
// small z; series take over below 0.5.
double ein_d1(double z) {
    if (z < 0) throw std::invalid_argument("ein_d1: negative argument");
    if (z > 0.5) return (1.0 - std::exp(-z)) / z;
    double sum = 0, term = 1;
    for (int n = 0; n <= 30; ++n) {
        if (n > 0) term *= -z / n;
        sum += term / (n + 1);
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

double ein_d2(double z) {
    if (z < 0) throw std::invalid_argument("ein_d2: negative argument");
    if (z > 0.5) return (std::exp(-z) * (1.0 + z) - 1.0) / (z * z);
    // sum_{n>=1} (-1)^n n z^{n-1} / (n+1)!
    double sum = 0;
    double zpow = 1.0;   // z^{n-1}
    double fact = 2.0;   // (n+1)!
    double sign = -1.0;  // (-1)^n
    for (int n = 1; n <= 30; ++n) {
        sum += sign * n * zpow / fact;
        zpow *= z;
        fact *= (n + 2);
        sign = -sign;
        if (zpow / fact < 1e-18) break;
    }
    return sum;
}

double ein_d3(double z) {
    if (z < 0) throw std::invalid_argument("ein_d3: negative argument");
    if (z > 0.5) return (2.0 - std::exp(-z) * (z * z + 2.0 * z + 2.0)) / (z * z * z);
    // sum_{n>=2} (-1)^n n (n-1) z^{n-2} / (n+1)!
    double sum = 0;
    double zpow = 1.0;   // z^{n-2}
    double fact = 6.0;   // (n+1)!
    double sign = 1.0;   // (-1)^n
    for (int n = 2; n <= 32; ++n) {
        sum += sign * n * (n - 1) * zpow / fact;
        zpow *= z;
        fact *= (n + 2);
        sign = -sign;
        if (n * n * zpow / fact < 1e-18) break;
    }
    return sum;
}

Complex sqrt_neg_mu(double eta, double lambda) {
    if (eta == 0) throw std::invalid_argument("sqrt_neg_mu: eta must be nonzero (steady mode handled separately)");
    if (!(lambda > 0)) throw std::invalid_argument("sqrt_neg_mu: lambda must be positive");
    const Complex mu(0.25 * lambda * lambda, eta);
    Complex w = std::sqrt(-mu);
    if (w.imag() < 0) w = -w;
    return w;
}

namespace {

double c4_ratio(double eta, double lambda) {
    // Im sqrt(-mu) = sqrt((|mu| + (lambda/2)^2)/2), computed stably.
    const double a = 0.25 * lambda * lambda;
    const double rho = std::hypot(a, eta);
    return (std::sqrt(0.5 * (rho + a)) - 0.5 * lambda) / std::sqrt(std::abs(eta));
}

}  // namespace

double c4_constant(double lambda, double eta0) {
    if (!(lambda > 0) || !(eta0 > 0))
        throw std::invalid_argument("c4_constant: lambda and eta0 must be positive");
    const int n = 4000;
    const double lo = std::log(eta0), hi = std::log(1e6 * eta0);
    double best = std::numeric_limits<double>::infinity();
    int ibest = 0;
    for (int i = 0; i < n; ++i) {
        double eta = std::exp(lo + (hi - lo) * i / (n - 1));
        double v = c4_ratio(eta, lambda);
        if (v < best) {
            best = v;
            ibest = i;
        }
    }
    // refine around the grid minimizer, clamped to [eta0, 1e6 eta0]
    double step = (hi - lo) / (n - 1);
    double l = std::max(lo, lo + (ibest - 1) * step);
    double r = std::min(hi, lo + (ibest + 1) * step);
    for (int pass = 0; pass < 40; ++pass) {
        double m1 = l + (r - l) / 3, m2 = r - (r - l) / 3;
        if (c4_ratio(std::exp(m1), lambda) < c4_ratio(std::exp(m2), lambda))
            r = m2;
        else
            l = m1;
    }
    best = std::min(best, c4_ratio(std::exp(0.5 * (l + r)), lambda));
    return best;
}

}  // namespace tposeen
