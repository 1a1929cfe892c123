#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "lifespan/errors.hpp"

namespace lifespan {

/// E_q = (q-1)^{q-1} / q^q, evaluated in log space.
inline double e_q(double q) {
    if (!(q > 1.0)) throw InvalidData("E_q requires q > 1");
    return std::exp((q - 1.0) * std::log(q - 1.0) - q * std::log(q));
}

/// Constants of the closed-form bounds. C_general scales the logarithmic
/// lower bound; C_star is the growth-rate constant entering delta_1 and the
/// critical-regime threshold Y0 = 1/(36 C*); the critical bound constant
/// defaults to 1/(40 C*).
struct BoundsConfig {
    double q = 2.0;
    double m0 = 1.0;
    double gamma1_area = 0.5;
    double omega_volume = 1.0;
    int n = 2;
    double min_u0 = 1.0;
    double c_general = 1.0;
    double c_star = 1.0;
    double y0 = -1.0;         // < 0: use 1/(36 c_star)
    double c_critical = -1.0; // < 0: use 1/(40 c_star)

    double y0_effective() const { return y0 > 0.0 ? y0 : 1.0 / (36.0 * c_star); }
    double c_critical_effective() const {
        return c_critical > 0.0 ? c_critical : 1.0 / (40.0 * c_star);
    }

    void validate() const {
        if (!(q > 1.0)) throw InvalidData("q must exceed 1");
        if (!(m0 > 0.0) || !(gamma1_area > 0.0) || !(omega_volume > 0.0))
            throw InvalidData("measures and M0 must be positive");
        if (n < 2) throw InvalidData("dimension must be >= 2");
        if (!(min_u0 >= 0.0)) throw InvalidData("min u0 must be nonnegative");
        if (!(c_general > 0.0) || !(c_star > 0.0))
            throw InvalidData("constants must be positive");
    }
};

/// T* <= 1/((q-1)|Gamma_1|) * int_Omega u0^{1-q} dx by grid quadrature.
/// Requires min u0 > 0.
inline double upper_bound(double q, double gamma1_area,
                          const std::vector<double>& u0_samples,
                          const std::vector<double>& cell_measures) {
    if (!(q > 1.0)) throw InvalidData("q must exceed 1");
    if (!(gamma1_area > 0.0)) throw InvalidData("|Gamma_1| must be positive");
    if (u0_samples.empty() || u0_samples.size() != cell_measures.size())
        throw InvalidData("sample/measure size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < u0_samples.size(); ++i) {
        if (!(u0_samples[i] > 0.0))
            throw PreconditionViolated("upper bound requires min u0 > 0");
        acc += cell_measures[i] * std::pow(u0_samples[i], 1.0 - q);
    }
    return acc / ((q - 1.0) * gamma1_area);
}

inline double upper_bound_constant_data(double q, double gamma1_area,
                                        double omega_volume, double m0) {
    if (!(m0 > 0.0)) throw PreconditionViolated("upper bound requires min u0 > 0");
    return omega_volume * std::pow(m0, 1.0 - q) / ((q - 1.0) * gamma1_area);
}

namespace detail {

/// ln(1 + e^x) without overflow.
inline double log1p_exp(double x) { return x > 36.0 ? x : std::log1p(std::exp(x)); }

}  // namespace detail

/// Logarithm of the argument combination (2 M0)^{-4(q-1)} |Gamma_1|^{-2/(n-1)}.
inline double log_general_argument(double q, double m0, double gamma1_area, int n) {
    return -4.0 * (q - 1.0) * std::log(2.0 * m0) -
           (2.0 / (n - 1.0)) * std::log(gamma1_area);
}

/// T* >= C/(q-1) ln(1 + (2 M0)^{-4(q-1)} |Gamma_1|^{-2/(n-1)}).
inline double lower_bound_general(const BoundsConfig& cfg) {
    cfg.validate();
    const double la = log_general_argument(cfg.q, cfg.m0, cfg.gamma1_area, cfg.n);
    return cfg.c_general / (cfg.q - 1.0) * detail::log1p_exp(la);
}

/// Y = M0^{q-1} |Gamma_1|^{1/(n-1)} for n >= 3, with the logarithmic
/// correction for n = 2.
inline double critical_y(int n, double m0, double q, double gamma1_area) {
    const double mq = std::pow(m0, q - 1.0);
    if (n >= 3) return mq * std::pow(gamma1_area, 1.0 / (n - 1.0));
    return mq * gamma1_area * std::log1p(1.0 / gamma1_area);
}

struct CriticalBound {
    double y = 0.0;
    double y_threshold = 0.0;  // Y0/q actually applied
    std::optional<double> bound;  // empty: regime not applicable
};

/// T* >= C/((q-1) Y) when Y <= Y0/q; otherwise reports the Y value only.
inline CriticalBound lower_bound_critical(const BoundsConfig& cfg) {
    cfg.validate();
    CriticalBound r;
    r.y = critical_y(cfg.n, cfg.m0, cfg.q, cfg.gamma1_area);
    r.y_threshold = cfg.y0_effective() / cfg.q;
    if (r.y <= r.y_threshold)
        r.bound = cfg.c_critical_effective() / ((cfg.q - 1.0) * r.y);
    return r;
}

struct SeriesBound {
    double sum = 0.0;
    double bound = 0.0;
    bool holds = false;
};

namespace detail {

/// S = sum_{k>=1} min(1, lambda^k A) in log arguments: a unit prefix of
/// length K1 = floor(ln A / ln(1/lambda)) plus the exact geometric tail.
inline SeriesBound series_lower_bound_log(double ln_lambda, double lnA) {
    SeriesBound out;
    const double lin = 1.0 / (1.0 - std::exp(ln_lambda));
    if (lnA + ln_lambda <= 0.0) {
        // lambda A <= 1: pure geometric series lambda A / (1 - lambda)
        out.sum = std::exp(lnA + ln_lambda) * lin;
    } else {
        double k1 = std::floor(-lnA / ln_lambda);
        if ((k1 + 1.0) * ln_lambda + lnA > 0.0) k1 += 1.0;  // guard roundoff
        if (k1 * ln_lambda + lnA <= 0.0) k1 -= 1.0;
        out.sum = k1 + std::exp((k1 + 1.0) * ln_lambda + lnA) * lin;
    }
    out.bound = log1p_exp(lnA + ln_lambda) / (2.0 * (-ln_lambda));
    out.holds = out.sum >= out.bound * (1.0 - 1e-12);
    return out;
}

}  // namespace detail

/// The exact series value together with the closed-form lower bound
/// ln(1 + lambda A) / (2 ln(1/lambda)).
inline SeriesBound series_lower_bound(double lambda, double A) {
    if (!(lambda > 0.0) || !(lambda < 1.0)) throw InvalidData("lambda must be in (0,1)");
    if (!(A > 0.0)) throw InvalidData("A must be positive");
    return detail::series_lower_bound_log(std::log(lambda), std::log(A));
}

/// Unique root of g(lambda) = (lambda - m)/lambda^q = y in (m, qm/(q-1)];
/// empty when y exceeds the maximum m^{1-q} E_q (no root exists beyond it).
inline std::optional<double> g_root(double q, double m, double y) {
    if (!(q > 1.0) || !(m > 0.0) || !(y > 0.0))
        throw InvalidData("g_root requires q > 1, m > 0, y > 0");
    const double ln_y = std::log(y);
    const double ln_ymax = (1.0 - q) * std::log(m) + std::log(e_q(q));
    if (ln_y > ln_ymax + 1e-14) return std::nullopt;
    const double hi = q * m / (q - 1.0);
    if (ln_y >= ln_ymax - 1e-15) return hi;
    // g is strictly increasing on (m, hi]; bisect on ln g - ln y
    auto defect = [&](double lam) {
        return std::log(lam - m) - q * std::log(lam) - ln_y;
    };
    double a = m, b = hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        (defect(mid) < 0.0 ? a : b) = mid;
        if ((b - a) <= 1e-15 * b) break;
    }
    return 0.5 * (a + b);
}

struct DoublingSchedule {
    double sum = 0.0;           // sum_k min(1, C lambda^k A): the lower-bound time
    double series_bound = 0.0;  // series lower bound for (lambda, C A)
    double lambda = 0.0;
    double log_argument = 0.0;  // ln(C A)
};

/// The doubling construction M_k = 2^k M0: t_k >= min(1, C (2^k M0)^{-4(q-1)}
/// |Gamma_1|^{-2/(n-1)}), summed exactly.
inline DoublingSchedule doubling_schedule(const BoundsConfig& cfg) {
    cfg.validate();
    DoublingSchedule out;
    const double ln_lambda = -4.0 * (cfg.q - 1.0) * std::log(2.0);
    out.lambda = std::exp(ln_lambda);
    const double lnA = std::log(cfg.c_general) -
                       4.0 * (cfg.q - 1.0) * std::log(cfg.m0) -
                       (2.0 / (cfg.n - 1.0)) * std::log(cfg.gamma1_area);
    out.log_argument = lnA;
    // replicate series_lower_bound in log space (A may overflow a double)
    SeriesBound sb;
    {
        const double lin = 1.0 / (1.0 - out.lambda);
        if (lnA + ln_lambda <= 0.0) {
            sb.sum = std::exp(lnA + ln_lambda) * lin;
        } else {
            double k1 = std::floor(-lnA / ln_lambda);
            if ((k1 + 1.0) * ln_lambda + lnA > 0.0) k1 += 1.0;
            if (k1 * ln_lambda + lnA <= 0.0) k1 -= 1.0;
            sb.sum = k1 + std::exp((k1 + 1.0) * ln_lambda + lnA) * lin;
        }
        sb.bound = detail::log1p_exp(lnA + ln_lambda) / (2.0 * (-ln_lambda));
    }
    out.sum = sb.sum;
    out.series_bound = sb.bound;
    return out;
}

/// delta_1 = 2 C* |Gamma_1|^{1/(n-1)} (n >= 3) or
/// 2 C* |Gamma_1| ln(1 + 1/|Gamma_1|) (n = 2).
inline double delta_1(const BoundsConfig& cfg) {
    if (cfg.n >= 3) return 2.0 * cfg.c_star * std::pow(cfg.gamma1_area, 1.0 / (cfg.n - 1.0));
    return 2.0 * cfg.c_star * cfg.gamma1_area * std::log1p(1.0 / cfg.gamma1_area);
}

struct ScheduleResult {
    bool empty = false;
    long long L = 0;
    std::vector<double> M;  // M_0 ... M_L
    std::vector<double> x;  // x_k = M_k^{q-1} delta_1
    long long L0 = 0;       // first index with x_k > min(1/2, E_q)
    double l_lower_bound = 0.0;
};

/// The critical construction: each step solves (M_k - M_{k-1})/M_k^q =
/// delta_1 inside (M_{k-1}, q M_{k-1}/(q-1)], stopping once
/// M_{k-1}^{q-1} delta_1 > E_q. Consecutive threshold crossings are at
/// least unit time apart, so L is itself a lifespan lower bound.
inline ScheduleResult critical_schedule(double q, double m0, double delta1,
                                        long long max_len = 20000000) {
    if (!(q > 1.0) || !(m0 > 0.0) || !(delta1 > 0.0))
        throw InvalidData("critical schedule requires q > 1, M0 > 0, delta_1 > 0");
    ScheduleResult out;
    const double eq = e_q(q);
    const double x0 = std::pow(m0, q - 1.0) * delta1;
    out.M.push_back(m0);
    out.x.push_back(x0);
    out.l_lower_bound = (1.0 / (10.0 * (q - 1.0))) * (1.0 / x0 - 9.0 * q);
    if (x0 > eq) {
        out.empty = true;  // the construction stops immediately; L = 0
        return out;
    }
    const double gate = std::min(0.5, eq);
    out.L0 = 0;
    while (out.x.back() <= eq) {
        const auto root = g_root(q, out.M.back(), delta1);
        if (!root) break;  // defensive; precondition guarantees a root
        out.M.push_back(*root);
        out.x.push_back(std::pow(*root, q - 1.0) * delta1);
        if (out.L0 == 0 && out.x.back() > gate)
            out.L0 = static_cast<long long>(out.x.size()) - 1;
        if (static_cast<long long>(out.M.size()) > max_len)
            throw InvalidData("critical schedule exceeded the length guard");
    }
    out.L = static_cast<long long>(out.M.size()) - 1;
    if (out.L0 == 0) out.L0 = out.L;
    return out;
}

/// Fit C so the logarithmic lower bound touches the measured T* from below on a
/// designated baseline; reused across a sweep afterwards.
inline double calibrate_c_general(double t_star, double q, double m0,
                                  double gamma1_area, int n) {
    const double la = log_general_argument(q, m0, gamma1_area, n);
    return t_star * (q - 1.0) / detail::log1p_exp(la);
}

inline double calibrate_c_critical(double t_star, double q, double y) {
    return t_star * (q - 1.0) * y;
}

}  // namespace lifespan
