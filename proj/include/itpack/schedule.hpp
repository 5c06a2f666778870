#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace itpack {

class ScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScheduleMode { Theory, Practical };

/// Scalar parameters of the two-level process plus the decay formulas for
/// part sizes and degree bounds. Everything is evaluated in log space first;
/// the linear accessors exponentiate at the end. In the theory regime the
/// linear values underflow for large r, so callers that only need ratios or
/// comparisons should stick to the log accessors, which stay finite for
/// eps >= 1e-3 and n <= 1e12 over the whole (r, t) range.
///
/// Logs are natural throughout; the round and iteration budgets round up and
/// the per-round transversal count rounds down.
struct NibbleSchedule {
    double eps = 0;
    std::int64_t n = 0;
    double p = 0;
    double delta = 0;
    std::int64_t r_star = 0;
    std::int64_t t_star = 0;
    ScheduleMode mode = ScheduleMode::Practical;

    // log((1-p)^(r-1) * n)
    double log_S0(std::int64_t r) const {
        return static_cast<double>(r - 1) * std::log1p(-p) + std::log(static_cast<double>(n));
    }
    double S0(std::int64_t r) const { return std::exp(log_S0(r)); }

    // log((1-eps) (1-p+eps^3 p)^(r-1) * n)
    double log_D0(std::int64_t r) const {
        return std::log1p(-eps) + static_cast<double>(r - 1) * std::log1p(-p + eps * eps * eps * p) +
               std::log(static_cast<double>(n));
    }
    double D0(std::int64_t r) const { return std::exp(log_D0(r)); }

    // D0(r)/S0(r); bounded, so safe in linear space.
    double density_ratio(std::int64_t r) const { return std::exp(log_D0(r) - log_S0(r)); }

    // Per-vertex deletion probability of one iteration in round r.
    double p_r(std::int64_t r) const { return p * density_ratio(r); }

    double log_S_minus(std::int64_t r, std::int64_t t) const {
        return log_S0(r) + static_cast<double>(t) * std::log1p(-p_r(r) - p * p);
    }
    double S_minus(std::int64_t r, std::int64_t t) const { return std::exp(log_S_minus(r, t)); }

    double log_S_plus(std::int64_t r, std::int64_t t) const {
        return log_S0(r) + static_cast<double>(t) * std::log1p(-p_r(r) + p * p);
    }
    double S_plus(std::int64_t r, std::int64_t t) const { return std::exp(log_S_plus(r, t)); }

    double log_D(std::int64_t r, std::int64_t t) const {
        return log_D0(r) + static_cast<double>(t) * std::log1p(-p + eps * p / 2);
    }
    double D(std::int64_t r, std::int64_t t) const { return std::exp(log_D(r, t)); }

    /// Number of transversals grown in round r. Rounds down; the tiny bump
    /// keeps exp/log evaluation noise from turning an exact integer like
    /// 0.4 * 5 into its predecessor.
    std::int64_t m_r(std::int64_t r) const {
        const double mass = p * S0(r);
        return static_cast<std::int64_t>(std::floor(mass + 1e-9));
    }
};

inline NibbleSchedule make_schedule(double eps, std::int64_t n) {
    if (!(eps > 0.0 && eps < 1.0)) throw ScheduleError("eps must lie in (0,1)");
    if (n < 3) throw ScheduleError("n too small: need ln(n) > 1 so that p < 1");
    NibbleSchedule s;
    s.eps = eps;
    s.n = n;
    const double ln = std::log(static_cast<double>(n));
    s.p = 1.0 / (ln * ln * ln);
    s.delta = std::pow(eps, 5);
    s.r_star = static_cast<std::int64_t>(std::ceil(30.0 / (eps * s.p)));
    s.t_star = s.r_star;
    s.mode = ScheduleMode::Theory;
    return s;
}

inline NibbleSchedule make_practical_schedule(double eps, std::int64_t n, double p,
                                              std::int64_t r_star, std::int64_t t_star) {
    if (!(eps > 0.0 && eps < 1.0)) throw ScheduleError("eps must lie in (0,1)");
    if (!(p > 0.0 && p < 1.0)) throw ScheduleError("p must lie in (0,1)");
    if (n < 1) throw ScheduleError("n must be positive");
    if (r_star < 1 || t_star < 1) throw ScheduleError("round and iteration budgets must be >= 1");
    NibbleSchedule s;
    s.eps = eps;
    s.n = n;
    s.p = p;
    s.delta = std::pow(eps, 5);
    s.r_star = r_star;
    s.t_star = t_star;
    s.mode = ScheduleMode::Practical;
    if (s.m_r(1) < 1)
        throw ScheduleError("p*n < 1: the first round would grow no transversals");
    return s;
}

/// Thresholds for the per-iteration statistical monitors. Theory defaults
/// are the natural-log powers used by the analysis; at desk scale they are
/// mostly vacuous, so runs on small instances usually override them.
struct MonitorConfig {
    double deg_threshold_c3 = 0;    // min degree for the transversal-neighbor check
    double deg_threshold_small = 0; // min degree for the selection-mass check
    double crowd_bound = 0;         // cap on selection crowding per vertex
    double degree_anchor_override = 0; // > 0 replaces the measured degree anchor
    std::int64_t retry_budget = 10;
    double statistical_quantile = 0.99;

    double size_slack(double p_r, double s) const {
        return slack_factor * std::sqrt(p_r * s);
    }

    double slack_factor = 0; // ln n; kept explicit so tests can pin it

    static MonitorConfig theory_defaults(const NibbleSchedule& sched) {
        MonitorConfig c;
        const double ln = std::log(static_cast<double>(sched.n));
        c.deg_threshold_c3 = std::pow(ln, 15);
        c.deg_threshold_small = std::pow(ln, 5);
        c.crowd_bound = ln * ln;
        c.slack_factor = ln;
        return c;
    }
};

/// Numeric evaluation of the schedule's internal consistency relations.
/// Clauses (ii), (iii) and (v) are concrete inequalities checked at the
/// monotone endpoints r = 1 and r = r_star; clauses (i) and (iv) are
/// asymptotic statements, reported as values only.
struct ClauseReport {
    std::string id;
    std::optional<bool> pass; // empty for informational clauses
    std::map<std::string, double> values;
    std::string note;
};

struct ObservationReport {
    double eps = 0;
    std::int64_t n = 0;
    std::vector<ClauseReport> clauses;

    bool all_checked_pass() const {
        for (const auto& c : clauses)
            if (c.pass.has_value() && !*c.pass) return false;
        return true;
    }
    const ClauseReport& clause(const std::string& id) const {
        for (const auto& c : clauses)
            if (c.id == id) return c;
        throw ScheduleError("no clause " + id);
    }
};

inline ObservationReport validate_observation(const NibbleSchedule& s) {
    if (s.mode != ScheduleMode::Theory)
        throw ScheduleError("observation validation applies to theory-mode schedules");
    ObservationReport rep;
    rep.eps = s.eps;
    rep.n = s.n;
    const double p = s.p;
    const double eps = s.eps;
    const std::int64_t rs = s.r_star, ts = s.t_star;

    // (i) (1-3p)^t stays bounded away from 0. Informational.
    {
        ClauseReport c;
        c.id = "i";
        c.values["log_(1-3p)^t_star"] = static_cast<double>(ts) * std::log1p(-3 * p);
        c.values["log_reference_e^-180/eps"] = -180.0 / eps;
        c.note = "asymptotic lower bound; values reported in log space";
        rep.clauses.push_back(std::move(c));
    }
    // (ii) (1-eps) p <= p_r <= (1-2eps/3) p. density_ratio is monotone in r,
    // so the endpoints r=1 and r=r_star witness the extremes.
    {
        ClauseReport c;
        c.id = "ii";
        const double lo = s.density_ratio(1);
        const double hi = s.density_ratio(rs);
        c.values["p_1_over_p"] = lo;
        c.values["p_rstar_over_p"] = hi;
        c.values["lower_bound"] = 1 - eps;
        c.values["upper_bound"] = 1 - 2 * eps / 3;
        c.pass = (lo >= 1 - eps - 1e-12) && (hi <= 1 - 2 * eps / 3);
        rep.clauses.push_back(std::move(c));
    }
    // (iii) D(r,t)/S_minus(r,t) <= D0(r)/S0(r) <= 1. The first inequality
    // holds iff the per-iteration decay of D is at least that of S_minus,
    // i.e. 1 - p + eps*p/2 <= 1 - p_r - p^2; binding at r = r_star.
    {
        ClauseReport c;
        c.id = "iii";
        const double d_decay = 1 - p + eps * p / 2;
        const double s_decay_rstar = 1 - s.p_r(rs) - p * p;
        c.values["d_decay"] = d_decay;
        c.values["s_minus_decay_at_rstar"] = s_decay_rstar;
        c.values["density_ratio_rstar"] = s.density_ratio(rs);
        c.pass = (d_decay <= s_decay_rstar) && (s.density_ratio(rs) <= 1.0);
        rep.clauses.push_back(std::move(c));
    }
    // (iv) n >= S_minus(r,t) >= D(r,t), both of order n. Informational.
    {
        ClauseReport c;
        c.id = "iv";
        c.values["log_S_minus_corner"] = s.log_S_minus(rs, ts);
        c.values["log_D_corner"] = s.log_D(rs, ts);
        c.values["log_n"] = std::log(static_cast<double>(s.n));
        c.note = "asymptotic order claims; corner values reported in log space";
        rep.clauses.push_back(std::move(c));
    }
    // (v) D(r,t_star) / (S_minus(r,t_star) - p*S0(r)) < 1/(2e) for all r.
    // The ratio is increasing in r, so endpoints suffice. The denominator
    // must be positive for the bound to mean anything; a non-positive
    // denominator is reported as failure.
    {
        ClauseReport c;
        c.id = "v";
        bool ok = true;
        for (std::int64_t r : {std::int64_t{1}, rs}) {
            const double log_sm = s.log_S_minus(r, ts);
            const double log_ps0 = std::log(p) + s.log_S0(r);
            const std::string tag = r == 1 ? "r1" : "rstar";
            if (log_sm <= log_ps0) {
                ok = false;
                c.values["denominator_log_gap_" + tag] = log_sm - log_ps0;
                continue;
            }
            // log(S_minus - p*S0) = log_sm + log(1 - exp(log_ps0 - log_sm))
            const double log_den = log_sm + std::log1p(-std::exp(log_ps0 - log_sm));
            const double log_ratio = s.log_D(r, ts) - log_den;
            c.values["log_ratio_" + tag] = log_ratio;
            ok = ok && (log_ratio < -std::log(2 * std::exp(1.0)));
        }
        c.values["log_threshold"] = -std::log(2 * std::exp(1.0));
        c.pass = ok;
        rep.clauses.push_back(std::move(c));
    }
    return rep;
}

/// Sum of p*S0(r) over r = 1..r_star, the expected transversal yield. Terms
/// below the floating-point horizon contribute nothing and are skipped.
inline double total_yield(const NibbleSchedule& s) {
    double sum = 0, comp = 0;
    for (std::int64_t r = 1; r <= s.r_star; ++r) {
        const double term = s.p * s.S0(r);
        if (term < 1e-18 * static_cast<double>(s.n)) break;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

/// Closed form n*(1 - (1-p)^r_star) for the same quantity.
inline double total_yield_closed_form(const NibbleSchedule& s) {
    return static_cast<double>(s.n) *
           -std::expm1(static_cast<double>(s.r_star) * std::log1p(-s.p));
}

} // namespace itpack
