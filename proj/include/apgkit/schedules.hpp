#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apgkit/errors.hpp"

namespace apgkit {

enum class ScheduleFamily { ClassicalFista, ChambolleDossal, ThetaFamily, LinearHalf, Custom };

/// Parameter sequence (t_k) with derived inertial coefficients
/// α_k = (t_k − 1)/t_{k+1}.
///
/// Values are generated lazily and memoized, so a Schedule is not safe to
/// share between concurrent runs; copy it instead.
class Schedule {
public:
    static Schedule classical_fista() { return Schedule(ScheduleFamily::ClassicalFista, 0.0, {}); }

    static Schedule linear_half() { return Schedule(ScheduleFamily::LinearHalf, 0.0, {}); }

    static Schedule chambolle_dossal(double alpha) {
        if (!(alpha >= 3.0))
            throw ScheduleError("chambolle_dossal: alpha must be >= 3, got " + std::to_string(alpha));
        return Schedule(ScheduleFamily::ChambolleDossal, alpha, {});
    }

    static Schedule theta_family(double theta) {
        if (!(theta >= 0.0 && theta < 1.0))
            throw ScheduleError("theta_family: theta must lie in [0, 1), got " + std::to_string(theta));
        return Schedule(ScheduleFamily::ThetaFamily, theta, {});
    }

    static Schedule custom(std::vector<double> t) {
        if (t.empty()) throw ScheduleError("custom schedule: empty list");
        for (std::size_t k = 0; k < t.size(); ++k)
            if (!(t[k] > 0.0) || !std::isfinite(t[k]))
                throw ScheduleError("custom schedule: t_" + std::to_string(k) + " is not a positive number");
        return Schedule(ScheduleFamily::Custom, 0.0, std::move(t));
    }

    ScheduleFamily family() const { return family_; }
    double parameter() const { return param_; }

    /// Number of available t values; empty for the infinite built-in families.
    std::optional<std::int64_t> length() const {
        if (family_ == ScheduleFamily::Custom) return static_cast<std::int64_t>(cache_.size());
        return std::nullopt;
    }

    std::string name() const {
        switch (family_) {
            case ScheduleFamily::ClassicalFista: return "classical-fista";
            case ScheduleFamily::LinearHalf: return "linear-half";
            case ScheduleFamily::ChambolleDossal: return "chambolle-dossal(" + fmt(param_) + ")";
            case ScheduleFamily::ThetaFamily: return "theta-family(" + fmt(param_) + ")";
            case ScheduleFamily::Custom: return "custom";
        }
        return "unknown";
    }

    double t(std::int64_t k) const {
        if (k < 0) throw ScheduleError("schedule index must be nonnegative");
        switch (family_) {
            case ScheduleFamily::LinearHalf: return (static_cast<double>(k) + 2.0) / 2.0;
            case ScheduleFamily::ChambolleDossal:
                return k == 0 ? 1.0 : 1.0 + static_cast<double>(k - 1) / (param_ - 1.0);
            case ScheduleFamily::Custom:
                if (static_cast<std::size_t>(k) >= cache_.size())
                    throw ScheduleError("custom schedule exhausted at index " + std::to_string(k));
                return cache_[static_cast<std::size_t>(k)];
            default: break;
        }
        while (cache_.size() <= static_cast<std::size_t>(k)) cache_.push_back(next(cache_.back()));
        return cache_[static_cast<std::size_t>(k)];
    }

    double alpha(std::int64_t k) const { return (t(k) - 1.0) / t(k + 1); }

private:
    Schedule(ScheduleFamily family, double param, std::vector<double> values)
        : family_(family), param_(param), cache_(std::move(values)) {
        if (cache_.empty()) cache_.push_back(1.0);
    }

    double next(double tk) const {
        if (family_ == ScheduleFamily::ClassicalFista) return (1.0 + std::sqrt(1.0 + 4.0 * tk * tk)) / 2.0;
        // positive root of t² − (1−θ)t − (t_k² + θ t_k) = 0
        const double a = 1.0 - param_;
        return (a + std::sqrt(a * a + 4.0 * (tk * tk + param_ * tk))) / 2.0;
    }

    static std::string fmt(double v) {
        std::string s = std::to_string(v);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    ScheduleFamily family_;
    double param_;
    mutable std::vector<double> cache_;
};

/// Which admissibility conditions a schedule satisfies on [0, checked_through].
struct ScheduleReport {
    bool t0_is_one = false;
    /// t_k ≥ (k+2)/2 and t_k² ≥ t_{k+1}² − t_{k+1} (the classical FISTA conditions).
    bool fista_conditions = false;
    std::optional<std::int64_t> first_fista_violation;
    /// t_{k+1}² − t_k² ≤ t_{k+1}.
    bool increment_condition = false;
    std::optional<std::int64_t> first_increment_violation;
    std::int64_t checked_through = 0;

    bool admissible() const { return t0_is_one && (fista_conditions || increment_condition); }
};

/// Checks the conditions for k = 0..horizon (bounded by the list length for
/// custom schedules). Comparisons carry a slack of 1e−12·(1 + t_{k+1}²).
inline ScheduleReport validate(const Schedule& s, std::int64_t horizon) {
    ScheduleReport r;
    r.t0_is_one = std::abs(s.t(0) - 1.0) <= 1e-12;
    std::int64_t last = horizon;
    if (auto len = s.length()) last = std::min(last, *len - 2);
    for (std::int64_t k = 0; k <= last; ++k) {
        const double tk = s.t(k);
        const double tn = s.t(k + 1);
        const double slack = 1e-12 * (1.0 + tn * tn);
        const bool lower = tk >= (static_cast<double>(k) + 2.0) / 2.0 - 1e-12 * (1.0 + tk);
        const bool quad = tk * tk >= tn * tn - tn - slack;
        if (!(lower && quad) && !r.first_fista_violation) r.first_fista_violation = k;
        if (!(tn * tn - tk * tk <= tn + slack) && !r.first_increment_violation) r.first_increment_violation = k;
    }
    r.checked_through = std::max<std::int64_t>(last, 0);
    r.fista_conditions = r.t0_is_one && !r.first_fista_violation;
    r.increment_condition = r.t0_is_one && !r.first_increment_violation;
    return r;
}

}  // namespace apgkit
