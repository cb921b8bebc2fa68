#pragma once

#include <limits>

namespace garsamp {

// Real number or one of the two infinite sentinels. The sentinel never
// participates in arithmetic; callers clip() to a finite horizon first.
class ExtReal {
public:
    enum class Kind { finite, neg_inf, pos_inf };

    constexpr ExtReal() = default;
    constexpr ExtReal(double v) : kind_(Kind::finite), value_(v) {}

    static constexpr ExtReal neg_inf() { return ExtReal(Kind::neg_inf); }
    static constexpr ExtReal pos_inf() { return ExtReal(Kind::pos_inf); }

    constexpr Kind kind() const { return kind_; }
    constexpr bool is_finite() const { return kind_ == Kind::finite; }
    constexpr bool is_neg_inf() const { return kind_ == Kind::neg_inf; }
    constexpr bool is_pos_inf() const { return kind_ == Kind::pos_inf; }

    double value() const;

    // Finite stand-in: the value itself, or -/+horizon for the sentinels.
    constexpr double clip(double horizon) const {
        return kind_ == Kind::finite ? value_ : (kind_ == Kind::neg_inf ? -horizon : horizon);
    }

    // IEEE view, for comparisons and reporting only.
    constexpr double as_double() const {
        return kind_ == Kind::finite ? value_
               : kind_ == Kind::neg_inf ? -std::numeric_limits<double>::infinity()
                                        : std::numeric_limits<double>::infinity();
    }

    friend constexpr bool operator<(const ExtReal& a, const ExtReal& b) {
        return a.as_double() < b.as_double();
    }
    friend constexpr bool operator==(const ExtReal& a, const ExtReal& b) {
        return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.value_ == b.value_);
    }

private:
    constexpr explicit ExtReal(Kind k) : kind_(k), value_(0.0) {}
    Kind kind_ = Kind::finite;
    double value_ = 0.0;
};

struct Interval {
    ExtReal lo = ExtReal::neg_inf();
    ExtReal hi = ExtReal::pos_inf();

    bool contains(double x) const { return lo.as_double() <= x && x <= hi.as_double(); }
    bool bounded() const { return lo.is_finite() && hi.is_finite(); }
    double length() const { return hi.as_double() - lo.as_double(); }
};

inline constexpr double default_horizon = 1e3;

}  // namespace garsamp
