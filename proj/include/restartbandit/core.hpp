#pragma once

// Shared vocabulary: the cutoff time type (with a first-class "never restart"
// value) and the library's exception hierarchy.

#include <cmath>
#include <compare>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace restartbandit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised when an expectation over an infinite-mean distribution is requested.
class InfiniteMeanError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

/// A cutoff (restart) time. Either a finite positive time or the distinguished
/// value `Cutoff::never()` meaning "wait until the task completes".
/// Infinity is a tag, not a large float; callers branch on `is_infinite()`.
class Cutoff {
public:
    constexpr Cutoff() = default;

    static Cutoff at(double t) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            throw InvalidArgument("cutoff must be finite and > 0, got " + std::to_string(t));
        }
        Cutoff c;
        c.value_ = t;
        c.infinite_ = false;
        return c;
    }

    static constexpr Cutoff never() {
        Cutoff c;
        c.infinite_ = true;
        return c;
    }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }

    double value() const {
        if (infinite_) {
            throw InvalidArgument("value() on infinite cutoff");
        }
        return value_;
    }

    /// Finite value or +inf; only for presentation and comparisons.
    constexpr double as_double() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    /// True iff a task of duration x finishes before this cutoff (x <= t).
    constexpr bool admits(double x) const { return infinite_ || x <= value_; }

    Cutoff scaled(double factor) const {
        return infinite_ ? never() : at(value_ * factor);
    }

    friend constexpr bool operator==(const Cutoff& a, const Cutoff& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }

    friend constexpr std::partial_ordering operator<=>(const Cutoff& a, const Cutoff& b) {
        if (a.infinite_ || b.infinite_) {
            return static_cast<int>(a.infinite_) <=> static_cast<int>(b.infinite_);
        }
        return a.value_ <=> b.value_;
    }

    std::string to_string() const;

private:
    double value_ = 1.0;
    bool infinite_ = true;
};

std::string format_double(double v);

inline std::string Cutoff::to_string() const { return infinite_ ? "inf" : format_double(value_); }

/// Shortest round-trippable decimal form ("inf"/"-inf"/"nan" for non-finite).
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument("not a number: '" + s + "'");
    }
    if (pos != s.size()) throw InvalidArgument("not a number: '" + s + "'");
    return v;
}

inline Cutoff parse_cutoff(const std::string& s) {
    if (s == "inf") return Cutoff::never();
    return Cutoff::at(parse_double(s));
}

} // namespace restartbandit
