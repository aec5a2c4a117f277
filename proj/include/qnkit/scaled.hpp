#pragma once

#include <cmath>
#include <cstdint>

namespace qnkit {

/// Non-negative real stored as mantissa * 2^exponent with the mantissa kept in
/// [0.5, 1). Normalization constants grow or shrink geometrically with the
/// population, so they are carried in this form and only turned back into
/// doubles as ratios.
class ScaledReal {
public:
    constexpr ScaledReal() = default;

    explicit ScaledReal(double value) { assign(value, 0); }

    static ScaledReal from_parts(double mantissa, std::int64_t exponent)
    {
        ScaledReal s;
        s.assign(mantissa, exponent);
        return s;
    }

    static ScaledReal one() { return ScaledReal(1.0); }

    bool is_zero() const { return mantissa_ == 0.0; }
    double mantissa() const { return mantissa_; }
    std::int64_t exponent() const { return exponent_; }

    /// Plain double value; overflows to inf or underflows to 0 when out of range.
    double value() const
    {
        if (is_zero()) {
            return 0.0;
        }
        if (exponent_ > 4096) {
            return HUGE_VAL;
        }
        if (exponent_ < -4096) {
            return 0.0;
        }
        return std::ldexp(mantissa_, static_cast<int>(exponent_));
    }

    /// log2 of the value; -inf for zero.
    double log2() const
    {
        if (is_zero()) {
            return -HUGE_VAL;
        }
        return std::log2(mantissa_) + static_cast<double>(exponent_);
    }

    ScaledReal& operator*=(double factor)
    {
        assign(mantissa_ * factor, exponent_);
        return *this;
    }

    ScaledReal& operator*=(const ScaledReal& other)
    {
        assign(mantissa_ * other.mantissa_, exponent_ + other.exponent_);
        return *this;
    }

    ScaledReal& operator/=(double divisor)
    {
        assign(mantissa_ / divisor, exponent_);
        return *this;
    }

    ScaledReal& operator+=(const ScaledReal& other)
    {
        if (other.is_zero()) {
            return *this;
        }
        if (is_zero()) {
            *this = other;
            return *this;
        }
        if (exponent_ >= other.exponent_) {
            const auto shift = other.exponent_ - exponent_;
            const double aligned = shift < -1100 ? 0.0 : std::ldexp(other.mantissa_, static_cast<int>(shift));
            assign(mantissa_ + aligned, exponent_);
        } else {
            const auto shift = exponent_ - other.exponent_;
            const double aligned = shift < -1100 ? 0.0 : std::ldexp(mantissa_, static_cast<int>(shift));
            assign(aligned + other.mantissa_, other.exponent_);
        }
        return *this;
    }

    friend ScaledReal operator*(ScaledReal lhs, double rhs) { return lhs *= rhs; }
    friend ScaledReal operator*(ScaledReal lhs, const ScaledReal& rhs) { return lhs *= rhs; }
    friend ScaledReal operator+(ScaledReal lhs, const ScaledReal& rhs) { return lhs += rhs; }

    friend bool operator==(const ScaledReal&, const ScaledReal&) = default;

private:
    void assign(double mantissa, std::int64_t exponent)
    {
        if (mantissa == 0.0) {
            mantissa_ = 0.0;
            exponent_ = 0;
            return;
        }
        int shift = 0;
        mantissa_ = std::frexp(mantissa, &shift);
        exponent_ = exponent + shift;
    }

    double mantissa_ = 0.0;
    std::int64_t exponent_ = 0;
};

/// a / b as a double. Both operands must be finite; b must be non-zero.
inline double ratio(const ScaledReal& a, const ScaledReal& b)
{
    if (a.is_zero()) {
        return 0.0;
    }
    const auto shift = a.exponent() - b.exponent();
    return std::ldexp(a.mantissa() / b.mantissa(), static_cast<int>(shift));
}

} // namespace qnkit
