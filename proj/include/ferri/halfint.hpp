#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ferri {

/// Exact half-integer arithmetic; stores twice the value as an int.
/// Spin magnitudes, z-projections and magnetizations are all half-integers,
/// and representing them as doubles invites equality bugs.
class HalfInt {
public:
    constexpr HalfInt() = default;
    constexpr explicit HalfInt(int whole) : twice_(2 * whole) {}

    static constexpr HalfInt from_twice(int twice) {
        HalfInt h;
        h.twice_ = twice;
        return h;
    }

    constexpr int twice() const { return twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }
    constexpr double value() const { return twice_ / 2.0; }

    constexpr HalfInt operator-() const { return from_twice(-twice_); }
    constexpr HalfInt& operator+=(HalfInt o) { twice_ += o.twice_; return *this; }
    constexpr HalfInt& operator-=(HalfInt o) { twice_ -= o.twice_; return *this; }

    friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return from_twice(a.twice_ + b.twice_); }
    friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return from_twice(a.twice_ - b.twice_); }
    friend constexpr bool operator==(HalfInt a, HalfInt b) { return a.twice_ == b.twice_; }
    friend constexpr bool operator!=(HalfInt a, HalfInt b) { return a.twice_ != b.twice_; }
    friend constexpr bool operator<(HalfInt a, HalfInt b) { return a.twice_ < b.twice_; }
    friend constexpr bool operator<=(HalfInt a, HalfInt b) { return a.twice_ <= b.twice_; }
    friend constexpr bool operator>(HalfInt a, HalfInt b) { return a.twice_ > b.twice_; }
    friend constexpr bool operator>=(HalfInt a, HalfInt b) { return a.twice_ >= b.twice_; }

    /// Renders as a reduced rational: "3/2", "-1/2", "2", "0".
    std::string str() const {
        if (twice_ % 2 == 0) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }

    /// Parses "3/2", "-1/2", "1", "0". Throws std::invalid_argument on junk.
    static HalfInt parse(const std::string& text) {
        const auto slash = text.find('/');
        try {
            if (slash == std::string::npos) return HalfInt(std::stoi(text));
            const int num = std::stoi(text.substr(0, slash));
            const int den = std::stoi(text.substr(slash + 1));
            if (den != 2) throw std::invalid_argument("half-integer denominator must be 2");
            return from_twice(num);
        } catch (const std::exception&) {
            throw std::invalid_argument("not a half-integer: '" + text + "'");
        }
    }

private:
    int twice_ = 0;
};

inline HalfInt abs(HalfInt h) { return HalfInt::from_twice(std::abs(h.twice())); }

} // namespace ferri
