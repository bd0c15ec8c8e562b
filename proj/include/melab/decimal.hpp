#pragma once

#include <cstdint>
#include <string>

namespace melab {

// Fixed-point decimal currency, six fractional digits. Price comparisons in
// the economics module hinge on values like 0.00012 being exact, which binary
// doubles cannot guarantee in report output.
class Decimal {
  public:
    static constexpr int kFracDigits = 6;
    static constexpr std::int64_t kScale = 1000000;  // 10^kFracDigits

    constexpr Decimal() = default;

    static constexpr Decimal from_units(std::int64_t units) {
        Decimal d;
        d.units_ = units;
        return d;
    }

    static Decimal from_int(std::int64_t whole) { return from_units(whole * kScale); }

    // Exact parse of strings like "0.00012", "-3.5", "2400". Throws
    // InputError on malformed input or more than kFracDigits fraction digits.
    static Decimal parse(const std::string& s);

    // Nearest-unit conversion; only for convenience input paths (JSON/CLI
    // numbers), the arithmetic itself never round-trips through double.
    static Decimal from_double(double v);

    constexpr std::int64_t units() const { return units_; }
    double to_double() const { return static_cast<double>(units_) / kScale; }

    // Canonical rendering with trailing fraction zeros trimmed: "0.00012",
    // "0.8", "2400".
    std::string str() const;

    friend constexpr Decimal operator+(Decimal a, Decimal b) {
        return from_units(a.units_ + b.units_);
    }
    friend constexpr Decimal operator-(Decimal a, Decimal b) {
        return from_units(a.units_ - b.units_);
    }
    friend constexpr Decimal operator*(Decimal a, std::int64_t k) {
        return from_units(a.units_ * k);
    }
    friend constexpr Decimal operator*(std::int64_t k, Decimal a) { return a * k; }

    // Floor division by a positive integer count.
    friend constexpr Decimal operator/(Decimal a, std::int64_t k) {
        std::int64_t q = a.units_ / k;
        if ((a.units_ % k != 0) && ((a.units_ < 0) != (k < 0))) --q;
        return from_units(q);
    }

    friend constexpr bool operator==(Decimal a, Decimal b) { return a.units_ == b.units_; }
    friend constexpr bool operator!=(Decimal a, Decimal b) { return a.units_ != b.units_; }
    friend constexpr bool operator<(Decimal a, Decimal b) { return a.units_ < b.units_; }
    friend constexpr bool operator<=(Decimal a, Decimal b) { return a.units_ <= b.units_; }
    friend constexpr bool operator>(Decimal a, Decimal b) { return a.units_ > b.units_; }
    friend constexpr bool operator>=(Decimal a, Decimal b) { return a.units_ >= b.units_; }

  private:
    std::int64_t units_ = 0;
};

}  // namespace melab
