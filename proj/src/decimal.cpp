#include "melab/decimal.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "melab/errors.hpp"

namespace melab {

Decimal Decimal::parse(const std::string& s) {
    if (s.empty()) throw InputError("decimal: empty string");
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
        neg = s[i] == '-';
        ++i;
    }
    if (i == s.size()) throw InputError("decimal: no digits in '" + s + "'");
    std::int64_t whole = 0;
    bool any = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
        whole = whole * 10 + (s[i] - '0');
        any = true;
    }
    std::int64_t frac = 0;
    int frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            if (++frac_digits > kFracDigits)
                throw InputError("decimal: more than 6 fraction digits in '" + s + "'");
            frac = frac * 10 + (s[i] - '0');
            any = true;
        }
    }
    if (!any || i != s.size()) throw InputError("decimal: malformed number '" + s + "'");
    for (int d = frac_digits; d < kFracDigits; ++d) frac *= 10;
    std::int64_t units = whole * kScale + frac;
    return from_units(neg ? -units : units);
}

Decimal Decimal::from_double(double v) {
    if (!std::isfinite(v) || std::fabs(v) > 9.0e12)
        throw InputError("decimal: value out of range");
    return from_units(std::llround(v * static_cast<double>(kScale)));
}

std::string Decimal::str() const {
    std::int64_t u = units_;
    std::string sign;
    if (u < 0) {
        sign = "-";
        u = -u;
    }
    std::int64_t whole = u / kScale;
    std::int64_t frac = u % kScale;
    std::string out = sign + std::to_string(whole);
    if (frac != 0) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frac));
        std::string f(buf);
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += "." + f;
    }
    return out;
}

}  // namespace melab
