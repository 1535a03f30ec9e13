#pragma once

#include <map>
#include <string>

namespace spdcal {

/// Symbolic unit tag built from base symbols with integer exponents.
///
/// The accepted grammar is a product of symbols separated by '*',
/// optionally followed by '/' and another product, e.g. "W", "W/A",
/// "W*s*m", "1" (dimensionless), "m^2". Only a flat numerator/denominator
/// split is supported; no nested parentheses.
class Unit {
public:
    Unit() = default;
    explicit Unit(const std::string& symbol);

    static Unit dimensionless() { return Unit{}; }

    bool is_dimensionless() const { return exps_.empty(); }

    Unit operator*(const Unit& other) const;
    Unit operator/(const Unit& other) const;
    Unit pow(int k) const;

    bool operator==(const Unit& other) const = default;

    std::string str() const;

private:
    // base symbol -> exponent; zero exponents are never stored
    std::map<std::string, int> exps_;
};

} // namespace spdcal
