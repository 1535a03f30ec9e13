#include "spdcal/units.hpp"

#include "spdcal/errors.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace spdcal {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

// "m^2" -> {"m", 2}; "W" -> {"W", 1}
std::pair<std::string, int> parse_symbol(const std::string& tok) {
    auto caret = tok.find('^');
    std::string sym = tok.substr(0, caret);
    int exp = 1;
    if (caret != std::string::npos) {
        try {
            exp = std::stoi(tok.substr(caret + 1));
        } catch (const std::exception&) {
            throw UnitError("bad unit exponent in token '" + tok + "'");
        }
    }
    if (sym.empty()) throw UnitError("empty unit symbol in token '" + tok + "'");
    for (char ch : sym) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '%') {
            throw UnitError("bad character in unit symbol '" + sym + "'");
        }
    }
    return {sym, exp};
}

} // namespace

Unit::Unit(const std::string& symbol) {
    if (symbol.empty() || symbol == "1") return;
    auto parts = split(symbol, '/');
    if (parts.size() > 2) throw UnitError("unit '" + symbol + "' has more than one '/'");
    int side_sign = 1;
    for (const auto& part : parts) {
        if (!(part.empty() || part == "1")) {
            for (const auto& tok : split(part, '*')) {
                auto [sym, exp] = parse_symbol(tok);
                exps_[sym] += side_sign * exp;
                if (exps_[sym] == 0) exps_.erase(sym);
            }
        }
        side_sign = -1;
    }
}

Unit Unit::operator*(const Unit& other) const {
    Unit out = *this;
    for (const auto& [sym, exp] : other.exps_) {
        out.exps_[sym] += exp;
        if (out.exps_[sym] == 0) out.exps_.erase(sym);
    }
    return out;
}

Unit Unit::operator/(const Unit& other) const {
    return *this * other.pow(-1);
}

Unit Unit::pow(int k) const {
    Unit out;
    if (k == 0) return out;
    for (const auto& [sym, exp] : exps_) out.exps_[sym] = exp * k;
    return out;
}

std::string Unit::str() const {
    if (exps_.empty()) return "1";
    std::ostringstream num, den;
    bool have_num = false, have_den = false;
    for (const auto& [sym, exp] : exps_) {
        if (exp > 0) {
            if (have_num) num << '*';
            num << sym;
            if (exp != 1) num << '^' << exp;
            have_num = true;
        } else {
            if (have_den) den << '*';
            den << sym;
            if (exp != -1) den << '^' << -exp;
            have_den = true;
        }
    }
    std::string out = have_num ? num.str() : "1";
    if (have_den) out += "/" + den.str();
    return out;
}

} // namespace spdcal
