#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <string>

#include "chiralflat/rational.hpp"

namespace chiralflat {

using Complex = std::complex<double>;

/// Eisenstein integer a + b*omega, omega = e^{2 pi i/3} (omega^2 = -1 - omega).
struct EisensteinInt {
    Int a{0};
    Int b{0};

    EisensteinInt() = default;
    EisensteinInt(Int a_, Int b_) : a(std::move(a_)), b(std::move(b_)) {}

    friend EisensteinInt operator+(const EisensteinInt& x, const EisensteinInt& y) {
        return {x.a + y.a, x.b + y.b};
    }
    friend EisensteinInt operator-(const EisensteinInt& x, const EisensteinInt& y) {
        return {x.a - y.a, x.b - y.b};
    }
    friend EisensteinInt operator*(const EisensteinInt& x, const EisensteinInt& y) {
        // (a + b w)(c + d w) = ac + (ad + bc) w + bd (-1 - w)
        return {x.a * y.a - x.b * y.b, x.a * y.b + x.b * y.a - x.b * y.b};
    }
    friend bool operator==(const EisensteinInt& x, const EisensteinInt& y) {
        return x.a == y.a && x.b == y.b;
    }

    /// N(a+bw) = a^2 - ab + b^2 >= 0, zero iff a = b = 0.
    Int norm() const { return a * a - a * b + b * b; }

    Complex embed() const {
        static const Complex w = std::polar(1.0, 2.0 * M_PI / 3.0);
        return Complex(a.template convert_to<double>(), 0.0) +
               Complex(b.template convert_to<double>(), 0.0) * w;
    }
};

/// Element of the cyclotomic field Q(zeta_12) in the power basis
/// {1, z, z^2, z^3}, z = e^{i pi/6}. Minimal polynomial z^4 = z^2 - 1,
/// so z^6 = -1 and the familiar constants sit inside:
///   i = z^3,  omega = e^{2 pi i/3} = z^4 = z^2 - 1,  sqrt(3) = z + z^-1 = 2z - z^3.
class Cyclo {
public:
    Cyclo() = default;
    explicit Cyclo(Rat c0) { c_[0] = std::move(c0); }
    Cyclo(Rat c0, Rat c1, Rat c2, Rat c3)
        : c_{std::move(c0), std::move(c1), std::move(c2), std::move(c3)} {}

    static Cyclo zero() { return Cyclo(); }
    static Cyclo one() { return Cyclo(Rat(1)); }
    static Cyclo zeta() { return Cyclo(Rat(0), Rat(1), Rat(0), Rat(0)); }
    static Cyclo i() { return Cyclo(Rat(0), Rat(0), Rat(0), Rat(1)); }
    static Cyclo omega() { return Cyclo(Rat(-1), Rat(0), Rat(1), Rat(0)); }
    static Cyclo sqrt3() { return Cyclo(Rat(0), Rat(2), Rat(0), Rat(-1)); }
    /// a + b*omega as a field element.
    static Cyclo eisenstein(const EisensteinInt& e) {
        return Cyclo(Rat(e.a) - Rat(e.b), Rat(0), Rat(e.b), Rat(0));
    }

    const Rat& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
    Rat& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }

    bool is_zero() const {
        return c_[0] == 0 && c_[1] == 0 && c_[2] == 0 && c_[3] == 0;
    }
    bool is_rational() const { return c_[1] == 0 && c_[2] == 0 && c_[3] == 0; }

    friend Cyclo operator+(const Cyclo& x, const Cyclo& y) {
        Cyclo r;
        for (int k = 0; k < 4; ++k) r.c_[k] = x.c_[k] + y.c_[k];
        return r;
    }
    friend Cyclo operator-(const Cyclo& x, const Cyclo& y) {
        Cyclo r;
        for (int k = 0; k < 4; ++k) r.c_[k] = x.c_[k] - y.c_[k];
        return r;
    }
    friend Cyclo operator-(const Cyclo& x) {
        Cyclo r;
        for (int k = 0; k < 4; ++k) r.c_[k] = -x.c_[k];
        return r;
    }
    Cyclo& operator+=(const Cyclo& y) { return *this = *this + y; }
    Cyclo& operator-=(const Cyclo& y) { return *this = *this - y; }

    friend Cyclo operator*(const Cyclo& x, const Cyclo& y) {
        // Multiply as polynomials, then fold z^6 = -1, z^5 = z^3 - z, z^4 = z^2 - 1.
        std::array<Rat, 7> p{};
        for (int a = 0; a < 4; ++a) {
            if (x.c_[a] == 0) continue;
            for (int b = 0; b < 4; ++b) {
                if (y.c_[b] == 0) continue;
                p[static_cast<std::size_t>(a + b)] += x.c_[a] * y.c_[b];
            }
        }
        p[0] -= p[6];
        p[3] += p[5];
        p[1] -= p[5];
        p[2] += p[4];
        p[0] -= p[4];
        return Cyclo(p[0], p[1], p[2], p[3]);
    }
    Cyclo& operator*=(const Cyclo& y) { return *this = *this * y; }

    friend Cyclo operator*(const Rat& s, const Cyclo& x) {
        Cyclo r;
        for (int k = 0; k < 4; ++k) r.c_[k] = s * x.c_[k];
        return r;
    }

    friend bool operator==(const Cyclo& x, const Cyclo& y) {
        return x.c_ == y.c_;
    }
    friend bool operator!=(const Cyclo& x, const Cyclo& y) { return !(x == y); }

    /// Galois map z -> z^k for k coprime to 12 (k in {1, 5, 7, 11}).
    Cyclo galois(int k) const {
        Cyclo zk = pow_zeta(k);
        Cyclo acc = Cyclo(c_[0]);
        Cyclo p = Cyclo::one();
        for (int d = 1; d < 4; ++d) {
            p *= zk;
            acc += c_[d] * p;
        }
        return acc;
    }

    /// Complex conjugation (z -> z^11).
    Cyclo conj() const { return galois(11); }

    /// Field inverse. The product of the three nontrivial Galois conjugates
    /// gives a rational norm.
    Cyclo inverse() const {
        Cyclo adj = galois(5) * galois(7) * galois(11);
        Cyclo n = *this * adj;
        if (!n.is_rational() || n[0] == 0)
            throw error("Cyclo::inverse of zero or internal norm failure");
        Rat inv = Rat(1) / n[0];
        return inv * adj;
    }

    Complex embed() const {
        static const Complex z = std::polar(1.0, M_PI / 6.0);
        Complex acc(to_double(c_[0]), 0.0);
        Complex p(1.0, 0.0);
        for (int d = 1; d < 4; ++d) {
            p *= z;
            acc += to_double(c_[d]) * p;
        }
        return acc;
    }

    /// "(c0,c1,c2,c3)"; a bare rational when c1 = c2 = c3 = 0.
    std::string str() const {
        if (is_rational()) return rat_to_string(c_[0]);
        std::ostringstream os;
        os << "(" << rat_to_string(c_[0]) << "," << rat_to_string(c_[1]) << ","
           << rat_to_string(c_[2]) << "," << rat_to_string(c_[3]) << ")";
        return os.str();
    }

    static Cyclo parse(const std::string& s) {
        if (s.empty()) throw parse_error("empty Cyclo literal");
        if (s.front() != '(') return Cyclo(rat_from_string(s));
        if (s.back() != ')') throw parse_error("bad Cyclo literal: " + s);
        std::array<Rat, 4> cs;
        std::string body = s.substr(1, s.size() - 2);
        std::size_t pos = 0;
        for (int k = 0; k < 4; ++k) {
            const auto comma = body.find(',', pos);
            if ((comma == std::string::npos) != (k == 3))
                throw parse_error("bad Cyclo literal: " + s);
            cs[static_cast<std::size_t>(k)] =
                rat_from_string(body.substr(pos, comma == std::string::npos ? std::string::npos
                                                                            : comma - pos));
            pos = comma + 1;
        }
        return Cyclo(cs[0], cs[1], cs[2], cs[3]);
    }

private:
    static Cyclo pow_zeta(int k) {
        k %= 12;
        if (k < 0) k += 12;
        Cyclo p = Cyclo::one();
        for (int t = 0; t < k; ++t) p *= zeta();
        return p;
    }

    std::array<Rat, 4> c_{};
};

/// Finite sum  sum_d c_d pi^d  with c_d in Q(zeta_12). Degrees add under
/// multiplication; a degree-1 potential weight against a degree-(-1)
/// resolvent weight lands back in degree 0.
class PiGraded {
public:
    PiGraded() = default;
    explicit PiGraded(Cyclo c0) {
        if (!c0.is_zero()) terms_[0] = std::move(c0);
    }
    static PiGraded term(int degree, Cyclo c) {
        PiGraded g;
        if (!c.is_zero()) g.terms_[degree] = std::move(c);
        return g;
    }

    const std::map<int, Cyclo>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// The coefficient at a given pi-degree (zero if absent).
    Cyclo coeff(int degree) const {
        auto it = terms_.find(degree);
        return it == terms_.end() ? Cyclo::zero() : it->second;
    }

    friend PiGraded operator+(const PiGraded& x, const PiGraded& y) {
        PiGraded r = x;
        for (const auto& [d, c] : y.terms_) {
            auto it = r.terms_.find(d);
            if (it == r.terms_.end()) {
                r.terms_[d] = c;
            } else {
                it->second += c;
                if (it->second.is_zero()) r.terms_.erase(it);
            }
        }
        return r;
    }
    friend PiGraded operator-(const PiGraded& x, const PiGraded& y) {
        return x + (Rat(-1) * y);
    }
    friend PiGraded operator*(const Rat& s, const PiGraded& x) {
        PiGraded r;
        if (s == 0) return r;
        for (const auto& [d, c] : x.terms_) r.terms_[d] = s * c;
        return r;
    }
    friend PiGraded operator*(const PiGraded& x, const PiGraded& y) {
        PiGraded r;
        for (const auto& [dx, cx] : x.terms_)
            for (const auto& [dy, cy] : y.terms_) {
                Cyclo p = cx * cy;
                if (p.is_zero()) continue;
                auto it = r.terms_.find(dx + dy);
                if (it == r.terms_.end()) {
                    r.terms_[dx + dy] = p;
                } else {
                    it->second += p;
                    if (it->second.is_zero()) r.terms_.erase(it);
                }
            }
        return r;
    }
    PiGraded& operator+=(const PiGraded& y) { return *this = *this + y; }
    PiGraded& operator*=(const PiGraded& y) { return *this = *this * y; }

    friend bool operator==(const PiGraded& x, const PiGraded& y) {
        return x.terms_ == y.terms_;
    }

    PiGraded conj() const {
        PiGraded r;
        for (const auto& [d, c] : terms_) r.terms_[d] = c.conj();
        return r;
    }

    Complex embed() const {
        Complex acc(0.0, 0.0);
        for (const auto& [d, c] : terms_) acc += std::pow(M_PI, d) * c.embed();
        return acc;
    }

    /// "pi^d*<cyclo>" terms joined by " + "; the degree-0 factor is omitted.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [d, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            if (d != 0) os << "pi^" << d << "*";
            os << c.str();
        }
        return os.str();
    }

    static PiGraded parse(const std::string& s) {
        PiGraded out;
        if (s == "0") return out;
        std::size_t pos = 0;
        while (pos < s.size()) {
            auto next = s.find(" + ", pos);
            std::string tok = s.substr(pos, next == std::string::npos ? std::string::npos
                                                                      : next - pos);
            int deg = 0;
            if (tok.rfind("pi^", 0) == 0) {
                auto star = tok.find('*');
                if (star == std::string::npos) throw parse_error("bad PiGraded term: " + tok);
                deg = std::stoi(tok.substr(3, star - 3));
                tok = tok.substr(star + 1);
            }
            out += PiGraded::term(deg, Cyclo::parse(tok));
            if (next == std::string::npos) break;
            pos = next + 3;
        }
        return out;
    }

private:
    std::map<int, Cyclo> terms_;
};

} // namespace chiralflat
