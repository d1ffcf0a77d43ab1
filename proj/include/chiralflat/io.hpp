#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "chiralflat/potential.hpp"
#include "chiralflat/spectral.hpp"
#include "chiralflat/traces.hpp"

namespace chiralflat {

using nlohmann::json;

/// Deterministic shortest-roundtrip double formatting for CSV output.
inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

/// Potential definition: {"builder":"u1"|"u2"} or {"interp": theta} or
/// {"orbits_plus":[{"p":[a,b],"coeff":"<exact>"|{"re":..,"im":..}},...],
///  "orbits_minus":[...],          // optional; default U_-(z) = U_+(-z)
///  "scale_sq":"1/2",              // optional exact scale^2
///  "symmetry_class":"chiral_physical"|"rotational_only"}
inline FourierPotential potential_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "u1") return build_u1();
        if (s == "u2") return build_u2();
        throw parse_error("unknown potential builder '" + s + "'");
    }
    if (j.contains("builder")) return potential_from_json(j.at("builder"));
    if (j.contains("interp")) return build_interpolated(j.at("interp").get<double>());
    if (!j.contains("orbits_plus")) throw parse_error("potential JSON needs a builder or orbits");
    FourierPotential p;
    p.name = j.value("name", "custom");
    if (j.contains("scale_sq")) p.scale_sq = rat_from_string(j.at("scale_sq").get<std::string>());
    const double s = p.scale();
    auto parse_coeff = [&](const json& cj) {
        if (cj.is_string()) return Coeff::from_exact(PiGraded::parse(cj.get<std::string>()), s);
        return Coeff::from_numeric(
            Complex(cj.at("re").get<double>(), cj.at("im").get<double>()) * s);
    };
    for (const auto& orb : j.at("orbits_plus")) {
        const auto pv = orb.at("p");
        p.add_plus_orbit(pv.at(0).get<std::int64_t>(), pv.at(1).get<std::int64_t>(),
                         parse_coeff(orb.at("coeff")));
    }
    if (j.contains("orbits_minus")) {
        p.symmetry_class = SymmetryClass::rotational_only;
        for (const auto& orb : j.at("orbits_minus")) {
            const auto pv = orb.at("p");
            p.add_minus_orbit(pv.at(0).get<std::int64_t>(), pv.at(1).get<std::int64_t>(),
                              parse_coeff(orb.at("coeff")));
        }
    } else {
        p.derive_minus_from_plus();
    }
    if (j.contains("symmetry_class"))
        p.symmetry_class = j.at("symmetry_class").get<std::string>() == "rotational_only"
                               ? SymmetryClass::rotational_only
                               : SymmetryClass::chiral_physical;
    return p;
}

/// Accepts "u1", "u2", a JSON object string, or a path to a JSON file.
inline FourierPotential potential_from_spec(const std::string& spec) {
    if (spec == "u1") return build_u1();
    if (spec == "u2") return build_u2();
    if (!spec.empty() && (spec.front() == '{' || spec.front() == '[')) {
        return potential_from_json(json::parse(spec));
    }
    std::ifstream in(spec);
    if (!in) throw parse_error("cannot open potential file '" + spec + "'");
    json j;
    in >> j;
    return potential_from_json(j);
}

inline json to_json(const MagicAngle& ma) {
    return json{{"alpha_re", ma.alpha.real()},
                {"alpha_im", ma.alpha.imag()},
                {"subspace", ma.subspace},
                {"algebraic_mult", ma.algebraic_mult},
                {"geometric_mult", ma.geometric_mult},
                {"classification", to_string(ma.classification)},
                {"kernel_dims", ma.kernel_dims},
                {"residual", ma.residual},
                {"truncation_N", ma.truncation.N}};
}

inline json to_json(const TraceResult& t) {
    json j{{"ell", t.ell},
           {"subspace", t.subspace == kFullSpace ? json("full") : json(t.subspace)},
           {"value_re", t.numeric_value.real()},
           {"value_im", t.numeric_value.imag()},
           {"last_raw_re", t.last_raw.real()},
           {"N_sequence", t.N_sequence},
           {"extrapolated", t.extrapolated}};
    if (t.exact_part) j["exact_remainder"] = t.exact_part->str();
    return j;
}

/// One reproducible run. The config hash keys the output cache.
struct RunConfig {
    json data;

    static RunConfig from_json(json j) { return RunConfig{std::move(j)}; }
    std::string canonical() const { return data.dump(); }

    std::uint64_t hash() const {
        // FNV-1a 64
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }
    std::string hash_hex() const {
        std::ostringstream os;
        os << std::hex << hash();
        return os.str();
    }
};

class Cache {
public:
    Cache(std::filesystem::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
        if (enabled_) std::filesystem::create_directories(dir_);
    }

    std::optional<json> load(const RunConfig& cfg) const {
        if (!enabled_) return std::nullopt;
        const auto p = path_for(cfg);
        std::ifstream in(p);
        if (!in) return std::nullopt;
        json j;
        in >> j;
        // stale-cache use is impossible: the key embeds the full config
        if (j.value("config", "") != cfg.canonical()) return std::nullopt;
        return j.at("result");
    }

    void store(const RunConfig& cfg, const json& result) const {
        if (!enabled_) return;
        std::ofstream out(path_for(cfg));
        out << json{{"config", cfg.canonical()}, {"result", result}}.dump(2) << "\n";
    }

    std::filesystem::path dir() const { return dir_; }

private:
    std::filesystem::path path_for(const RunConfig& cfg) const {
        return dir_ / (cfg.hash_hex() + ".json");
    }

    std::filesystem::path dir_;
    bool enabled_;
};

inline void write_text(const std::filesystem::path& p, const std::string& body) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << body;
}

} // namespace chiralflat
