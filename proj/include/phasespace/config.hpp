#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "phasespace/errors.hpp"
#include "phasespace/evolution.hpp"
#include "phasespace/grid.hpp"
#include "phasespace/observables.hpp"

namespace phasespace {

enum class InitialStateKind { Gaussian, Eigenstate, QuantumFile, ClassicalFile };
enum class SnapshotPolicy { None, Initial, Final, Both };

/// Fully resolved run description; every default the parser fills is recorded
/// in the manifest.
struct RunConfig {
    // [grid]
    int n_z = 0, n_p = 0;
    double z_min = 0.0, length_z = 0.0;
    // [potential]
    PotentialSpec potential;
    std::string potential_file;
    // [initial]
    InitialStateKind initial = InitialStateKind::Gaussian;
    double x0 = 0.0, p0 = 0.0, dx = 0.0, dp = 0.0;
    int eigenstate_n = 0;
    double omega = 1.0;
    std::string initial_file;
    // [evolution]
    EvolutionConfig evolution;
    // [observables]
    std::vector<std::string> moment_tokens;
    bool marginals = false;
    std::vector<double> sharpened_beta;
    // [diagnostics]
    bool diag_unitarity = false;
    bool diag_factorization = false;
    // [output]
    std::string output_dir = "out";
    SnapshotPolicy snapshots = SnapshotPolicy::None;

    GridSpec grid() const { return GridSpec(n_z, n_p, z_min, length_z); }
};

namespace detail_cfg {

struct Entry {
    std::string value;
    int line = 0;
};

using SectionMap = std::map<std::string, std::map<std::string, Entry>>;

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const Entry& e) {
    try {
        size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                          "' expects a number, got '" + e.value + "'");
    }
}

inline long to_long(const std::string& key, const Entry& e) {
    try {
        size_t pos = 0;
        const long v = std::stol(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                          "' expects an integer, got '" + e.value + "'");
    }
}

inline bool to_bool(const std::string& key, const Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                      "' expects true/false, got '" + e.value + "'");
}

inline std::vector<double> to_double_list(const std::string& key, const Entry& e) {
    std::vector<double> out;
    std::istringstream ss(e.value);
    std::string tok;
    while (ss >> tok) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("");
        } catch (...) {
            throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                              "' expects numbers, got '" + tok + "'");
        }
    }
    return out;
}

class SectionReader {
public:
    SectionReader(const SectionMap& map, const std::string& section)
        : section_(section) {
        auto it = map.find(section);
        if (it != map.end()) entries_ = &it->second;
    }

    std::optional<Entry> get(const std::string& key) {
        seen_.insert(key);
        if (!entries_) return std::nullopt;
        auto it = entries_->find(key);
        if (it == entries_->end()) return std::nullopt;
        return it->second;
    }

    Entry require(const std::string& key) {
        auto e = get(key);
        if (!e)
            throw ConfigError("missing required key '" + key + "' in section [" + section_ + "]");
        return *e;
    }

    void reject_unknown() const {
        if (!entries_) return;
        for (const auto& [key, entry] : *entries_)
            if (!seen_.count(key))
                throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key +
                                  "' in section [" + section_ + "]");
    }

private:
    std::string section_;
    const std::map<std::string, Entry>* entries_ = nullptr;
    std::set<std::string> seen_;
};

} // namespace detail_cfg

/// Parse the line-oriented `[section]` / `key = value` / `#` comment format.
/// Unknown sections and keys are rejected; duplicate keys report both lines.
inline RunConfig parse_config(const std::string& text) {
    using namespace detail_cfg;
    static const std::set<std::string> known_sections = {
        "grid", "potential", "initial", "evolution", "observables", "diagnostics", "output"};
    SectionMap sections;
    std::string current;
    int current_line = 0;
    std::istringstream stream(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            if (!known_sections.count(current))
                throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                                  current + "]");
            current_line = lineno;
            sections[current];  // a section may legitimately be empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        if (current.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        auto [it, inserted] = sections[current].emplace(key, Entry{value, lineno});
        if (!inserted)
            throw ConfigError("duplicate key '" + key + "' in section [" + current +
                              "]: lines " + std::to_string(it->second.line) + " and " +
                              std::to_string(lineno));
    }
    (void)current_line;

    RunConfig cfg;

    SectionReader grid(sections, "grid");
    cfg.n_z = static_cast<int>(to_long("n_z", grid.require("n_z")));
    cfg.n_p = static_cast<int>(to_long("n_p", grid.require("n_p")));
    cfg.z_min = to_double("z_min", grid.require("z_min"));
    cfg.length_z = to_double("length_z", grid.require("length_z"));
    grid.reject_unknown();
    cfg.grid();  // validates power-of-two and window constraints now

    SectionReader pot(sections, "potential");
    if (auto kind = pot.get("kind")) {
        if (kind->value == "free") cfg.potential.kind = PotentialKind::Free;
        else if (kind->value == "harmonic") cfg.potential.kind = PotentialKind::Harmonic;
        else if (kind->value == "quartic") cfg.potential.kind = PotentialKind::Quartic;
        else if (kind->value == "tabulated") cfg.potential.kind = PotentialKind::Tabulated;
        else
            throw ConfigError("line " + std::to_string(kind->line) +
                              ": potential kind must be free|harmonic|quartic|tabulated");
    }
    if (auto e = pot.get("a")) cfg.potential.a = to_double("a", *e);
    if (auto e = pot.get("b")) cfg.potential.b = to_double("b", *e);
    if (auto e = pot.get("c")) cfg.potential.c = to_double("c", *e);
    if (auto e = pot.get("lambda")) cfg.potential.lambda = to_double("lambda", *e);
    if (auto e = pot.get("mass")) cfg.potential.mass = to_double("mass", *e);
    if (auto e = pot.get("file")) cfg.potential_file = e->value;
    if (!(cfg.potential.mass > 0.0)) throw ConfigError("potential: mass must be positive");
    if (cfg.potential.kind == PotentialKind::Tabulated && cfg.potential_file.empty())
        throw ConfigError("potential: tabulated kind requires file =");
    pot.reject_unknown();

    SectionReader init(sections, "initial");
    const auto type = init.require("type");
    if (type.value == "gaussian") cfg.initial = InitialStateKind::Gaussian;
    else if (type.value == "eigenstate") cfg.initial = InitialStateKind::Eigenstate;
    else if (type.value == "quantum-file") cfg.initial = InitialStateKind::QuantumFile;
    else if (type.value == "classical-file") cfg.initial = InitialStateKind::ClassicalFile;
    else
        throw ConfigError("line " + std::to_string(type.line) +
                          ": initial type must be gaussian|eigenstate|quantum-file|classical-file");
    if (auto e = init.get("x0")) cfg.x0 = to_double("x0", *e);
    if (auto e = init.get("p0")) cfg.p0 = to_double("p0", *e);
    if (auto e = init.get("dx")) cfg.dx = to_double("dx", *e);
    if (auto e = init.get("dp")) cfg.dp = to_double("dp", *e);
    if (auto e = init.get("n")) cfg.eigenstate_n = static_cast<int>(to_long("n", *e));
    if (auto e = init.get("omega")) cfg.omega = to_double("omega", *e);
    if (auto e = init.get("file")) cfg.initial_file = e->value;
    init.reject_unknown();
    if (cfg.initial == InitialStateKind::Gaussian && (!(cfg.dx > 0.0) || !(cfg.dp > 0.0)))
        throw ConfigError("initial: gaussian requires positive dx and dp");
    if ((cfg.initial == InitialStateKind::QuantumFile ||
         cfg.initial == InitialStateKind::ClassicalFile) &&
        cfg.initial_file.empty())
        throw ConfigError("initial: file-based initial state requires file =");

    SectionReader evo(sections, "evolution");
    if (auto e = evo.get("law")) {
        if (e->value == "hw") cfg.evolution.law = EvolutionLaw::HW;
        else if (e->value == "liouville") cfg.evolution.law = EvolutionLaw::Liouville;
        else
            throw ConfigError("line " + std::to_string(e->line) + ": law must be hw|liouville");
    }
    if (auto e = evo.get("dt")) cfg.evolution.dt = to_double("dt", *e);
    if (auto e = evo.get("n_steps")) cfg.evolution.n_steps = to_long("n_steps", *e);
    if (auto e = evo.get("sample_every")) cfg.evolution.sample_every = to_long("sample_every", *e);
    evo.reject_unknown();
    if (cfg.evolution.sample_every <= 0)
        cfg.evolution.sample_every = std::max<long>(1, cfg.evolution.n_steps / 20);
    if (!(cfg.evolution.dt > 0.0)) throw ConfigError("evolution: dt must be positive");
    if (cfg.evolution.n_steps < 0) throw ConfigError("evolution: n_steps must be >= 0");

    SectionReader obs(sections, "observables");
    if (auto e = obs.get("moments")) {
        std::istringstream ss(e->value);
        std::string tok;
        while (ss >> tok) cfg.moment_tokens.push_back(tok);
    }
    if (auto e = obs.get("marginals")) cfg.marginals = to_bool("marginals", *e);
    if (auto e = obs.get("sharpened_beta")) cfg.sharpened_beta = to_double_list("sharpened_beta", *e);
    obs.reject_unknown();
    for (double b : cfg.sharpened_beta)
        if (b < 0.0 || b > M_PI / 2 + 1e-12)
            throw ConfigError("observables: sharpened_beta values must lie in [0, pi/2]");

    SectionReader diag(sections, "diagnostics");
    if (auto e = diag.get("unitarity")) cfg.diag_unitarity = to_bool("unitarity", *e);
    if (auto e = diag.get("factorization")) cfg.diag_factorization = to_bool("factorization", *e);
    diag.reject_unknown();

    SectionReader outp(sections, "output");
    if (auto e = outp.get("directory")) cfg.output_dir = e->value;
    if (auto e = outp.get("snapshots")) {
        if (e->value == "none") cfg.snapshots = SnapshotPolicy::None;
        else if (e->value == "initial") cfg.snapshots = SnapshotPolicy::Initial;
        else if (e->value == "final") cfg.snapshots = SnapshotPolicy::Final;
        else if (e->value == "both") cfg.snapshots = SnapshotPolicy::Both;
        else
            throw ConfigError("line " + std::to_string(e->line) +
                              ": snapshots must be none|initial|final|both");
    }
    outp.reject_unknown();

    return cfg;
}

/// Parse a moment token like "z", "p2", "zp", "z2p2" into a monomial.
inline MomentPolynomial parse_moment_token(const std::string& tok) {
    int dz_ = 0, dp_ = 0;
    size_t i = 0;
    auto read_sym = [&](char sym, int& deg) {
        if (i < tok.size() && tok[i] == sym) {
            ++i;
            if (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) {
                deg = tok[i] - '0';
                ++i;
            } else {
                deg = 1;
            }
            return true;
        }
        return false;
    };
    read_sym('z', dz_);
    read_sym('p', dp_);
    if (i != tok.size() || (dz_ == 0 && dp_ == 0))
        throw ConfigError("unrecognized moment token '" + tok + "' (expected e.g. z, p2, zp, z2p2)");
    return MomentPolynomial::monomial(dz_, dp_);
}

} // namespace phasespace
