#include "vfd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <variant>

#include "vfd/errors.hpp"

namespace vfd {

const char* subcommand_name(Subcommand sub) {
    switch (sub) {
    case Subcommand::Profile: return "profile";
    case Subcommand::GreenCheck: return "green-check";
    case Subcommand::Solve: return "solve";
    case Subcommand::Converge: return "converge";
    case Subcommand::Compare: return "compare";
    case Subcommand::Extinction: return "extinction";
    }
    return "?";
}

std::optional<Subcommand> subcommand_from_name(const std::string& name) {
    for (Subcommand s : {Subcommand::Profile, Subcommand::GreenCheck, Subcommand::Solve,
                         Subcommand::Converge, Subcommand::Compare, Subcommand::Extinction})
        if (name == subcommand_name(s)) return s;
    return std::nullopt;
}

namespace {

struct Value {
    std::variant<double, std::string, std::vector<double>> data;
    int line = 0;
};

using KeyMap = std::map<std::string, Value>;

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Tokenize one `key = value` document.
KeyMap lex(const std::string& text) {
    KeyMap keys;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        ++line_no;
        pos = eol + 1;

        // strip comment (quotes are respected)
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            else if (line[i] == '#' && !quoted) {
                line.erase(i);
                break;
            }
        }
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", line_no, static_cast<int>(b) + 1);
        std::string key = line.substr(0, eq);
        while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
        if (key.empty() || !std::all_of(key.begin(), key.end(), is_key_char))
            throw ParseError("malformed key", line_no, static_cast<int>(b) + 1);
        if (keys.count(key))
            throw ParseError("duplicate key '" + key + "'", line_no, static_cast<int>(b) + 1);

        std::string raw = line.substr(eq + 1);
        std::size_t vb = raw.find_first_not_of(" \t");
        if (vb == std::string::npos)
            throw ParseError("missing value for '" + key + "'", line_no,
                             static_cast<int>(eq) + 2);
        raw = raw.substr(vb);
        const int col = static_cast<int>(b + eq + 2 + vb);

        Value v;
        v.line = line_no;
        if (raw.front() == '[') {
            if (raw.back() != ']') throw ParseError("unterminated array", line_no, col);
            std::vector<double> arr;
            std::string body = raw.substr(1, raw.size() - 2);
            std::size_t p = 0;
            while (p < body.size()) {
                std::size_t comma = body.find(',', p);
                std::string item = body.substr(p, comma == std::string::npos ? std::string::npos
                                                                             : comma - p);
                p = comma == std::string::npos ? body.size() : comma + 1;
                std::size_t ib = item.find_first_not_of(" \t");
                if (ib == std::string::npos)
                    throw ParseError("empty array element", line_no, col);
                std::size_t ie = item.find_last_not_of(" \t");
                item = item.substr(ib, ie - ib + 1);
                try {
                    std::size_t used = 0;
                    arr.push_back(std::stod(item, &used));
                    if (used != item.size()) throw std::invalid_argument(item);
                } catch (const std::exception&) {
                    throw ParseError("bad number '" + item + "' in array", line_no, col);
                }
            }
            v.data = std::move(arr);
        } else if (raw.front() == '"') {
            if (raw.size() < 2 || raw.back() != '"')
                throw ParseError("unterminated string", line_no, col);
            v.data = raw.substr(1, raw.size() - 2);
        } else {
            try {
                std::size_t used = 0;
                double num = std::stod(raw, &used);
                if (used != raw.size()) throw std::invalid_argument(raw);
                v.data = num;
            } catch (const std::exception&) {
                v.data = raw; // bare string
            }
        }
        keys.emplace(std::move(key), std::move(v));
    }
    return keys;
}

// Typed accessors over the parsed map, consuming keys as they are read so
// leftovers can be reported as unknown.
class Reader {
public:
    explicit Reader(KeyMap keys) : keys_(std::move(keys)) {}

    bool has(const std::string& key) const { return keys_.count(key) > 0; }

    bool holds_number(const std::string& key) const {
        auto it = keys_.find(key);
        return it != keys_.end() && std::holds_alternative<double>(it->second.data);
    }

    std::optional<double> number(const std::string& key) {
        auto it = keys_.find(key);
        if (it == keys_.end()) return std::nullopt;
        if (!std::holds_alternative<double>(it->second.data))
            throw ValidationError(key, "expected a number");
        double v = std::get<double>(it->second.data);
        keys_.erase(it);
        return v;
    }

    std::optional<std::string> string(const std::string& key) {
        auto it = keys_.find(key);
        if (it == keys_.end()) return std::nullopt;
        if (!std::holds_alternative<std::string>(it->second.data))
            throw ValidationError(key, "expected a string");
        std::string v = std::get<std::string>(it->second.data);
        keys_.erase(it);
        return v;
    }

    std::optional<std::vector<double>> array(const std::string& key) {
        auto it = keys_.find(key);
        if (it == keys_.end()) return std::nullopt;
        if (!std::holds_alternative<std::vector<double>>(it->second.data))
            throw ValidationError(key, "expected an array");
        std::vector<double> v = std::get<std::vector<double>>(it->second.data);
        keys_.erase(it);
        return v;
    }

    void finish() const {
        if (!keys_.empty())
            throw ValidationError(keys_.begin()->first, "unknown key for this subcommand");
    }

private:
    KeyMap keys_;
};

double require_range(const std::string& key, double v, double lo, double hi, bool open_lo,
                     bool open_hi) {
    const bool ok_lo = open_lo ? v > lo : v >= lo;
    const bool ok_hi = open_hi ? v < hi : v <= hi;
    if (!ok_lo || !ok_hi) {
        const char* lb = open_lo ? "(" : "[";
        const char* rb = open_hi ? ")" : "]";
        throw ValidationError(key, "must lie in " + std::string(lb) + std::to_string(lo) + ", " +
                                       std::to_string(hi) + rb);
    }
    return v;
}

TimeSpec read_timespec(Reader& r, const std::string& prefix, double fallback) {
    TimeSpec spec = TimeSpec::constant(fallback);
    // plain numeric shorthand: f = 1.5
    if (r.holds_number(prefix)) return TimeSpec::constant(*r.number(prefix));
    auto kind = r.string(prefix);
    if (!kind) return spec;
    if (*kind == "constant") {
        spec = TimeSpec::constant(r.number(prefix + "_value").value_or(fallback));
    } else if (*kind == "linear") {
        spec = TimeSpec::linear(r.number(prefix + "_value").value_or(fallback),
                                r.number(prefix + "_slope").value_or(0.0));
    } else if (*kind == "step") {
        auto times = r.array(prefix + "_times");
        auto values = r.array(prefix + "_values");
        if (!times || !values)
            throw ValidationError(prefix, "step data needs _times and _values arrays");
        try {
            spec = TimeSpec::step(*times, *values);
        } catch (const ParameterOutOfRange& e) {
            throw ValidationError(prefix, e.what());
        }
    } else {
        throw ValidationError(prefix, "must be one of constant | linear | step");
    }
    return spec;
}

InitialDatum read_datum(Reader& r) {
    InitialDatum d;
    auto kind = r.string("u0");
    if (kind) {
        if (*kind == "bump") d.kind = InitialDatum::Kind::Bump;
        else if (*kind == "self-similar") d.kind = InitialDatum::Kind::SelfSimilar;
        else if (*kind == "custom") d.kind = InitialDatum::Kind::Custom;
        else throw ValidationError("u0", "must be one of bump | self-similar | custom");
    }
    if (auto v = r.number("u0_mass")) d.mass = require_range("u0_mass", *v, 0.0, 1e9, true, true);
    if (auto v = r.number("u0_width"))
        d.width = require_range("u0_width", *v, 0.0, 1e9, true, true);
    if (auto v = r.number("u0_mu")) d.mu_ss = require_range("u0_mu", *v, 0.0, 1e9, true, true);
    if (auto v = r.number("u0_T"))
        d.extinction_time = require_range("u0_T", *v, 0.0, 1e9, true, true);
    if (auto v = r.array("u0_x")) d.xs = *v;
    if (auto v = r.array("u0_u")) d.us = *v;
    if (auto v = r.number("u0_mu0")) d.mu0 = require_range("u0_mu0", *v, 0.0, 1e9, true, true);
    if (auto v = r.number("u0_R0")) d.R0 = require_range("u0_R0", *v, 0.0, 1e9, true, true);
    if (d.kind == InitialDatum::Kind::Custom && (d.xs.size() != d.us.size() || d.xs.size() < 2))
        throw ValidationError("u0_x", "custom datum needs matching u0_x/u0_u with >= 2 samples");
    return d;
}

void read_experiment_block(Reader& r, ExperimentConfig& exp, bool allow_R_list) {
    if (auto v = r.number("m")) exp.m = require_range("m", *v, -1.0, 0.0, true, true);
    exp.u0 = read_datum(r);

    const bool has_mu = r.has("mu");
    if (has_mu) {
        const double mu = require_range("mu", *r.number("mu"), 0.0, 1e9, true, true);
        exp.f = TimeSpec::constant(mu);
        exp.g = TimeSpec::constant(mu);
        exp.constant_mu = true;
        if (r.has("f") || r.has("g"))
            throw ValidationError("mu", "give either mu or the f/g data, not both");
    } else if (r.has("f") || r.has("g")) {
        exp.f = read_timespec(r, "f", 1.0);
        exp.g = read_timespec(r, "g", 1.0);
        exp.constant_mu = false;
    }

    if (allow_R_list) {
        if (auto v = r.array("R_list")) {
            if (v->empty() || !std::is_sorted(v->begin(), v->end()) ||
                std::adjacent_find(v->begin(), v->end()) != v->end())
                throw ValidationError("R_list", "must be a strictly increasing list");
            for (double R : *v) require_range("R_list", R, 0.0, 1e9, true, true);
            exp.R_list = *v;
        }
    }

    if (auto v = r.number("h")) exp.grid_h = require_range("h", *v, 0.0, 1e9, true, true);
    if (auto v = r.number("dt0")) exp.dt0 = require_range("dt0", *v, 0.0, 1e9, true, true);
    if (auto v = r.number("dt_max"))
        exp.dt_max = require_range("dt_max", *v, 0.0, 1e9, true, true);
    if (auto v = r.number("eps")) exp.eps = require_range("eps", *v, 0.0, 1e9, false, true);
    if (auto v = r.number("t_end")) exp.t_end = require_range("t_end", *v, 0.0, 1e9, true, true);

    if (auto v = r.number("window_L"))
        exp.window.half_width = require_range("window_L", *v, 0.0, 1e9, true, true);
    if (auto v = r.array("window_t")) {
        if (v->size() != 2 || !((*v)[0] < (*v)[1]) || !((*v)[0] > 0.0))
            throw ValidationError("window_t", "must be [a, b] with 0 < a < b");
        exp.window.t_begin = (*v)[0];
        exp.window.t_end = (*v)[1];
    }
    if (auto v = r.number("window_nx"))
        exp.window.nx = static_cast<std::size_t>(
            require_range("window_nx", *v, 2.0, 1e6, false, true));
    if (auto v = r.number("window_nt"))
        exp.window.nt = static_cast<std::size_t>(
            require_range("window_nt", *v, 2.0, 1e6, false, true));

    if (auto v = r.number("tol_compact"))
        exp.tol.compact = require_range("tol_compact", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("tol_mass"))
        exp.tol.mass_const = require_range("tol_mass", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("tol_mass_general"))
        exp.tol.mass_general = require_range("tol_mass_general", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("tol_extinction"))
        exp.tol.extinction_rel = require_range("tol_extinction", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("tol_extinction_ratio"))
        exp.tol.extinction_ratio = require_range("tol_extinction_ratio", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("tol_slope"))
        exp.tol.slope = require_range("tol_slope", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("tol_equal"))
        exp.tol.equal = require_range("tol_equal", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("tol_order"))
        exp.tol.order = require_range("tol_order", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("tol_barrier"))
        exp.tol.barrier = require_range("tol_barrier", *v, 0.0, 1.0, true, true);
    if (auto v = r.number("threads"))
        exp.threads = static_cast<unsigned>(require_range("threads", *v, 0.0, 512.0, false, true));
}

} // namespace

RunConfig parse_config(const std::string& text, std::optional<Subcommand> cli_subcommand) {
    Reader r(lex(text));
    RunConfig cfg;

    if (auto sub = r.string("subcommand")) {
        auto parsed = subcommand_from_name(*sub);
        if (!parsed)
            throw ValidationError("subcommand",
                                  "must be one of profile | green-check | solve | converge | "
                                  "compare | extinction");
        if (cli_subcommand && *cli_subcommand != *parsed)
            throw ValidationError("subcommand", "does not match the command line subcommand");
        cfg.subcommand = *parsed;
    } else if (cli_subcommand) {
        cfg.subcommand = *cli_subcommand;
    } else {
        throw ValidationError("subcommand", "missing (not on the command line either)");
    }

    switch (cfg.subcommand) {
    case Subcommand::Profile: {
        if (auto v = r.number("m")) cfg.profile.m = require_range("m", *v, -1.0, 0.0, true, true);
        if (auto v = r.number("mu"))
            cfg.profile.mu = require_range("mu", *v, 0.0, 1e9, true, true);
        if (auto v = r.number("eta")) {
            cfg.profile.use_eta = true;
            cfg.profile.eta = require_range("eta", *v, 0.0, 1e9, true, true);
        }
        if (auto v = r.number("dr")) cfg.profile.dr = require_range("dr", *v, 0.0, 1.0, true, true);
        if (auto v = r.number("r_max"))
            cfg.profile.r_max = require_range("r_max", *v, 0.0, 1e9, true, true);
        break;
    }
    case Subcommand::GreenCheck: {
        if (auto v = r.number("R"))
            cfg.green.half_width = require_range("R", *v, 0.0, 1e9, true, true);
        if (auto v = r.number("nodes")) {
            const double n = require_range("nodes", *v, 3.0, 1e7, false, true);
            if (std::fmod(n, 2.0) != 1.0)
                throw ValidationError("nodes", "must be an odd integer >= 3");
            cfg.green.nodes = static_cast<std::size_t>(n);
        }
        if (auto v = r.number("refine_levels"))
            cfg.green.refine_levels = static_cast<std::size_t>(
                require_range("refine_levels", *v, 1.0, 8.0, false, false));
        break;
    }
    case Subcommand::Solve: {
        read_experiment_block(r, cfg.exp, /*allow_R_list=*/false);
        if (auto v = r.number("R"))
            cfg.solve.half_width = require_range("R", *v, 0.0, 1e9, true, true);
        if (auto bc = r.string("bc")) {
            if (*bc == "dirichlet") cfg.solve.neumann = false;
            else if (*bc == "neumann") cfg.solve.neumann = true;
            else throw ValidationError("bc", "must be dirichlet | neumann");
        }
        if (auto v = r.array("snapshots")) cfg.solve.snapshots = *v;
        break;
    }
    case Subcommand::Converge:
    case Subcommand::Compare:
    case Subcommand::Extinction: {
        read_experiment_block(r, cfg.exp, /*allow_R_list=*/true);
        break;
    }
    }
    r.finish();
    return cfg;
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace vfd
