#include "isac/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace isac {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw std::invalid_argument("expected a finite number, got '" + text + "'");
    return v;
}

template <typename Int>
Int parse_int(const std::string& text) {
    Int v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected an integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw std::invalid_argument("expected true or false, got '" + text + "'");
}

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(text);
    while (std::getline(in, part, sep)) parts.push_back(trim(part));
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

std::vector<Target> parse_targets(const std::string& text) {
    std::vector<Target> targets;
    if (text == "none") return targets;
    for (const auto& item : split(text, ',')) {
        const auto f = split(item, ':');
        if (f.size() != 3 && f.size() != 4)
            throw std::invalid_argument("expected delay:doppler:re[:im] entries, got '" + item + "'");
        Target t;
        t.delay = parse_int<int>(f[0]);
        t.doppler = parse_int<int>(f[1]);
        t.amplitude = cd(parse_double(f[2]), f.size() == 4 ? parse_double(f[3]) : 0.0);
        targets.push_back(t);
    }
    return targets;
}

std::string format_targets(const std::vector<Target>& targets) {
    if (targets.empty()) return "none";
    std::string out;
    for (const auto& t : targets) {
        if (!out.empty()) out += ",";
        out += std::to_string(t.delay) + ":" + std::to_string(t.doppler) + ":" + format_double(t.amplitude.real()) + ":" +
               format_double(t.amplitude.imag());
    }
    return out;
}

struct Key {
    const char* name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define ISAC_INT_KEY(key, field, Type, cond, msg)                                   \
    Key{key,                                                                        \
        [](RunConfig& c, const std::string& v) {                                    \
            const auto x = parse_int<Type>(v);                                      \
            require(cond, msg);                                                     \
            c.field = x;                                                            \
        },                                                                          \
        [](const RunConfig& c) { return std::to_string(c.field); }}

#define ISAC_REAL_KEY(key, field, cond, msg)                                        \
    Key{key,                                                                        \
        [](RunConfig& c, const std::string& v) {                                    \
            const double x = parse_double(v);                                       \
            require(cond, msg);                                                     \
            c.field = x;                                                            \
        },                                                                          \
        [](const RunConfig& c) { return format_double(c.field); }}

const std::vector<Key>& keys() {
    static const std::vector<Key> table{
        ISAC_INT_KEY("M", m, Index, x >= 1, "must be at least 1"),
        ISAC_INT_KEY("N", n, Index, x >= 1, "must be at least 1"),
        ISAC_INT_KEY("psk_order", psk_order, int, x >= 2 && (x & (x - 1)) == 0, "must be a power of two >= 2"),
        ISAC_REAL_KEY("rho", rho, x >= 0.0 && x <= 1.0, "must lie in [0, 1]"),
        ISAC_REAL_KEY("mu_db", mu_db, true, ""),
        ISAC_REAL_KEY("p_h", p_h, true, ""),
        ISAC_INT_KEY("n_cp", n_cp, Index, x >= 0, "must be nonnegative"),
        ISAC_INT_KEY("delay_min", delay_min, int, x <= 0, "must be <= 0"),
        ISAC_INT_KEY("delay_max", delay_max, int, x >= 0, "must be >= 0"),
        ISAC_INT_KEY("doppler_min", doppler_min, int, x <= 0, "must be <= 0"),
        ISAC_INT_KEY("doppler_max", doppler_max, int, x >= 0, "must be >= 0"),
        ISAC_REAL_KEY("tol_x", tol_x, x > 0.0, "must be positive"),
        ISAC_REAL_KEY("tol_h", tol_h, x > 0.0, "must be positive"),
        ISAC_INT_KEY("max_iters", max_iters, int, x >= 1, "must be at least 1"),
        Key{"squarem", [](RunConfig& c, const std::string& v) { c.squarem = parse_bool(v); },
            [](const RunConfig& c) { return std::string(c.squarem ? "true" : "false"); }},
        ISAC_REAL_KEY("eig_tol", eig_tol, x > 0.0 && x < 1.0, "must lie in (0, 1)"),
        ISAC_INT_KEY("seed", seed, std::uint64_t, true, ""),
        ISAC_REAL_KEY("noise_power", noise_power, x >= 0.0, "must be nonnegative"),
        ISAC_INT_KEY("channel_paths", channel_paths, int, x >= 1, "must be at least 1"),
        ISAC_INT_KEY("channel_max_delay", channel_max_delay, int, x >= 0, "must be nonnegative"),
        ISAC_INT_KEY("channel_max_doppler", channel_max_doppler, int, x >= 0, "must be nonnegative"),
        Key{"adr_estimator",
            [](RunConfig& c, const std::string& v) {
                if (v == "gaussian") c.adr_estimator = AdrEstimator::gaussian;
                else if (v == "histogram") c.adr_estimator = AdrEstimator::histogram;
                else throw std::invalid_argument("expected gaussian or histogram, got '" + v + "'");
            },
            [](const RunConfig& c) {
                return std::string(c.adr_estimator == AdrEstimator::gaussian ? "gaussian" : "histogram");
            }},
        Key{"targets", [](RunConfig& c, const std::string& v) { c.targets = parse_targets(v); },
            [](const RunConfig& c) { return format_targets(c.targets); }},
        ISAC_REAL_KEY("radar_noise_power", radar_noise_power, x >= 0.0, "must be nonnegative"),
        Key{"cfar_reference",
            [](RunConfig& c, const std::string& v) {
                if (v == "noise") c.cfar_reference = CfarReference::noise;
                else if (v == "echo") c.cfar_reference = CfarReference::echo;
                else throw std::invalid_argument("expected noise or echo, got '" + v + "'");
            },
            [](const RunConfig& c) {
                return std::string(c.cfar_reference == CfarReference::noise ? "noise" : "echo");
            }},
        ISAC_INT_KEY("cfar_training", cfar_training, int, x >= 1, "must be at least 1"),
        ISAC_INT_KEY("cfar_guard", cfar_guard, int, x >= 0, "must be nonnegative"),
        ISAC_REAL_KEY("cfar_pfa", cfar_pfa, x > 0.0 && x < 1.0, "must lie in (0, 1)"),
        ISAC_INT_KEY("detect_delay_min", detect_delay_min, int, x <= 0, "must be <= 0"),
        ISAC_INT_KEY("detect_delay_max", detect_delay_max, int, x >= 0, "must be >= 0"),
        ISAC_INT_KEY("detect_doppler_min", detect_doppler_min, int, x <= 0, "must be <= 0"),
        ISAC_INT_KEY("detect_doppler_max", detect_doppler_max, int, x >= 0, "must be >= 0"),
        ISAC_INT_KEY("trials", trials, int, x >= 1, "must be at least 1"),
        ISAC_INT_KEY("threads", threads, int, x >= 0, "must be nonnegative"),
        Key{"output_dir",
            [](RunConfig& c, const std::string& v) {
                require(!v.empty(), "must not be empty");
                c.output_dir = v;
            },
            [](const RunConfig& c) { return c.output_dir; }},
    };
    return table;
}

#undef ISAC_INT_KEY
#undef ISAC_REAL_KEY

}  // namespace

OptimizerConfig RunConfig::optimizer_config() const {
    OptimizerConfig o;
    o.rho = rho;
    o.mu_db = mu_db;
    o.region = DelayDopplerRegion(delay_min, delay_max, doppler_min, doppler_max);
    o.p_h = p_h;
    o.n_cp = n_cp;
    o.tol_x = tol_x;
    o.tol_h = tol_h;
    o.max_iters = max_iters;
    o.squarem = squarem;
    o.seed = seed;
    o.eig_tol = eig_tol;
    return o;
}

EvalConfig RunConfig::eval_config() const {
    try {
        EvalConfig e;
        e.m = m;
        e.n = n;
        e.psk_order = psk_order;
        e.optimizer = optimizer_config();
        e.noise_power = noise_power;
        e.channel_paths = channel_paths;
        e.channel_max_delay = channel_max_delay;
        e.channel_max_doppler = channel_max_doppler;
        e.scene.targets = targets;
        e.radar_noise_power = radar_noise_power;
        e.cfar = CfarConfig{cfar_training, cfar_guard, cfar_pfa};
        e.cfar_reference = cfar_reference;
        e.detect_region = DelayDopplerRegion(detect_delay_min, detect_delay_max, detect_doppler_min, detect_doppler_max);
        e.adr_estimator = adr_estimator;
        e.threads = threads;
        e.validate();
        return e;
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("invalid configuration: ") + err.what());
    }
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    std::map<std::string, const Key*> lookup;
    for (const auto& k : keys()) lookup.emplace(k.name, &k);

    RunConfig config;
    std::map<std::string, int> seen;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value, got '" + line + "'");
        const std::string name = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = lookup.find(name);
        if (it == lookup.end()) throw ConfigError(where + "unknown key '" + name + "'");
        if (const auto prev = seen.find(name); prev != seen.end())
            throw ConfigError(where + "key '" + name + "' repeats line " + std::to_string(prev->second));
        seen.emplace(name, line_no);
        try {
            it->second->set(config, value);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(where + "key '" + name + "': " + err.what());
        }
    }
    try {
        config.eval_config();
    } catch (const ConfigError& err) {
        throw ConfigError(source + ": " + err.what());
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse_config(in, path);
}

std::string serialize_config(const RunConfig& config) {
    std::string out;
    for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
    return out;
}

}  // namespace isac
