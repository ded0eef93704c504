#include "tpqkd/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tpqkd/errors.hpp"

namespace tpqkd::config {

namespace {

// Minimal TOML subset: [sections], key = value, values are strings, booleans,
// numbers, or flat numeric arrays. Comments start with '#'.
struct Value {
    enum class Kind { Bool, Int, Float, Str, Array } kind = Kind::Str;
    bool b = false;
    std::int64_t i = 0;
    double f = 0.0;
    std::string s;
    std::vector<Value> items;
};

using Table = std::map<std::string, std::map<std::string, Value>>;

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Value parse_scalar(const std::string& raw, int line_no) {
    Value v;
    if (raw.empty()) throw ValidationError("config: empty value at line " +
                                           std::to_string(line_no));
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"')
            throw ValidationError("config: unterminated string at line " +
                                  std::to_string(line_no));
        v.kind = Value::Kind::Str;
        v.s = raw.substr(1, raw.size() - 2);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = Value::Kind::Bool;
        v.b = raw == "true";
        return v;
    }
    // Integer when it parses fully without '.', 'e', 'inf', 'nan'.
    const bool looks_int =
        raw.find_first_of(".eEnN") == std::string::npos && raw != "+" && raw != "-";
    if (looks_int) {
        try {
            size_t pos = 0;
            const std::int64_t i = std::stoll(raw, &pos);
            if (pos == raw.size()) {
                v.kind = Value::Kind::Int;
                v.i = i;
                return v;
            }
        } catch (...) {
        }
    }
    try {
        size_t pos = 0;
        const double f = std::stod(raw, &pos);
        if (pos == raw.size()) {
            v.kind = Value::Kind::Float;
            v.f = f;
            return v;
        }
    } catch (...) {
    }
    throw ValidationError("config: cannot parse value '" + raw + "' at line " +
                          std::to_string(line_no));
}

Value parse_value(const std::string& raw, int line_no) {
    if (!raw.empty() && raw.front() == '[') {
        if (raw.back() != ']')
            throw ValidationError("config: unterminated array at line " +
                                  std::to_string(line_no));
        Value v;
        v.kind = Value::Kind::Array;
        const std::string inner = trim(raw.substr(1, raw.size() - 2));
        if (inner.empty()) return v;
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ','))
            v.items.push_back(parse_scalar(trim(item), line_no));
        return v;
    }
    return parse_scalar(raw, line_no);
}

Table parse_table(const std::string& text) {
    Table table;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Strip comments outside strings.
        bool in_str = false;
        for (size_t k = 0; k < line.size(); ++k) {
            if (line[k] == '"') in_str = !in_str;
            if (line[k] == '#' && !in_str) {
                line.resize(k);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("config: malformed section at line " +
                                      std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ValidationError("config: empty section name at line " +
                                      std::to_string(line_no));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: expected key = value at line " +
                                  std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string raw = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config: empty key at line " + std::to_string(line_no));
        if (section.empty())
            throw ValidationError("config: key '" + key + "' outside any section");
        if (table[section].count(key))
            throw ValidationError("config: duplicate key '" + section + "." + key + "'");
        table[section][key] = parse_value(raw, line_no);
    }
    return table;
}

class Reader {
public:
    explicit Reader(const Table& t) : table_(t) {}

    bool has(const std::string& sec, const std::string& key) const {
        auto it = table_.find(sec);
        return it != table_.end() && it->second.count(key);
    }
    double number(const std::string& sec, const std::string& key, double fallback) {
        if (!has(sec, key)) return fallback;
        const Value& v = get(sec, key);
        if (v.kind == Value::Kind::Float) return v.f;
        if (v.kind == Value::Kind::Int) return static_cast<double>(v.i);
        throw ValidationError("config: " + sec + "." + key + " must be a number");
    }
    std::int64_t integer(const std::string& sec, const std::string& key,
                         std::int64_t fallback) {
        if (!has(sec, key)) return fallback;
        const Value& v = get(sec, key);
        if (v.kind == Value::Kind::Int) return v.i;
        throw ValidationError("config: " + sec + "." + key + " must be an integer");
    }
    bool boolean(const std::string& sec, const std::string& key, bool fallback) {
        if (!has(sec, key)) return fallback;
        const Value& v = get(sec, key);
        if (v.kind == Value::Kind::Bool) return v.b;
        throw ValidationError("config: " + sec + "." + key + " must be a boolean");
    }
    std::string text(const std::string& sec, const std::string& key,
                     const std::string& fallback) {
        if (!has(sec, key)) return fallback;
        const Value& v = get(sec, key);
        if (v.kind == Value::Kind::Str) return v.s;
        throw ValidationError("config: " + sec + "." + key + " must be a string");
    }
    std::vector<double> numbers(const std::string& sec, const std::string& key) {
        std::vector<double> out;
        if (!has(sec, key)) return out;
        const Value& v = get(sec, key);
        if (v.kind != Value::Kind::Array)
            throw ValidationError("config: " + sec + "." + key + " must be an array");
        for (const Value& item : v.items) {
            if (item.kind == Value::Kind::Float)
                out.push_back(item.f);
            else if (item.kind == Value::Kind::Int)
                out.push_back(static_cast<double>(item.i));
            else
                throw ValidationError("config: " + sec + "." + key +
                                      " must contain numbers");
        }
        return out;
    }

    // Every key must have been consumed by the schema.
    void mark(const std::string& sec, const std::string& key) {
        seen_[sec].insert(key);
    }
    void reject_unknown() const {
        for (const auto& [sec, keys] : table_) {
            auto it = seen_.find(sec);
            for (const auto& [key, value] : keys) {
                if (it == seen_.end() || !it->second.count(key))
                    throw ValidationError("config: unknown parameter '" + sec + "." +
                                          key + "'");
            }
        }
    }

private:
    const Value& get(const std::string& sec, const std::string& key) {
        mark(sec, key);
        return table_.at(sec).at(key);
    }
    const Table& table_;
    std::map<std::string, std::set<std::string>> seen_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig parse(const std::string& toml_text) {
    const Table table = parse_table(toml_text);
    Reader r(table);
    ExperimentConfig cfg;

    cfg.transmitter.dim = static_cast<int>(r.integer("transmitter", "dim", 2));
    cfg.transmitter.p_time = r.number("transmitter", "p_time", 0.5);
    cfg.transmitter.bin_width_s = r.number("transmitter", "bin_width_s", 400e-12);
    auto& in = cfg.transmitter.intensities;
    in.mu1 = r.number("transmitter", "mu1", 0.156);
    in.mu2 = r.number("transmitter", "mu2", 0.059);
    in.mu3 = r.number("transmitter", "mu3", 0.0);
    const double third = 1.0 / 3.0;
    in.p_mu1 = r.number("transmitter", "p_mu1", third);
    in.p_mu2 = r.number("transmitter", "p_mu2", third);
    in.p_mu3 = r.number("transmitter", "p_mu3", 1.0 - 2.0 * third);

    auto& ch = cfg.channel;
    ch.loss_db = r.number("channel", "loss_db", 4.0);
    ch.phase_noise_sigma = r.number("channel", "phase_noise_sigma", 0.0);
    ch.detector_efficiency = r.number("channel", "detector_efficiency", 0.80);
    ch.dark_rate_cps = r.number("channel", "dark_rate_cps", 100.0);
    ch.dead_time_s = r.number("channel", "dead_time_s", 30e-9);
    ch.saturation_knee_cps = r.number("channel", "saturation_knee_cps", 1.5e6);
    ch.extinction_db = r.number("channel", "extinction_db", 18.0);
    ch.basis_split = r.number("channel", "basis_split", 0.5);
    ch.hom_overlap = r.number("channel", "hom_overlap", 1.0);
    ch.match_lo_attenuation = r.boolean("channel", "match_lo_attenuation", true);

    cfg.frames = static_cast<std::uint64_t>(r.integer("run", "frames", 10'000'000));
    cfg.seed = static_cast<std::uint64_t>(r.integer("run", "seed", 1));
    cfg.workers = static_cast<int>(r.integer("run", "workers", 0));

    cfg.policy = secbound::policy_from_string(r.text("sdp", "policy", "one-state"));
    cfg.sdp_tolerance = r.number("sdp", "tolerance", 1e-8);
    cfg.sdp_max_iterations = static_cast<int>(r.integer("sdp", "max_iterations", 200));

    for (double d : r.numbers("sweep", "dims"))
        cfg.sweep_dims.push_back(static_cast<int>(d));
    cfg.sweep_losses_db = r.numbers("sweep", "losses_db");

    cfg.g2_mu = r.number("g2scan", "mu", 0.016);
    cfg.g2_frames = static_cast<std::uint64_t>(
        r.integer("g2scan", "frames", 1'000'000));
    cfg.g2_delay_min_ps = r.number("g2scan", "delay_min_ps", -160.0);
    cfg.g2_delay_max_ps = r.number("g2scan", "delay_max_ps", 160.0);
    cfg.g2_delay_step_ps = r.number("g2scan", "delay_step_ps", 20.0);
    cfg.g2_pulse_width_ps = r.number("g2scan", "pulse_width_ps", 80.0);

    cfg.output_dir = r.text("output", "dir", "out");
    cfg.output_prefix = r.text("output", "prefix", "run");
    cfg.write_csv = r.boolean("output", "csv", true);
    cfg.write_json = r.boolean("output", "json", true);

    r.reject_unknown();
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    transmitter.validate();
    channel.validate();
    if (frames == 0) throw ValidationError("config: run.frames must be positive");
    if (workers < 0) throw ValidationError("config: run.workers must be >= 0");
    if (sdp_tolerance <= 0.0)
        throw ValidationError("config: sdp.tolerance must be positive");
    if (sdp_max_iterations < 1)
        throw ValidationError("config: sdp.max_iterations must be >= 1");
    for (int d : sweep_dims)
        if (d < 2) throw ValidationError("config: sweep.dims entries must be >= 2");
    for (double l : sweep_losses_db)
        if (l < 0.0)
            throw ValidationError("config: sweep.losses_db entries must be >= 0");
    if (g2_mu < 0.0) throw ValidationError("config: g2scan.mu must be >= 0");
    if (g2_frames == 0)
        throw ValidationError("config: g2scan.frames must be positive");
    if (g2_delay_step_ps <= 0.0)
        throw ValidationError("config: g2scan.delay_step_ps must be positive");
    if (g2_delay_max_ps < g2_delay_min_ps)
        throw ValidationError("config: g2scan delay range is inverted");
    if (g2_pulse_width_ps <= 0.0)
        throw ValidationError("config: g2scan.pulse_width_ps must be positive");
    if (output_dir.empty() || output_prefix.empty())
        throw ValidationError("config: output dir and prefix must be non-empty");
}

std::string ExperimentConfig::to_toml() const {
    std::ostringstream os;
    os << "[transmitter]\n";
    os << "dim = " << transmitter.dim << "\n";
    os << "p_time = " << fmt(transmitter.p_time) << "\n";
    os << "bin_width_s = " << fmt(transmitter.bin_width_s) << "\n";
    os << "mu1 = " << fmt(transmitter.intensities.mu1) << "\n";
    os << "mu2 = " << fmt(transmitter.intensities.mu2) << "\n";
    os << "mu3 = " << fmt(transmitter.intensities.mu3) << "\n";
    os << "p_mu1 = " << fmt(transmitter.intensities.p_mu1) << "\n";
    os << "p_mu2 = " << fmt(transmitter.intensities.p_mu2) << "\n";
    os << "p_mu3 = " << fmt(transmitter.intensities.p_mu3) << "\n";
    os << "\n[channel]\n";
    os << "loss_db = " << fmt(channel.loss_db) << "\n";
    os << "phase_noise_sigma = " << fmt(channel.phase_noise_sigma) << "\n";
    os << "detector_efficiency = " << fmt(channel.detector_efficiency) << "\n";
    os << "dark_rate_cps = " << fmt(channel.dark_rate_cps) << "\n";
    os << "dead_time_s = " << fmt(channel.dead_time_s) << "\n";
    os << "saturation_knee_cps = " << fmt(channel.saturation_knee_cps) << "\n";
    os << "extinction_db = " << fmt(channel.extinction_db) << "\n";
    os << "basis_split = " << fmt(channel.basis_split) << "\n";
    os << "hom_overlap = " << fmt(channel.hom_overlap) << "\n";
    os << "match_lo_attenuation = " << (channel.match_lo_attenuation ? "true" : "false")
       << "\n";
    os << "\n[run]\n";
    os << "frames = " << frames << "\n";
    os << "seed = " << seed << "\n";
    os << "workers = " << workers << "\n";
    os << "\n[sdp]\n";
    os << "policy = \"" << secbound::to_string(policy) << "\"\n";
    os << "tolerance = " << fmt(sdp_tolerance) << "\n";
    os << "max_iterations = " << sdp_max_iterations << "\n";
    os << "\n[sweep]\n";
    os << "dims = [";
    for (size_t i = 0; i < sweep_dims.size(); ++i)
        os << (i ? ", " : "") << sweep_dims[i];
    os << "]\n";
    os << "losses_db = [";
    for (size_t i = 0; i < sweep_losses_db.size(); ++i)
        os << (i ? ", " : "") << fmt(sweep_losses_db[i]);
    os << "]\n";
    os << "\n[g2scan]\n";
    os << "mu = " << fmt(g2_mu) << "\n";
    os << "frames = " << g2_frames << "\n";
    os << "delay_min_ps = " << fmt(g2_delay_min_ps) << "\n";
    os << "delay_max_ps = " << fmt(g2_delay_max_ps) << "\n";
    os << "delay_step_ps = " << fmt(g2_delay_step_ps) << "\n";
    os << "pulse_width_ps = " << fmt(g2_pulse_width_ps) << "\n";
    os << "\n[output]\n";
    os << "dir = \"" << output_dir << "\"\n";
    os << "prefix = \"" << output_prefix << "\"\n";
    os << "csv = " << (write_csv ? "true" : "false") << "\n";
    os << "json = " << (write_json ? "true" : "false") << "\n";
    return os.str();
}

ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void save(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << cfg.to_toml();
}

}  // namespace tpqkd::config
