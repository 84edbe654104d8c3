#include "deeptop/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace deeptop {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double parse_double(const std::string& v) {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad number: " + v);
    return x;
}

long parse_long(const std::string& v) {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad integer: " + v);
    return x;
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(static_cast<int>(parse_long(item)));
    }
    if (out.empty()) throw std::invalid_argument("bad integer list: " + v);
    return out;
}

std::string format_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

struct KeyHandler {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

// One entry per accepted key; also fixes the echo order.
const std::vector<std::pair<std::string, KeyHandler>>& key_table() {
    static const std::vector<std::pair<std::string, KeyHandler>> table = {
        {"env",
         {[](ExperimentConfig& c, const std::string& v) { c.env = v; },
          [](const ExperimentConfig& c) { return c.env; }}},
        {"policy",
         {[](ExperimentConfig& c, const std::string& v) { c.policy = v; },
          [](const ExperimentConfig& c) { return c.policy; }}},
        {"timesteps",
         {[](ExperimentConfig& c, const std::string& v) { c.timesteps = parse_long(v); },
          [](const ExperimentConfig& c) { return std::to_string(c.timesteps); }}},
        {"runs",
         {[](ExperimentConfig& c, const std::string& v) { c.runs = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.runs); }}},
        {"seed",
         {[](ExperimentConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.seed); }}},
        {"jobs",
         {[](ExperimentConfig& c, const std::string& v) { c.jobs = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.jobs); }}},
        {"outdir",
         {[](ExperimentConfig& c, const std::string& v) { c.outdir = v; },
          [](const ExperimentConfig& c) { return c.outdir; }}},
        {"hidden",
         {[](ExperimentConfig& c, const std::string& v) { c.hidden = parse_int_list(v); },
          [](const ExperimentConfig& c) { return format_int_list(c.hidden); }}},
        {"actor_lr",
         {[](ExperimentConfig& c, const std::string& v) { c.actor_lr = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.actor_lr); }}},
        {"critic_lr",
         {[](ExperimentConfig& c, const std::string& v) { c.critic_lr = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.critic_lr); }}},
        {"gamma",
         {[](ExperimentConfig& c, const std::string& v) { c.gamma = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.gamma); }}},
        {"epsilon",
         {[](ExperimentConfig& c, const std::string& v) { c.epsilon = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.epsilon); }}},
        {"tau",
         {[](ExperimentConfig& c, const std::string& v) { c.tau = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.tau); }}},
        {"batch",
         {[](ExperimentConfig& c, const std::string& v) { c.batch = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.batch); }}},
        {"warmup",
         {[](ExperimentConfig& c, const std::string& v) { c.warmup = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.warmup); }}},
        {"capacity",
         {[](ExperimentConfig& c, const std::string& v) { c.capacity = static_cast<std::size_t>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.capacity); }}},
        {"arms",
         {[](ExperimentConfig& c, const std::string& v) { c.arms = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.arms); }}},
        {"activate",
         {[](ExperimentConfig& c, const std::string& v) { c.activate = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.activate); }}},
        {"bound",
         {[](ExperimentConfig& c, const std::string& v) { c.bound = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.bound); }}},
        {"export_index",
         {[](ExperimentConfig& c, const std::string& v) { c.export_index = parse_long(v) != 0; },
          [](const ExperimentConfig& c) { return std::to_string(c.export_index ? 1 : 0); }}},
        {"save_nets",
         {[](ExperimentConfig& c, const std::string& v) { c.save_nets = parse_long(v) != 0; },
          [](const ExperimentConfig& c) { return std::to_string(c.save_nets ? 1 : 0); }}},
        {"onedim.states",
         {[](ExperimentConfig& c, const std::string& v) { c.onedim_states = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.onedim_states); }}},
        {"onedim.p",
         {[](ExperimentConfig& c, const std::string& v) { c.onedim_p = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.onedim_p); }}},
        {"recovering.zmax",
         {[](ExperimentConfig& c, const std::string& v) { c.recovering_zmax = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.recovering_zmax); }}},
        {"ev.c_max",
         {[](ExperimentConfig& c, const std::string& v) { c.ev.c_max = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.ev.c_max); }}},
        {"ev.d_max",
         {[](ExperimentConfig& c, const std::string& v) { c.ev.d_max = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.ev.d_max); }}},
        {"ev.ou_theta",
         {[](ExperimentConfig& c, const std::string& v) { c.ev.ou_theta = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.ev.ou_theta); }}},
        {"ev.ou_mu",
         {[](ExperimentConfig& c, const std::string& v) { c.ev.ou_mu = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.ev.ou_mu); }}},
        {"ev.ou_sigma",
         {[](ExperimentConfig& c, const std::string& v) { c.ev.ou_sigma = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.ev.ou_sigma); }}},
        {"ev.penalty_coef",
         {[](ExperimentConfig& c, const std::string& v) { c.ev.penalty_coef = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.ev.penalty_coef); }}},
        {"ev.price_levels",
         {[](ExperimentConfig& c, const std::string& v) { c.ev_price_levels = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.ev_price_levels); }}},
        {"inv.capacity",
         {[](ExperimentConfig& c, const std::string& v) { c.inventory.capacity = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.inventory.capacity); }}},
        {"inv.order_size",
         {[](ExperimentConfig& c, const std::string& v) { c.inventory.order_size = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.inventory.order_size); }}},
        {"inv.unit_price",
         {[](ExperimentConfig& c, const std::string& v) { c.inventory.unit_price = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.inventory.unit_price); }}},
        {"inv.holding_cost",
         {[](ExperimentConfig& c, const std::string& v) { c.inventory.holding_cost = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.inventory.holding_cost); }}},
        {"inv.seasons",
         {[](ExperimentConfig& c, const std::string& v) { c.inventory.seasons = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.inventory.seasons); }}},
        {"inv.demand_scale",
         {[](ExperimentConfig& c, const std::string& v) { c.inventory.demand_scale = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.inventory.demand_scale); }}},
        {"mts.servers",
         {[](ExperimentConfig& c, const std::string& v) { c.mts.servers = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.mts.servers); }}},
        {"mts.buffer",
         {[](ExperimentConfig& c, const std::string& v) { c.mts.buffer = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.mts.buffer); }}},
        {"mts.classes",
         {[](ExperimentConfig& c, const std::string& v) { c.mts.classes = static_cast<int>(parse_long(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.mts.classes); }}},
        {"mts.completion_prob",
         {[](ExperimentConfig& c, const std::string& v) { c.mts.completion_prob = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.mts.completion_prob); }}},
        {"mts.r_max",
         {[](ExperimentConfig& c, const std::string& v) { c.mts.r_max = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.mts.r_max); }}},
        {"mts.r_min",
         {[](ExperimentConfig& c, const std::string& v) { c.mts.r_min = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.mts.r_min); }}},
        {"mts.holding_coef",
         {[](ExperimentConfig& c, const std::string& v) { c.mts.holding_coef = parse_double(v); },
          [](const ExperimentConfig& c) { return format_double(c.mts.holding_coef); }}},
    };
    return table;
}

const KeyHandler* find_key(const std::string& key) {
    for (const auto& [name, handler] : key_table())
        if (name == key) return &handler;
    return nullptr;
}

void apply_pair(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const KeyHandler* handler = find_key(key);
    if (!handler) throw std::invalid_argument("unknown config key: " + key);
    try {
        handler->set(cfg, value);
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for config key " + key + ": " + value);
    }
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.env != "ev" && cfg.env != "inventory" && cfg.env != "mts" &&
        cfg.env != "onedim" && cfg.env != "recovering")
        throw std::invalid_argument("unknown environment: " + cfg.env);
    if (cfg.policy != "deeptop" && cfg.policy != "random")
        throw std::invalid_argument("unknown policy: " + cfg.policy);
    if (cfg.timesteps < 1) throw std::invalid_argument("timesteps must be positive");
    if (cfg.runs < 1) throw std::invalid_argument("runs must be positive");
    if (cfg.jobs < 1) throw std::invalid_argument("jobs must be positive");
    if (cfg.batch < 1) throw std::invalid_argument("batch must be positive");
    if (cfg.warmup < cfg.batch)
        throw std::invalid_argument("warmup must be at least the minibatch size");
    if (cfg.capacity < static_cast<std::size_t>(cfg.batch))
        throw std::invalid_argument("capacity must hold at least one minibatch");
    if (cfg.gamma < 0.0 || cfg.gamma >= 1.0) throw std::invalid_argument("gamma outside [0,1)");
    if (cfg.epsilon < 0.0 || cfg.epsilon >= 1.0)
        throw std::invalid_argument("epsilon outside [0,1)");
    if (cfg.tau <= 0.0 || cfg.tau > 1.0) throw std::invalid_argument("tau outside (0,1]");
    if (cfg.is_rmab()) {
        if (cfg.arms < 1) throw std::invalid_argument("arms must be positive");
        if (cfg.activate < 1 || cfg.activate > cfg.arms)
            throw std::invalid_argument("activate must lie in [1, arms]");
    }
    if (cfg.hidden.empty()) throw std::invalid_argument("hidden layer list is empty");
    for (int h : cfg.hidden)
        if (h < 1) throw std::invalid_argument("hidden layer sizes must be positive");
}

ExperimentConfig build(const std::vector<std::pair<std::string, std::string>>& file_pairs,
                       const std::map<std::string, std::string>& cli_overrides) {
    ExperimentConfig cfg;
    bool seed_set = false;
    for (const auto& [key, value] : file_pairs) {
        apply_pair(cfg, key, value);
        if (key == "seed") seed_set = true;
    }
    for (const auto& [key, value] : cli_overrides) {
        apply_pair(cfg, key, value);
        if (key == "seed") seed_set = true;
    }
    if (!seed_set) {
        if (const char* env_seed = std::getenv("DEEPTOP_SEED"))
            apply_pair(cfg, "seed", env_seed);
    }
    validate(cfg);
    return cfg;
}

std::vector<std::pair<std::string, std::string>> pairs_from_lines(
    const std::vector<std::string>& lines) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const std::string& raw : lines) {
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line is not key = value: " + raw);
        pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return pairs;
}

}  // namespace

ExperimentConfig parse_config_lines(const std::vector<std::string>& lines,
                                    ExperimentConfig base) {
    for (const auto& [key, value] : pairs_from_lines(lines)) apply_pair(base, key, value);
    validate(base);
    return base;
}

ExperimentConfig load_config(const std::string& path,
                             const std::map<std::string, std::string>& cli_overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return build(pairs_from_lines(lines), cli_overrides);
}

ExperimentConfig make_config(const std::map<std::string, std::string>& cli_overrides) {
    return build({}, cli_overrides);
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [name, handler] : key_table())
        out += name + " = " + handler.get(cfg) + "\n";
    return out;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write config echo: " + path);
    out << config_to_text(cfg);
}

}  // namespace deeptop
