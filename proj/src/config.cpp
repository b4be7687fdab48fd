#include "d2l/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace d2l {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_int(const std::string& key, const std::string& v)
{
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError("invalid integer for " + key + ": " + v);
    return out;
}

double parse_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw ConfigError("invalid number for " + key + ": " + v);
        return out;
    } catch (const std::logic_error&) {
        throw ConfigError("invalid number for " + key + ": " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw ConfigError("invalid boolean for " + key + ": " + v);
}

}  // namespace

ExperimentConfig ExperimentConfig::synthetic_defaults()
{
    ExperimentConfig cfg;
    cfg.run.graph.kind = ScheduleKind::static_ring;
    cfg.run.max_rounds = 500;
    cfg.run.metric_stride = 10;
    return cfg;
}

ExperimentConfig ExperimentConfig::denoise_defaults()
{
    ExperimentConfig cfg;
    cfg.synthetic.agents = 10;
    cfg.synthetic.atoms = 64;
    cfg.synthetic.lambda = 1.0 / 8.0;
    cfg.synthetic.mu = 1.0 / 16.0;
    cfg.synthetic.alpha = 1.0;
    cfg.run.sched.tau_d = 300.0;
    cfg.run.graph.kind = ScheduleKind::static_ring;
    cfg.run.max_rounds = 100;
    cfg.run.metric_stride = 10;
    return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value)
{
    auto& sp = synthetic;
    auto& sc = run.sched;
    auto& g = run.graph;
    try {
        if (key == "M") sp.dim = parse_int<Index>(key, value);
        else if (key == "K") sp.atoms = parse_int<Index>(key, value);
        else if (key == "N") sp.samples = parse_int<Index>(key, value);
        else if (key == "agents") sp.agents = parse_int<int>(key, value);
        else if (key == "k0") sp.sparsity = parse_int<Index>(key, value);
        else if (key == "sigma_n") sp.noise = parse_double(key, value);
        else if (key == "data_seed") sp.seed = parse_int<std::uint64_t>(key, value);
        else if (key == "lambda") sp.lambda = parse_double(key, value);
        else if (key == "mu") sp.mu = parse_double(key, value);
        else if (key == "alpha") sp.alpha = parse_double(key, value);
        else if (key == "gamma0") sc.gamma0 = parse_double(key, value);
        else if (key == "eps_gamma") sc.eps_gamma = parse_double(key, value);
        else if (key == "tau_d") sc.tau_d = parse_double(key, value);
        else if (key == "eps_tau") sc.eps_tau = parse_double(key, value);
        else if (key == "variant") sc.variant = parse_variant(value);
        else if (key == "d_mode") sc.d_mode = parse_d_mode(value);
        else if (key == "inner_tol") sc.inner.tol = parse_double(key, value);
        else if (key == "inner_max_iter") sc.inner.max_iter = parse_int<int>(key, value);
        else if (key == "graph") g.kind = parse_schedule_kind(value);
        else if (key == "window") g.window = parse_int<int>(key, value);
        else if (key == "period") g.period = parse_int<int>(key, value);
        else if (key == "graph_seed") g.seed = parse_int<std::uint64_t>(key, value);
        else if (key == "theta_min") g.theta_min = parse_double(key, value);
        else if (key == "rounds") run.max_rounds = parse_int<long>(key, value);
        else if (key == "stop_tol") run.stop_tol = parse_double(key, value);
        else if (key == "metric_stride") run.metric_stride = parse_int<long>(key, value);
        else if (key == "seed") run.seed = parse_int<std::uint64_t>(key, value);
        else if (key == "tracking") run.gradient_tracking = parse_bool(key, value);
        else if (key == "image") denoise.image = value;
        else if (key == "image_size") denoise.image_size = parse_int<int>(key, value);
        else if (key == "patch") denoise.patch = parse_int<int>(key, value);
        else if (key == "stride") denoise.stride = parse_int<int>(key, value);
        else if (key == "noise_psnr") denoise.noise_psnr = parse_double(key, value);
        else if (key == "noise_seed") denoise.noise_seed = parse_int<std::uint64_t>(key, value);
        else if (key == "patch_peak") denoise.patch_peak = parse_double(key, value);
        else if (key == "budgets") {
            budgets.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) budgets.push_back(parse_int<long>(key, trim(item)));
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

void ExperimentConfig::validate() const
{
    try {
        run.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(synthetic.lambda > 0.0 && synthetic.mu > 0.0 && synthetic.alpha > 0.0))
        throw ConfigError("lambda, mu and alpha must be positive");
    if (synthetic.agents < 1) throw ConfigError("agents must be at least 1");
    if (denoise.patch < 1 || denoise.stride < 1 || denoise.image_size < denoise.patch)
        throw ConfigError("invalid patch geometry");
    if (!(denoise.patch_peak > 0.0)) throw ConfigError("patch_peak must be positive");
    if (budgets.empty()) throw ConfigError("at least one message budget is required");
    for (long b : budgets)
        if (b < 0) throw ConfigError("message budgets must be non-negative");
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

}  // namespace d2l
