#include "msoc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace msoc {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& v, int line) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ScenarioError("line " + std::to_string(line) + ": not a number: '" + v + "'");
    }
    if (pos != v.size())
        throw ScenarioError("line " + std::to_string(line) + ": trailing junk in number '" + v + "'");
    return x;
}

long parse_int(const std::string& v, int line) {
    double x = parse_real(v, line);
    if (x != std::floor(x))
        throw ScenarioError("line " + std::to_string(line) + ": expected integer, got '" + v + "'");
    return static_cast<long>(x);
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_real(item, line));
    }
    return out;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (example_id != 1 && example_id != 2) throw ScenarioError("example_id must be 1 or 2");
    if (!(alpha > 0)) throw ScenarioError("alpha must be positive");
    if (!(beta > 0)) throw ScenarioError("beta must be positive");
    if (!(sigma_x > 0)) throw ScenarioError("sigma_x must be positive");
    if (!(sigma_y > 0)) throw ScenarioError("sigma_y must be positive");
    if (u_lo > u_hi) throw ScenarioError("empty control box: u_lo > u_hi");
    if (example_id == 2 && u_lo < 0)
        throw ScenarioError("negative control with sqrt(u) diffusion: example 2 needs u_lo >= 0");
    for (double e : epsilon_list)
        if (!(e > 0 && e < 1)) throw ScenarioError("epsilon_list entries must lie in (0,1)");
    for (std::size_t i = 1; i < epsilon_list.size(); ++i)
        if (!(epsilon_list[i] < epsilon_list[i - 1]))
            throw ScenarioError("epsilon_list must be strictly decreasing");
    if (n_slow < 3) throw ScenarioError("n_slow must be >= 3");
    if (n_torus < 4) throw ScenarioError("n_torus must be >= 4");
    if (d_y < 1) throw ScenarioError("d_y must be >= 1");
    if (mc_paths < 1) throw ScenarioError("mc_paths must be >= 1");
    if (!(mc_dt > 0)) throw ScenarioError("mc_dt must be positive");
    if (!(mc_horizon > 0)) throw ScenarioError("mc_horizon must be positive");
    if (!(tol_pde > 0)) throw ScenarioError("tol_pde must be positive");
    if (!(tol_policy > 0)) throw ScenarioError("tol_policy must be positive");
    if (!(tol_density > 0)) throw ScenarioError("tol_density must be positive");
}

ScenarioConfig load_scenario(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ScenarioError("line " + std::to_string(line) + ": malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "model" && section != "grids" && section != "mc" &&
                section != "tolerances")
                throw ScenarioError("line " + std::to_string(line) + ": unknown section [" +
                                    section + "]");
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ScenarioError("line " + std::to_string(line) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ScenarioError("line " + std::to_string(line) + ": empty key or value");

        auto unknown = [&]() -> ScenarioError {
            return ScenarioError("line " + std::to_string(line) + ": unknown key '" + key +
                                 "' in section [" + section + "]");
        };
        if (section == "model") {
            if (key == "example_id") cfg.example_id = static_cast<int>(parse_int(val, line));
            else if (key == "theta_a") cfg.theta_a = parse_real(val, line);
            else if (key == "theta_b") cfg.theta_b = parse_real(val, line);
            else if (key == "theta_c") cfg.theta_c = parse_real(val, line);
            else if (key == "theta_d") cfg.theta_d = parse_real(val, line);
            else if (key == "theta_e") cfg.theta_e = parse_real(val, line);
            else if (key == "sigma_x") cfg.sigma_x = parse_real(val, line);
            else if (key == "sigma_y") cfg.sigma_y = parse_real(val, line);
            else if (key == "alpha") cfg.alpha = parse_real(val, line);
            else if (key == "beta") cfg.beta = parse_real(val, line);
            else if (key == "u_lo") cfg.u_lo = parse_real(val, line);
            else if (key == "u_hi") cfg.u_hi = parse_real(val, line);
            else if (key == "epsilon_list") cfg.epsilon_list = parse_list(val, line);
            else if (key == "fast_diffusion_structure") {
                if (val == "diagonal") cfg.fast_diffusion_structure = FastDiffusionStructure::diagonal;
                else if (val == "rank_one") cfg.fast_diffusion_structure = FastDiffusionStructure::rank_one;
                else throw ScenarioError("line " + std::to_string(line) +
                                         ": fast_diffusion_structure must be diagonal or rank_one");
            } else throw unknown();
        } else if (section == "grids") {
            if (key == "n_slow") cfg.n_slow = static_cast<int>(parse_int(val, line));
            else if (key == "n_torus") cfg.n_torus = static_cast<int>(parse_int(val, line));
            else if (key == "d_y") cfg.d_y = static_cast<int>(parse_int(val, line));
            else throw unknown();
        } else if (section == "mc") {
            if (key == "mc_paths") cfg.mc_paths = parse_int(val, line);
            else if (key == "mc_dt") cfg.mc_dt = parse_real(val, line);
            else if (key == "mc_horizon") cfg.mc_horizon = parse_real(val, line);
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, line));
            else throw unknown();
        } else if (section == "tolerances") {
            if (key == "tol_pde") cfg.tol_pde = parse_real(val, line);
            else if (key == "tol_policy") cfg.tol_policy = parse_real(val, line);
            else if (key == "tol_density") cfg.tol_density = parse_real(val, line);
            else throw unknown();
        } else {
            throw ScenarioError("line " + std::to_string(line) + ": key '" + key +
                                "' outside any section");
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

std::string scenario_canonical_text(const ScenarioConfig& cfg) {
    std::ostringstream o;
    o.precision(17);
    o << "[model]\n"
      << "example_id=" << cfg.example_id << "\n"
      << "theta_a=" << cfg.theta_a << "\ntheta_b=" << cfg.theta_b << "\ntheta_c=" << cfg.theta_c
      << "\ntheta_d=" << cfg.theta_d << "\ntheta_e=" << cfg.theta_e << "\n"
      << "sigma_x=" << cfg.sigma_x << "\nsigma_y=" << cfg.sigma_y << "\n"
      << "alpha=" << cfg.alpha << "\nbeta=" << cfg.beta << "\n"
      << "u_lo=" << cfg.u_lo << "\nu_hi=" << cfg.u_hi << "\n";
    o << "epsilon_list=";
    for (std::size_t i = 0; i < cfg.epsilon_list.size(); ++i)
        o << (i ? "," : "") << cfg.epsilon_list[i];
    o << "\nfast_diffusion_structure="
      << (cfg.fast_diffusion_structure == FastDiffusionStructure::diagonal ? "diagonal" : "rank_one")
      << "\n";
    o << "[grids]\n";
    o << "n_slow=" << cfg.n_slow << "\nn_torus=" << cfg.n_torus << "\nd_y=" << cfg.d_y << "\n";
    o << "[mc]\n";
    o << "mc_paths=" << cfg.mc_paths << "\nmc_dt=" << cfg.mc_dt << "\nmc_horizon=" << cfg.mc_horizon
      << "\nseed=" << cfg.seed << "\n";
    o << "[tolerances]\n";
    o << "tol_pde=" << cfg.tol_pde << "\ntol_policy=" << cfg.tol_policy
      << "\ntol_density=" << cfg.tol_density << "\n";
    return o.str();
}

std::uint64_t scenario_hash(const ScenarioConfig& cfg) {
    std::string text = scenario_canonical_text(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace msoc
