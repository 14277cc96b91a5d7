#include "qid/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qid::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& v, int line) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": not a number: '" + v + "'");
    }
    if (pos != v.size())
        throw ParseError("line " + std::to_string(line) + ": trailing characters in '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": not an unsigned integer: '" + v + "'");
    }
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("line " + std::to_string(line) + ": not a boolean: '" + v + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    plant::PlantParams check(params.omega12, params.omega23); // throws on bad values
    (void)check;
    gains12.validate();
    gains23.validate();
    sim.validate();
    if (noise_enabled) {
        plant::NoiseSpec ns(noise.output_std, noise.input_std,
                            noise.hold_interval, noise.seed);
        (void)ns;
    }
    if (!std::isfinite(init.omega12_hat0) || !std::isfinite(init.omega23_hat0))
        throw ValidationError("init: observer seeds must be finite");
    qmat::PureState::from_matrix(init.rho0);
    qmat::PureState::from_matrix(init.rho_hat0);
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    bool has_w12hat = false, has_w23hat = false;

    std::map<std::string, std::function<void(const std::string&, int)>> setters;
    auto num = [&](double& target) {
        return [&target](const std::string& v, int line) { target = parse_number(v, line); };
    };
    setters["plant.omega12"] = num(cfg.params.omega12);
    setters["plant.omega23"] = num(cfg.params.omega23);
    setters["gains12.gamma_big"] = num(cfg.gains12.gamma_big);
    setters["gains12.gamma_small"] = num(cfg.gains12.gamma_small);
    setters["gains12.epsilon"] = num(cfg.gains12.epsilon);
    setters["gains23.gamma_big"] = num(cfg.gains23.gamma_big);
    setters["gains23.gamma_small"] = num(cfg.gains23.gamma_small);
    setters["gains23.epsilon"] = num(cfg.gains23.epsilon);
    setters["gains23.eta"] = num(cfg.gains23.eta);
    setters["init.omega12_hat0"] = [&](const std::string& v, int line) {
        cfg.init.omega12_hat0 = parse_number(v, line);
        has_w12hat = true;
    };
    setters["init.omega23_hat0"] = [&](const std::string& v, int line) {
        cfg.init.omega23_hat0 = parse_number(v, line);
        has_w23hat = true;
    };
    setters["init.theta0"] = num(cfg.init.theta0);
    setters["noise.enabled"] = [&](const std::string& v, int line) {
        cfg.noise_enabled = parse_bool(v, line);
    };
    setters["noise.output_std"] = num(cfg.noise.output_std);
    setters["noise.input_std"] = num(cfg.noise.input_std);
    setters["noise.hold_interval"] = num(cfg.noise.hold_interval);
    setters["noise.seed"] = [&](const std::string& v, int line) {
        cfg.noise.seed = parse_u64(v, line);
    };
    setters["sim.dt"] = num(cfg.sim.dt);
    setters["sim.t1_end"] = num(cfg.sim.t1_end);
    setters["sim.t2_end"] = num(cfg.sim.t2_end);
    setters["sim.sample_stride"] = [&](const std::string& v, int line) {
        cfg.sim.sample_stride = static_cast<int>(parse_u64(v, line));
    };
    setters["sim.reproject_stride"] = [&](const std::string& v, int line) {
        cfg.sim.reproject_stride = static_cast<int>(parse_u64(v, line));
    };
    setters["labframe.e1"] = num(cfg.labframe.energies[0]);
    setters["labframe.e2"] = num(cfg.labframe.energies[1]);
    setters["labframe.e3"] = num(cfg.labframe.energies[2]);
    setters["labframe.a_bar12"] = num(cfg.labframe.a_bar12);
    setters["labframe.a_bar23"] = num(cfg.labframe.a_bar23);
    setters["labframe.mu12"] = num(cfg.labframe.mu12);
    setters["labframe.mu23"] = num(cfg.labframe.mu23);
    setters["output.emit_plots"] = [&](const std::string& v, int line) {
        cfg.emit_plots = parse_bool(v, line);
    };
    setters["output.dir"] = [&](const std::string& v, int) { cfg.out_dir = v; };

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end())
            throw ParseError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        it->second(value, line);
    }

    if (!has_w12hat) cfg.init.omega12_hat0 = cfg.params.omega12 / 1.5;
    if (!has_w23hat) cfg.init.omega23_hat0 = 1.5 * cfg.params.omega23;
    cfg.gains23.omega12_known = cfg.params.omega12; // placeholder until handoff

    cfg.validate();
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "plant.omega12 = " << fmt(cfg.params.omega12) << "\n";
    out << "plant.omega23 = " << fmt(cfg.params.omega23) << "\n";
    out << "gains12.gamma_big = " << fmt(cfg.gains12.gamma_big) << "\n";
    out << "gains12.gamma_small = " << fmt(cfg.gains12.gamma_small) << "\n";
    out << "gains12.epsilon = " << fmt(cfg.gains12.epsilon) << "\n";
    out << "gains23.gamma_big = " << fmt(cfg.gains23.gamma_big) << "\n";
    out << "gains23.gamma_small = " << fmt(cfg.gains23.gamma_small) << "\n";
    out << "gains23.epsilon = " << fmt(cfg.gains23.epsilon) << "\n";
    out << "gains23.eta = " << fmt(cfg.gains23.eta) << "\n";
    out << "init.omega12_hat0 = " << fmt(cfg.init.omega12_hat0) << "\n";
    out << "init.omega23_hat0 = " << fmt(cfg.init.omega23_hat0) << "\n";
    out << "init.theta0 = " << fmt(cfg.init.theta0) << "\n";
    out << "noise.enabled = " << (cfg.noise_enabled ? "true" : "false") << "\n";
    out << "noise.output_std = " << fmt(cfg.noise.output_std) << "\n";
    out << "noise.input_std = " << fmt(cfg.noise.input_std) << "\n";
    out << "noise.hold_interval = " << fmt(cfg.noise.hold_interval) << "\n";
    out << "noise.seed = " << cfg.noise.seed << "\n";
    out << "sim.dt = " << fmt(cfg.sim.dt) << "\n";
    out << "sim.t1_end = " << fmt(cfg.sim.t1_end) << "\n";
    out << "sim.t2_end = " << fmt(cfg.sim.t2_end) << "\n";
    out << "sim.sample_stride = " << cfg.sim.sample_stride << "\n";
    out << "sim.reproject_stride = " << cfg.sim.reproject_stride << "\n";
    out << "labframe.e1 = " << fmt(cfg.labframe.energies[0]) << "\n";
    out << "labframe.e2 = " << fmt(cfg.labframe.energies[1]) << "\n";
    out << "labframe.e3 = " << fmt(cfg.labframe.energies[2]) << "\n";
    out << "labframe.a_bar12 = " << fmt(cfg.labframe.a_bar12) << "\n";
    out << "labframe.a_bar23 = " << fmt(cfg.labframe.a_bar23) << "\n";
    out << "labframe.mu12 = " << fmt(cfg.labframe.mu12) << "\n";
    out << "labframe.mu23 = " << fmt(cfg.labframe.mu23) << "\n";
    out << "output.emit_plots = " << (cfg.emit_plots ? "true" : "false") << "\n";
    out << "output.dir = " << cfg.out_dir << "\n";
    return out.str();
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace qid::cli
