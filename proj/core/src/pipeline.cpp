#include "msoc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "msoc/cell.hpp"
#include "msoc/csv.hpp"
#include "msoc/density.hpp"
#include "msoc/hjb.hpp"
#include "msoc/homogenize.hpp"
#include "msoc/model.hpp"
#include "msoc/sde.hpp"

namespace msoc {

namespace fs = std::filesystem;

const std::vector<std::string> kAllStages = {
    "density", "homogenize", "cell", "solve-effective", "solve-multiscale", "converge",
    "simulate"};

namespace {

const std::map<std::string, std::vector<std::string>>& stage_deps() {
    static const std::map<std::string, std::vector<std::string>> deps = {
        {"density", {}},
        {"homogenize", {"density"}},
        {"cell", {}},
        {"solve-effective", {"homogenize"}},
        {"solve-multiscale", {}},
        {"converge", {"homogenize"}},
        {"simulate", {"solve-effective"}},
    };
    return deps;
}

std::string format_double_csv(double v) { return format_double(v); }

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PipelineError("cannot open " + path);
    CsvTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        if (t.columns.empty()) {
            while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<double> slow_nodes(double alpha, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const double dx = 2.0 * alpha / (n - 1);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = -alpha + i * dx;
    x.back() = alpha;
    return x;
}

EffectiveTables tables_from_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    EffectiveTables out;
    for (const auto& r : t.rows) {
        out.x_nodes.push_back(r.at(0));
        out.mu_bar.push_back(r.at(1));
        out.a_bar.push_back(r.at(2));
        out.l_bar.push_back(r.at(3));
        out.kappa.push_back(r.at(4));
    }
    if (out.x_nodes.empty()) throw PipelineError("empty effective tables in " + path);
    return out;
}

/// In-memory state threaded through the stages of one pipeline run.
struct PipelineState {
    std::vector<DensityField> densities;
    EffectiveTables tables;
    bool have_tables = false;
    ValueField1D effective;
    bool have_effective = false;
};

}  // namespace

RunManifest run_pipeline(const ScenarioConfig& cfg, const std::vector<std::string>& stages,
                         const std::string& out_dir, bool auto_deps, int threads) {
    cfg.validate();
    fs::create_directories(out_dir);
    const std::uint64_t hash = scenario_hash(cfg);

    // expand to dependency order over kAllStages
    std::vector<std::string> wanted = stages;
    for (const auto& s : wanted)
        if (std::find(kAllStages.begin(), kAllStages.end(), s) == kAllStages.end())
            throw PipelineError("unknown stage: " + s);
    auto scheduled = [&](const std::string& s) {
        return std::find(wanted.begin(), wanted.end(), s) != wanted.end();
    };
    if (auto_deps) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& s : std::vector<std::string>(wanted))
                for (const auto& d : stage_deps().at(s))
                    if (!scheduled(d)) {
                        wanted.push_back(d);
                        changed = true;
                    }
        }
    }

    auto path_of = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    auto [slow, fast] = build_example(cfg);
    const ControlBox box{cfg.u_lo, cfg.u_hi};
    const auto x_nodes = slow_nodes(cfg.alpha, cfg.n_slow);
    const TorusGrid torus(cfg.d_y, cfg.n_torus);

    PipelineState st;
    RunManifest manifest;
    manifest.scenario_hash = hash;
    manifest.tool_version = "msoc 1.0.0";

    // ensure unscheduled dependencies are satisfiable from prior outputs
    for (const auto& s : kAllStages) {
        if (!scheduled(s)) continue;
        for (const auto& d : stage_deps().at(s)) {
            if (scheduled(d)) continue;
            const std::string needed =
                d == "density" ? "density.csv"
                               : (d == "homogenize" ? "effective_tables.csv"
                                                    : "effective_value.csv");
            if (!fs::exists(path_of(needed)))
                throw PipelineError("stage '" + s + "' needs output of '" + d +
                                    "' (missing " + needed + "); run it or pass --auto-deps");
        }
    }

    for (const auto& stage : kAllStages) {
        if (!scheduled(stage)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        StageRecord rec;
        rec.name = stage;
        try {
            if (stage == "density") {
                st.densities = density_sweep(fast, x_nodes, torus, cfg.tol_density);
                CsvWriter csv(path_of("density.csv"), {"x", "y1", "y2", "rho"}, hash);
                for (std::size_t i = 0; i < st.densities.size(); ++i)
                    for (long t = 0; t < torus.size(); ++t) {
                        const VectorXd y = torus.coordinate(t);
                        csv.row({x_nodes[i], y[0], y[1], st.densities[i].values[t]});
                    }
                rec.outputs = {path_of("density.csv")};
            } else if (stage == "homogenize") {
                if (st.densities.empty()) {
                    // dependency satisfied by a prior run on disk; recompute the
                    // densities (the CSV stores values, not solver state)
                    st.densities = density_sweep(fast, x_nodes, torus, cfg.tol_density);
                }
                st.tables = effective_tables(slow, st.densities, x_nodes);
                st.have_tables = true;
                CsvWriter csv(path_of("effective_tables.csv"),
                              {"x", "mu_bar", "a_bar", "l_bar", "kappa"}, hash);
                for (std::size_t i = 0; i < st.tables.size(); ++i)
                    csv.row({st.tables.x_nodes[i], st.tables.mu_bar[i], st.tables.a_bar[i],
                             st.tables.l_bar[i], st.tables.kappa[i]});
                rec.inputs = {path_of("density.csv")};
                rec.outputs = {path_of("effective_tables.csv")};
            } else if (stage == "cell") {
                const HamiltonianPoint p{0.5, 0.5, 0.0};
                const auto est =
                    effective_hamiltonian_longtime(p, fast, slow, box, torus, 40.0, 0.05);
                CsvWriter csv(path_of("cell.csv"), {"t", "mean_w_over_t", "spread"}, hash);
                for (std::size_t i = 0; i < est.times.size(); ++i)
                    csv.row({est.times[i], est.mean_w_over_t[i], est.spread_over_t[i]});
                rec.outputs = {path_of("cell.csv")};
            } else if (stage == "solve-effective") {
                if (!st.have_tables) {
                    st.tables = tables_from_csv(path_of("effective_tables.csv"));
                    st.have_tables = true;
                }
                st.effective = solve_effective_hjb(st.tables, slow, box, cfg.beta, cfg.theta_e,
                                                   cfg.n_slow, cfg.tol_policy);
                st.have_effective = true;
                CsvWriter csv(path_of("effective_value.csv"), {"x", "v", "u"}, hash);
                for (std::size_t i = 0; i < st.effective.v.size(); ++i)
                    csv.row({st.effective.x_nodes[i], st.effective.v[i],
                             st.effective.policy.u[i]});
                rec.inputs = {path_of("effective_tables.csv")};
                rec.outputs = {path_of("effective_value.csv")};
            } else if (stage == "solve-multiscale") {
                double eps = cfg.epsilon_list.empty()
                                 ? 0.2
                                 : *std::max_element(cfg.epsilon_list.begin(),
                                                     cfg.epsilon_list.end());
                const ValueField3D vf = solve_multiscale_hjb(
                    slow, fast, box, eps, cfg.beta, cfg.theta_e, cfg.n_slow, torus,
                    cfg.tol_policy);
                CsvWriter csv(path_of("multiscale_value.csv"), {"x", "y1", "y2", "v", "u"},
                              hash);
                for (int i = 0; i < cfg.n_slow; ++i)
                    for (long t = 0; t < torus.size(); ++t) {
                        const VectorXd y = torus.coordinate(t);
                        const std::size_t idx = static_cast<std::size_t>(i) *
                                                    static_cast<std::size_t>(torus.size()) +
                                                static_cast<std::size_t>(t);
                        csv.row({x_nodes[i], y[0], y[1], vf.v[idx], vf.policy.u[idx]});
                    }
                rec.outputs = {path_of("multiscale_value.csv")};
            } else if (stage == "converge") {
                if (!st.have_tables) {
                    st.tables = tables_from_csv(path_of("effective_tables.csv"));
                    st.have_tables = true;
                }
                const ConvergenceStudy study = convergence_study(cfg);
                // wall-clock per epsilon goes to the manifest, not the CSV, so
                // identical re-runs stay byte-identical
                CsvWriter csv(path_of("converge.csv"), {"epsilon", "err_inf", "err_sup"}, hash);
                for (const auto& r : study.rows) csv.row({r.epsilon, r.err_inf, r.err_sup});
                rec.inputs = {path_of("effective_tables.csv")};
                rec.outputs = {path_of("converge.csv")};
            } else if (stage == "simulate") {
                if (!st.have_effective) {
                    st.tables = tables_from_csv(path_of("effective_tables.csv"));
                    st.have_tables = true;
                    st.effective = solve_effective_hjb(st.tables, slow, box, cfg.beta,
                                                       cfg.theta_e, cfg.n_slow, cfg.tol_policy);
                    st.have_effective = true;
                }
                const ControlLaw1D law = policy_interpolant(st.effective);
                CsvWriter csv(path_of("mc_values.csv"),
                              {"x0", "mc_mean", "mc_stderr", "pde_value"}, hash);
                const double T = cfg.mc_horizon;
                for (double x0 : {-0.5 * cfg.alpha, 0.0, 0.5 * cfg.alpha}) {
                    const PathEstimate est =
                        simulate_effective_cost(st.tables, slow, law, x0, cfg.beta, T, cfg.mc_dt,
                                                cfg.mc_paths, cfg.seed, threads);
                    // interpolate the PDE value at x0
                    double pde = 0.0;
                    {
                        const auto& xs = st.effective.x_nodes;
                        const double dx = xs[1] - xs[0];
                        std::size_t i = static_cast<std::size_t>((x0 - xs.front()) / dx);
                        i = std::min(i, xs.size() - 2);
                        const double w = (x0 - xs[i]) / dx;
                        pde = (1.0 - w) * st.effective.v[i] + w * st.effective.v[i + 1];
                    }
                    csv.row({x0, est.mean, est.stderr_, pde});
                }
                rec.inputs = {path_of("effective_value.csv")};
                rec.outputs = {path_of("mc_values.csv")};
            }
        } catch (const std::exception& e) {
            throw PipelineError("stage '" + stage + "' failed: " + e.what());
        }
        const auto t1 = std::chrono::steady_clock::now();
        rec.wall_clock_s = std::chrono::duration<double>(t1 - t0).count();
        manifest.stages.push_back(std::move(rec));
    }

    write_manifest(manifest, path_of("manifest.json"));
    return manifest;
}

std::string emit_report(const RunManifest& manifest, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto path_of = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };
    std::ostringstream summary;
    summary << "run summary (scenario hash " << manifest.scenario_hash << ")\n";
    std::vector<std::string> data_files;

    auto has_stage = [&](const std::string& s) {
        return std::any_of(manifest.stages.begin(), manifest.stages.end(),
                           [&](const StageRecord& r) { return r.name == s; });
    };
    auto write_dat = [&](const std::string& name, const CsvTable& t,
                         const std::vector<std::size_t>& cols) {
        std::ofstream out(path_of(name));
        out << "#";
        for (std::size_t c : cols) out << " " << t.columns[c];
        out << "\n";
        for (const auto& r : t.rows) {
            for (std::size_t k = 0; k < cols.size(); ++k)
                out << (k ? " " : "") << format_double_csv(r[cols[k]]);
            out << "\n";
        }
        data_files.push_back(name);
    };

    if (has_stage("density") && fs::exists(path_of("density.csv"))) {
        CsvTable t = read_csv(path_of("density.csv"));
        // heat-map slice at the middle slow node
        CsvTable mid;
        mid.columns = {"y1", "y2", "rho"};
        if (!t.rows.empty()) {
            double mid_x = t.rows[t.rows.size() / 2][0];
            for (const auto& r : t.rows)
                if (r[0] == mid_x) mid.rows.push_back({r[1], r[2], r[3]});
        }
        write_dat("density_heatmap.dat", mid, {0, 1, 2});
    }
    if (has_stage("homogenize") && fs::exists(path_of("effective_tables.csv"))) {
        CsvTable t = read_csv(path_of("effective_tables.csv"));
        write_dat("kappa_vs_x.dat", t, {0, 4});
    }
    if (has_stage("cell") && fs::exists(path_of("cell.csv"))) {
        CsvTable t = read_csv(path_of("cell.csv"));
        write_dat("cell_growth.dat", t, {0, 1, 2});
        if (!t.rows.empty())
            summary << "cell long-time estimate " << t.rows.back()[1] << " (spread "
                    << t.rows.back()[2] << ")\n";
    }
    if (has_stage("solve-effective") && fs::exists(path_of("effective_value.csv"))) {
        CsvTable t = read_csv(path_of("effective_value.csv"));
        write_dat("effective_value_vs_x.dat", t, {0, 1});
    }
    if (has_stage("converge") && fs::exists(path_of("converge.csv"))) {
        CsvTable t = read_csv(path_of("converge.csv"));
        write_dat("err_vs_eps.dat", t, {0, 1, 2});
        for (const auto& r : t.rows)
            summary << "epsilon " << r[0] << ": err_inf " << r[1] << ", err_sup " << r[2]
                    << "\n";
    }
    if (has_stage("simulate") && fs::exists(path_of("mc_values.csv"))) {
        CsvTable t = read_csv(path_of("mc_values.csv"));
        write_dat("mc_agreement.dat", t, {0, 1, 2, 3});
        for (const auto& r : t.rows)
            summary << "x0 " << r[0] << ": mc " << r[1] << " +- " << r[2] << ", pde " << r[3]
                    << "\n";
    }

    for (const auto& s : manifest.stages)
        summary << "stage " << s.name << ": " << s.wall_clock_s << " s\n";
    summary << "data files:";
    for (const auto& f : data_files) summary << " " << f;
    summary << "\n";

    std::ofstream out(path_of("summary.txt"));
    out << summary.str();
    return summary.str();
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["scenario_hash"] = manifest.scenario_hash;
    j["tool_version"] = manifest.tool_version;
    j["stages"] = nlohmann::json::array();
    for (const auto& s : manifest.stages) {
        nlohmann::json js;
        js["name"] = s.name;
        js["inputs"] = s.inputs;
        js["outputs"] = s.outputs;
        js["wall_clock_s"] = s.wall_clock_s;
        j["stages"].push_back(js);
    }
    std::ofstream out(path);
    if (!out) throw PipelineError("cannot write " + path);
    out << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PipelineError("cannot read " + path);
    nlohmann::json j;
    in >> j;
    RunManifest m;
    m.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& js : j.at("stages")) {
        StageRecord s;
        s.name = js.at("name").get<std::string>();
        s.inputs = js.at("inputs").get<std::vector<std::string>>();
        s.outputs = js.at("outputs").get<std::vector<std::string>>();
        s.wall_clock_s = js.at("wall_clock_s").get<double>();
        m.stages.push_back(std::move(s));
    }
    return m;
}

}  // namespace msoc
