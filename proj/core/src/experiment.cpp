#include "fracorbit/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "fracorbit/csv.hpp"
#include "fracorbit/errors.hpp"
#include "fracorbit/forward.hpp"
#include "fracorbit/fracops.hpp"
#include "fracorbit/inverse.hpp"
#include "fracorbit/verification.hpp"

namespace fracorbit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json& require_key(const json& j, const std::string& key, const std::string& scope) {
    auto it = j.find(key);
    if (it == j.end()) throw config_error("missing config key: " + scope + key);
    return *it;
}

template <typename T>
T as(const json& j, const std::string& name) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw config_error("bad value for config key: " + name);
    }
}

Point as_point(const json& j, const std::string& name) {
    auto v = as<std::vector<double>>(j, name);
    if (v.empty() || v.size() > kMaxDim) throw config_error("bad vector length for key: " + name);
    Point p{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i];
    return p;
}

struct ParsedConfig {
    std::string kind;
    std::vector<double> alphas;  // one entry except for stability
    SourceProfile profile{1.0, 1.0, 1};
    DomainSpec domain = DomainSpec::interval(2.0);
    Orbit orbit = Orbit::zero(1, 1.0, 1.0);
    std::vector<Point> obs_points;
    double obs_epsilon = 0.0;
    bool auto_select = false;
    TimeGrid grid{1.0, 2};
    int forward_grid_ratio = 4;
    double noise_level = 0.0;
    unsigned noise_seed = 1234;
    SolverOptions solver;
    int data_quad_points = 48;
    ReconstructionConfig recon;
    bool global_scheme = false;
    int stability_pairs = 10;
    double stability_eps = 0.05;
    unsigned stability_seed = 7;
    fs::path output_dir;
    json resolved;  // defaults filled, written back out
};

double check_alpha(double a) {
    if (!(a >= 0.1 && a <= 2.0)) throw config_error("alpha out of range (0.1, 2]");
    return a;
}

ParsedConfig parse_config(const json& j) {
    ParsedConfig cfg;
    json out;

    cfg.kind = as<std::string>(require_key(j, "kind", ""), "kind");
    if (cfg.kind != "simulate" && cfg.kind != "reconstruct" && cfg.kind != "stability" &&
        cfg.kind != "verify")
        throw config_error("unknown experiment kind: " + cfg.kind);
    out["kind"] = cfg.kind;

    cfg.output_dir = j.contains("output_dir") ? fs::path(as<std::string>(j["output_dir"], "output_dir"))
                                              : fs::path("out");
    out["output_dir"] = cfg.output_dir.string();

    if (cfg.kind == "verify") {
        cfg.resolved = out;
        return cfg;  // verify needs nothing else
    }

    // alpha (scalar, or list under stability.alphas)
    if (cfg.kind == "stability") {
        json st = j.value("stability", json::object());
        auto alphas = st.contains("alphas")
                          ? as<std::vector<double>>(st["alphas"], "stability.alphas")
                          : std::vector<double>{0.3, 0.7, 1.0, 1.3, 1.7, 2.0};
        for (double a : alphas) check_alpha(a);
        cfg.alphas = alphas;
        cfg.stability_pairs = st.value("n_pairs", 10);
        cfg.stability_eps = st.value("epsilon", 0.05);
        cfg.stability_seed = st.value("seed", 7u);
        out["stability"] = {{"alphas", cfg.alphas},
                            {"n_pairs", cfg.stability_pairs},
                            {"epsilon", cfg.stability_eps},
                            {"seed", cfg.stability_seed}};
    } else {
        cfg.alphas = {check_alpha(as<double>(require_key(j, "alpha", ""), "alpha"))};
        out["alpha"] = cfg.alphas[0];
    }

    // profile
    {
        const json& p = require_key(j, "profile", "");
        double delta = as<double>(require_key(p, "delta", "profile."), "profile.delta");
        double amp = p.value("amplitude", 1.0);
        int dim = p.value("dim", 1);
        cfg.profile = SourceProfile(delta, amp, dim);
        out["profile"] = {{"delta", delta}, {"amplitude", amp}, {"dim", dim}};
    }

    // grid
    {
        const json& gj = require_key(j, "grid", "");
        double t_end = as<double>(require_key(gj, "t_end", "grid."), "grid.t_end");
        int n = as<int>(require_key(gj, "n_steps", "grid."), "grid.n_steps");
        cfg.grid = TimeGrid(t_end, n);
        out["grid"] = {{"t_end", t_end}, {"n_steps", n}};
    }

    // domain
    {
        const json& dj = require_key(j, "domain", "");
        std::string type = as<std::string>(require_key(dj, "type", "domain."), "domain.type");
        if (type == "box") {
            Point lengths = as_point(require_key(dj, "lengths", "domain."), "domain.lengths");
            int cap = dj.value("mode_cap", 4096);
            cfg.domain = DomainSpec::box(cfg.profile.dim, lengths, cap);
            out["domain"] = {{"type", "box"},
                             {"lengths", std::vector<double>(lengths.begin(),
                                                             lengths.begin() + cfg.profile.dim)},
                             {"mode_cap", cap}};
        } else if (type == "free") {
            double xi_max = as<double>(require_key(dj, "xi_max", "domain."), "domain.xi_max");
            int n_freq = as<int>(require_key(dj, "n_freq", "domain."), "domain.n_freq");
            cfg.domain = DomainSpec::free_space(cfg.profile.dim, xi_max, n_freq);
            if (dj.contains("drift")) cfg.domain.drift = as_point(dj["drift"], "domain.drift");
            cfg.domain.reaction = dj.value("reaction", 0.0);
            if (dj.contains("diffusion")) {
                auto rows = as<std::vector<std::vector<double>>>(dj["diffusion"], "domain.diffusion");
                for (std::size_t r = 0; r < rows.size() && r < kMaxDim; ++r)
                    for (std::size_t c = 0; c < rows[r].size() && c < kMaxDim; ++c)
                        cfg.domain.diffusion[r][c] = rows[r][c];
            }
            out["domain"] = {{"type", "free"},
                             {"xi_max", xi_max},
                             {"n_freq", n_freq},
                             {"reaction", cfg.domain.reaction}};
        } else {
            throw config_error("domain.type must be 'box' or 'free'");
        }
    }

    // orbit
    {
        const json& oj = require_key(j, "orbit", "");
        std::string type = as<std::string>(require_key(oj, "type", "orbit."), "orbit.type");
        double K = oj.value("velocity_bound", 1.0);
        int d = cfg.profile.dim;
        double T = cfg.grid.t_end;
        json oout = {{"type", type}, {"velocity_bound", K}};
        if (type == "zero") {
            cfg.orbit = Orbit::zero(d, T, K);
        } else if (type == "linear") {
            Point v = as_point(require_key(oj, "velocity", "orbit."), "orbit.velocity");
            cfg.orbit = Orbit::linear(d, T, K, v);
            oout["velocity"] = std::vector<double>(v.begin(), v.begin() + d);
        } else if (type == "sine") {
            Point amp = as_point(require_key(oj, "amplitude", "orbit."), "orbit.amplitude");
            double f = as<double>(require_key(oj, "frequency", "orbit."), "orbit.frequency");
            cfg.orbit = Orbit::sine(d, T, K, amp, f);
            oout["amplitude"] = std::vector<double>(amp.begin(), amp.begin() + d);
            oout["frequency"] = f;
        } else if (type == "circle") {
            double r = as<double>(require_key(oj, "radius", "orbit."), "orbit.radius");
            double w = as<double>(require_key(oj, "omega", "orbit."), "orbit.omega");
            cfg.orbit = Orbit::circle(d, T, K, r, w);
            oout["radius"] = r;
            oout["omega"] = w;
        } else if (type == "samples") {
            std::string path = as<std::string>(require_key(oj, "path", "orbit."), "orbit.path");
            CsvTable t = read_csv(path);
            if (t.header.size() < static_cast<std::size_t>(d + 1))
                throw config_error("orbit.path: sample file needs t plus d component columns");
            int rows = t.n_rows();
            TimeGrid og(t.columns[0].back(), rows - 1);
            std::vector<SampledFunction> comps;
            for (int a = 0; a < d; ++a) comps.emplace_back(og, t.columns[a + 1]);
            cfg.orbit = Orbit::sampled(K, std::move(comps));
            oout["path"] = path;
        } else {
            throw config_error("orbit.type must be zero|linear|sine|circle|samples");
        }
        out["orbit"] = oout;
    }

    // observation
    {
        const json& ob = require_key(j, "observation", "");
        cfg.auto_select = ob.value("auto_select", false);
        if (cfg.auto_select) {
            auto sel = select_observation_points(cfg.profile, cfg.orbit.velocity_bound(),
                                                 cfg.grid.t_end, cfg.profile.dim > 1);
            cfg.obs_points = sel.points;
            cfg.obs_epsilon = ob.value("epsilon", sel.eps);
        } else {
            const json& pts = require_key(ob, "points", "observation.");
            for (const auto& pj : pts) cfg.obs_points.push_back(as_point(pj, "observation.points"));
            cfg.obs_epsilon = ob.value("epsilon", cfg.profile.delta / 9.0);
        }
        json pts = json::array();
        for (const auto& p : cfg.obs_points)
            pts.push_back(std::vector<double>(p.begin(), p.begin() + cfg.profile.dim));
        out["observation"] = {{"auto_select", cfg.auto_select},
                              {"points", pts},
                              {"epsilon", cfg.obs_epsilon}};
    }

    // noise
    {
        json nj = j.value("noise", json::object());
        cfg.noise_level = nj.value("level", 0.0);
        cfg.noise_seed = nj.value("seed", 1234u);
        out["noise"] = {{"level", cfg.noise_level}, {"seed", cfg.noise_seed}};
    }

    // solver
    {
        json sj = j.value("solver", json::object());
        cfg.solver.quad_points = sj.value("quad_points", 32);
        cfg.data_quad_points = sj.value("data_quad_points", 48);
        cfg.solver.n_threads = sj.value("threads", 1);
        cfg.solver.ml_tol = sj.value("ml_tol", 1e-10);
        out["solver"] = {{"quad_points", cfg.solver.quad_points},
                         {"data_quad_points", cfg.data_quad_points},
                         {"threads", cfg.solver.n_threads},
                         {"ml_tol", cfg.solver.ml_tol}};
    }

    // reconstruction settings
    {
        json rj = j.value("reconstruction", json::object());
        cfg.recon.newton_tol = rj.value("newton_tol", 1e-10);
        cfg.recon.newton_max_iter = rj.value("newton_max_iter", 50);
        cfg.recon.mollifier_half_width = rj.value("mollifier_half_width", 0);
        cfg.recon.quad_points = cfg.solver.quad_points;
        cfg.recon.corrector_sweeps = rj.value("corrector_sweeps", 1);
        cfg.recon.ml_tol = cfg.solver.ml_tol;
        cfg.global_scheme = rj.value("global", false);
        cfg.forward_grid_ratio = j.value("forward_grid_ratio", 4);
        if (rj.value("observability_precheck", true) && cfg.kind == "reconstruct" &&
            !cfg.global_scheme)
            cfg.recon.observability_eps = cfg.obs_epsilon;
        out["reconstruction"] = {{"newton_tol", cfg.recon.newton_tol},
                                 {"newton_max_iter", cfg.recon.newton_max_iter},
                                 {"mollifier_half_width", cfg.recon.mollifier_half_width},
                                 {"corrector_sweeps", cfg.recon.corrector_sweeps},
                                 {"global", cfg.global_scheme},
                                 {"observability_precheck",
                                  cfg.recon.observability_eps.has_value()}};
        out["forward_grid_ratio"] = cfg.forward_grid_ratio;
    }

    cfg.resolved = out;
    return cfg;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
}

// --- kind runners ------------------------------------------------------------

std::vector<fs::path> run_simulate(const ParsedConfig& cfg) {
    FracOrder alpha(cfg.alphas[0]);
    ObservationSet obs{cfg.obs_points, cfg.grid};
    SolverOptions opts = cfg.solver;
    auto sol = solve_moving_source(cfg.profile, cfg.orbit, alpha, cfg.domain, obs, opts);
    TraceSet traces = observe_and_perturb(sol.traces, cfg.noise_level, cfg.noise_seed);

    std::vector<fs::path> written;
    CsvTable tt;
    tt.header.push_back("t");
    tt.columns.emplace_back();
    for (int m = 0; m <= cfg.grid.n_steps; ++m) tt.columns[0].push_back(cfg.grid.node(m));
    for (std::size_t p = 0; p < traces.points.size(); ++p) {
        tt.header.push_back("u_" + std::to_string(p + 1));
        tt.columns.push_back(traces.traces[p].values);
    }
    fs::path tp = cfg.output_dir / "traces.csv";
    write_csv(tp, tt);
    written.push_back(tp);

    if (cfg.profile.dim == 1) {
        CsvTable ft;
        ft.header = {"x", "u"};
        ft.columns.resize(2);
        double span = cfg.domain.bounded() ? cfg.domain.lengths[0]
                                           : 2.0 * cfg.profile.delta + 2.0 * cfg.grid.t_end + 2.0;
        int nx = 201;
        for (int i = 0; i < nx; ++i) {
            double x = -0.5 * span + span * i / (nx - 1.0);
            ft.columns[0].push_back(x);
            ft.columns[1].push_back(sol.value(point1(x), cfg.grid.n_steps));
        }
        fs::path fp = cfg.output_dir / "field_snapshot.csv";
        write_csv(fp, ft);
        written.push_back(fp);
    }

    json meta;
    meta["alpha"] = cfg.alphas[0];
    meta["noise"] = {{"level", cfg.noise_level}, {"seed", cfg.noise_seed}};
    meta["orbit"] = cfg.orbit.describe();
    if (std::holds_alternative<BoundedFieldHistory>(sol.field)) {
        const auto& f = std::get<BoundedFieldHistory>(sol.field);
        meta["n_modes"] = f.basis().size();
        meta["tail_coefficient"] = f.tail_coefficient();
    } else {
        meta["n_freq_nodes"] = static_cast<int>(std::get<FreeFieldHistory>(sol.field).freq().size());
    }
    fs::path mp = cfg.output_dir / "metadata.json";
    write_json(mp, meta);
    written.push_back(mp);
    return written;
}

TraceSet synthesize_data(const ParsedConfig& cfg, const FracOrder& alpha) {
    // inverse-crime control: finer grid and a different quadrature order
    TimeGrid fine(cfg.grid.t_end, cfg.grid.n_steps * cfg.forward_grid_ratio);
    ObservationSet obs{cfg.obs_points, fine};
    SolverOptions fwd = cfg.solver;
    fwd.quad_points = cfg.data_quad_points;
    auto sol = solve_moving_source(cfg.profile, cfg.orbit, alpha, cfg.domain, obs, fwd);
    TraceSet coarse = downsample(sol.traces, cfg.forward_grid_ratio);
    return observe_and_perturb(coarse, cfg.noise_level, cfg.noise_seed);
}

std::vector<fs::path> run_reconstruct(const ParsedConfig& cfg) {
    FracOrder alpha(cfg.alphas[0]);
    TraceSet data = synthesize_data(cfg, alpha);

    ReconstructionResult rec =
        cfg.global_scheme
            ? reconstruct_orbit_global(data, cfg.profile, alpha, cfg.domain,
                                       cfg.orbit.velocity_bound(), cfg.obs_epsilon, cfg.recon)
            : reconstruct_orbit_local(data, cfg.profile, alpha, cfg.domain, cfg.recon);

    const int d = cfg.profile.dim;
    CsvTable rt;
    rt.header.push_back("t");
    for (int a = 0; a < d; ++a) rt.header.push_back("gamma_true_" + std::to_string(a + 1));
    for (int a = 0; a < d; ++a) rt.header.push_back("gamma_rec_" + std::to_string(a + 1));
    rt.header.push_back("newton_residual");
    rt.header.push_back("jacobian_cond");
    rt.columns.resize(rt.header.size());
    double max_err = 0.0;
    for (int m = 0; m <= cfg.grid.n_steps; ++m) {
        double t = cfg.grid.node(m);
        Point truth = cfg.orbit.position(t);
        std::size_t c = 0;
        rt.columns[c++].push_back(t);
        for (int a = 0; a < d; ++a) rt.columns[c++].push_back(truth[a]);
        for (int a = 0; a < d; ++a) rt.columns[c++].push_back(rec.gamma[m][a]);
        rt.columns[c++].push_back(rec.diagnostics[m].newton_residual);
        rt.columns[c++].push_back(rec.diagnostics[m].jacobian_cond);
        max_err = std::max(max_err, norm(sub(truth, rec.gamma[m])));
    }
    std::vector<fs::path> written;
    fs::path rp = cfg.output_dir / "reconstruction.csv";
    write_csv(rp, rt);
    written.push_back(rp);

    json diag;
    diag["max_orbit_error"] = max_err;
    diag["t_covered"] = rec.t_covered;
    diag["noise"] = {{"level", cfg.noise_level}, {"seed", cfg.noise_seed}};
    diag["mollifier_half_width"] = cfg.recon.mollifier_half_width;
    json intervals = json::array();
    for (const auto& iv : rec.intervals) {
        json ij = {{"index", iv.index},
                   {"t_begin", iv.t_begin},
                   {"t_end", iv.t_end},
                   {"point_ids", iv.point_ids},
                   {"observability_bound", iv.observability_bound}};
        intervals.push_back(ij);
    }
    diag["intervals"] = intervals;
    fs::path dp = cfg.output_dir / "diagnostics.json";
    write_json(dp, diag);
    written.push_back(dp);
    return written;
}

std::vector<fs::path> run_stability(const ParsedConfig& cfg) {
    auto pairs = random_localized_orbit_pairs(cfg.stability_pairs, cfg.profile.dim,
                                              cfg.grid.t_end, cfg.orbit.velocity_bound(),
                                              cfg.stability_eps, cfg.stability_seed);
    auto table = stability_experiment(pairs, cfg.profile, cfg.alphas, cfg.domain, cfg.obs_points,
                                      cfg.grid, cfg.solver, cfg.recon.mollifier_half_width);

    CsvTable st;
    st.header = {"pair_id", "alpha", "c_norm_diff", "trace_norm", "ratio"};
    st.columns.resize(5);
    for (const auto& r : table.rows) {
        st.columns[0].push_back(r.pair_id);
        st.columns[1].push_back(r.alpha);
        st.columns[2].push_back(r.c_norm_diff);
        st.columns[3].push_back(r.trace_norm);
        st.columns[4].push_back(r.ratio);
    }
    std::vector<fs::path> written;
    fs::path sp = cfg.output_dir / "stability.csv";
    write_csv(sp, st);
    written.push_back(sp);

    json diag;
    diag["max_ratio"] = table.max_ratio;
    diag["n_pairs"] = cfg.stability_pairs;
    diag["seed"] = cfg.stability_seed;
    diag["epsilon"] = cfg.stability_eps;
    fs::path dp = cfg.output_dir / "diagnostics.json";
    write_json(dp, diag);
    written.push_back(dp);
    return written;
}

std::vector<fs::path> run_verify(const ParsedConfig& cfg) {
    VerificationReport rep = run_verification_suite();
    std::ostringstream os;
    for (const auto& c : rep.checks) {
        os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  observed=" << c.observed
           << " threshold=" << c.threshold << "  " << c.detail << '\n';
    }
    os << (rep.all_pass() ? "ALL CHECKS PASSED" : "CHECK FAILURES PRESENT") << '\n';
    std::cout << os.str();
    fs::path rp = cfg.output_dir / "verify_report.txt";
    std::ofstream out(rp, std::ios::binary);
    out << os.str();
    if (!rep.all_pass()) throw numeric_error("verification suite reported failures");
    return {rp};
}

}  // namespace

std::vector<fs::path> run_experiment(const fs::path& config_path,
                                     const std::string& output_dir_override) {
    std::ifstream in(config_path);
    if (!in) throw config_error("cannot open config file: " + config_path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("config parse error in " + config_path.string() + ": " + e.what());
    }
    if (!output_dir_override.empty()) j["output_dir"] = output_dir_override;

    ParsedConfig cfg = parse_config(j);
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw config_error("cannot create output_dir: " + cfg.output_dir.string());

    write_json(cfg.output_dir / "resolved_config.json", cfg.resolved);

    std::vector<fs::path> written{cfg.output_dir / "resolved_config.json"};
    std::vector<fs::path> more;
    if (cfg.kind == "simulate") more = run_simulate(cfg);
    else if (cfg.kind == "reconstruct") more = run_reconstruct(cfg);
    else if (cfg.kind == "stability") more = run_stability(cfg);
    else more = run_verify(cfg);
    written.insert(written.end(), more.begin(), more.end());
    return written;
}

double CompareReport::overall_max() const {
    double m = 0.0;
    for (const auto& f : files)
        for (double d : f.max_abs_diff) m = std::max(m, d);
    return m;
}

std::string CompareReport::to_string() const {
    std::ostringstream os;
    for (const auto& f : files) {
        os << f.file << ":\n";
        for (std::size_t c = 0; c < f.columns.size(); ++c)
            os << "  " << f.columns[c] << "  max_abs_diff=" << format_double_17(f.max_abs_diff[c])
               << '\n';
    }
    os << "overall_max=" << format_double_17(overall_max()) << '\n';
    return os.str();
}

CompareReport compare_runs(const fs::path& dir_a, const fs::path& dir_b) {
    CompareReport rep;
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir_a))
        if (e.path().extension() == ".csv") names.insert(e.path().filename().string());
    if (names.empty()) throw config_error("compare: no CSV files in " + dir_a.string());

    for (const std::string& name : names) {
        fs::path pa = dir_a / name;
        fs::path pb = dir_b / name;
        if (!fs::exists(pb)) throw config_error("compare: missing counterpart " + pb.string());
        CsvTable a = read_csv(pa);
        CsvTable b = read_csv(pb);
        if (a.header != b.header || a.n_rows() != b.n_rows())
            throw config_error("compare: schema mismatch in " + name);
        CompareReport::FileDiff fd;
        fd.file = name;
        fd.columns = a.header;
        for (std::size_t c = 0; c < a.columns.size(); ++c) {
            double m = 0.0;
            for (int r = 0; r < a.n_rows(); ++r)
                m = std::max(m, std::fabs(a.columns[c][r] - b.columns[c][r]));
            fd.max_abs_diff.push_back(m);
        }
        rep.files.push_back(std::move(fd));
    }
    return rep;
}

}  // namespace fracorbit
