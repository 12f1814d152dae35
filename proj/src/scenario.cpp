#include "ptc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

namespace ptc {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("config: " + what); }

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) bad("trailing characters in value for '" + key + "': " + v);
        return d;
    } catch (const std::invalid_argument&) {
        bad("cannot parse number for '" + key + "': " + v);
    } catch (const std::out_of_range&) {
        bad("number out of range for '" + key + "': " + v);
    }
}

long long parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) bad("trailing characters in value for '" + key + "': " + v);
        return d;
    } catch (const std::invalid_argument&) {
        bad("cannot parse integer for '" + key + "': " + v);
    } catch (const std::out_of_range&) {
        bad("integer out of range for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad("cannot parse boolean for '" + key + "': " + v);
}

std::vector<double> parse_numbers(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok, key));
    if (out.empty()) bad("empty value for '" + key + "'");
    return out;
}

std::vector<std::string> parse_tokens(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// "c_2_1" -> (2, 1); 1-based indices.
bool parse_table_key(const std::string& key, char prefix, int& i, int& j) {
    if (key.size() < 5 || key[0] != prefix || key[1] != '_') return false;
    const auto second = key.find('_', 2);
    if (second == std::string::npos) return false;
    try {
        std::size_t p1 = 0, p2 = 0;
        const std::string si = key.substr(2, second - 2);
        const std::string sj = key.substr(second + 1);
        i = std::stoi(si, &p1);
        j = std::stoi(sj, &p2);
        if (p1 != si.size() || p2 != sj.size()) return false;
    } catch (...) {
        return false;
    }
    return i >= 1 && j >= 1;
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join(const Eigen::VectorXd& v) {
    std::string out;
    for (int i = 0; i < v.size(); ++i) {
        if (i) out += " ";
        out += fmt_full(v(i));
    }
    return out;
}

}  // namespace

ScenarioConfig ScenarioConfig::parse_string(const std::string& text) {
    ScenarioConfig cfg;
    std::map<std::string, std::string> seen;
    struct TableEntry {
        char which;
        int i, j;
        double value;
    };
    std::vector<TableEntry> table_entries;
    std::vector<double> x_raw, xi_raw;
    bool have_x = false, have_xi = false, have_bilinear = false;

    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') bad("unterminated section header at line " + std::to_string(lineno));
            section = trim(t.substr(1, t.size() - 2));
            if (section != "scenario" && section != "integrator" && section != "output" &&
                section != "sweep") {
                bad("unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) bad("expected 'key = value' at line " + std::to_string(lineno));
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) bad("empty key at line " + std::to_string(lineno));
        if (section.empty()) bad("key '" + key + "' appears before any section");
        const std::string qualified = section + "." + key;
        if (!seen.emplace(qualified, value).second) bad("duplicate key '" + qualified + "'");

        if (section == "scenario") {
            int ti = 0, tj = 0;
            if (key == "n") {
                cfg.n = static_cast<int>(parse_int(value, qualified));
            } else if (key == "T") {
                cfg.T = parse_double(value, qualified);
            } else if (key == "c0") {
                cfg.c0 = parse_double(value, qualified);
            } else if (key == "feedback") {
                if (value == "state") {
                    cfg.feedback = FeedbackMode::State;
                } else if (value == "output") {
                    cfg.feedback = FeedbackMode::Output;
                } else {
                    bad("feedback must be 'state' or 'output', got '" + value + "'");
                }
            } else if (key == "beta") {
                cfg.beta_override = parse_double(value, qualified);
            } else if (key == "allow_beta_below_formula") {
                cfg.allow_beta_below_formula = parse_bool(value, qualified);
            } else if (key == "uncertainty") {
                if (value == "zero") {
                    cfg.uncertainty = UncertaintyKind::Zero;
                } else if (value == "linear") {
                    cfg.uncertainty = UncertaintyKind::Linear;
                } else if (value == "bilinear_example") {
                    cfg.uncertainty = UncertaintyKind::BilinearExample;
                } else {
                    bad("uncertainty must be zero | linear | bilinear_example, got '" + value +
                        "'");
                }
            } else if (key == "epsilon") {
                cfg.epsilon = parse_double(value, qualified);
            } else if (key == "x0") {
                cfg.x0_init = parse_double(value, qualified);
            } else if (key == "x") {
                x_raw = parse_numbers(value, qualified);
                have_x = true;
            } else if (key == "xi") {
                xi_raw = parse_numbers(value, qualified);
                have_xi = true;
            } else if (key == "bilinear_init") {
                const auto v = parse_numbers(value, qualified);
                if (v.size() != 2) bad("bilinear_init needs exactly two values (z1 z2)");
                cfg.bilinear_init = Eigen::Vector2d(v[0], v[1]);
                have_bilinear = true;
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(parse_int(value, qualified));
            } else if (parse_table_key(key, 'c', ti, tj)) {
                table_entries.push_back({'c', ti, tj, parse_double(value, qualified)});
            } else if (parse_table_key(key, 'a', ti, tj)) {
                table_entries.push_back({'a', ti, tj, parse_double(value, qualified)});
            } else {
                bad("unknown key '" + qualified + "'");
            }
        } else if (section == "integrator") {
            if (key == "method") {
                if (value == "rk45") {
                    cfg.integrator.method = StepMethod::Rk45Adaptive;
                } else if (value == "rk4") {
                    cfg.integrator.method = StepMethod::Rk4Fixed;
                } else {
                    bad("method must be rk45 or rk4, got '" + value + "'");
                }
            } else if (key == "h0") {
                cfg.integrator.h0 = parse_double(value, qualified);
            } else if (key == "rel_tol") {
                cfg.integrator.rel_tol = parse_double(value, qualified);
            } else if (key == "abs_tol") {
                cfg.integrator.abs_tol = parse_double(value, qualified);
            } else if (key == "terminal_guard") {
                cfg.integrator.terminal_guard = parse_double(value, qualified);
            } else if (key == "step_cap_ratio") {
                cfg.integrator.step_cap_ratio = parse_double(value, qualified);
            } else if (key == "assert_assumption") {
                cfg.integrator.assert_assumption = parse_bool(value, qualified);
            } else {
                bad("unknown key '" + qualified + "'");
            }
        } else if (section == "output") {
            if (key == "dir") {
                cfg.out_dir = value;
            } else if (key == "csv") {
                cfg.csv_name = value;
            } else if (key == "native_csv") {
                cfg.native_csv_name = value;
            } else if (key == "svg") {
                cfg.svg = parse_bool(value, qualified);
            } else {
                bad("unknown key '" + qualified + "'");
            }
        } else {  // sweep
            if (!cfg.sweep) cfg.sweep.emplace();
            if (key == "count") {
                cfg.sweep->count = static_cast<int>(parse_int(value, qualified));
            } else if (key == "radius") {
                cfg.sweep->radius = parse_double(value, qualified);
            } else if (key == "betas") {
                cfg.sweep->betas = parse_tokens(value);
            } else {
                bad("unknown key '" + qualified + "'");
            }
        }
    }

    if (cfg.n < kMinChainLength || cfg.n > kMaxChainLength) {
        bad("n = " + std::to_string(cfg.n) + " outside [" + std::to_string(kMinChainLength) +
            ", " + std::to_string(kMaxChainLength) + "]");
    }
    cfg.linear_c = Eigen::MatrixXd::Zero(cfg.n, cfg.n);
    cfg.linear_a = Eigen::MatrixXd::Zero(cfg.n, cfg.n);
    for (const auto& e : table_entries) {
        if (e.i > cfg.n || e.j > e.i) {
            bad("table entry " + std::string(1, e.which) + "_" + std::to_string(e.i) + "_" +
                std::to_string(e.j) + " outside the lower triangle for n = " +
                std::to_string(cfg.n));
        }
        (e.which == 'c' ? cfg.linear_c : cfg.linear_a)(e.i - 1, e.j - 1) = e.value;
    }
    if (have_x) {
        if (static_cast<int>(x_raw.size()) != cfg.n) bad("x must list exactly n values");
        cfg.x_init = Eigen::Map<Eigen::VectorXd>(x_raw.data(), cfg.n);
    } else {
        cfg.x_init = Eigen::VectorXd::Zero(cfg.n);
    }
    if (have_xi) {
        if (static_cast<int>(xi_raw.size()) != cfg.n) bad("xi must list exactly n values");
        cfg.xi_init = Eigen::Map<Eigen::VectorXd>(xi_raw.data(), cfg.n);
    } else {
        cfg.xi_init = Eigen::VectorXd::Zero(cfg.n);
    }
    if (have_bilinear && have_x) bad("provide either x or bilinear_init, not both");
    cfg.validate();
    return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

void ScenarioConfig::validate() const {
    if (n < kMinChainLength || n > kMaxChainLength) bad("n outside supported range");
    if (!(T > 0.0) || !std::isfinite(T)) bad("T must be positive and finite");
    if (!std::isfinite(c0)) bad("c0 must be finite");
    if (uncertainty == UncertaintyKind::BilinearExample) {
        if (n != 2) bad("the bilinear example is a chain of length 2");
        if (!(std::abs(epsilon) < std::sqrt(2.0))) bad("bilinear example needs |epsilon| < sqrt(2)");
    } else if (bilinear_init) {
        bad("bilinear_init is only meaningful for uncertainty = bilinear_example");
    }
    if (uncertainty == UncertaintyKind::Linear) {
        UncertaintyBoundTable table{linear_c};
        table.validate();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (std::abs(linear_a(i, j)) > linear_c(i, j)) {
                    bad("linear coefficients must satisfy |a_ij| <= c_ij");
                }
            }
        }
    }
    if (x_init.size() != n) bad("x has wrong dimension");
    if (xi_init.size() != n) bad("xi has wrong dimension");
    if (!x_init.allFinite() || !std::isfinite(x0_init)) bad("initial state must be finite");
    if (feedback == FeedbackMode::Output && c0 != 0.0) {
        bad("output feedback covers plants with c0 = 0 only");
    }
    if (beta_override && (!(std::isfinite(*beta_override)) || *beta_override <= 0.0)) {
        bad("beta must be positive and finite");
    }
    integrator.validate();
    if (sweep && sweep->empty()) bad("sweep section present but empty (count or betas required)");
    if (sweep && sweep->count > 0 && !(sweep->radius > 0.0)) bad("sweep radius must be positive");
}

std::string ScenarioConfig::serialize() const {
    std::ostringstream out;
    out << "[scenario]\n";
    out << "n = " << n << "\n";
    out << "T = " << fmt_full(T) << "\n";
    out << "c0 = " << fmt_full(c0) << "\n";
    out << "feedback = " << (feedback == FeedbackMode::State ? "state" : "output") << "\n";
    if (beta_override) out << "beta = " << fmt_full(*beta_override) << "\n";
    out << "allow_beta_below_formula = " << (allow_beta_below_formula ? "true" : "false") << "\n";
    const char* kind = uncertainty == UncertaintyKind::Zero
                           ? "zero"
                           : (uncertainty == UncertaintyKind::Linear ? "linear"
                                                                     : "bilinear_example");
    out << "uncertainty = " << kind << "\n";
    out << "epsilon = " << fmt_full(epsilon) << "\n";
    if (uncertainty == UncertaintyKind::Linear) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                out << "c_" << (i + 1) << "_" << (j + 1) << " = " << fmt_full(linear_c(i, j))
                    << "\n";
                out << "a_" << (i + 1) << "_" << (j + 1) << " = " << fmt_full(linear_a(i, j))
                    << "\n";
            }
        }
    }
    out << "x0 = " << fmt_full(x0_init) << "\n";
    if (bilinear_init) {
        out << "bilinear_init = " << fmt_full((*bilinear_init)(0)) << " "
            << fmt_full((*bilinear_init)(1)) << "\n";
    } else {
        out << "x = " << join(x_init) << "\n";
    }
    out << "xi = " << join(xi_init) << "\n";
    out << "seed = " << seed << "\n";

    out << "\n[integrator]\n";
    out << "method = " << (integrator.method == StepMethod::Rk45Adaptive ? "rk45" : "rk4") << "\n";
    out << "h0 = " << fmt_full(integrator.h0) << "\n";
    out << "rel_tol = " << fmt_full(integrator.rel_tol) << "\n";
    out << "abs_tol = " << fmt_full(integrator.abs_tol) << "\n";
    out << "terminal_guard = " << fmt_full(integrator.terminal_guard) << "\n";
    out << "step_cap_ratio = " << fmt_full(integrator.step_cap_ratio) << "\n";
    out << "assert_assumption = " << (integrator.assert_assumption ? "true" : "false") << "\n";

    out << "\n[output]\n";
    out << "dir = " << out_dir << "\n";
    out << "csv = " << csv_name << "\n";
    if (!native_csv_name.empty()) out << "native_csv = " << native_csv_name << "\n";
    out << "svg = " << (svg ? "true" : "false") << "\n";

    if (sweep) {
        out << "\n[sweep]\n";
        if (sweep->count > 0) {
            out << "count = " << sweep->count << "\n";
            out << "radius = " << fmt_full(sweep->radius) << "\n";
        }
        if (!sweep->betas.empty()) {
            out << "betas =";
            for (const auto& b : sweep->betas) out << " " << b;
            out << "\n";
        }
    }
    return out.str();
}

std::string ScenarioConfig::id() const {
    const std::string s = serialize();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ScenarioRuntime build_runtime(const ScenarioConfig& cfg) {
    cfg.validate();
    auto basis = std::make_shared<const PleBasis>(cfg.n);

    std::optional<BilinearReduction> reduction;
    auto make_system = [&]() -> ChainedSystem {
        switch (cfg.uncertainty) {
            case UncertaintyKind::Zero:
                return ChainedSystem{cfg.n, cfg.c0, UncertaintySpec::zero(cfg.n)};
            case UncertaintyKind::Linear:
                return ChainedSystem{
                    cfg.n, cfg.c0,
                    UncertaintySpec::linear(UncertaintyBoundTable{cfg.linear_c}, cfg.linear_a)};
            case UncertaintyKind::BilinearExample:
            default: {
                BilinearScenario sc;
                sc.epsilon = cfg.epsilon;
                reduction.emplace(sc);
                ChainedSystem sys = reduction->system();
                sys.c0 = cfg.c0;
                return sys;
            }
        }
    };
    ChainedSystem system = make_system();

    ChainedState init;
    init.x0 = cfg.x0_init;
    if (cfg.bilinear_init) {
        init.x = Eigen::Vector2d((*cfg.bilinear_init)(0),
                                 reduction->x2_from_z2((*cfg.bilinear_init)(1)));
    } else {
        init.x = cfg.x_init;
    }

    const GainSchedule schedule(cfg.T);
    const Eigen::MatrixXd g = compute_g_table(system.uncertainty.bound(), cfg.T);
    const double d = compute_d(g, schedule.gamma0(), cfg.n);
    const BetaPolicy policy =
        cfg.allow_beta_below_formula ? BetaPolicy::Force : BetaPolicy::Strict;

    std::optional<StateFeedbackLaw> state_law;
    std::optional<ObserverLaw> observer_law;
    double beta = 0.0;
    if (cfg.feedback == FeedbackMode::State) {
        state_law.emplace(basis, schedule, d, cfg.c0, cfg.beta_override, policy);
        beta = state_law->beta();
    } else {
        observer_law.emplace(basis, schedule, d, cfg.beta_override, policy);
        beta = observer_law->beta();
    }
    DerivedBounds bounds = derive_bounds(system.uncertainty, cfg.T, cfg.x0_init, beta);
    return ScenarioRuntime{std::move(basis), std::move(system),   std::move(init), cfg.xi_init,
                           std::move(bounds), beta, std::move(state_law), std::move(observer_law)};
}

Trajectory run_scenario(const ScenarioConfig& cfg) {
    const ScenarioRuntime rt = build_runtime(cfg);
    Trajectory traj;
    if (cfg.feedback == FeedbackMode::State) {
        traj = simulate_state_feedback(rt.system, *rt.state_law, rt.init, cfg.integrator);
    } else {
        traj = simulate_output_feedback(rt.system, *rt.observer_law, rt.init, rt.xi_init,
                                        cfg.integrator);
    }
    traj.scenario_id = cfg.id();
    return traj;
}

namespace {

struct SweepRow {
    std::string text;
};

struct SweepTask {
    std::string kind;
    double beta = 0.0;
    bool force_beta = false;
    double x0_init = 0.0;
    Eigen::VectorXd x_init;
};

double fitted_sup(const Trajectory& traj, double exponent,
                  const std::function<double(const TrajectorySample&)>& value) {
    double sup = 0.0;
    for (const auto& s : traj.samples) {
        const double denom = std::pow(traj.T - s.t, exponent);
        if (denom > 0.0) sup = std::max(sup, value(s) / denom);
    }
    return sup;
}

}  // namespace

std::string run_sweep_csv(const ScenarioConfig& cfg, int workers) {
    cfg.validate();
    if (!cfg.sweep || cfg.sweep->empty()) {
        bad("sweep requires a [sweep] section with count or betas");
    }
    const ScenarioRuntime base = build_runtime(cfg);  // validates gains up front
    const double formula = cfg.feedback == FeedbackMode::State
                               ? base.state_law->beta_min()
                               : base.observer_law->beta_min();

    std::vector<SweepTask> tasks;
    for (int k = 0; k < cfg.sweep->count; ++k) {
        std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(k) + 1);
        auto draw = [&rng, r = cfg.sweep->radius]() {
            return -r + 2.0 * r * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        };
        SweepTask task;
        task.kind = "init";
        task.beta = base.beta;
        task.force_beta = cfg.allow_beta_below_formula;
        task.x0_init = draw();
        task.x_init = Eigen::VectorXd(cfg.n);
        for (int i = 0; i < cfg.n; ++i) task.x_init(i) = draw();
        tasks.push_back(std::move(task));
    }
    for (const auto& token : cfg.sweep->betas) {
        SweepTask task;
        task.kind = "beta:" + token;
        task.x0_init = base.init.x0;
        task.x_init = base.init.x;
        if (token == "formula") {
            task.beta = formula;
        } else if (token.size() > 1 && token.back() == 'x') {
            task.beta = formula * parse_double(token.substr(0, token.size() - 1), "sweep.betas");
        } else {
            task.beta = parse_double(token, "sweep.betas");
            task.force_beta = true;  // explicit numeric gains are taken verbatim
        }
        tasks.push_back(std::move(task));
    }

    std::vector<std::string> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size()) break;
            const SweepTask& task = tasks[k];
            std::ostringstream row;
            row << k << "," << task.kind << ",";
            char numbuf[40];
            std::snprintf(numbuf, sizeof(numbuf), "%.9g", task.beta);
            row << numbuf << ",";
            std::snprintf(numbuf, sizeof(numbuf), "%.9g", task.x0_init);
            row << numbuf;
            try {
                ScenarioConfig run_cfg = cfg;
                run_cfg.sweep.reset();
                run_cfg.x0_init = task.x0_init;
                run_cfg.x_init = task.x_init;
                run_cfg.bilinear_init.reset();
                run_cfg.beta_override = task.beta;
                run_cfg.allow_beta_below_formula = task.force_beta;
                const Trajectory traj = run_scenario(run_cfg);

                const double t1 = std::min(traj.T * (1.0 - 1e-3), traj.t_end);
                const auto s1 = traj.sample_at(t1);
                double peak_x0 = 0, peak_x = 0, peak_xi = 0, peak_u0 = 0, peak_u = 0;
                for (const auto& s : traj.samples) {
                    peak_x0 = std::max(peak_x0, std::abs(s.x0));
                    peak_x = std::max(peak_x, s.x.norm());
                    if (traj.has_observer) peak_xi = std::max(peak_xi, s.xi.norm());
                    peak_u0 = std::max(peak_u0, std::abs(s.u0));
                    peak_u = std::max(peak_u, std::abs(s.u));
                }
                auto ratio = [](double v, double peak) {
                    return peak > 1e-300 ? v / peak : 0.0;
                };
                const double r_x0 = ratio(std::abs(s1.x0), peak_x0);
                const double r_x = ratio(s1.x.norm(), peak_x);
                const double r_xi =
                    traj.has_observer ? ratio(s1.xi.norm(), peak_xi) : 0.0;
                const double r_u0 = ratio(std::abs(s1.u0), peak_u0);
                const double r_u = ratio(std::abs(s1.u), peak_u);
                const double cx = fitted_sup(traj, 1.5,
                                             [](const TrajectorySample& s) { return s.x.norm(); });
                const double cu = fitted_sup(
                    traj, 0.5, [](const TrajectorySample& s) { return std::abs(s.u); });
                const bool converged = !traj.diverged && r_x0 <= 1e-2 && r_x <= 1e-2 &&
                                       r_xi <= 1e-2 && r_u0 <= 1e-2 && r_u <= 1e-2;
                row << "," << (traj.diverged ? "diverged" : "ok");
                for (double v : {r_x0, r_x, r_xi, r_u0, r_u, cx, cu}) {
                    std::snprintf(numbuf, sizeof(numbuf), "%.9g", v);
                    row << "," << numbuf;
                }
                row << "," << (converged ? 1 : 0);
            } catch (const AssumptionViolation&) {
                row << ",assumption_violation,,,,,,,,0";
            } catch (const std::exception&) {
                row << ",error,,,,,,,,0";
            }
            rows[k] = row.str();
        }
    };

    const int pool = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();

    std::string out =
        "run,kind,beta,x0_init,status,term_x0,term_x,term_xi,term_u0,term_u,env_cx,env_cu,"
        "converged\n";
    for (const auto& r : rows) {
        out += r;
        out += "\n";
    }
    return out;
}

std::string example_scenario_text() {
    return "[scenario]\n"
           "n = 2\n"
           "T = 2.5\n"
           "c0 = 0\n"
           "feedback = output\n"
           "beta = 100\n"
           "allow_beta_below_formula = true\n"
           "uncertainty = bilinear_example\n"
           "epsilon = 0.1\n"
           "x0 = 0\n"
           "bilinear_init = -1 1\n"
           "xi = 0 0\n"
           "seed = 42\n"
           "\n"
           "[integrator]\n"
           "method = rk45\n"
           "h0 = 0.001\n"
           "rel_tol = 1e-10\n"
           "abs_tol = 1e-300\n"
           "terminal_guard = 1e-6\n"
           "step_cap_ratio = 0.1\n"
           "assert_assumption = true\n"
           "\n"
           "[output]\n"
           "dir = out\n"
           "csv = trajectory.csv\n"
           "svg = true\n";
}

}  // namespace ptc
