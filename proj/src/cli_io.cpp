#include "peum/cli_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <memory>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "peum/error.hpp"
#include "peum/fsutil.hpp"
#include "peum/map_family.hpp"
#include "peum/modulus.hpp"
#include "peum/shadowing.hpp"
#include "peum/srb_measure.hpp"
#include "peum/statistics.hpp"
#include "peum/transfer_operator.hpp"
#include "peum/transversality.hpp"

namespace peum::cli {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string now_iso() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::vector<double> parse_poly_rows_row(const json& row) {
    if (!row.is_array()) throw ConfigError("polynomial rows must be arrays of numbers");
    std::vector<double> out;
    for (const auto& v : row) {
        if (!v.is_number()) throw ConfigError("polynomial coefficients must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

BivariatePoly parse_poly(const json& j, const char* name) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string("family.") + name + " must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) rows.push_back(parse_poly_rows_row(r));
    return BivariatePoly(std::move(rows));
}

double get_number(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::vector<double> parse_grid(const json& j) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError("t_grid entries must be numbers");
            out.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        const double a = get_number(j, "start"), b = get_number(j, "stop"), s = get_number(j, "step");
        if (!(s > 0.0) || !(b >= a)) throw ConfigError("t_grid needs start <= stop and step > 0");
        const auto count = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * s);
    } else {
        throw ConfigError("t_grid must be an array or {start, stop, step}");
    }
    if (out.empty()) throw ConfigError("t_grid is empty");
    return out;
}

/// CSV body with a provenance preamble.
class Csv {
public:
    Csv(const std::string& hash, bool timestamp) {
        text_ = std::string("# peumlab ") + kVersion + "\n# config_hash " + hash + "\n";
        if (timestamp) text_ += "# timestamp " + now_iso() + "\n";
    }
    void header(const std::vector<std::string>& cols) { row_strings(cols); }
    void row(const std::vector<std::string>& cells) { row_strings(cells); }
    void comment(const std::string& s) { text_ += "# " + s + "\n"; }
    const std::string& text() const { return text_; }

private:
    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }
    std::string text_;
};

json interval_json(const Interval& iv) { return json{{"lo", iv.lo}, {"hi", iv.hi}}; }

json complement_json(const ComplementSet& cs) {
    json comps = json::array();
    for (const auto& c : cs.components) comps.push_back({{"lo", c.lo}, {"hi", c.hi}, {"generation", c.generation}});
    return json{{"measure", cs.measure}, {"complete", cs.complete}, {"components", comps}};
}

std::string complement_csv(const ComplementSet& cs, const std::string& hash, bool ts) {
    Csv csv(hash, ts);
    csv.header({"lo", "hi", "generation"});
    for (const auto& c : cs.components) csv.row({num(c.lo), num(c.hi), std::to_string(c.generation)});
    return csv.text();
}

struct Context {
    json cfg;
    std::string hash;
    RunOptions opt;
    std::unique_ptr<DensityCache> cache;
    PeumFamily family = PeumFamily::tent();
    Observable phi = Observable::identity();

    void write(const std::string& name, const std::string& content) const { write_file_atomic(opt.out / name, content); }
    void write_json(const std::string& name, json j) const {
        j["peumlab_version"] = kVersion;
        j["config_hash"] = hash;
        if (opt.timestamp) j["timestamp"] = now_iso();
        write(name, j.dump(2) + "\n");
    }
    Csv csv() const { return Csv(hash, opt.timestamp); }
    double wall(std::chrono::steady_clock::time_point t0) const {
        if (!opt.timestamp) return 0.0;
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    double number(const char* key) const { return get_number(cfg, key); }
    std::size_t count(const char* key) const {
        double v = number(key);
        if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
        return static_cast<std::size_t>(v);
    }
};

int cmd_density(Context& cx) {
    const double t = cx.number("t");
    const std::size_t n = cx.count("N");
    const double tol = cx.number("tol");
    auto t0 = std::chrono::steady_clock::now();
    bool hit = false;
    auto st = cached_stationary_density(cx.family, t, n, tol, cx.cache.get(), &hit);
    const auto& rho = st.density;
    Csv csv = cx.csv();
    csv.header({"i", "x", "rho"});
    for (std::size_t i = 0; i < n; ++i)
        csv.row({std::to_string(i), num((static_cast<double>(i) + 0.5) / static_cast<double>(n)), num(rho[i])});
    cx.write("density.csv", csv.text());
    double sup_dev = 0.0;
    for (double v : rho.values()) sup_dev = std::max(sup_dev, std::abs(v - 1.0));
    json s{{"t", t},
           {"N", n},
           {"tol", tol},
           {"residual", st.residual},
           {"iterations", st.iterations},
           {"damped", st.damped},
           {"mass", rho.mass()},
           {"sup", rho.sup()},
           {"sup_deviation_from_uniform", sup_dev},
           {"bv_norm", rho.bv_norm()},
           {"rho_at_c", density_at_c(rho, cx.family.c())},
           {"cache_hit", hit}};
    const auto trials = cx.count("gap_trials");
    if (trials > 0) {
        auto op = build_ulam(cx.family, t, n);
        auto gap = spectral_gap_estimate(op, rho, static_cast<int>(trials), cx.cfg.at("seed").get<std::uint64_t>());
        s["spectral_gap"] = {{"theta", gap.theta}, {"log_c", gap.log_c}, {"fit_residual", gap.fit_residual}};
    }
    // wall time is reported even without --timestamp: it lives outside the CSV body
    s["wall_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    cx.write_json("summary.json", s);
    return kOk;
}

int cmd_sweep(Context& cx) {
    const auto grid = parse_grid(cx.cfg.at("t_grid"));
    const std::size_t n = cx.count("N");
    auto pts = gamma_sweep(cx.family, grid, cx.phi, n, cx.number("tol"), cx.cache.get());
    Csv csv = cx.csv();
    csv.header({"t", "gamma", "N", "tol_achieved", "wall_ms", "status"});
    std::size_t failed = 0;
    for (const auto& p : pts) {
        if (p.status != "ok") ++failed;
        std::string status = p.status;
        for (auto& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';
        csv.row({num(p.t), num(p.gamma), std::to_string(p.n), num(p.tol_achieved),
                 num(cx.opt.timestamp ? p.wall_ms : 0.0), status});
    }
    cx.write("sweep.csv", csv.text());
    return failed == pts.size() ? kRuntimeFailure : kOk;
}

int cmd_j(Context& cx) {
    const auto grid = parse_grid(cx.cfg.at("t_grid"));
    const double tol = cx.number("tol");
    Csv csv = cx.csv();
    csv.header({"t", "J", "k_used", "tail_bound", "status"});
    double min_abs = INFINITY, argmin = NAN;
    std::size_t failed = 0, flagged = 0;
    for (double t : grid) {
        try {
            auto v = j_limit(cx.family, t, tol);
            csv.row({num(t), num(v.value), std::to_string(v.k_used), num(v.tail_bound), "ok"});
            if (std::abs(v.value) < min_abs) {
                min_abs = std::abs(v.value);
                argmin = t;
            }
            if (std::abs(v.value) <= tol) ++flagged;
        } catch (const std::exception& e) {
            ++failed;
            csv.row({num(t), "nan", "-1", "nan", "error"});
        }
    }
    csv.comment("min_abs_J " + num(min_abs) + " at t " + num(argmin) + " flagged " + std::to_string(flagged));
    cx.write("j.csv", csv.text());
    return failed == grid.size() ? kRuntimeFailure : kOk;
}

int cmd_sigma(Context& cx) {
    const double t = cx.number("t");
    const std::size_t n = cx.count("N");
    auto est = green_kubo_sigma(cx.family, t, cx.phi, static_cast<int>(cx.count("K")), n, cx.number("tol"),
                                cx.cache.get());
    Csv csv = cx.csv();
    csv.header({"k", "a_k"});
    for (std::size_t k = 0; k < est.a.size(); ++k) csv.row({std::to_string(k), num(est.a[k])});
    cx.write("autocorrelation.csv", csv.text());
    json s{{"t", t}, {"N", n}, {"K", est.K}, {"sigma", est.sigma}, {"sigma2_truncated", est.sigma2},
           {"mean", est.mean}, {"theta", est.theta}, {"tail", est.tail}, {"clamped", est.clamped}};
    const auto clt_n = cx.count("clt_n");
    if (clt_n > 0) {
        auto c = clt_monte_carlo(cx.family, t, cx.phi, static_cast<int>(clt_n), cx.count("clt_samples"),
                                 cx.cfg.at("seed").get<std::uint64_t>(), static_cast<int>(cx.count("clt_burn_in")));
        s["clt"] = {{"n", clt_n},
                    {"samples", c.samples},
                    {"burn_in", cx.count("clt_burn_in")},
                    {"variance", c.variance},
                    {"std_error", c.std_error}};
    }
    const auto lil_n = cx.count("lil_n_max");
    if (lil_n > 0) {
        auto tr = lil_trace(cx.family, t, cx.phi.zero_mean(est.mean), static_cast<int>(lil_n), est.sigma);
        const auto stride = std::max<std::size_t>(1, cx.count("lil_stride"));
        Csv lc = cx.csv();
        lc.header({"n", "S_n", "scaled", "running_max"});
        for (std::size_t i = LilTrace::kFirst - 1; i < tr.S.size(); i += stride)
            lc.row({std::to_string(i + 1), num(tr.S[i]), num(tr.scaled[i]), num(tr.running_max[i])});
        cx.write("lil.csv", lc.text());
        s["lil_final_running_max"] = tr.running_max.back();
    }
    cx.write_json("sigma.json", s);
    return kOk;
}

int cmd_shadow(Context& cx) {
    const double t = cx.number("t"), h = cx.number("h");
    if (!(h > 0.0)) throw ConfigError("shadow needs h > 0");
    int n = static_cast<int>(cx.number("n"));
    if (n < 0) n = static_cast<int>(std::floor(std::abs(std::log(h))));
    const std::string model_name = cx.cfg.at("model").get<std::string>();
    GapModel model;
    if (model_name == "printed") model = GapModel::Printed;
    else if (model_name == "shadow") model = GapModel::Shadow;
    else throw ConfigError("model must be 'printed' or 'shadow'");
    const auto budget = static_cast<std::uint64_t>(cx.count("budget"));

    auto rep = complement_A(cx.family, t, h, n, budget, model);
    json j{{"t", t}, {"h", h}, {"n", n}, {"model", model_name}};
    j["bar_interval"] = {{"lo", rep.bar.interval.lo}, {"hi", rep.bar.interval.hi}, {"J", rep.bar.J},
                         {"flagged", rep.bar.flagged}};
    json I = json::array(), It = json::array();
    for (std::size_t k = 0; k < rep.I.size(); ++k) {
        I.push_back({{"k", k}, {"from", rep.I[k].from}, {"to", rep.I[k].to}});
        It.push_back({{"k", k}, {"from", rep.I_tilde[k].from}, {"to", rep.I_tilde[k].to}});
    }
    j["I"] = I;
    j["I_tilde"] = It;
    j["complement_A"] = complement_json(rep.complement_A);
    j["complement_B"] = complement_json(rep.complement_B);
    try {
        auto rt = return_times(cx.family, t, h, static_cast<int>(cx.count("s_grid")));
        j["return_times"] = {{"n1", rt.n1}, {"n2", rt.n2}, {"s_at_n1", rt.s_at_n1},
                             {"hat_interval", interval_json(rt.hat_interval)}, {"s_grid_size", rt.s_grid_size},
                             {"s_grid_approximation", true}};
    } catch (const std::exception& e) {
        j["return_times"] = {{"error", e.what()}};
    }
    try {
        auto ov = overlap_sum(cx.family, t, h, n, nullptr, budget);
        j["overlap"] = {{"sum", ov.sum}, {"defect", ov.defect}, {"bound", ov.bound}, {"complete", ov.complete}};
    } catch (const std::exception& e) {
        j["overlap"] = {{"error", e.what()}};
    }
    cx.write_json("shadow.json", j);
    cx.write("complement_A.csv", complement_csv(rep.complement_A, cx.hash, cx.opt.timestamp));
    cx.write("complement_B.csv", complement_csv(rep.complement_B, cx.hash, cx.opt.timestamp));
    return kOk;
}

int cmd_modulus(Context& cx) {
    const double t = cx.number("t");
    ConstantOptions co;
    co.n = cx.count("constant_N");
    co.K = static_cast<int>(cx.count("K"));
    co.tol = cx.number("constant_tol");
    auto K = theoretical_constant(cx.family, t, cx.phi, co, cx.cache.get());

    ScanOptions so;
    so.n_min = cx.count("N_min");
    so.n_cap = cx.count("N_cap");
    so.cells_per_h = cx.number("cells_per_h");
    so.tol = cx.number("tol");
    so.negative_h = cx.cfg.at("negative_h").get<bool>();
    auto scan = modulus_scan(cx.family, t, cx.phi, cx.number("h0"), cx.number("r"),
                             static_cast<int>(cx.count("steps")), K.K, so, cx.cache.get());

    auto emit = [&](const std::vector<ScanEntry>& entries) {
        Csv csv = cx.csv();
        csv.header({"h", "delta_gamma", "lipschitz_ratio", "scaled_ratio", "running_max_lip", "running_max_scaled",
                    "K_theoretical", "trusted_flag", "N"});
        for (const auto& e : entries)
            csv.row({num(e.h), num(e.delta_gamma), num(e.lipschitz_ratio), num(e.scaled_ratio),
                     num(e.running_max_lip), num(e.running_max_scaled), num(scan.K), e.trusted ? "1" : "0",
                     std::to_string(e.n)});
        return csv.text();
    };
    cx.write("modulus.csv", emit(scan.entries));
    if (so.negative_h) cx.write("modulus_negative.csv", emit(scan.negative));

    auto factor = [](const FactorBudget& b) { return json{{"value", b.value}, {"error", b.error}}; };
    json j{{"t", t},
           {"phi", scan.phi},
           {"K_theoretical", K.K},
           {"relative_error", K.relative_error},
           {"factors",
            {{"rho_c", factor(K.rho_c)},
             {"J", factor(K.J)},
             {"sigma", factor(K.sigma)},
             {"lyapunov", factor(K.lyapunov)}}},
           {"sigma_zero", K.sigma_zero},
           {"J_zero", K.J_zero},
           {"noise_floor", scan.noise_floor}};
    if (!scan.entries.empty()) {
        j["final_running_max_lip"] = scan.entries.back().running_max_lip;
        j["final_running_max_scaled"] = scan.entries.back().running_max_scaled;
    }
    if (cx.cfg.at("audit").get<bool>()) {
        auto au = decomposition_audit(cx.family, t, cx.number("audit_h"), cx.phi, cx.count("audit_N"), so.tol,
                                      GapModel::Shadow, cx.cache.get());
        j["audit"] = {{"h", au.h},
                      {"n", au.n},
                      {"delta_gamma", au.delta_gamma},
                      {"iterated_difference", au.iterated_difference},
                      {"r_term", au.r_term},
                      {"a_term", au.a_term},
                      {"b_term", au.b_term},
                      {"second_order_bound", au.second_order_bound},
                      {"residual", au.residual},
                      {"residual_iterated", au.residual_iterated}};
    }
    cx.write_json("modulus.json", j);
    return kOk;
}

int cmd_recurrence(Context& cx) {
    const auto grid = parse_grid(cx.cfg.at("t_grid"));
    const int N = static_cast<int>(cx.count("N"));
    const double m = cx.number("m");
    auto reports = check_assumptions(cx.family, grid, static_cast<int>(cx.count("n_orbit")));
    Csv csv = cx.csv();
    csv.header({"t", "min_value", "argmin", "threshold", "expansion_ok", "min_distance_to_c", "periodic",
                "eventually_periodic", "mixing", "orbit_density", "passes"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto r = critical_recurrence(cx.family, grid[i], N, m);
        const auto& a = reports[i];
        csv.row({num(grid[i]), num(r.min_value), std::to_string(r.argmin), std::to_string(r.threshold),
                 a.expansion_ok ? "1" : "0", num(a.min_distance_to_c), a.periodic ? "1" : "0",
                 a.eventually_periodic ? "1" : "0", a.mixing_heuristic ? "1" : "0", num(a.orbit_density),
                 a.passes() ? "1" : "0"});
    }
    cx.write("recurrence.csv", csv.text());
    return kOk;
}

json defaults_for(const std::string& command) {
    json d{{"family", {{"kind", "tent"}}}, {"observable", {{"kind", "identity"}}}, {"seed", 1}};
    if (command == "density") {
        d.update({{"t", 2.0}, {"N", 4096}, {"tol", 1e-10}, {"gap_trials", 0}});
    } else if (command == "sweep") {
        d.update({{"t_grid", {{"start", 1.5}, {"stop", 1.95}, {"step", 0.001}}}, {"N", 4096}, {"tol", 1e-10}});
    } else if (command == "j") {
        d.update({{"t_grid", {{"start", 1.5}, {"stop", 2.0}, {"step", 0.01}}}, {"tol", 1e-10}});
    } else if (command == "sigma") {
        d.update({{"t", 2.0}, {"N", 65536}, {"K", 30}, {"tol", 1e-12}, {"clt_n", 0}, {"clt_samples", 100000},
                  {"clt_burn_in", 0}, {"lil_n_max", 0}, {"lil_stride", 100}});
    } else if (command == "shadow") {
        d.update({{"t", 1.9}, {"h", 1e-4}, {"n", -1}, {"model", "printed"}, {"budget", 1 << 24}, {"s_grid", 33}});
    } else if (command == "modulus") {
        d.update({{"t", 1.9}, {"h0", 1e-2}, {"r", 0.5}, {"steps", 14}, {"N_min", 4096}, {"N_cap", 1 << 22},
                  {"cells_per_h", 100.0}, {"tol", 1e-13}, {"negative_h", false}, {"constant_N", 65536},
                  {"constant_tol", 1e-12}, {"K", 80}, {"audit", false}, {"audit_h", 1e-3}, {"audit_N", 1 << 18}});
    } else if (command == "recurrence") {
        d.update({{"t_grid", json::array({1.9})}, {"N", 1000}, {"m", 2.0}, {"n_orbit", 1000}});
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    return d;
}

}  // namespace

PeumFamily parse_family(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("family must be an object with a string 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    try {
        if (kind == "tent") {
            double lo = 1.4142135623730951, hi = 2.0;
            if (j.contains("t_range")) {
                const auto& r = j.at("t_range");
                if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
                    throw ConfigError("t_range must be [a, b]");
                lo = r[0].get<double>();
                hi = r[1].get<double>();
            }
            std::optional<double> lambda;
            if (j.contains("lambda")) lambda = get_number(j, "lambda");
            return PeumFamily::tent(lo, hi, lambda);
        }
        if (kind == "piecewise_poly") {
            const auto& r = j.contains("t_range") ? j.at("t_range") : throw ConfigError("missing field 't_range'");
            if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
                throw ConfigError("t_range must be [a, b]");
            if (!j.contains("left") || !j.contains("right")) throw ConfigError("piecewise_poly needs 'left' and 'right'");
            return PeumFamily::piecewise_poly(get_number(j, "c"), parse_poly(j.at("left"), "left"),
                                              parse_poly(j.at("right"), "right"), get_number(j, "lambda"),
                                              r[0].get<double>(), r[1].get<double>());
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid family: ") + e.what());
    }
    throw ConfigError("unknown family kind '" + kind + "'");
}

Observable parse_observable(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("observable must be an object with a string 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    try {
        if (kind == "identity") return Observable::identity();
        if (kind == "centered_half") return Observable::centered_half();
        if (kind == "constant") return Observable::constant(get_number(j, "value"));
        if (kind == "poly") {
            if (!j.contains("coefficients")) throw ConfigError("missing field 'coefficients'");
            return Observable::poly(parse_poly_rows_row(j.at("coefficients")));
        }
        if (kind == "table") {
            if (!j.contains("breakpoints") || !j.contains("values"))
                throw ConfigError("table observable needs 'breakpoints' and 'values'");
            return Observable::table(parse_poly_rows_row(j.at("breakpoints")), parse_poly_rows_row(j.at("values")));
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid observable: ") + e.what());
    }
    throw ConfigError("unknown observable kind '" + kind + "'");
}

std::string config_hash(const json& resolved) { return hex(fnv1a64(resolved.dump())); }

json resolve_config(const std::string& command, const json& config, const RunOptions& opt) {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    json r = defaults_for(command);
    for (auto it = config.begin(); it != config.end(); ++it) {
        if (it.key() == "cache_dir") continue;
        if (it.key() != "command" && !r.contains(it.key()))
            throw ConfigError("unknown field '" + it.key() + "' for command " + command);
        r[it.key()] = it.value();
    }
    r["command"] = command;
    if (opt.seed) r["seed"] = *opt.seed;
    const auto& sd = r.at("seed");
    if (!sd.is_number_integer() || (!sd.is_number_unsigned() && sd.get<std::int64_t>() < 0))
        throw ConfigError("seed must be a non-negative integer");
    r["seed"] = sd.get<std::uint64_t>();
    return r;
}

std::string error_json(const std::string& kind, const std::string& message, int exit_code) {
    return json{{"error", kind}, {"message", message}, {"exit_code", exit_code}}.dump() + "\n";
}

int run_command(const std::string& command, const json& config, const RunOptions& opt) {
    auto fail = [&](const std::string& kind, const std::string& msg, int code) {
        const auto text = error_json(kind, msg, code);
        std::cerr << text;
        try {
            write_file_atomic(opt.out / "error.json", text);
        } catch (...) {
        }
        return code;
    };
    try {
        Context cx;
        cx.opt = opt;
        cx.cfg = resolve_config(command, config, opt);
        cx.hash = config_hash(cx.cfg);
        cx.family = parse_family(cx.cfg.at("family"));
        cx.phi = parse_observable(cx.cfg.at("observable"));
#ifdef _OPENMP
        if (opt.threads > 0) omp_set_num_threads(opt.threads);
#endif
        std::filesystem::create_directories(opt.out);
        std::string cache_dir;
        if (const char* env = std::getenv("PEUMLAB_CACHE"); env && *env) cache_dir = env;
        else if (config.contains("cache_dir") && config.at("cache_dir").is_string())
            cache_dir = config.at("cache_dir").get<std::string>();
        else cache_dir = (opt.out / ".cache").string();
        cx.cache = std::make_unique<DensityCache>(cache_dir);
        cx.write("resolved_config.json", cx.cfg.dump(2) + "\n");

        if (command == "density") return cmd_density(cx);
        if (command == "sweep") return cmd_sweep(cx);
        if (command == "j") return cmd_j(cx);
        if (command == "sigma") return cmd_sigma(cx);
        if (command == "shadow") return cmd_shadow(cx);
        if (command == "modulus") return cmd_modulus(cx);
        if (command == "recurrence") return cmd_recurrence(cx);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        return fail("config", e.what(), kConfigError);
    } catch (const DomainError& e) {
        return fail("precondition", e.what(), kConfigError);
    } catch (const json::exception& e) {
        return fail("config", e.what(), kConfigError);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), kRuntimeFailure);
    }
}

int run_from_file(const std::string& command, const std::filesystem::path& config_path, const RunOptions& opt) {
    json cfg;
    try {
        cfg = json::parse(read_file(config_path));
    } catch (const std::exception& e) {
        const auto text = error_json("config", e.what(), kConfigError);
        std::cerr << text;
        return kConfigError;
    }
    return run_command(command, cfg, opt);
}

}  // namespace peum::cli
