#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diracbox/basis.hpp"
#include "diracbox/errors.hpp"
#include "diracbox/evolution.hpp"
#include "diracbox/kick.hpp"
#include "diracbox/observables.hpp"
#include "diracbox/state.hpp"
#include "diracbox/version.hpp"
#include "diracbox/wavepacket.hpp"

namespace diracbox {

// Flat key = value run description. Everything a run needs lives here so that
// the emitted meta.txt can be fed back in to reproduce it exactly.
struct RunConfig {
    double L = 1.0;
    int n_max = 512;
    double epsilon = 0.0;
    double lambda = 1.0; // parser resolves an omitted lambda to L
    double T = 1.0;
    long long n_kicks = 100;
    long long stride = 1;
    StepOrder order = StepOrder::phase_kick;
    KickPhase kick_phase = KickPhase::scalar;
    bool renormalize = false;
    int initial_mode = 1;     // used when initial_packet is false
    bool initial_packet = false;
    double packet_d = 0.01;
    double packet_x0 = 0.5;
    double packet_v0 = 0.0;
    std::array<std::complex<double>, 4> packet_s{{{1, 0}, {0, 0}, {0, 0}, {0, 0}}};
    int density_grid = 1024;
    std::vector<double> density_times;
    long long density_every = 0; // 0 disables kick-count-triggered frames
    std::string out_dir = "out";
    double norm_floor = 0.5;
    double bessel_tol = 1e-14;
    double classifier_peak = 0.9;     // autocorrelation secondary peak for "periodic"
    double classifier_growth = 1.5;   // fitted end/start ratio for "growing"
    double classifier_residual = 0.5; // rms residual over rms spread for "growing"

    bool operator==(const RunConfig&) const = default;
};

inline const char* order_name(StepOrder o) {
    return o == StepOrder::phase_kick ? "phase_kick" : "kick_phase";
}
inline const char* phase_mode_name(KickPhase p) {
    return p == KickPhase::scalar ? "scalar" : "mass_term";
}

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double_value(const std::string& key, const std::string& v, int line) {
    const char* p = v.c_str();
    char* end = nullptr;
    double x = std::strtod(p, &end);
    if (end == p || *end != '\0' || !std::isfinite(x))
        throw ConfigError(key + ": expected a finite number, got '" + v + "'", line);
    return x;
}

inline long long parse_int_value(const std::string& key, const std::string& v, int line) {
    const char* p = v.c_str();
    char* end = nullptr;
    long long x = std::strtoll(p, &end, 10);
    if (end == p || *end != '\0')
        throw ConfigError(key + ": expected an integer, got '" + v + "'", line);
    return x;
}

inline bool parse_bool_value(const std::string& key, const std::string& v, int line) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected on/off, got '" + v + "'", line);
}

inline std::complex<double> parse_complex_value(const std::string& key, const std::string& v, int line) {
    size_t comma = v.find(',');
    if (comma == std::string::npos) return {parse_double_value(key, v, line), 0.0};
    double re = parse_double_value(key, trim(v.substr(0, comma)), line);
    double im = parse_double_value(key, trim(v.substr(comma + 1)), line);
    return {re, im};
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double_value(key, trim(item), line));
    if (out.empty()) throw ConfigError(key + ": empty list", line);
    return out;
}

inline int line_of(const std::map<std::string, int>& lines, const std::string& key) {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
}

inline void validate_config_lines(const RunConfig& c, const std::map<std::string, int>& lines) {
    auto fail = [&](const std::string& key, const std::string& rule) {
        throw ConfigError(key + ": " + rule, line_of(lines, key));
    };
    if (!(std::isfinite(c.L) && c.L > 0.0)) fail("L", "must be positive");
    if (c.n_max < 1 || c.n_max > (1 << 20)) fail("n_max", "must lie in [1, 1048576]");
    if (!(std::isfinite(c.epsilon) && c.epsilon >= 0.0)) fail("epsilon", "must be non-negative");
    if (!(std::isfinite(c.lambda) && c.lambda > 0.0)) fail("lambda", "must be positive");
    if (!(std::isfinite(c.T) && c.T > 0.0)) fail("T", "must be positive");
    if (c.n_kicks < 1) fail("n_kicks", "must be at least 1");
    if (c.stride < 1) fail("stride", "must be at least 1");
    if (c.n_kicks % c.stride != 0) fail("stride", "must divide n_kicks");
    if (!c.initial_packet && (c.initial_mode < 1 || c.initial_mode > c.n_max))
        fail("initial", "mode index must lie in [1, n_max]");
    if (c.initial_packet) {
        if (!(std::isfinite(c.packet_d) && c.packet_d > 0.0)) fail("packet_d", "must be positive");
        if (!(c.packet_x0 > 0.0 && c.packet_x0 < c.L)) fail("packet_x0", "must lie inside (0, L)");
        if (!std::isfinite(c.packet_v0)) fail("packet_v0", "must be finite");
        double w = 0.0;
        for (const auto& s : c.packet_s) w += std::norm(s);
        if (w == 0.0) fail("packet_s1", "spinor template must be nonzero");
    }
    if (c.density_grid < 2) fail("density_grid", "must be at least 2");
    if (c.density_every < 0) fail("density_every", "must be non-negative");
    for (double t : c.density_times) {
        if (!(t >= 0.0 && t <= c.n_kicks * c.T * (1.0 + 1e-12)))
            fail("density_times", "each time must lie in [0, n_kicks*T]");
        double k = t / c.T;
        if (std::abs(k - std::llround(k)) > 1e-6 * std::max(1.0, k))
            fail("density_times", "each time must coincide with a kick boundary (multiple of T)");
    }
    if (!(c.norm_floor >= 0.0 && c.norm_floor < 1.0)) fail("norm_floor", "must lie in [0, 1)");
    if (!(c.bessel_tol > 0.0 && c.bessel_tol <= 1e-2)) fail("bessel_tol", "must lie in (0, 1e-2]");
    if (!(c.classifier_peak > 0.0 && c.classifier_peak <= 1.0)) fail("classifier_peak", "must lie in (0, 1]");
    if (!(c.classifier_growth > 1.0)) fail("classifier_growth", "must exceed 1");
    if (!(c.classifier_residual > 0.0 && c.classifier_residual < 1.0))
        fail("classifier_residual", "must lie in (0, 1)");
    if (c.out_dir.empty()) fail("out_dir", "must not be empty");
}

} // namespace detail

inline void validate_config(const RunConfig& c) { detail::validate_config_lines(c, {}); }

// One `key = value` per line, `#` starts a comment, later assignments win.
// Unknown keys, malformed values and invariant violations all carry the
// offending line number.
inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::map<std::string, int> lines;
    bool lambda_set = false;
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string s = raw;
        size_t hash = s.find('#');
        if (hash != std::string::npos) s.erase(hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", lineno);
        std::string key = detail::trim(s.substr(0, eq));
        std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", lineno);
        if (val.empty()) throw ConfigError(key + ": missing value", lineno);
        lines[key] = lineno;

        if (key == "L") c.L = detail::parse_double_value(key, val, lineno);
        else if (key == "n_max") c.n_max = static_cast<int>(detail::parse_int_value(key, val, lineno));
        else if (key == "epsilon") c.epsilon = detail::parse_double_value(key, val, lineno);
        else if (key == "lambda") { c.lambda = detail::parse_double_value(key, val, lineno); lambda_set = true; }
        else if (key == "T") c.T = detail::parse_double_value(key, val, lineno);
        else if (key == "n_kicks") c.n_kicks = detail::parse_int_value(key, val, lineno);
        else if (key == "stride") c.stride = detail::parse_int_value(key, val, lineno);
        else if (key == "order") {
            if (val == "phase_kick") c.order = StepOrder::phase_kick;
            else if (val == "kick_phase") c.order = StepOrder::kick_phase;
            else throw ConfigError("order: expected phase_kick or kick_phase, got '" + val + "'", lineno);
        } else if (key == "kick_phase") {
            if (val == "scalar") c.kick_phase = KickPhase::scalar;
            else if (val == "mass_term") c.kick_phase = KickPhase::mass_term;
            else throw ConfigError("kick_phase: expected scalar or mass_term, got '" + val + "'", lineno);
        } else if (key == "renormalize") c.renormalize = detail::parse_bool_value(key, val, lineno);
        else if (key == "initial") {
            if (val == "packet") c.initial_packet = true;
            else if (val.rfind("mode:", 0) == 0) {
                c.initial_packet = false;
                c.initial_mode = static_cast<int>(detail::parse_int_value(key, val.substr(5), lineno));
            } else throw ConfigError("initial: expected 'mode:N' or 'packet', got '" + val + "'", lineno);
        } else if (key == "packet_d") c.packet_d = detail::parse_double_value(key, val, lineno);
        else if (key == "packet_x0") c.packet_x0 = detail::parse_double_value(key, val, lineno);
        else if (key == "packet_v0") c.packet_v0 = detail::parse_double_value(key, val, lineno);
        else if (key == "packet_s1") c.packet_s[0] = detail::parse_complex_value(key, val, lineno);
        else if (key == "packet_s2") c.packet_s[1] = detail::parse_complex_value(key, val, lineno);
        else if (key == "packet_s3") c.packet_s[2] = detail::parse_complex_value(key, val, lineno);
        else if (key == "packet_s4") c.packet_s[3] = detail::parse_complex_value(key, val, lineno);
        else if (key == "density_grid") c.density_grid = static_cast<int>(detail::parse_int_value(key, val, lineno));
        else if (key == "density_times") c.density_times = detail::parse_double_list(key, val, lineno);
        else if (key == "density_every") c.density_every = detail::parse_int_value(key, val, lineno);
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "norm_floor") c.norm_floor = detail::parse_double_value(key, val, lineno);
        else if (key == "bessel_tol") c.bessel_tol = detail::parse_double_value(key, val, lineno);
        else if (key == "classifier_peak") c.classifier_peak = detail::parse_double_value(key, val, lineno);
        else if (key == "classifier_growth") c.classifier_growth = detail::parse_double_value(key, val, lineno);
        else if (key == "classifier_residual") c.classifier_residual = detail::parse_double_value(key, val, lineno);
        else throw ConfigError("unknown key '" + key + "'", lineno);
    }
    if (!lambda_set) c.lambda = c.L;
    detail::validate_config_lines(c, lines);
    return c;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
    char buf[128];
    std::string out;
    auto put = [&](const char* key, const std::string& v) {
        out += key;
        out += " = ";
        out += v;
        out += '\n';
    };
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    auto integer = [&](long long x) {
        std::snprintf(buf, sizeof buf, "%lld", x);
        return std::string(buf);
    };
    auto cplx = [&](const std::complex<double>& z) { return num(z.real()) + "," + num(z.imag()); };

    put("L", num(c.L));
    put("n_max", integer(c.n_max));
    put("epsilon", num(c.epsilon));
    put("lambda", num(c.lambda));
    put("T", num(c.T));
    put("n_kicks", integer(c.n_kicks));
    put("stride", integer(c.stride));
    put("order", order_name(c.order));
    put("kick_phase", phase_mode_name(c.kick_phase));
    put("renormalize", c.renormalize ? "on" : "off");
    if (c.initial_packet) {
        put("initial", "packet");
        put("packet_d", num(c.packet_d));
        put("packet_x0", num(c.packet_x0));
        put("packet_v0", num(c.packet_v0));
        put("packet_s1", cplx(c.packet_s[0]));
        put("packet_s2", cplx(c.packet_s[1]));
        put("packet_s3", cplx(c.packet_s[2]));
        put("packet_s4", cplx(c.packet_s[3]));
    } else {
        put("initial", "mode:" + integer(c.initial_mode));
    }
    put("density_grid", integer(c.density_grid));
    if (!c.density_times.empty()) {
        std::string list;
        for (size_t i = 0; i < c.density_times.size(); ++i) {
            if (i) list += ",";
            list += num(c.density_times[i]);
        }
        put("density_times", list);
    }
    put("density_every", integer(c.density_every));
    put("out_dir", c.out_dir);
    put("norm_floor", num(c.norm_floor));
    put("bessel_tol", num(c.bessel_tol));
    put("classifier_peak", num(c.classifier_peak));
    put("classifier_growth", num(c.classifier_growth));
    put("classifier_residual", num(c.classifier_residual));
    return out;
}

// ---------------------------------------------------------------------------
// Regime classification of an energy series.

enum class RegimeTag { periodic, growing, nonperiodic };

inline const char* regime_name(RegimeTag t) {
    switch (t) {
        case RegimeTag::periodic: return "periodic";
        case RegimeTag::growing: return "growing";
        default: return "nonperiodic";
    }
}

struct ClassifierThresholds {
    double autocorr_peak = 0.9;
    double growth = 1.5;
    double residual = 0.5;
};

struct RegimeReport {
    RegimeTag tag = RegimeTag::nonperiodic;
    double slope = 0.0;          // least-squares slope of E_kin vs t
    double fitted_start = 0.0;   // fit evaluated at the first/last sample
    double fitted_end = 0.0;
    double residual_ratio = 0.0; // rms residual / rms spread about the mean
    double autocorr_peak = 0.0;  // best secondary peak of the detrended autocorrelation
    long long peak_lag = 0;
};

// growing: positive trend that dominates the fluctuations and lifts the fitted
// endpoints by the growth factor. periodic: detrended series self-correlates
// above the peak threshold at some nonzero lag. A numerically flat series
// counts as periodic (period-1 convention). Everything else: nonperiodic.
inline RegimeReport classify_regime(const ObservableSeries& series,
                                    const ClassifierThresholds& thr = {}) {
    const size_t n = series.e_kin.size();
    if (n < 200) throw std::invalid_argument("classify_regime: need at least 200 samples");
    if (series.time.size() != n) throw std::invalid_argument("classify_regime: ragged series");

    double st = 0, sy = 0, stt = 0, sty = 0;
    for (size_t i = 0; i < n; ++i) {
        st += series.time[i];
        sy += series.e_kin[i];
        stt += series.time[i] * series.time[i];
        sty += series.time[i] * series.e_kin[i];
    }
    const double den = n * stt - st * st;
    const double slope = den > 0 ? (n * sty - st * sy) / den : 0.0;
    const double intercept = (sy - slope * st) / n;
    const double mean = sy / n;

    double ss_res = 0, ss_tot = 0;
    std::vector<double> resid(n);
    for (size_t i = 0; i < n; ++i) {
        resid[i] = series.e_kin[i] - (intercept + slope * series.time[i]);
        ss_res += resid[i] * resid[i];
        ss_tot += (series.e_kin[i] - mean) * (series.e_kin[i] - mean);
    }

    RegimeReport rep;
    rep.slope = slope;
    rep.fitted_start = intercept + slope * series.time.front();
    rep.fitted_end = intercept + slope * series.time.back();
    rep.residual_ratio = ss_tot > 0 ? std::sqrt(ss_res / ss_tot) : 0.0;

    bool grew = rep.fitted_start > 0 ? rep.fitted_end > thr.growth * rep.fitted_start
                                     : rep.fitted_end > rep.fitted_start;
    if (slope > 0 && rep.residual_ratio < thr.residual && grew) {
        rep.tag = RegimeTag::growing;
        return rep;
    }

    if (std::sqrt(ss_res / n) <= 1e-12 * std::max(1.0, std::abs(mean))) {
        rep.tag = RegimeTag::periodic; // flat to roundoff
        rep.autocorr_peak = 1.0;
        return rep;
    }

    // Biased autocorrelation of the detrended series, normalized to c(0) = 1.
    const size_t max_lag = n / 2;
    std::vector<double> c(max_lag + 1, 0.0);
    for (size_t k = 0; k <= max_lag; ++k) {
        double acc = 0;
        for (size_t i = 0; i + k < n; ++i) acc += resid[i] * resid[i + k];
        c[k] = acc / ss_res;
    }
    for (size_t k = 1; k + 1 <= max_lag; ++k) {
        if (c[k] > c[k - 1] && c[k] >= c[k + 1] && c[k] > rep.autocorr_peak) {
            rep.autocorr_peak = c[k];
            rep.peak_lag = static_cast<long long>(k);
        }
    }
    rep.tag = rep.autocorr_peak > thr.autocorr_peak ? RegimeTag::periodic : RegimeTag::nonperiodic;
    return rep;
}

inline ClassifierThresholds thresholds_from_config(const RunConfig& c) {
    return {c.classifier_peak, c.classifier_growth, c.classifier_residual};
}

// ---------------------------------------------------------------------------
// Presets mirroring the published parameter scans.

struct ScenarioPreset {
    std::string name;
    RunConfig cfg;
    std::string tag; // expected qualitative behavior
};

inline const std::vector<ScenarioPreset>& preset_table() {
    static const std::vector<ScenarioPreset> table = [] {
        std::vector<ScenarioPreset> t;
        auto energy = [&](std::string name, double eps, double T, int n_max, const std::string& tag,
                          double lambda = 1.0) {
            RunConfig c;
            c.L = 1.0;
            c.n_max = n_max;
            c.epsilon = eps;
            c.lambda = lambda;
            c.T = T;
            c.n_kicks = 2000;
            // long-horizon runs: the kick matrix sheds a little norm every
            // period, so keep the state normalized for meaningful E(t)
            c.renormalize = true;
            c.out_dir = name;
            t.push_back({std::move(name), c, tag});
        };
        auto density = [&](std::string name, double eps, double T, int n_max, const std::string& tag) {
            RunConfig c;
            c.L = 1.0;
            c.n_max = n_max;
            c.epsilon = eps;
            c.lambda = 1.0;
            c.T = T;
            c.n_kicks = 500;
            c.renormalize = true;
            c.density_grid = 512;
            c.density_every = 5;
            c.out_dir = name;
            t.push_back({std::move(name), c, tag});
        };
        auto packet = [&](std::string name, double T, std::vector<double> times, const std::string& tag) {
            RunConfig c;
            c.L = 1.0;
            c.n_max = 512;
            c.epsilon = 1.0;
            c.lambda = 1.0;
            c.T = T;
            c.n_kicks = 80;
            c.renormalize = true;
            c.initial_packet = true;
            c.packet_d = 0.01;
            c.packet_x0 = 0.5;
            c.packet_v0 = 0.0;
            c.density_grid = 2048;
            c.density_times = std::move(times);
            c.out_dir = name;
            t.push_back({std::move(name), c, tag});
        };

        energy("fig1_eps0.01", 0.01, 0.47, 512, "periodic");
        energy("fig1_eps0.05", 0.05, 0.47, 512, "periodic");
        energy("fig1_eps0.1", 0.1, 0.47, 512, "periodic");
        energy("fig2_eps0.1", 0.1, 1e-2, 512, "nonperiodic");
        energy("fig2_eps0.5", 0.5, 1e-2, 1024, "nonperiodic");
        energy("fig3_eps0.1", 0.1, 1e-4, 1024, "growing");
        energy("fig3_eps0.5", 0.5, 1e-4, 2560, "growing");
        energy("fig3_eps1", 1.0, 1e-4, 4096, "growing");
        energy("fig4_T0.1", 0.5, 0.1, 1024, "periodic");
        energy("fig4_T1e-2", 0.5, 1e-2, 1024, "nonperiodic");
        energy("fig4_T1e-4", 0.5, 1e-4, 2560, "growing");
        density("fig6_T0.47", 0.1, 0.47, 512, "periodic");
        density("fig6_T1e-2", 0.1, 1e-2, 512, "nonperiodic");
        density("fig6_T1e-4", 0.1, 1e-4, 1024, "growing");
        energy("fig7", 0.1, 100.0, 512, "periodic");
        energy("fig8_eps0.1", 0.1, 1e-4, 2048, "growing", 0.5);
        energy("fig8_eps0.5", 0.5, 1e-4, 4096, "growing", 0.5);
        packet("fig9_packet", 1e-2, {0.0, 0.2, 0.5, 0.8}, "packet_split");
        packet("fig10_packet", 0.25, {0.0, 5.0, 12.5, 20.0}, "packet_revival");
        return t;
    }();
    return table;
}

inline const ScenarioPreset* find_preset(const std::string& name) {
    for (const auto& p : preset_table())
        if (p.name == name) return &p;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Run orchestration and CSV emission.

namespace detail {

inline std::string format_time_label(double t) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", t);
    return buf;
}

template <class WriteBody>
void write_text_file(const std::string& path, WriteBody&& body) {
    std::ofstream out(path, std::ios::binary); // binary: byte-identical output on every platform
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    body(out);
    out.flush();
    if (!out.good()) throw IoError("short write to '" + path + "'");
}

} // namespace detail

inline void write_series_csv(const std::string& path, const ObservableSeries& s) {
    detail::write_text_file(path, [&](std::ofstream& out) {
        out << "kick_index,time,E_kin,E_total,velocity,norm\n";
        char buf[256];
        for (size_t i = 0; i < s.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.kick[i],
                          s.time[i], s.e_kin[i], s.e_total[i], s.velocity[i], s.norm[i]);
            out << buf;
        }
    });
}

inline ObservableSeries read_series_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "kick_index,time,E_kin,E_total,velocity,norm")
        throw IoError(path + ": unexpected series header");
    ObservableSeries s;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        long long k;
        double t, ek, et, v, nn;
        if (std::sscanf(line.c_str(), "%lld,%lg,%lg,%lg,%lg,%lg", &k, &t, &ek, &et, &v, &nn) != 6)
            throw IoError(path + ": malformed row at line " + std::to_string(lineno));
        s.kick.push_back(k);
        s.time.push_back(t);
        s.e_kin.push_back(ek);
        s.e_total.push_back(et);
        s.velocity.push_back(v);
        s.norm.push_back(nn);
    }
    return s;
}

inline void write_density_csv(const std::string& path, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& rho) {
    detail::write_text_file(path, [&](std::ofstream& out) {
        out << "x,rho\n";
        char buf[96];
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[i], rho[i]);
            out << buf;
        }
    });
}

struct RunOptions {
    std::string out_dir;     // overrides cfg.out_dir when non-empty
    std::string preset_name; // recorded in meta.txt when non-empty
    std::string kick_cache;  // binary kick-matrix cache path; built and saved on first use
    bool write_files = true;
};

struct RunResult {
    RunConfig cfg;
    ObservableSeries series;
    std::optional<RegimeReport> regime;
    SpinorState state;
    std::vector<std::string> warnings;
    double max_step_leakage = 0.0;
    std::string out_dir;
};

namespace detail {

inline void write_meta(const std::string& path, const RunConfig& cfg, const RunOptions& opts,
                       const std::optional<RegimeReport>& regime,
                       const std::vector<std::string>& warnings, const std::string& abort_note) {
    write_text_file(path, [&](std::ofstream& out) {
        out << "# diracbox " << DIRACBOX_VERSION << "\n";
        if (!opts.preset_name.empty()) out << "# preset: " << opts.preset_name << "\n";
        if (regime) out << "# regime: " << regime_name(regime->tag) << "\n";
        for (const auto& w : warnings) out << "# warning: " << w << "\n";
        if (!abort_note.empty()) out << "# aborted: " << abort_note << "\n";
        out << serialize_config(cfg);
    });
}

} // namespace detail

inline SpinorState initial_state_from_config(const BoxBasis& basis, const RunConfig& cfg,
                                             std::vector<std::string>* warnings = nullptr) {
    SpinorState st;
    if (cfg.initial_packet) {
        GaussianPacketSpec ps;
        ps.d = cfg.packet_d;
        ps.x0 = cfg.packet_x0;
        ps.v0 = cfg.packet_v0;
        ps.s = cfg.packet_s;
        PacketProjection proj = project_packet(basis, ps);
        st = std::move(proj.state);
        if (warnings)
            warnings->insert(warnings->end(), proj.warnings.begin(), proj.warnings.end());
    } else {
        st = state_from_mode(cfg.n_max, cfg.initial_mode);
    }
    st.renormalize = cfg.renormalize;
    return st;
}

// Evolves the configured scenario and (optionally) writes series.csv,
// density_<t>.csv frames and meta.txt into the output directory. meta.txt is
// itself a valid config reproducing the run.
inline RunResult run_scenario(const RunConfig& cfg_in, const RunOptions& opts = {}) {
    RunConfig cfg = cfg_in;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    validate_config(cfg);

    RunResult res;
    res.cfg = cfg;
    res.out_dir = cfg.out_dir;

    namespace fs = std::filesystem;
    if (opts.write_files) {
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    }

    BoxBasis basis = build_basis(cfg.L, cfg.n_max);
    res.state = initial_state_from_config(basis, cfg, &res.warnings);

    KickParams kp;
    kp.epsilon = cfg.epsilon;
    kp.lambda = cfg.lambda;
    kp.T = cfg.T;
    kp.phase_mode = cfg.kick_phase;
    kp.bessel_tol = cfg.bessel_tol;

    KickOperator op;
    if (!opts.kick_cache.empty() && fs::exists(opts.kick_cache)) {
        op = load_kick_matrix(opts.kick_cache, basis, kp);
    } else {
        op = build_kick_matrix_bessel(basis, kp);
        if (!opts.kick_cache.empty()) save_kick_matrix(opts.kick_cache, op);
    }

    // Density frames are triggered by kick index; explicit times keep their
    // requested label so file names match what was asked for.
    std::map<long long, std::string> frames;
    if (cfg.density_every > 0)
        for (long long k = 0; k <= cfg.n_kicks; k += cfg.density_every)
            frames[k] = detail::format_time_label(k * cfg.T);
    for (double t : cfg.density_times)
        frames[std::llround(t / cfg.T)] = detail::format_time_label(t);

    std::vector<EvolveObserver> observers;
    DensitySampler sampler;
    if (!frames.empty() && opts.write_files) {
        sampler = make_density_sampler(basis, cfg.density_grid);
        observers.push_back([&](long long kick, double, const SpinorState& st) {
            auto it = frames.find(kick);
            if (it == frames.end()) return;
            write_density_csv(cfg.out_dir + "/density_" + it->second + ".csv", sampler.x,
                              sampler.rho(st.A));
        });
    }

    EvolveOptions eo;
    eo.stride = cfg.stride;
    eo.order = cfg.order;
    eo.norm_floor = cfg.norm_floor;
    try {
        res.series = evolve(res.state, op, basis, cfg.n_kicks, eo, observers);
    } catch (const NormFloorError& e) {
        if (opts.write_files)
            detail::write_meta(cfg.out_dir + "/meta.txt", cfg, opts, std::nullopt, res.warnings,
                               e.what());
        throw;
    }

    for (double d : res.state.leakage_log) res.max_step_leakage = std::max(res.max_step_leakage, d);
    if (res.series.size() >= 200)
        res.regime = classify_regime(res.series, thresholds_from_config(cfg));

    if (opts.write_files) {
        write_series_csv(cfg.out_dir + "/series.csv", res.series);
        detail::write_meta(cfg.out_dir + "/meta.txt", cfg, opts, res.regime, res.warnings, "");
    }
    return res;
}

} // namespace diracbox
