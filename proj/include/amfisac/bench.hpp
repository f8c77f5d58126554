// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file bench.hpp
 * @brief Monte Carlo and enumeration estimators, JSON experiment configs,
 *        experiment runners and CSV output.
 */

#include "amfisac/dpd.hpp"
#include "amfisac/dpi.hpp"
#include "amfisac/rmt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace amfisac {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Parallel map with a fixed reduction order
// ---------------------------------------------------------------------------

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/**
 * Evaluate fn(i) for i in [0, count) on `threads` workers and return the
 * results in index order. If any call throws, the exception from the lowest
 * index is rethrown.
 */
template <class Fn>
auto parallel_map(std::size_t count, unsigned threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(count);
    std::vector<std::exception_ptr> errors(count);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1)));
    auto body = [&](unsigned w) {
        for (std::size_t i = w; i < count; i += workers) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long long trials = 0;
    std::uint64_t seed = 0;
};

/// Mean and standard error, accumulated in index order.
inline McEstimate summarize(const std::vector<double>& samples, std::uint64_t seed) {
    McEstimate e;
    e.trials = static_cast<long long>(samples.size());
    e.seed = seed;
    if (samples.empty()) return e;
    double sum = 0.0;
    for (double v : samples) sum += v;
    e.mean = sum / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double v : samples) ss += (v - e.mean) * (v - e.mean);
        const double var = ss / static_cast<double>(samples.size() - 1);
        e.stderr_ = std::sqrt(var / static_cast<double>(samples.size()));
    }
    return e;
}

/// Stream ids for per-trial payload draws; scenario draws use a disjoint range.
inline constexpr std::uint64_t kScenarioStreamBase = 1ULL << 48;

/// Payload stream for trial t of clutter realization r.
inline std::uint64_t trial_stream(int r, std::size_t t) {
    return (static_cast<std::uint64_t>(r) << 32) + static_cast<std::uint64_t>(t);
}

inline CVector draw_payload(const Scenario& s, const ModulationBasis& basis, const Constellation& c,
                            std::uint64_t seed, std::uint64_t trial) {
    SeededRng rng(seed, trial);
    return std::sqrt(s.P_d) * basis.modulate(sample_symbols(c, s.n, rng));
}

/// Per-trial SCNR samples for a pilot that may depend on the payload.
inline std::vector<double> scnr_samples(const Scenario& s, const ModulationBasis& basis, const Constellation& c,
                                        const std::function<CVector(const CVector&)>& pilot, long long trials,
                                        std::uint64_t seed, unsigned threads) {
    if (trials < 1) throw Error(ErrorCode::ConfigError, "trials must be >= 1");
    const Channel h = build_channel(s);
    return parallel_map(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        const CVector x_d = draw_payload(s, basis, c, seed, t);
        return instantaneous_scnr(h, s.beta0, s.sigma_n2, pilot(x_d) + x_d).gamma;
    });
}

inline McEstimate empirical_avg_scnr(const Scenario& s, const ModulationBasis& basis, const Constellation& c,
                                     const CVector& x_p, long long trials, std::uint64_t seed, unsigned threads = 1) {
    if (x_p.size() != s.n) throw Error(ErrorCode::DimensionMismatch, "empirical_avg_scnr: pilot length");
    return summarize(scnr_samples(
                         s, basis, c, [&](const CVector&) { return x_p; }, trials, seed, threads),
                     seed);
}

/// Exact mean of γ over all order^N equiprobable payloads.
inline double exhaustive_avg_scnr(const Scenario& s, const ModulationBasis& basis, const Constellation& c,
                                  const CVector& x_p) {
    if (!c.finite()) throw Error(ErrorCode::UnsupportedOrder, "exhaustive_avg_scnr: constellation is not finite");
    const double count = std::pow(static_cast<double>(c.alphabet.size()), static_cast<double>(s.n));
    if (count > 1e6) throw Error(ErrorCode::TooLarge, "exhaustive_avg_scnr: order^N exceeds 1e6");
    const Channel h = build_channel(s);
    const std::size_t m = c.alphabet.size();
    std::vector<std::size_t> digits(static_cast<std::size_t>(s.n), 0);
    CVector sym(s.n);
    double sum = 0.0;
    const auto total = static_cast<std::size_t>(count);
    for (std::size_t k = 0; k < total; ++k) {
        for (Eigen::Index i = 0; i < s.n; ++i) sym(i) = c.alphabet[digits[static_cast<std::size_t>(i)]];
        const CVector x = x_p + std::sqrt(s.P_d) * basis.modulate(sym);
        sum += instantaneous_scnr(h, s.beta0, s.sigma_n2, x).gamma;
        for (std::size_t i = 0; i < digits.size(); ++i) {
            if (++digits[i] < m) break;
            digits[i] = 0;
        }
    }
    return sum / count;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class PilotScheme { AllOne, Dpd, Dpi, Custom };

inline std::string to_string(PilotScheme p) {
    switch (p) {
    case PilotScheme::AllOne: return "allone";
    case PilotScheme::Dpd: return "dpd";
    case PilotScheme::Dpi: return "dpi";
    case PilotScheme::Custom: return "custom";
    }
    return "?";
}

struct PathSpec {
    long long bin = 0;
    std::optional<double> distance_m;
    std::optional<cdouble> gain;
};

struct BasisSpec {
    BasisKind kind = BasisKind::OFDM;
    std::optional<double> c1;
    std::optional<double> c2;

    ModulationBasis make(Eigen::Index n) const {
        if (kind != BasisKind::AFDM) return make_basis(kind, n);
        const double nn = static_cast<double>(n);
        return make_basis(kind, n, c1.value_or(1.0 / (4.0 * nn)), c2.value_or(1.0 / (2.0 * nn)));
    }
};

struct ConstellationSpec {
    ConstellationKind kind = ConstellationKind::PSK;
    int order = 4;

    Constellation make() const { return make_constellation(kind, kind == ConstellationKind::Gaussian ? 0 : order); }
};

struct SweepSpec {
    std::optional<std::vector<long long>> N;
    std::optional<std::vector<int>> Q;
    std::optional<std::vector<double>> pilot_power_dbm;
    std::optional<std::vector<ConstellationSpec>> constellations;
    std::optional<std::vector<BasisSpec>> bases;
};

struct ExperimentConfig {
    int schema = 1;
    std::string experiment;
    std::uint64_t seed = 1;
    long long trials = 1000;
    unsigned threads = 0;
    std::string output;

    long long N = 16;
    double noise_dbm = -90.0;
    double pilot_power_dbm = 20.0;
    double data_power_dbm = 30.0;
    PathSpec target{10, 35.0, std::nullopt};
    std::vector<PathSpec> clutter;
    ClutterGeometry geometry;
    bool shadowing = true;
    int clutter_realizations = 1;

    BasisSpec basis;
    ConstellationSpec constellation;
    PilotScheme pilot = PilotScheme::AllOne;
    std::vector<cdouble> pilot_vector;
    FixedPointVariant variant = FixedPointVariant::Rotated;

    SweepSpec sweep;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) config_fail(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) config_fail(where + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
T get_as(const json& j, const std::string& where) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        config_fail(where + ": " + e.what());
    }
}

inline double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) config_fail(where + ": expected a number");
    return j.get<double>();
}

inline long long get_integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) config_fail(where + ": expected an integer");
    return j.get<long long>();
}

inline cdouble get_complex(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) config_fail(where + ": expected [re, im]");
    return {get_number(j[0], where), get_number(j[1], where)};
}

inline json complex_json(cdouble z) { return json::array({z.real(), z.imag()}); }

inline BasisKind parse_basis_kind(const std::string& s, const std::string& where) {
    if (s == "SC") return BasisKind::SC;
    if (s == "OFDM") return BasisKind::OFDM;
    if (s == "AFDM") return BasisKind::AFDM;
    config_fail(where + ": unknown basis '" + s + "'");
}

inline ConstellationKind parse_constellation_kind(const std::string& s, const std::string& where) {
    if (s == "PSK") return ConstellationKind::PSK;
    if (s == "QAM") return ConstellationKind::QAM;
    if (s == "Gaussian") return ConstellationKind::Gaussian;
    config_fail(where + ": unknown constellation '" + s + "'");
}

inline PathSpec parse_path(const json& j, const std::string& where) {
    check_keys(j, where, {"bin", "distance_m", "gain"});
    if (!j.contains("bin")) config_fail(where + ": missing 'bin'");
    PathSpec p;
    p.bin = get_integer(j["bin"], where + ".bin");
    if (j.contains("distance_m")) {
        p.distance_m = get_number(j["distance_m"], where + ".distance_m");
        if (!(*p.distance_m > 0.0)) config_fail(where + ".distance_m must be > 0");
    }
    if (j.contains("gain")) p.gain = get_complex(j["gain"], where + ".gain");
    if (p.distance_m && p.gain) config_fail(where + ": give either 'distance_m' or 'gain', not both");
    return p;
}

inline json path_json(const PathSpec& p) {
    json j = {{"bin", p.bin}};
    if (p.distance_m) j["distance_m"] = *p.distance_m;
    if (p.gain) j["gain"] = complex_json(*p.gain);
    return j;
}

inline BasisSpec parse_basis(const json& j, const std::string& where) {
    check_keys(j, where, {"kind", "c1", "c2"});
    if (!j.contains("kind")) config_fail(where + ": missing 'kind'");
    BasisSpec b;
    b.kind = parse_basis_kind(get_as<std::string>(j["kind"], where + ".kind"), where);
    if (j.contains("c1")) b.c1 = get_number(j["c1"], where + ".c1");
    if (j.contains("c2")) b.c2 = get_number(j["c2"], where + ".c2");
    if ((b.c1 || b.c2) && b.kind != BasisKind::AFDM) config_fail(where + ": c1/c2 apply to AFDM only");
    return b;
}

inline json basis_json(const BasisSpec& b) {
    json j = {{"kind", to_string(b.kind)}};
    if (b.c1) j["c1"] = *b.c1;
    if (b.c2) j["c2"] = *b.c2;
    return j;
}

inline ConstellationSpec parse_constellation(const json& j, const std::string& where) {
    check_keys(j, where, {"kind", "order"});
    if (!j.contains("kind")) config_fail(where + ": missing 'kind'");
    ConstellationSpec c;
    c.kind = parse_constellation_kind(get_as<std::string>(j["kind"], where + ".kind"), where);
    if (c.kind == ConstellationKind::Gaussian) {
        if (j.contains("order")) config_fail(where + ": Gaussian takes no 'order'");
        c.order = 0;
    } else {
        if (!j.contains("order")) config_fail(where + ": missing 'order'");
        c.order = static_cast<int>(get_integer(j["order"], where + ".order"));
    }
    try {
        c.make();
    } catch (const Error& e) {
        config_fail(where + ": " + e.what());
    }
    return c;
}

inline json constellation_json(const ConstellationSpec& c) {
    json j = {{"kind", to_string(c.kind)}};
    if (c.kind != ConstellationKind::Gaussian) j["order"] = c.order;
    return j;
}

} // namespace detail

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "range-profile", "validate-rmt", "compare-constellations", "compare-bases", "dpd-convergence",
        "dpd-vs-Q",      "dpi-convergence", "dpi-vs-power",       "oracle-suite"};
    return names;
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using namespace detail;
    check_keys(j, "config", {"schema", "experiment", "seed", "trials", "threads", "output", "scenario", "basis",
                             "constellation", "pilot", "fixed_point_variant", "sweep"});
    ExperimentConfig c;
    if (!j.contains("schema")) config_fail("config: missing 'schema'");
    c.schema = static_cast<int>(get_integer(j["schema"], "schema"));
    if (c.schema != 1) config_fail("config: unsupported schema " + std::to_string(c.schema));
    if (!j.contains("experiment")) config_fail("config: missing 'experiment'");
    c.experiment = get_as<std::string>(j["experiment"], "experiment");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            config_fail("seed: expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("trials")) c.trials = get_integer(j["trials"], "trials");
    if (c.trials < 1) config_fail("trials must be >= 1");
    if (j.contains("threads")) {
        const long long t = get_integer(j["threads"], "threads");
        if (t < 0) config_fail("threads must be >= 0");
        c.threads = static_cast<unsigned>(t);
    }
    if (j.contains("output")) c.output = get_as<std::string>(j["output"], "output");

    if (j.contains("scenario")) {
        const json& s = j["scenario"];
        check_keys(s, "scenario", {"N", "noise_dbm", "pilot_power_dbm", "data_power_dbm", "target", "clutter",
                                   "geometry", "clutter_realizations"});
        if (s.contains("N")) c.N = get_integer(s["N"], "scenario.N");
        if (c.N < 1) config_fail("scenario.N must be >= 1");
        if (s.contains("noise_dbm")) c.noise_dbm = get_number(s["noise_dbm"], "scenario.noise_dbm");
        if (s.contains("pilot_power_dbm")) c.pilot_power_dbm = get_number(s["pilot_power_dbm"], "scenario.pilot_power_dbm");
        if (s.contains("data_power_dbm")) c.data_power_dbm = get_number(s["data_power_dbm"], "scenario.data_power_dbm");
        if (s.contains("target")) c.target = parse_path(s["target"], "scenario.target");
        if (s.contains("clutter")) {
            if (!s["clutter"].is_array()) config_fail("scenario.clutter: expected an array");
            for (std::size_t i = 0; i < s["clutter"].size(); ++i)
                c.clutter.push_back(parse_path(s["clutter"][i], "scenario.clutter[" + std::to_string(i) + "]"));
        }
        if (s.contains("geometry")) {
            const json& g = s["geometry"];
            check_keys(g, "scenario.geometry", {"a", "b", "shadowing_db", "d_min", "d_max", "shadowing"});
            if (g.contains("a")) c.geometry.a = get_number(g["a"], "geometry.a");
            if (g.contains("b")) c.geometry.b = get_number(g["b"], "geometry.b");
            if (g.contains("shadowing_db")) c.geometry.sigma_eps_db = get_number(g["shadowing_db"], "geometry.shadowing_db");
            if (g.contains("d_min")) c.geometry.d_min = get_number(g["d_min"], "geometry.d_min");
            if (g.contains("d_max")) c.geometry.d_max = get_number(g["d_max"], "geometry.d_max");
            if (g.contains("shadowing")) c.shadowing = get_as<bool>(g["shadowing"], "geometry.shadowing");
            if (!(c.geometry.d_min > 0.0 && c.geometry.d_max >= c.geometry.d_min))
                config_fail("scenario.geometry: need 0 < d_min <= d_max");
        }
        if (s.contains("clutter_realizations"))
            c.clutter_realizations = static_cast<int>(get_integer(s["clutter_realizations"], "scenario.clutter_realizations"));
        if (c.clutter_realizations < 1) config_fail("scenario.clutter_realizations must be >= 1");
    }
    if (j.contains("basis")) c.basis = parse_basis(j["basis"], "basis");
    if (j.contains("constellation")) c.constellation = parse_constellation(j["constellation"], "constellation");
    if (j.contains("pilot")) {
        const json& p = j["pilot"];
        check_keys(p, "pilot", {"scheme", "vector"});
        if (!p.contains("scheme")) config_fail("pilot: missing 'scheme'");
        const auto scheme = get_as<std::string>(p["scheme"], "pilot.scheme");
        if (scheme == "allone") c.pilot = PilotScheme::AllOne;
        else if (scheme == "dpd") c.pilot = PilotScheme::Dpd;
        else if (scheme == "dpi") c.pilot = PilotScheme::Dpi;
        else if (scheme == "custom") c.pilot = PilotScheme::Custom;
        else config_fail("pilot.scheme: unknown scheme '" + scheme + "'");
        if (p.contains("vector")) {
            if (c.pilot != PilotScheme::Custom) config_fail("pilot.vector applies to the custom scheme only");
            if (!p["vector"].is_array()) config_fail("pilot.vector: expected an array of [re, im]");
            for (std::size_t i = 0; i < p["vector"].size(); ++i)
                c.pilot_vector.push_back(get_complex(p["vector"][i], "pilot.vector[" + std::to_string(i) + "]"));
        }
        if (c.pilot == PilotScheme::Custom && c.pilot_vector.empty()) config_fail("pilot: custom scheme needs 'vector'");
    }
    if (j.contains("fixed_point_variant")) {
        const auto v = get_as<std::string>(j["fixed_point_variant"], "fixed_point_variant");
        if (v == "rotated") c.variant = FixedPointVariant::Rotated;
        else if (v == "as-stated") c.variant = FixedPointVariant::AsStated;
        else config_fail("fixed_point_variant: expected 'rotated' or 'as-stated'");
    }
    if (j.contains("sweep")) {
        const json& w = j["sweep"];
        check_keys(w, "sweep", {"N", "Q", "pilot_power_dbm", "constellations", "bases"});
        auto array = [&](const char* key) -> const json& {
            if (!w[key].is_array()) config_fail(std::string("sweep.") + key + ": expected an array");
            return w[key];
        };
        if (w.contains("N")) {
            std::vector<long long> v;
            for (const auto& e : array("N")) {
                v.push_back(get_integer(e, "sweep.N"));
                if (v.back() < 1) config_fail("sweep.N entries must be >= 1");
            }
            c.sweep.N = v;
        }
        if (w.contains("Q")) {
            std::vector<int> v;
            for (const auto& e : array("Q")) {
                v.push_back(static_cast<int>(get_integer(e, "sweep.Q")));
                if (v.back() < 0) config_fail("sweep.Q entries must be >= 0");
            }
            c.sweep.Q = v;
        }
        if (w.contains("pilot_power_dbm")) {
            std::vector<double> v;
            for (const auto& e : array("pilot_power_dbm")) v.push_back(get_number(e, "sweep.pilot_power_dbm"));
            c.sweep.pilot_power_dbm = v;
        }
        if (w.contains("constellations")) {
            std::vector<ConstellationSpec> v;
            for (const auto& e : array("constellations")) v.push_back(parse_constellation(e, "sweep.constellations"));
            c.sweep.constellations = v;
        }
        if (w.contains("bases")) {
            std::vector<BasisSpec> v;
            for (const auto& e : array("bases")) v.push_back(parse_basis(e, "sweep.bases"));
            c.sweep.bases = v;
        }
    }
    if (std::find(experiment_names().begin(), experiment_names().end(), c.experiment) == experiment_names().end())
        throw Error(ErrorCode::UnknownExperiment, "unknown experiment '" + c.experiment + "'");
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Serialize with every field explicit; parse_config(config_to_json(c)) reproduces c.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    using namespace detail;
    json clutter = json::array();
    for (const auto& p : c.clutter) clutter.push_back(path_json(p));
    json j = {
        {"schema", c.schema},
        {"experiment", c.experiment},
        {"seed", c.seed},
        {"trials", c.trials},
        {"threads", c.threads},
        {"output", c.output},
        {"scenario",
         {{"N", c.N},
          {"noise_dbm", c.noise_dbm},
          {"pilot_power_dbm", c.pilot_power_dbm},
          {"data_power_dbm", c.data_power_dbm},
          {"target", path_json(c.target)},
          {"clutter", clutter},
          {"geometry",
           {{"a", c.geometry.a},
            {"b", c.geometry.b},
            {"shadowing_db", c.geometry.sigma_eps_db},
            {"d_min", c.geometry.d_min},
            {"d_max", c.geometry.d_max},
            {"shadowing", c.shadowing}}},
          {"clutter_realizations", c.clutter_realizations}}},
        {"basis", basis_json(c.basis)},
        {"constellation", constellation_json(c.constellation)},
        {"fixed_point_variant", c.variant == FixedPointVariant::Rotated ? "rotated" : "as-stated"},
    };
    json pilot = {{"scheme", to_string(c.pilot)}};
    if (c.pilot == PilotScheme::Custom) {
        json v = json::array();
        for (auto z : c.pilot_vector) v.push_back(complex_json(z));
        pilot["vector"] = v;
    }
    j["pilot"] = pilot;
    json sweep = json::object();
    if (c.sweep.N) sweep["N"] = *c.sweep.N;
    if (c.sweep.Q) sweep["Q"] = *c.sweep.Q;
    if (c.sweep.pilot_power_dbm) sweep["pilot_power_dbm"] = *c.sweep.pilot_power_dbm;
    if (c.sweep.constellations) {
        json a = json::array();
        for (const auto& e : *c.sweep.constellations) a.push_back(constellation_json(e));
        sweep["constellations"] = a;
    }
    if (c.sweep.bases) {
        json a = json::array();
        for (const auto& e : *c.sweep.bases) a.push_back(basis_json(e));
        sweep["bases"] = a;
    }
    j["sweep"] = sweep;
    return j;
}

// ---------------------------------------------------------------------------
// Scenario construction
// ---------------------------------------------------------------------------

/**
 * Scenario for one sweep point. Bins are reduced mod N; the first `q` clutter
 * entries are used. Gains not given explicitly are drawn from the path-loss
 * model on the stream for `realization`, in a fixed order (target, then each
 * clutter path), so every sweep point sees the same draws.
 */
inline Scenario make_scenario(const ExperimentConfig& c, long long n, int q, int realization = 0) {
    if (q > static_cast<int>(c.clutter.size()))
        throw Error(ErrorCode::ConfigError, "Q = " + std::to_string(q) + " exceeds the " +
                                                std::to_string(c.clutter.size()) + " configured clutter paths");
    SeededRng rng(c.seed, kScenarioStreamBase + static_cast<std::uint64_t>(realization));
    auto draw = [&](const PathSpec& p) {
        // Both draws are always consumed so later paths do not shift when one gain is fixed.
        const double d = p.distance_m ? *p.distance_m : draw_distances(c.geometry, 1, rng)[0];
        const cdouble beta = sample_clutter_gains(c.geometry, {d}, rng, c.shadowing)[0];
        return p.gain ? *p.gain : beta;
    };
    Scenario s;
    s.n = n;
    s.sigma_n2 = from_dbm(c.noise_dbm);
    s.P_p = from_dbm(c.pilot_power_dbm);
    s.P_d = from_dbm(c.data_power_dbm);
    s.n0 = wrap_index(c.target.bin, n);
    s.beta0 = draw(c.target);
    for (int i = 0; i < static_cast<int>(c.clutter.size()); ++i) {
        const cdouble beta = draw(c.clutter[static_cast<std::size_t>(i)]);
        if (i < q) s.clutter.push_back({beta, wrap_index(c.clutter[static_cast<std::size_t>(i)].bin, n)});
    }
    s.validate();
    return s;
}

inline CVector config_pilot_vector(const ExperimentConfig& c, long long n) {
    if (static_cast<long long>(c.pilot_vector.size()) != n)
        throw Error(ErrorCode::ConfigError, "pilot.vector has " + std::to_string(c.pilot_vector.size()) +
                                                " entries, N = " + std::to_string(n));
    CVector v(n);
    for (long long i = 0; i < n; ++i) v(i) = c.pilot_vector[static_cast<std::size_t>(i)];
    return v;
}

/// Payload-independent pilot for the configured scheme (all-one, custom or DPI).
inline CVector fixed_pilot(const ExperimentConfig& c, const Scenario& s, const ModulationBasis& basis,
                           const Constellation& con) {
    switch (c.pilot) {
    case PilotScheme::AllOne: return all_one_pilot(s.n, s.P_p);
    case PilotScheme::Custom: return config_pilot_vector(c, s.n);
    case PilotScheme::Dpi: {
        DpiOptions o;
        o.seed = c.seed;
        o.variant = c.variant;
        return dpi_optimize(s, basis, con, o).x_p_factor;
    }
    case PilotScheme::Dpd: break;
    }
    throw Error(ErrorCode::ConfigError, "the dpd pilot depends on the payload");
}

/// Empirical average SCNR for the configured pilot scheme at the config's base point.
inline McEstimate empirical_avg_scnr(const ExperimentConfig& c, unsigned threads) {
    const Scenario s = make_scenario(c, c.N, static_cast<int>(c.clutter.size()));
    const auto basis = c.basis.make(c.N);
    const auto con = c.constellation.make();
    if (c.pilot == PilotScheme::Dpd) {
        auto pilot = [&](const CVector& x_d) { return dpd_optimize(s, x_d).x_p; };
        return summarize(scnr_samples(s, basis, con, pilot, c.trials, c.seed, threads), c.seed);
    }
    return empirical_avg_scnr(s, basis, con, fixed_pilot(c, s, basis, con), c.trials, c.seed, threads);
}

inline double exhaustive_avg_scnr(const ExperimentConfig& c) {
    const Scenario s = make_scenario(c, c.N, static_cast<int>(c.clutter.size()));
    const auto basis = c.basis.make(c.N);
    const auto con = c.constellation.make();
    if (c.pilot == PilotScheme::Dpd) throw Error(ErrorCode::ConfigError, "exhaustive_avg_scnr: dpd pilot unsupported");
    return exhaustive_avg_scnr(s, basis, con, fixed_pilot(c, s, basis, con));
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ResultRow {
    std::string experiment;
    long long N = 0;
    int Q = 0;
    std::string basis;
    std::string constellation;
    std::string pilot_scheme;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
    double stderr_ = 0.0;
};

inline constexpr const char* kCsvHeader = "experiment,N,Q,basis,constellation,pilot_scheme,seed,metric,value,stderr";

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.experiment + ',' + std::to_string(r.N) + ',' + std::to_string(r.Q) + ',' + r.basis + ',' +
               r.constellation + ',' + r.pilot_scheme + ',' + std::to_string(r.seed) + ',' + r.metric + ',' +
               format_real(r.value) + ',' + format_real(r.stderr_) + '\n';
    }
    return out;
}

/// Write via a temporary file in the same directory, then rename over the target.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create directory for '" + path + "': " + ec.message());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot rename onto '" + path + "'");
    }
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

namespace detail {

struct RowFactory {
    const ExperimentConfig& cfg;
    std::vector<ResultRow>& rows;

    void add(long long n, int q, const std::string& basis, const std::string& con, const std::string& pilot,
             const std::string& metric, double value, double se = 0.0) const {
        rows.push_back({cfg.experiment, n, q, basis, con, pilot, cfg.seed, metric, value, se});
    }
};

inline std::vector<long long> sweep_n(const ExperimentConfig& c) { return c.sweep.N.value_or(std::vector<long long>{c.N}); }
inline std::vector<int> sweep_q(const ExperimentConfig& c) {
    return c.sweep.Q.value_or(std::vector<int>{static_cast<int>(c.clutter.size())});
}
inline std::vector<double> sweep_pp(const ExperimentConfig& c) {
    return c.sweep.pilot_power_dbm.value_or(std::vector<double>{c.pilot_power_dbm});
}
inline std::vector<ConstellationSpec> sweep_constellations(const ExperimentConfig& c, bool default_all) {
    if (c.sweep.constellations) return *c.sweep.constellations;
    if (default_all)
        return {{ConstellationKind::PSK, 4}, {ConstellationKind::QAM, 16}, {ConstellationKind::Gaussian, 0}};
    return {c.constellation};
}
inline std::vector<BasisSpec> sweep_bases(const ExperimentConfig& c, bool default_all) {
    if (c.sweep.bases) return *c.sweep.bases;
    if (default_all) return {{BasisKind::SC, {}, {}}, {BasisKind::OFDM, {}, {}}, {BasisKind::AFDM, {}, {}}};
    return {c.basis};
}

inline std::string scheme_label(const ExperimentConfig& c) { return to_string(c.pilot); }

/// Deterministic and Monte Carlo average SCNR over the (N, constellation, basis) grid.
inline void run_avg_scnr_grid(const ExperimentConfig& c, unsigned threads, bool all_constellations,
                              bool all_bases, std::vector<ResultRow>& rows) {
    RowFactory out{c, rows};
    const int q = static_cast<int>(c.clutter.size());
    for (long long n : sweep_n(c)) {
        for (const auto& bs : sweep_bases(c, all_bases)) {
            const auto basis = bs.make(n);
            for (const auto& cs : sweep_constellations(c, all_constellations)) {
                const auto con = cs.make();
                std::vector<double> theory(static_cast<std::size_t>(c.clutter_realizations));
                std::vector<double> ub(theory.size());
                std::vector<McEstimate> mc(theory.size());
                for (int r = 0; r < c.clutter_realizations; ++r) {
                    const Scenario s = make_scenario(c, n, q, r);
                    const CVector x_p = fixed_pilot(c, s, basis, con);
                    const CMatrix omega = x_p * x_p.adjoint();
                    const auto rep = AvgScnrModel(s, basis, con, c.variant).evaluate(omega);
                    theory[static_cast<std::size_t>(r)] = rep.gamma_bar;
                    ub[static_cast<std::size_t>(r)] = rep.gamma_ub;
                    mc[static_cast<std::size_t>(r)] =
                        empirical_avg_scnr(s, basis, con, x_p, c.trials,
                                           c.seed + static_cast<std::uint64_t>(r), threads);
                }
                double t = 0.0, u = 0.0, m = 0.0, v = 0.0, err = 0.0;
                const double rr = static_cast<double>(c.clutter_realizations);
                for (std::size_t r = 0; r < theory.size(); ++r) {
                    t += theory[r] / rr;
                    u += ub[r] / rr;
                    m += mc[r].mean / rr;
                    v += mc[r].stderr_ * mc[r].stderr_ / (rr * rr);
                    err += std::abs(mc[r].mean - theory[r]) / theory[r] / rr;
                }
                const std::string bl = to_string(bs.kind), cl = con.label(), pl = scheme_label(c);
                out.add(n, q, bl, cl, pl, "gamma_bar_theory", t);
                out.add(n, q, bl, cl, pl, "gamma_bar_empirical", m, std::sqrt(v));
                out.add(n, q, bl, cl, pl, "gamma_bar_upper_bound", u);
                out.add(n, q, bl, cl, pl, "relative_error", err);
            }
        }
    }
}

inline void run_range_profile(const ExperimentConfig& c, std::vector<ResultRow>& rows) {
    RowFactory out{c, rows};
    const int q = static_cast<int>(c.clutter.size());
    const auto con = c.constellation.make();
    for (long long n : sweep_n(c)) {
        const auto basis = c.basis.make(n);
        const Scenario s = make_scenario(c, n, q);
        const CVector x_d = draw_payload(s, basis, con, c.seed, 0);
        const CVector x_p = c.pilot == PilotScheme::Dpd ? dpd_optimize(s, x_d).x_p : fixed_pilot(c, s, basis, con);
        const CVector x = x_p + x_d;
        const auto mf = range_profile(s, x, FilterKind::MF);
        const auto amf = range_profile(s, x, FilterKind::AMF);
        const std::string bl = to_string(basis.kind), cl = con.label(), pl = scheme_label(c);
        for (std::size_t k = 0; k < mf.bins.size(); ++k)
            out.add(n, q, bl, cl, pl, "mf_power_db@" + std::to_string(mf.bins[k]), mf.power_db[k]);
        for (std::size_t k = 0; k < amf.bins.size(); ++k)
            out.add(n, q, bl, cl, pl, "amf_power_db@" + std::to_string(amf.bins[k]), amf.power_db[k]);
        for (const auto& p : s.clutter) {
            const auto k = static_cast<std::size_t>(p.bin);
            out.add(n, q, bl, cl, pl, "clutter_rejection_db@" + std::to_string(p.bin),
                    mf.power_db[k] - amf.power_db[k]);
        }
    }
}

/// Pads a trace with its last value to `len` entries.
inline std::vector<double> padded(const std::vector<double>& v, std::size_t len) {
    std::vector<double> out(v);
    if (out.empty()) out.push_back(0.0);
    while (out.size() < len) out.push_back(out.back());
    return out;
}

inline void emit_trace_rows(const RowFactory& out, long long n, int q, const std::string& bl, const std::string& cl,
                            const std::string& pl, const std::vector<std::vector<double>>& traces) {
    std::size_t len = 0;
    for (const auto& t : traces) len = std::max(len, t.size());
    std::vector<std::vector<double>> p;
    for (const auto& t : traces) p.push_back(padded(t, len));
    for (std::size_t k = 0; k < len; ++k) {
        std::vector<double> col;
        for (const auto& t : p) col.push_back(t[k]);
        const auto e = summarize(col, 0);
        out.add(n, q, bl, cl, pl, "objective@" + std::to_string(k), e.mean, e.stderr_);
    }
}

inline void run_dpd_convergence(const ExperimentConfig& c, unsigned threads, std::vector<ResultRow>& rows) {
    RowFactory out{c, rows};
    const auto con = c.constellation.make();
    for (long long n : sweep_n(c)) {
        const auto basis = c.basis.make(n);
        for (int q : sweep_q(c)) {
            std::vector<std::vector<double>> traces;
            std::vector<double> iters, conv;
            for (int r = 0; r < c.clutter_realizations; ++r) {
                const Scenario s = make_scenario(c, n, q, r);
                const auto states = parallel_map(static_cast<std::size_t>(c.trials), threads, [&](std::size_t t) {
                    return dpd_optimize(s, draw_payload(s, basis, con, c.seed, trial_stream(r, t)));
                });
                for (const auto& st : states) {
                    traces.push_back(st.objective_trace);
                    iters.push_back(st.iterations);
                    conv.push_back(st.converged ? 1.0 : 0.0);
                }
            }
            const std::string bl = to_string(basis.kind), cl = con.label();
            emit_trace_rows(out, n, q, bl, cl, "dpd", traces);
            const auto it = summarize(iters, 0);
            out.add(n, q, bl, cl, "dpd", "iterations", it.mean, it.stderr_);
            out.add(n, q, bl, cl, "dpd", "converged_fraction", summarize(conv, 0).mean);
        }
    }
}

inline void run_dpd_vs_q(const ExperimentConfig& c, unsigned threads, std::vector<ResultRow>& rows) {
    RowFactory out{c, rows};
    const auto con = c.constellation.make();
    for (long long n : sweep_n(c)) {
        const auto basis = c.basis.make(n);
        for (int q : sweep_q(c)) {
            std::vector<double> dpd, allone, ub;
            for (int r = 0; r < c.clutter_realizations; ++r) {
                const Scenario s = make_scenario(c, n, q, r);
                const Channel h = build_channel(s);
                const CVector ao = all_one_pilot(n, s.P_p);
                struct Trial {
                    double dpd, allone, ub;
                };
                const auto res = parallel_map(static_cast<std::size_t>(c.trials), threads, [&](std::size_t t) {
                    const CVector x_d = draw_payload(s, basis, con, c.seed, trial_stream(r, t));
                    const auto st = dpd_optimize(s, x_d);
                    return Trial{instantaneous_scnr(h, s.beta0, s.sigma_n2, st.x_p + x_d).gamma,
                                 instantaneous_scnr(h, s.beta0, s.sigma_n2, ao + x_d).gamma,
                                 dpd_upper_bound(x_d, s.P_p, s.beta0, s.sigma_n2).gamma_ub};
                });
                for (const auto& t : res) {
                    dpd.push_back(t.dpd);
                    allone.push_back(t.allone);
                    ub.push_back(t.ub);
                }
            }
            const std::string bl = to_string(basis.kind), cl = con.label();
            const auto a = summarize(dpd, c.seed), b = summarize(allone, c.seed), u = summarize(ub, c.seed);
            out.add(n, q, bl, cl, "dpd", "avg_scnr", a.mean, a.stderr_);
            out.add(n, q, bl, cl, "allone", "avg_scnr", b.mean, b.stderr_);
            out.add(n, q, bl, cl, "upper-bound", "avg_scnr", u.mean, u.stderr_);
        }
    }
}

inline void run_dpi_convergence(const ExperimentConfig& c, std::vector<ResultRow>& rows) {
    RowFactory out{c, rows};
    const auto con = c.constellation.make();
    for (long long n : sweep_n(c)) {
        const auto basis = c.basis.make(n);
        for (int q : sweep_q(c)) {
            std::vector<std::vector<double>> traces;
            std::vector<double> iters, conv;
            for (int r = 0; r < c.clutter_realizations; ++r) {
                const Scenario s = make_scenario(c, n, q, r);
                DpiOptions o;
                o.seed = c.seed + static_cast<std::uint64_t>(r);
                o.variant = c.variant;
                const auto st = dpi_optimize(s, basis, con, o);
                traces.push_back(st.objective_trace);
                iters.push_back(st.iterations);
                conv.push_back(st.converged ? 1.0 : 0.0);
            }
            const std::string bl = to_string(basis.kind), cl = con.label();
            emit_trace_rows(out, n, q, bl, cl, "dpi", traces);
            const auto it = summarize(iters, 0);
            out.add(n, q, bl, cl, "dpi", "iterations", it.mean, it.stderr_);
            out.add(n, q, bl, cl, "dpi", "converged_fraction", summarize(conv, 0).mean);
        }
    }
}

inline void run_dpi_vs_power(const ExperimentConfig& c, unsigned threads, std::vector<ResultRow>& rows) {
    RowFactory out{c, rows};
    const auto con = c.constellation.make();
    const int q = static_cast<int>(c.clutter.size());
    for (long long n : sweep_n(c)) {
        const auto basis = c.basis.make(n);
        for (double pp : sweep_pp(c)) {
            ExperimentConfig pc = c;
            pc.pilot_power_dbm = pp;
            double th_dpi = 0.0, th_ao = 0.0;
            std::vector<double> mc_dpi, mc_ao, mc_dpd;
            for (int r = 0; r < c.clutter_realizations; ++r) {
                const Scenario s = make_scenario(pc, n, q, r);
                const AvgScnrModel model(s, basis, con, c.variant);
                DpiOptions o;
                o.seed = c.seed + static_cast<std::uint64_t>(r);
                o.variant = c.variant;
                const auto st = dpi_optimize(s, basis, con, o);
                const CVector ao = all_one_pilot(n, s.P_p);
                th_dpi += st.objective() / c.clutter_realizations;
                th_ao += model.evaluate(ao * ao.adjoint()).gamma_bar / c.clutter_realizations;
                const Channel h = build_channel(s);
                struct Trial {
                    double dpi, ao, dpd;
                };
                const auto res = parallel_map(static_cast<std::size_t>(c.trials), threads, [&](std::size_t t) {
                    const CVector x_d = draw_payload(s, basis, con, c.seed, trial_stream(r, t));
                    return Trial{instantaneous_scnr(h, s.beta0, s.sigma_n2, st.x_p_factor + x_d).gamma,
                                 instantaneous_scnr(h, s.beta0, s.sigma_n2, ao + x_d).gamma,
                                 instantaneous_scnr(h, s.beta0, s.sigma_n2, dpd_optimize(s, x_d).x_p + x_d).gamma};
                });
                for (const auto& t : res) {
                    mc_dpi.push_back(t.dpi);
                    mc_ao.push_back(t.ao);
                    mc_dpd.push_back(t.dpd);
                }
            }
            const std::string bl = to_string(basis.kind), cl = con.label();
            const std::string metric_suffix = "@" + format_real(pp) + "dBm";
            const auto a = summarize(mc_dpi, c.seed), b = summarize(mc_ao, c.seed), d = summarize(mc_dpd, c.seed);
            out.add(n, q, bl, cl, "dpi", "gamma_bar_theory" + metric_suffix, th_dpi);
            out.add(n, q, bl, cl, "allone", "gamma_bar_theory" + metric_suffix, th_ao);
            out.add(n, q, bl, cl, "dpi", "avg_scnr" + metric_suffix, a.mean, a.stderr_);
            out.add(n, q, bl, cl, "allone", "avg_scnr" + metric_suffix, b.mean, b.stderr_);
            out.add(n, q, bl, cl, "dpd", "avg_scnr" + metric_suffix, d.mean, d.stderr_);
        }
    }
}

/// One oracle-suite case: a tiny scenario with an exact reference.
struct OracleCase {
    std::string name;
    Scenario scenario;
    BasisSpec basis;
    ConstellationSpec constellation;
    CVector pilot;
};

inline std::vector<OracleCase> oracle_cases(std::uint64_t seed) {
    std::vector<OracleCase> cases;
    SeededRng rng(seed, kScenarioStreamBase - 1);
    const ConstellationSpec qpsk{ConstellationKind::PSK, 4}, qam{ConstellationKind::QAM, 16};
    struct Shape {
        long long n;
        int q;
        BasisKind basis;
        ConstellationSpec c;
    };
    const std::vector<Shape> shapes = {
        {1, 0, BasisKind::SC, qpsk},   {2, 0, BasisKind::OFDM, qpsk}, {2, 1, BasisKind::SC, qpsk},
        {2, 1, BasisKind::OFDM, qpsk}, {2, 1, BasisKind::AFDM, qpsk}, {3, 1, BasisKind::OFDM, qpsk},
        {3, 2, BasisKind::AFDM, qpsk}, {3, 2, BasisKind::SC, qpsk},   {2, 1, BasisKind::OFDM, qam},
        {3, 2, BasisKind::OFDM, qam},
    };
    for (const auto& sh : shapes) {
        OracleCase oc;
        oc.scenario.n = sh.n;
        oc.scenario.n0 = 0;
        oc.scenario.sigma_n2 = 0.5;
        oc.scenario.P_p = 1.0;
        oc.scenario.P_d = 1.0;
        oc.scenario.beta0 = rng.complex_normal();
        for (int i = 0; i < sh.q; ++i) oc.scenario.clutter.push_back({rng.complex_normal(), i + 1});
        oc.basis = {sh.basis, {}, {}};
        oc.constellation = sh.c;
        oc.pilot = rng.complex_normal_vector(sh.n);
        oc.name = "N" + std::to_string(sh.n) + "-Q" + std::to_string(sh.q) + "-" + to_string(sh.basis) + "-" +
                  sh.c.make().label();
        cases.push_back(oc);
    }
    return cases;
}

inline void run_oracle_suite(const ExperimentConfig& c, unsigned threads, std::vector<ResultRow>& rows) {
    RowFactory out{c, rows};
    for (const auto& oc : oracle_cases(c.seed)) {
        const auto& s = oc.scenario;
        const auto basis = oc.basis.make(s.n);
        const auto con = oc.constellation.make();
        const Channel h = build_channel(s);
        const double exact = exhaustive_avg_scnr(s, basis, con, oc.pilot);
        const auto mc = empirical_avg_scnr(s, basis, con, oc.pilot, c.trials, c.seed, threads);
        const double moment = expected_quadratic_moment(h, oc.pilot, basis, con.kappa, s.P_d);
        double enumerated = 0.0;
        {
            const std::size_t m = con.alphabet.size();
            std::vector<std::size_t> digits(static_cast<std::size_t>(s.n), 0);
            const auto total = static_cast<std::size_t>(std::pow(static_cast<double>(m), static_cast<double>(s.n)));
            CVector sym(s.n);
            for (std::size_t k = 0; k < total; ++k) {
                for (Eigen::Index i = 0; i < s.n; ++i) sym(i) = con.alphabet[digits[static_cast<std::size_t>(i)]];
                const CVector x = oc.pilot + std::sqrt(s.P_d) * basis.modulate(sym);
                enumerated += std::norm(x.dot(h.apply(x)));
                for (std::size_t i = 0; i < digits.size(); ++i) {
                    if (++digits[i] < m) break;
                    digits[i] = 0;
                }
            }
            enumerated /= static_cast<double>(total);
        }
        const std::string bl = to_string(basis.kind), cl = con.label(), pl = "custom";
        const int q = static_cast<int>(s.clutter.size());
        out.add(s.n, q, bl, cl, pl, "exhaustive_avg_scnr", exact);
        out.add(s.n, q, bl, cl, pl, "empirical_avg_scnr", mc.mean, mc.stderr_);
        out.add(s.n, q, bl, cl, pl, "z_score", mc.stderr_ > 0.0 ? (mc.mean - exact) / mc.stderr_ : 0.0);
        out.add(s.n, q, bl, cl, pl, "quadratic_moment_formula", moment);
        out.add(s.n, q, bl, cl, pl, "quadratic_moment_enumerated", enumerated);
    }
}

} // namespace detail

/// Run the configured experiment; `threads` = 0 uses the config value (then the hardware count).
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& c, unsigned threads = 0) {
    const unsigned t = resolve_threads(threads ? threads : c.threads);
    std::vector<ResultRow> rows;
    const std::string& e = c.experiment;
    if (e == "range-profile") detail::run_range_profile(c, rows);
    else if (e == "validate-rmt") detail::run_avg_scnr_grid(c, t, false, false, rows);
    else if (e == "compare-constellations") detail::run_avg_scnr_grid(c, t, true, false, rows);
    else if (e == "compare-bases") detail::run_avg_scnr_grid(c, t, false, true, rows);
    else if (e == "dpd-convergence") detail::run_dpd_convergence(c, t, rows);
    else if (e == "dpd-vs-Q") detail::run_dpd_vs_q(c, t, rows);
    else if (e == "dpi-convergence") detail::run_dpi_convergence(c, rows);
    else if (e == "dpi-vs-power") detail::run_dpi_vs_power(c, t, rows);
    else if (e == "oracle-suite") detail::run_oracle_suite(c, t, rows);
    else throw Error(ErrorCode::UnknownExperiment, "unknown experiment '" + e + "'");
    return rows;
}

/// Default configuration of the built-in oracle suite.
inline ExperimentConfig oracle_suite_config() {
    ExperimentConfig c;
    c.experiment = "oracle-suite";
    c.seed = 20240601;
    c.trials = 20000;
    return c;
}

// ---------------------------------------------------------------------------
// Command-line entry points (argument parsing lives in the tool)
// ---------------------------------------------------------------------------

/// 1 for configuration and I/O problems, 2 for numerical failures.
inline int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownExperiment:
    case ErrorCode::IoError:
    case ErrorCode::TooLarge:
    case ErrorCode::UnsupportedOrder:
    case ErrorCode::InvalidScenario:
    case ErrorCode::DegenerateDelay:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::EmptyInput:
    case ErrorCode::NonUnitary: return 1;
    default: return 2;
    }
}

} // namespace amfisac
