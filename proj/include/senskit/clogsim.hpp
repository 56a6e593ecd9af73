#ifndef SENSKIT_CLOGSIM_HPP
#define SENSKIT_CLOGSIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "senskit/dataset.hpp"
#include "senskit/input_model.hpp"

namespace senskit {

// ---------------------------------------------------------------------------
// Lumped clogging simulator. State is (particle fraction, deposited mass);
// the particle fraction relaxes toward a per-regime equilibrium, mass grows
// by a vena-contracta particle flux plus a per-regime soluble flux, and the
// clogging percentage is an empirical saturating function of deposit volume.

enum class Species { chi1, chi2 };
enum class Ph { low, high };
enum class CleaningKind { curative, preventive };

struct RegimeParams {
    double gamma_eq = 0.0;      // equilibrium particle fraction
    double soluble_flux = 0.0;  // kg/yr, lumped soluble deposition
};

struct PhysicalConstants {
    double k_v = 1.0;        // lumped flow-hole factor; absorbs hole count and area
    double rho_p = 5150.0;   // particle density, kg/m3
    double rho_l = 750.0;    // liquid density, kg/m3
    double u_z = 1.0;        // vertical mixture velocity, m/s
    double mu_l = 1e-4;      // dynamic viscosity, Pa s
    double relax_rate = 0.5; // particle-fraction relaxation, 1/yr
    double r_curative = 0.2;   // mass kept by a curative cleaning
    double r_preventive = 0.6; // mass kept by a preventive cleaning
    RegimeParams regimes[2][2]; // [species][ph]
};

inline const RegimeParams& regime_params(const PhysicalConstants& c, Species s, Ph ph) {
    return c.regimes[static_cast<int>(s)][static_cast<int>(ph)];
}

inline void validate(const PhysicalConstants& c) {
    require(c.k_v > 0.0, "constants: k_v must be positive");
    require(c.rho_p > 0.0 && c.rho_l > 0.0, "constants: densities must be positive");
    require(c.rho_p > c.rho_l, "constants: particle density must exceed liquid density");
    require(c.u_z > 0.0, "constants: u_z must be positive");
    require(c.mu_l > 0.0, "constants: mu_l must be positive");
    require(c.relax_rate > 0.0, "constants: relax_rate must be positive");
    require(c.r_curative > 0.0 && c.r_preventive < 1.0 && c.r_curative < c.r_preventive,
            "constants: cleaning factors need 0 < r_curative < r_preventive < 1");
    for (int s = 0; s < 2; ++s)
        for (int p = 0; p < 2; ++p) {
            require(c.regimes[s][p].gamma_eq >= 0.0, "constants: gamma_eq must be non-negative");
            require(c.regimes[s][p].soluble_flux >= 0.0,
                    "constants: soluble_flux must be non-negative");
        }
}

struct Segment {
    double t_start = 0.0;  // years
    Species species = Species::chi1;
    Ph ph = Ph::low;
};

struct CleaningEvent {
    double t = 0.0;  // years
    CleaningKind kind = CleaningKind::curative;
};

struct RegimeSchedule {
    double t_f = 50.0;
    int n_steps = 75;  // output grid points, including t = 0 and t = t_f
    std::vector<Segment> segments;
    std::vector<CleaningEvent> cleanings;
};

inline void validate(const RegimeSchedule& s) {
    require(s.t_f > 0.0, "schedule: t_f must be positive");
    require(s.n_steps >= 2, "schedule: need at least two grid points");
    require(!s.segments.empty(), "schedule: need at least one regime segment");
    require(s.segments.front().t_start == 0.0, "schedule: first segment must start at t = 0");
    for (std::size_t i = 1; i < s.segments.size(); ++i)
        require(s.segments[i].t_start > s.segments[i - 1].t_start &&
                    s.segments[i].t_start < s.t_f,
                "schedule: segment starts must increase and stay below t_f");
    for (std::size_t i = 0; i < s.cleanings.size(); ++i) {
        require(s.cleanings[i].t > 0.0 && s.cleanings[i].t <= s.t_f,
                "schedule: cleaning times must lie in (0, t_f]");
        if (i > 0)
            require(s.cleanings[i].t > s.cleanings[i - 1].t,
                    "schedule: cleaning times must be strictly increasing");
    }
}

inline std::vector<double> time_grid(const RegimeSchedule& s) {
    std::vector<double> t(static_cast<std::size_t>(s.n_steps));
    for (int k = 0; k < s.n_steps; ++k)
        t[static_cast<std::size_t>(k)] = s.t_f * static_cast<double>(k) / (s.n_steps - 1);
    return t;
}

inline const Segment& segment_at(const RegimeSchedule& s, double t) {
    std::size_t i = s.segments.size() - 1;
    while (i > 0 && s.segments[i].t_start > t) --i;
    return s.segments[i];
}

struct Trajectory {
    std::vector<double> times;  // years
    std::vector<double> tau;    // clogging %, in [0, 100]
    std::vector<double> m;      // deposited mass, kg (diagnostic)
};

// ---------------------------------------------------------------------------
// Elementary pieces.

inline double vena_contracta_flux(double a_v, double k_v, double rho_p, double rho_l, double u_z,
                                  double d_p, double mu_l, double gamma_tilde_p) {
    require(mu_l > 0.0, "vena contracta flux: viscosity must be positive");
    require(a_v > 0.0 && k_v > 0.0 && u_z > 0.0 && d_p > 0.0,
            "vena contracta flux: factors must be positive");
    require(rho_p > rho_l, "vena contracta flux: particle density must exceed liquid density");
    return a_v * k_v * (rho_p - rho_l) * u_z * u_z * d_p * d_p / mu_l * gamma_tilde_p;
}

inline double clogging_rate(double alpha, double beta, double v_c) {
    require(beta > 0.0, "clogging rate: beta must be positive");
    require(v_c >= 0.0, "clogging rate: volume must be non-negative");
    return alpha * (1.0 - std::exp(-beta * v_c));
}

// ---------------------------------------------------------------------------
// Trajectory integration. Classical fixed-step fourth-order scheme with
// `substeps` stages per output interval. Substeps are split at regime
// boundaries so every stage sees one smooth right-hand side (the rates are
// piecewise constant in time; sampling across a boundary would degrade the
// scheme to first order there). Cleaning events are snapped to the nearest
// grid point and applied before that point is recorded, so the recorded
// sample already shows the post-cleaning state.

inline Trajectory simulate(const Eigen::VectorXd& x, const RegimeSchedule& sched,
                           const PhysicalConstants& consts, int substeps = 4) {
    require(x.size() == 7, "simulate: expected 7 inputs, got " + std::to_string(x.size()));
    validate(sched);
    validate(consts);
    require(substeps >= 1, "simulate: need at least one substep");
    const double alpha = x(0), beta = x(1), eps_e = x(2), eps_c = x(3);
    const double d_p = x(4), gamma_p0 = x(5), a_v = x(6);
    require(beta > 0.0, "simulate: beta must be positive");
    require(d_p > 0.0 && a_v > 0.0, "simulate: d_p and a_v must be positive");
    require(eps_c >= 0.0 && eps_c < 1.0, "simulate: eps_c must lie in [0, 1)");
    require(eps_e >= 0.0 && eps_e <= 1.0, "simulate: eps_e must lie in [0, 1]");
    require(gamma_p0 >= 0.0, "simulate: gamma_p0 must be non-negative");

    Trajectory tr;
    tr.times = time_grid(sched);
    const int n = sched.n_steps;
    tr.tau.assign(static_cast<std::size_t>(n), 0.0);
    tr.m.assign(static_cast<std::size_t>(n), 0.0);

    // fouling porosity acts only as a weak drag on the vertical velocity
    const double u_eff = consts.u_z * (1.0 - 0.05 * eps_e);
    const double flux_coef = a_v * consts.k_v * (consts.rho_p - consts.rho_l) * u_eff * u_eff *
                             d_p * d_p / consts.mu_l;
    const double lam = consts.relax_rate;

    // cleaning factor per grid index (snapped; coincident events compose)
    const double dt = sched.t_f / (n - 1);
    std::vector<double> clean_factor(static_cast<std::size_t>(n), 1.0);
    for (const auto& ev : sched.cleanings) {
        int k = static_cast<int>(std::lround(ev.t / dt));
        k = std::clamp(k, 1, n - 1);
        clean_factor[static_cast<std::size_t>(k)] *=
            ev.kind == CleaningKind::curative ? consts.r_curative : consts.r_preventive;
    }

    double g = gamma_p0, m = 0.0;
    auto record = [&](int k) {
        double v_c = m / (consts.rho_p * (1.0 - eps_c));
        tr.tau[static_cast<std::size_t>(k)] =
            std::clamp(clogging_rate(alpha, beta, v_c), 0.0, 100.0);
        tr.m[static_cast<std::size_t>(k)] = m;
    };
    record(0);

    // advance (g, m) over [a, a + w) under one regime; the rates are
    // autonomous once the regime is fixed
    auto advance = [&](double a, double w) {
        const Segment& seg = segment_at(sched, a);
        const RegimeParams& r = regime_params(consts, seg.species, seg.ph);
        const double geq = r.gamma_eq, s_flux = r.soluble_flux;
        double g1 = lam * (geq - g), m1 = flux_coef * g + s_flux;
        double ga = g + 0.5 * w * g1;
        double g2 = lam * (geq - ga), m2 = flux_coef * ga + s_flux;
        double gb = g + 0.5 * w * g2;
        double g3 = lam * (geq - gb), m3 = flux_coef * gb + s_flux;
        double gc = g + w * g3;
        double g4 = lam * (geq - gc), m4 = flux_coef * gc + s_flux;
        g += w / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
        m += w / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    };

    std::vector<double> cuts;
    for (int k = 1; k < n; ++k) {
        const double t0 = tr.times[static_cast<std::size_t>(k - 1)];
        const double t1 = tr.times[static_cast<std::size_t>(k)];
        cuts.clear();
        for (int s = 0; s <= substeps; ++s)
            cuts.push_back(t0 + (t1 - t0) * static_cast<double>(s) / substeps);
        for (const auto& seg : sched.segments)
            if (seg.t_start > t0 && seg.t_start < t1) cuts.push_back(seg.t_start);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            if (cuts[i + 1] > cuts[i]) advance(cuts[i], cuts[i + 1] - cuts[i]);
        if (!std::isfinite(g) || !std::isfinite(m))
            fail("clogging simulation produced a non-finite state at t = " +
                 format_double(t1) + " years");
        m *= clean_factor[static_cast<std::size_t>(k)];
        record(k);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Monte Carlo campaign over an input model.

struct MonteCarloFailure {
    std::size_t row = 0;
    std::string message;
};

struct MonteCarloResult {
    TrajectoryDataset dataset;  // successful rows only, in row order
    std::vector<MonteCarloFailure> failures;
};

struct ClogConfig {
    RegimeSchedule schedule;
    PhysicalConstants constants;
};

inline nlohmann::json config_to_json(const ClogConfig& cfg);

inline std::string config_fingerprint(const ClogConfig& cfg) {
    return fingerprint(config_to_json(cfg).dump());
}

inline MonteCarloResult monte_carlo(const InputModel& model, const ClogConfig& cfg,
                                    std::size_t n, std::uint64_t seed, int jobs = 1) {
    require(n >= 1, "monte carlo: n must be at least 1");
    require(model.dim() == 7, "monte carlo: the clogging model takes 7 inputs, got " +
                                  std::to_string(model.dim()));
    validate(cfg.schedule);
    validate(cfg.constants);
    Eigen::MatrixXd x = sample(model, n, seed);
    const int n_steps = cfg.schedule.n_steps;
    Eigen::MatrixXd y(static_cast<Eigen::Index>(n), n_steps);
    std::vector<std::string> errors(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        try {
            Trajectory tr = simulate(x.row(static_cast<Eigen::Index>(i)).transpose(),
                                     cfg.schedule, cfg.constants);
            for (int k = 0; k < n_steps; ++k)
                y(static_cast<Eigen::Index>(i), k) = tr.tau[static_cast<std::size_t>(k)];
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    MonteCarloResult result;
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i].empty())
            keep.push_back(static_cast<Eigen::Index>(i));
        else
            result.failures.push_back({i, errors[i]});
    }
    if (keep.empty())
        fail("monte carlo: every simulation failed; first error: " +
             result.failures.front().message);

    TrajectoryDataset& ds = result.dataset;
    ds.input_names = model.names();
    ds.times = time_grid(cfg.schedule);
    ds.inputs.resize(static_cast<Eigen::Index>(keep.size()), 7);
    ds.outputs.resize(static_cast<Eigen::Index>(keep.size()), n_steps);
    for (std::size_t r = 0; r < keep.size(); ++r) {
        ds.inputs.row(static_cast<Eigen::Index>(r)) = x.row(keep[r]);
        ds.outputs.row(static_cast<Eigen::Index>(r)) = y.row(keep[r]);
    }
    ds.provenance.model_fingerprint = model_fingerprint(model);
    ds.provenance.schedule_fingerprint = config_fingerprint(cfg);
    ds.provenance.seed = seed;
    ds.provenance.tool_version = kToolVersion;
    validate(ds);
    return result;
}

// ---------------------------------------------------------------------------
// Configuration file form. Field names are part of the file contract:
//   {"t_f", "n_steps", "segments": [{"t_start", "species", "ph"}],
//    "cleanings": [{"t", "kind"}],
//    "constants": {"k_v", ..., "regimes": {"chi1_low": {...}, ...}}}

namespace detail {

inline std::string species_name(Species s) { return s == Species::chi1 ? "chi1" : "chi2"; }
inline std::string ph_name(Ph p) { return p == Ph::low ? "low" : "high"; }

inline Species parse_species(const std::string& s, const std::string& where) {
    if (s == "chi1") return Species::chi1;
    if (s == "chi2") return Species::chi2;
    fail(where + ": unknown species '" + s + "' (expected chi1 or chi2)");
}

inline Ph parse_ph(const std::string& s, const std::string& where) {
    if (s == "low") return Ph::low;
    if (s == "high") return Ph::high;
    fail(where + ": unknown ph '" + s + "' (expected low or high)");
}

inline CleaningKind parse_kind(const std::string& s, const std::string& where) {
    if (s == "curative") return CleaningKind::curative;
    if (s == "preventive") return CleaningKind::preventive;
    fail(where + ": unknown cleaning kind '" + s + "' (expected curative or preventive)");
}

inline double json_number(const nlohmann::json& obj, const std::string& key,
                          const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number())
        fail(where + ": missing numeric field \"" + key + "\"");
    return obj[key].get<double>();
}

}  // namespace detail

inline nlohmann::json config_to_json(const ClogConfig& cfg) {
    nlohmann::json doc;
    doc["t_f"] = cfg.schedule.t_f;
    doc["n_steps"] = cfg.schedule.n_steps;
    doc["segments"] = nlohmann::json::array();
    for (const auto& seg : cfg.schedule.segments)
        doc["segments"].push_back({{"t_start", seg.t_start},
                                   {"species", detail::species_name(seg.species)},
                                   {"ph", detail::ph_name(seg.ph)}});
    doc["cleanings"] = nlohmann::json::array();
    for (const auto& ev : cfg.schedule.cleanings)
        doc["cleanings"].push_back(
            {{"t", ev.t},
             {"kind", ev.kind == CleaningKind::curative ? "curative" : "preventive"}});
    const PhysicalConstants& c = cfg.constants;
    nlohmann::json regimes;
    const char* species_keys[2] = {"chi1", "chi2"};
    const char* ph_keys[2] = {"low", "high"};
    for (int s = 0; s < 2; ++s)
        for (int p = 0; p < 2; ++p)
            regimes[std::string(species_keys[s]) + "_" + ph_keys[p]] = {
                {"gamma_eq", c.regimes[s][p].gamma_eq},
                {"soluble_flux", c.regimes[s][p].soluble_flux}};
    doc["constants"] = {{"k_v", c.k_v},
                        {"rho_p", c.rho_p},
                        {"rho_l", c.rho_l},
                        {"u_z", c.u_z},
                        {"mu_l", c.mu_l},
                        {"relax_rate", c.relax_rate},
                        {"r_curative", c.r_curative},
                        {"r_preventive", c.r_preventive},
                        {"regimes", regimes}};
    return doc;
}

inline ClogConfig config_from_json(const nlohmann::json& doc, const std::string& where) {
    if (!doc.is_object()) fail(where + ": expected a configuration object");
    ClogConfig cfg;
    cfg.schedule.t_f = detail::json_number(doc, "t_f", where);
    if (!doc.contains("n_steps") || !doc["n_steps"].is_number_integer())
        fail(where + ": missing integer field \"n_steps\"");
    cfg.schedule.n_steps = doc["n_steps"].get<int>();
    if (!doc.contains("segments") || !doc["segments"].is_array())
        fail(where + ": missing \"segments\" array");
    for (std::size_t i = 0; i < doc["segments"].size(); ++i) {
        const auto& s = doc["segments"][i];
        const std::string at = where + ": segments[" + std::to_string(i) + "]";
        Segment seg;
        seg.t_start = detail::json_number(s, "t_start", at);
        if (!s.contains("species") || !s["species"].is_string())
            fail(at + ": missing string field \"species\"");
        if (!s.contains("ph") || !s["ph"].is_string())
            fail(at + ": missing string field \"ph\"");
        seg.species = detail::parse_species(s["species"].get<std::string>(), at);
        seg.ph = detail::parse_ph(s["ph"].get<std::string>(), at);
        cfg.schedule.segments.push_back(seg);
    }
    if (doc.contains("cleanings")) {
        if (!doc["cleanings"].is_array()) fail(where + ": \"cleanings\" must be an array");
        for (std::size_t i = 0; i < doc["cleanings"].size(); ++i) {
            const auto& e = doc["cleanings"][i];
            const std::string at = where + ": cleanings[" + std::to_string(i) + "]";
            CleaningEvent ev;
            ev.t = detail::json_number(e, "t", at);
            if (!e.contains("kind") || !e["kind"].is_string())
                fail(at + ": missing string field \"kind\"");
            ev.kind = detail::parse_kind(e["kind"].get<std::string>(), at);
            cfg.schedule.cleanings.push_back(ev);
        }
    }
    if (!doc.contains("constants") || !doc["constants"].is_object())
        fail(where + ": missing \"constants\" object");
    const auto& cj = doc["constants"];
    const std::string at = where + ": constants";
    PhysicalConstants& c = cfg.constants;
    c.k_v = detail::json_number(cj, "k_v", at);
    c.rho_p = detail::json_number(cj, "rho_p", at);
    c.rho_l = detail::json_number(cj, "rho_l", at);
    c.u_z = detail::json_number(cj, "u_z", at);
    c.mu_l = detail::json_number(cj, "mu_l", at);
    c.relax_rate = detail::json_number(cj, "relax_rate", at);
    c.r_curative = detail::json_number(cj, "r_curative", at);
    c.r_preventive = detail::json_number(cj, "r_preventive", at);
    if (!cj.contains("regimes") || !cj["regimes"].is_object())
        fail(at + ": missing \"regimes\" object");
    const char* species_keys[2] = {"chi1", "chi2"};
    const char* ph_keys[2] = {"low", "high"};
    for (int s = 0; s < 2; ++s)
        for (int p = 0; p < 2; ++p) {
            const std::string key = std::string(species_keys[s]) + "_" + ph_keys[p];
            if (!cj["regimes"].contains(key))
                fail(at + ": regimes is missing \"" + key + "\"");
            const auto& r = cj["regimes"][key];
            c.regimes[s][p].gamma_eq = detail::json_number(r, "gamma_eq", at + "." + key);
            c.regimes[s][p].soluble_flux =
                detail::json_number(r, "soluble_flux", at + "." + key);
        }
    validate(cfg.schedule);
    validate(cfg.constants);
    return cfg;
}

inline void save_clog_config(const ClogConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open '" + path + "' for writing");
    out << config_to_json(cfg).dump(2) << "\n";
    require(out.good(), "failed writing '" + path + "'");
}

inline ClogConfig load_clog_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(path + ": " + e.what());
    }
    return config_from_json(doc, path);
}

// ---------------------------------------------------------------------------
// Shipped default configuration. The flux constants were calibrated once so
// that the nominal (mean) input vector reaches a 60% clogging rate at 50
// years with no cleanings, and the late-regime deposition is dominated by the
// soluble term; they are engineering values for a desk-scale model.

inline ClogConfig default_clog_config() {
    ClogConfig cfg;
    cfg.schedule.t_f = 50.0;
    cfg.schedule.n_steps = 75;
    cfg.schedule.segments = {{0.0, Species::chi1, Ph::low},
                             {10.0, Species::chi1, Ph::high},
                             {24.0, Species::chi2, Ph::high}};
    cfg.schedule.cleanings = {{13.0, CleaningKind::curative},
                              {28.0, CleaningKind::preventive}};
    PhysicalConstants& c = cfg.constants;
    c.k_v = 1.190665e18;
    c.rho_p = 5150.0;
    c.rho_l = 750.0;
    c.u_z = 1.0;
    c.mu_l = 1e-4;
    c.relax_rate = 0.4;
    c.r_curative = 0.2;
    c.r_preventive = 0.6;
    c.regimes[0][0] = {4.5e-9, 161.4615};   // chi1, low pH
    c.regimes[0][1] = {1.5e-10, 605.4806};  // chi1, high pH
    c.regimes[1][0] = {4.0e-10, 605.4806};  // chi2, low pH (not in the default schedule)
    c.regimes[1][1] = {5.0e-11, 4238.364};  // chi2, high pH
    return cfg;
}

}  // namespace senskit

#endif  // SENSKIT_CLOGSIM_HPP
