#ifndef SENSKIT_PCE_HPP
#define SENSKIT_PCE_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "senskit/dataset.hpp"
#include "senskit/input_model.hpp"
#include "senskit/lars.hpp"
#include "senskit/tensor_basis.hpp"

namespace senskit {

/// Sparse polynomial chaos surrogate of a full output trajectory. One shared
/// basis (the union of the per-timestep selections) and an N x |J| matrix of
/// coefficients, zero where a term was not selected at that timestep. By
/// orthonormality the column of the zero multi-index carries the predicted
/// mean at each timestep.
struct SparsePceSurrogate {
    TensorBasis basis;
    std::vector<double> times;
    Eigen::MatrixXd coeffs;  // n_steps x basis.size()
    std::string model_fingerprint;
};

struct FitReport {
    std::vector<int> selected_terms;  // per timestep, intercept included
    std::vector<double> loo_errors;   // per timestep corrected leave-one-out
    std::vector<double> q2;           // per timestep, kUndefined where the test column is flat
    double q2_mean = kUndefined;      // average over defined timesteps
    std::vector<std::string> warnings;
};

struct FitResult {
    SparsePceSurrogate surrogate;
    FitReport report;
};

/// Per-timestep sparse fits against an explicit candidate basis, interwoven
/// into one surrogate on the union of the selected term sets.
inline FitResult fit_with_basis(const TrajectoryDataset& ds, TensorBasis candidate_basis,
                                const std::string& fingerprint, SelectionMode mode,
                                int jobs = 1) {
    validate(ds);
    require(ds.input_names == candidate_basis.input_names(),
            "dataset inputs do not match the basis inputs");
    const Eigen::Index n = ds.rows();
    const std::size_t n_steps = ds.n_steps();
    require(n_steps >= 1, "dataset has no timesteps");

    FitResult result;
    if (mode == SelectionMode::lars &&
        static_cast<std::size_t>(n) < 10 * candidate_basis.dim())
        result.report.warnings.push_back(
            "only " + std::to_string(n) + " rows for " + std::to_string(candidate_basis.dim()) +
            " inputs; sparse selection is unreliable below 10 rows per input");

    const Eigen::MatrixXd design = candidate_basis.design_matrix(ds.inputs);
    const CandidateSet candidates = prepare_candidates(design);

    std::vector<Selection> picks(n_steps);
    parallel_for(n_steps, jobs, [&](std::size_t k) {
        std::string label =
            "timestep " + std::to_string(k) + " (t=" + format_double(ds.times[k]) + ")";
        picks[k] = select_sparse(design, candidates, ds.outputs.col(static_cast<Eigen::Index>(k)),
                                 mode, label);
    });

    // union of the selected sets, in canonical basis order
    std::set<std::size_t> union_cols;
    union_cols.insert(0);
    for (const auto& s : picks) union_cols.insert(s.columns.begin(), s.columns.end());
    std::vector<std::size_t> cols(union_cols.begin(), union_cols.end());
    std::vector<Eigen::Index> where(candidate_basis.size(), -1);
    std::vector<MultiIndex> union_indices;
    union_indices.reserve(cols.size());
    for (std::size_t t = 0; t < cols.size(); ++t) {
        where[cols[t]] = static_cast<Eigen::Index>(t);
        union_indices.push_back(candidate_basis.indices()[cols[t]]);
    }

    SparsePceSurrogate s;
    s.basis = TensorBasis(candidate_basis.input_names(), candidate_basis.standardizers(),
                          candidate_basis.families(), std::move(union_indices),
                          candidate_basis.p(), candidate_basis.q());
    s.times = ds.times;
    s.coeffs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_steps),
                                     static_cast<Eigen::Index>(cols.size()));
    s.model_fingerprint = fingerprint;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const Selection& pick = picks[k];
        for (std::size_t j = 0; j < pick.columns.size(); ++j)
            s.coeffs(static_cast<Eigen::Index>(k), where[pick.columns[j]]) =
                pick.coeffs(static_cast<Eigen::Index>(j));
        result.report.selected_terms.push_back(static_cast<int>(pick.columns.size()));
        result.report.loo_errors.push_back(pick.loo_error);
    }
    result.surrogate = std::move(s);
    return result;
}

inline FitResult fit(const TrajectoryDataset& ds, const InputModel& model, int p, double q,
                     SelectionMode mode = SelectionMode::lars, int jobs = 1) {
    require(ds.input_names == model.names(), "dataset inputs do not match the input model");
    FitResult result =
        fit_with_basis(ds, build_basis(model, p, q), model_fingerprint(model), mode, jobs);
    if (!ds.provenance_missing && !ds.provenance.model_fingerprint.empty() &&
        ds.provenance.model_fingerprint != model_fingerprint(model))
        result.report.warnings.push_back("dataset provenance records input model " +
                                         ds.provenance.model_fingerprint + " but fitting against " +
                                         model_fingerprint(model));
    return result;
}

/// Trajectory prediction: one value per timestep.
inline Eigen::VectorXd predict(const SparsePceSurrogate& s, const Eigen::VectorXd& x) {
    Eigen::VectorXd phi;
    s.basis.eval(x, phi);
    return s.coeffs * phi;
}

/// Row-per-sample prediction matrix (n x n_steps).
inline Eigen::MatrixXd predict_matrix(const SparsePceSurrogate& s, const Eigen::MatrixXd& x,
                                      int jobs = 1) {
    Eigen::MatrixXd out(x.rows(), s.coeffs.rows());
    parallel_for(static_cast<std::size_t>(x.rows()), jobs, [&](std::size_t i) {
        Eigen::VectorXd phi;
        Eigen::VectorXd point = x.row(static_cast<Eigen::Index>(i));
        s.basis.eval(point, phi);
        out.row(static_cast<Eigen::Index>(i)) = (s.coeffs * phi).transpose();
    });
    return out;
}

/// Predictivity on held-out data: Q2(t_k) = 1 - SSE/SST per timestep, with a
/// flat test column marked undefined and excluded from the time average.
inline FitReport q2(const SparsePceSurrogate& s, const TrajectoryDataset& test, int jobs = 1) {
    validate(test);
    require(test.input_names == s.basis.input_names(),
            "test dataset inputs do not match the surrogate");
    require(test.times.size() == s.times.size(), "test dataset has " +
                                                     std::to_string(test.times.size()) +
                                                     " timesteps, surrogate has " +
                                                     std::to_string(s.times.size()));
    for (std::size_t k = 0; k < s.times.size(); ++k)
        require(test.times[k] == s.times[k],
                "test timestep " + std::to_string(k) + " is " + format_double(test.times[k]) +
                    ", surrogate has " + format_double(s.times[k]));

    const Eigen::MatrixXd pred = predict_matrix(s, test.inputs, jobs);
    FitReport report;
    double acc = 0.0;
    std::size_t defined = 0;
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        const Eigen::Index kk = static_cast<Eigen::Index>(k);
        const double mean = test.outputs.col(kk).mean();
        const double sst = (test.outputs.col(kk).array() - mean).matrix().squaredNorm();
        const double n = static_cast<double>(test.rows());
        if (sst / n <= 1e-14 * std::max(1.0, mean * mean)) {
            report.q2.push_back(kUndefined);
            continue;
        }
        const double sse = (test.outputs.col(kk) - pred.col(kk)).squaredNorm();
        report.q2.push_back(1.0 - sse / sst);
        acc += report.q2.back();
        ++defined;
    }
    if (defined > 0) report.q2_mean = acc / static_cast<double>(defined);
    return report;
}

/// One cell of the hyperparameter grid: all split scores plus any failures.
struct CrossValCell {
    int p = 0;
    double q = 0.0;
    std::vector<double> scores;        // time-averaged predictivity per split
    std::vector<std::string> errors;   // per failed split, message with context
};

/// Repeated shuffle-split scoring over a (p, q) grid. The same `splits`
/// permutations are reused for every cell so scores are comparable across
/// the grid; failures are recorded per cell without aborting the sweep.
inline std::vector<CrossValCell> cross_validate(const TrajectoryDataset& ds,
                                                const InputModel& model,
                                                const std::vector<int>& p_grid,
                                                const std::vector<double>& q_grid, int splits,
                                                double train_fraction, std::uint64_t seed,
                                                SelectionMode mode = SelectionMode::lars,
                                                int jobs = 1) {
    require(splits >= 1, "need at least one split");
    require(!p_grid.empty() && !q_grid.empty(), "empty hyperparameter grid");

    std::vector<std::pair<TrajectoryDataset, TrajectoryDataset>> parts;
    parts.reserve(static_cast<std::size_t>(splits));
    for (int a = 0; a < splits; ++a)
        parts.push_back(split(ds, train_fraction, derive_seed(seed, "cv-split-" + std::to_string(a))));

    std::vector<CrossValCell> grid;
    for (int p : p_grid) {
        for (double q_norm : q_grid) {
            CrossValCell cell;
            cell.p = p;
            cell.q = q_norm;
            for (int a = 0; a < splits; ++a) {
                try {
                    FitResult fr = fit(parts[a].first, model, p, q_norm, mode, jobs);
                    FitReport score = q2(fr.surrogate, parts[a].second, jobs);
                    cell.scores.push_back(score.q2_mean);
                } catch (const Error& e) {
                    cell.errors.push_back("split " + std::to_string(a) + ": " + e.what());
                }
            }
            grid.push_back(std::move(cell));
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Surrogate persistence: one canonical JSON document. Doubles are written in
// shortest round-trip decimal form, so load(save(s)) reproduces predictions
// bit for bit.

namespace detail {

inline nlohmann::json surrogate_to_json(const SparsePceSurrogate& s) {
    nlohmann::json doc;
    doc["kind"] = "sparse-pce-surrogate";
    doc["version"] = "1.0";
    doc["input_names"] = s.basis.input_names();
    nlohmann::json maps = nlohmann::json::array();
    for (const Affine& a : s.basis.standardizers())
        maps.push_back({{"offset", a.offset}, {"scale", a.scale}});
    doc["standardizers"] = maps;
    nlohmann::json fams = nlohmann::json::array();
    for (const Recurrence& r : s.basis.families())
        fams.push_back({{"alpha", r.alpha}, {"beta", r.beta}});
    doc["families"] = fams;
    doc["indices"] = s.basis.indices();
    doc["p"] = s.basis.p();
    doc["q"] = s.basis.q();
    doc["times"] = s.times;
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index k = 0; k < s.coeffs.rows(); ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < s.coeffs.cols(); ++j) row.push_back(s.coeffs(k, j));
        rows.push_back(std::move(row));
    }
    doc["coefficients"] = rows;
    doc["model"] = s.model_fingerprint;
    doc["tool_version"] = kToolVersion;
    return doc;
}

}  // namespace detail

inline void save_surrogate(const SparsePceSurrogate& s, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "cannot open " + path.string() + " for writing");
    f << detail::surrogate_to_json(s).dump(2) << '\n';
    require(f.good(), "write failed for " + path.string());
}

inline SparsePceSurrogate load_surrogate(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "cannot open " + path.string());
    nlohmann::json doc;
    try {
        f >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail("malformed surrogate file " + path.string() + ": " + e.what());
    }
    const std::string where = path.string();
    try {
        require(doc.value("kind", "") == "sparse-pce-surrogate",
                where + ": not a surrogate file");
        std::string version = doc.value("version", "");
        require(version.rfind("1.", 0) == 0, where + ": format version '" + version +
                                                 "' unsupported (expected 1.x)");

        auto names = doc.at("input_names").get<std::vector<std::string>>();
        const std::size_t d = names.size();
        std::vector<Affine> maps;
        for (const auto& jm : doc.at("standardizers"))
            maps.push_back(Affine{jm.at("offset").get<double>(), jm.at("scale").get<double>()});
        std::vector<Recurrence> fams;
        for (const auto& jf : doc.at("families")) {
            Recurrence r;
            r.alpha = jf.at("alpha").get<std::vector<double>>();
            r.beta = jf.at("beta").get<std::vector<double>>();
            require(r.beta.size() == r.alpha.size() + 1,
                    where + ": recurrence arrays have inconsistent lengths");
            r.finalize_norms();
            fams.push_back(std::move(r));
        }
        require(maps.size() == d && fams.size() == d,
                where + ": per-input arrays disagree with the input count");
        auto indices = doc.at("indices").get<std::vector<MultiIndex>>();
        auto times = doc.at("times").get<std::vector<double>>();
        const auto& rows = doc.at("coefficients");
        require(rows.is_array() && rows.size() == times.size(),
                where + ": coefficient row count does not match the timestep count");
        Eigen::MatrixXd coeffs(static_cast<Eigen::Index>(times.size()),
                               static_cast<Eigen::Index>(indices.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            require(rows[k].is_array() && rows[k].size() == indices.size(),
                    where + ": coefficient count mismatch at row " + std::to_string(k) + " (" +
                        std::to_string(rows[k].size()) + " values for " +
                        std::to_string(indices.size()) + " terms)");
            for (std::size_t j = 0; j < indices.size(); ++j)
                coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
                    rows[k][j].get<double>();
        }

        SparsePceSurrogate s;
        s.basis = TensorBasis(std::move(names), std::move(maps), std::move(fams),
                              std::move(indices), doc.at("p").get<int>(),
                              doc.at("q").get<double>());
        s.times = std::move(times);
        s.coeffs = std::move(coeffs);
        s.model_fingerprint = doc.value("model", "");
        return s;
    } catch (const nlohmann::json::exception& e) {
        fail(where + ": " + e.what());
    }
}

/// True when the surrogate was built from the given model (used by callers to
/// warn, not to abort: a re-labelled model with identical content passes).
inline bool surrogate_matches_model(const SparsePceSurrogate& s, const InputModel& model) {
    return s.model_fingerprint == model_fingerprint(model);
}

}  // namespace senskit

#endif  // SENSKIT_PCE_HPP
