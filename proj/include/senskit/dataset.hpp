#ifndef SENSKIT_DATASET_HPP
#define SENSKIT_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "senskit/common.hpp"

namespace senskit {

/// Where a stored artifact came from: the input model it was sampled from,
/// the simulation schedule it ran under, and the seed. Carried in a sidecar
/// file next to the dataset so the CSV itself stays plain.
struct Provenance {
    std::string model_fingerprint;
    std::string schedule_fingerprint;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
};

/// Monte Carlo campaign: n input rows and the n simulated output
/// trajectories on a shared timestep grid.
struct TrajectoryDataset {
    std::vector<std::string> input_names;  // d
    std::vector<double> times;             // N, strictly increasing
    Eigen::MatrixXd inputs;                // n x d
    Eigen::MatrixXd outputs;               // n x N
    Provenance provenance;
    bool provenance_missing = false;  // loaded without a sidecar file

    Eigen::Index rows() const { return inputs.rows(); }
    std::size_t dim() const { return input_names.size(); }
    std::size_t n_steps() const { return times.size(); }
};

namespace detail {

inline void check_finite(const Eigen::MatrixXd& m, const char* what) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            require(std::isfinite(m(i, j)), std::string("non-finite ") + what + " value at row " +
                                                std::to_string(i) + ", column " +
                                                std::to_string(j));
}

}  // namespace detail

inline void validate(const TrajectoryDataset& ds) {
    require(ds.inputs.cols() == static_cast<Eigen::Index>(ds.input_names.size()),
            "input matrix has " + std::to_string(ds.inputs.cols()) + " columns but " +
                std::to_string(ds.input_names.size()) + " names");
    require(ds.outputs.cols() == static_cast<Eigen::Index>(ds.times.size()),
            "output matrix has " + std::to_string(ds.outputs.cols()) + " columns but " +
                std::to_string(ds.times.size()) + " timesteps");
    require(ds.inputs.rows() == ds.outputs.rows(),
            "input and output row counts differ: " + std::to_string(ds.inputs.rows()) + " vs " +
                std::to_string(ds.outputs.rows()));
    for (std::size_t k = 0; k + 1 < ds.times.size(); ++k)
        require(ds.times[k] < ds.times[k + 1],
                "timesteps must increase strictly; step " + std::to_string(k) + " is " +
                    format_double(ds.times[k]) + " followed by " + format_double(ds.times[k + 1]));
    detail::check_finite(ds.inputs, "input");
    detail::check_finite(ds.outputs, "output");
}

inline std::filesystem::path provenance_path(const std::filesystem::path& dataset_path) {
    std::filesystem::path p = dataset_path;
    p += ".provenance.json";
    return p;
}

/// CSV with one header row: x:<name> columns first, then y:t=<time> columns.
/// All floats use the shortest round-trip decimal form, so save/load is
/// bit-exact. The provenance sidecar goes to provenance_path(path).
inline void save_dataset(const TrajectoryDataset& ds, const std::filesystem::path& path) {
    validate(ds);
    std::ostringstream out;
    for (std::size_t j = 0; j < ds.input_names.size(); ++j) {
        if (j) out << ',';
        out << "x:" << ds.input_names[j];
    }
    for (std::size_t k = 0; k < ds.times.size(); ++k) {
        if (!ds.input_names.empty() || k) out << ',';
        out << "y:t=" << format_double(ds.times[k]);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.inputs.cols(); ++j) {
            if (j) out << ',';
            out << format_double(ds.inputs(i, j));
        }
        for (Eigen::Index k = 0; k < ds.outputs.cols(); ++k) {
            if (ds.inputs.cols() > 0 || k) out << ',';
            out << format_double(ds.outputs(i, k));
        }
        out << '\n';
    }
    {
        std::ofstream f(path, std::ios::binary);
        require(f.good(), "cannot open " + path.string() + " for writing");
        f << out.str();
        require(f.good(), "write failed for " + path.string());
    }
    nlohmann::json meta{{"kind", "trajectory-dataset"},
                        {"version", 1},
                        {"model", ds.provenance.model_fingerprint},
                        {"schedule", ds.provenance.schedule_fingerprint},
                        {"seed", ds.provenance.seed},
                        {"tool_version", ds.provenance.tool_version}};
    std::ofstream f(provenance_path(path), std::ios::binary);
    require(f.good(), "cannot open " + provenance_path(path).string() + " for writing");
    f << meta.dump(2) << '\n';
    require(f.good(), "write failed for " + provenance_path(path).string());
}

inline TrajectoryDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "cannot open " + path.string());
    TrajectoryDataset ds;

    std::string line;
    require(static_cast<bool>(std::getline(f, line)), "empty file: " + path.string());
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    bool seen_output = false;
    for (const auto& h : header) {
        if (h.rfind("x:", 0) == 0) {
            require(!seen_output, "input column '" + h + "' after output columns in " +
                                      path.string());
            ds.input_names.push_back(h.substr(2));
        } else if (h.rfind("y:t=", 0) == 0) {
            seen_output = true;
            ds.times.push_back(parse_double(h.substr(4), "timestep in header of " + path.string()));
        } else {
            fail("unrecognized column '" + h + "' in " + path.string() +
                 " (expected x:<name> or y:t=<time>)");
        }
    }
    require(!ds.times.empty(), "no output columns in " + path.string());

    const std::size_t d = ds.input_names.size();
    const std::size_t nt = ds.times.size();
    std::vector<double> xbuf, ybuf;
    std::size_t n = 0;
    for (std::size_t row = 2; std::getline(f, line); ++row) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            double v = parse_double(cell, path.string() + " row " + std::to_string(row) +
                                              ", column " + std::to_string(col + 1));
            if (col < d)
                xbuf.push_back(v);
            else
                ybuf.push_back(v);
            ++col;
        }
        require(col == d + nt, path.string() + " row " + std::to_string(row) + " has " +
                                   std::to_string(col) + " fields, header has " +
                                   std::to_string(d + nt));
        ++n;
    }
    require(n > 0, "no data rows in " + path.string());

    ds.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    ds.outputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nt));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j)
            ds.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                xbuf[i * d + j];
        for (std::size_t k = 0; k < nt; ++k)
            ds.outputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                ybuf[i * nt + k];
    }

    std::ifstream meta_in(provenance_path(path), std::ios::binary);
    if (meta_in.good()) {
        nlohmann::json meta;
        try {
            meta_in >> meta;
        } catch (const nlohmann::json::exception& e) {
            fail("malformed provenance sidecar " + provenance_path(path).string() + ": " +
                 e.what());
        }
        ds.provenance.model_fingerprint = meta.value("model", "");
        ds.provenance.schedule_fingerprint = meta.value("schedule", "");
        ds.provenance.seed = meta.value("seed", std::uint64_t{0});
        ds.provenance.tool_version = meta.value("tool_version", "");
    } else {
        ds.provenance_missing = true;
    }

    validate(ds);
    return ds;
}

/// Content fingerprint over the canonical CSV bytes (provenance excluded).
inline std::string dataset_fingerprint(const TrajectoryDataset& ds) {
    std::ostringstream out;
    for (std::size_t j = 0; j < ds.input_names.size(); ++j) out << ds.input_names[j] << ';';
    for (double t : ds.times) out << format_double(t) << ';';
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.inputs.cols(); ++j)
            out << format_double(ds.inputs(i, j)) << ',';
        for (Eigen::Index k = 0; k < ds.outputs.cols(); ++k)
            out << format_double(ds.outputs(i, k)) << ',';
    }
    return fingerprint(out.str());
}

/// Deterministic shuffle split. Train gets ceil(fraction * n) rows, test the
/// rest; rows keep the permuted order within each part.
inline std::pair<TrajectoryDataset, TrajectoryDataset> split(const TrajectoryDataset& ds,
                                                             double train_fraction,
                                                             std::uint64_t seed) {
    require(train_fraction > 0.0 && train_fraction < 1.0,
            "train fraction must lie strictly between 0 and 1, got " +
                format_double(train_fraction));
    const std::size_t n = static_cast<std::size_t>(ds.rows());
    require(n >= 2, "need at least two rows to split, have " + std::to_string(n));

    auto perm = random_permutation(n, derive_seed(seed, "train-test split"));
    const std::size_t n_train =
        static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n)));

    auto take = [&](std::size_t begin, std::size_t end) {
        TrajectoryDataset part;
        part.input_names = ds.input_names;
        part.times = ds.times;
        part.provenance = ds.provenance;
        part.provenance_missing = ds.provenance_missing;
        part.inputs.resize(static_cast<Eigen::Index>(end - begin), ds.inputs.cols());
        part.outputs.resize(static_cast<Eigen::Index>(end - begin), ds.outputs.cols());
        for (std::size_t i = begin; i < end; ++i) {
            part.inputs.row(static_cast<Eigen::Index>(i - begin)) =
                ds.inputs.row(static_cast<Eigen::Index>(perm[i]));
            part.outputs.row(static_cast<Eigen::Index>(i - begin)) =
                ds.outputs.row(static_cast<Eigen::Index>(perm[i]));
        }
        return part;
    };
    return {take(0, n_train), take(n_train, n)};
}

}  // namespace senskit

#endif  // SENSKIT_DATASET_HPP
