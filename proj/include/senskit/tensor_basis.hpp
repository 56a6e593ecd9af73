#ifndef SENSKIT_TENSOR_BASIS_HPP
#define SENSKIT_TENSOR_BASIS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "senskit/common.hpp"
#include "senskit/input_model.hpp"
#include "senskit/multi_index.hpp"
#include "senskit/recurrence.hpp"

namespace senskit {

/// Tensorized orthonormal polynomial basis over a product measure. Each input
/// is standardized by an affine map and carries its own one-dimensional
/// orthonormal family; a basis term is the product of one univariate
/// polynomial per input as prescribed by its multi-index.
class TensorBasis {
  public:
    TensorBasis() = default;

    TensorBasis(std::vector<std::string> names, std::vector<Affine> standardizers,
                std::vector<Recurrence> families, std::vector<MultiIndex> indices, int p, double q)
        : names_(std::move(names)),
          standardizers_(std::move(standardizers)),
          families_(std::move(families)),
          indices_(std::move(indices)),
          p_(p),
          q_(q) {
        const std::size_t d = names_.size();
        require(d >= 1, "tensor basis: no inputs");
        require(standardizers_.size() == d && families_.size() == d,
                "tensor basis: per-input array sizes disagree");
        require(!indices_.empty(), "tensor basis: empty index set");
        degree_cap_.assign(d, 0);
        for (const auto& mi : indices_) {
            require(mi.size() == d, "tensor basis: multi-index dimension mismatch");
            for (std::size_t i = 0; i < d; ++i) {
                require(mi[i] >= 0, "tensor basis: negative exponent");
                degree_cap_[i] = std::max(degree_cap_[i], mi[i]);
            }
        }
        for (std::size_t i = 0; i < d; ++i)
            require(families_[i].max_degree() >= degree_cap_[i],
                    "tensor basis: family for input '" + names_[i] +
                        "' is shallower than the index set needs");
    }

    std::size_t dim() const { return names_.size(); }
    std::size_t size() const { return indices_.size(); }
    int p() const { return p_; }
    double q() const { return q_; }
    const std::vector<std::string>& input_names() const { return names_; }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const std::vector<Affine>& standardizers() const { return standardizers_; }
    const std::vector<Recurrence>& families() const { return families_; }

    /// Values of every basis term at one physical input point. Pure; safe to
    /// call from several threads on the same basis.
    void eval(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
        require(static_cast<std::size_t>(x.size()) == dim(),
                "basis evaluation: point has dimension " + std::to_string(x.size()) +
                    ", basis expects " + std::to_string(dim()));
        const std::size_t d = dim();
        std::vector<std::vector<double>> univariate(d);
        for (std::size_t i = 0; i < d; ++i) {
            double z = standardizers_[i].to_z(x(static_cast<Eigen::Index>(i)));
            families_[i].eval_orthonormal(z, univariate[i]);
        }
        out.resize(static_cast<Eigen::Index>(indices_.size()));
        for (std::size_t t = 0; t < indices_.size(); ++t) {
            double v = 1.0;
            const MultiIndex& mi = indices_[t];
            for (std::size_t i = 0; i < d; ++i)
                if (mi[i] > 0) v *= univariate[i][static_cast<std::size_t>(mi[i])];
            out(static_cast<Eigen::Index>(t)) = v;
        }
    }

    /// Design matrix: one row of basis values per sample row.
    Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd psi(x.rows(), static_cast<Eigen::Index>(size()));
        Eigen::VectorXd row;
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            Eigen::VectorXd point = x.row(r);
            eval(point, row);
            psi.row(r) = row;
        }
        return psi;
    }

  private:
    std::vector<std::string> names_;
    std::vector<Affine> standardizers_;
    std::vector<Recurrence> families_;
    std::vector<MultiIndex> indices_;
    std::vector<int> degree_cap_;
    int p_ = 0;
    double q_ = 1.0;
};

/// Basis for an input model under hyperbolic truncation: Hermite families for
/// Gaussian inputs, Stieltjes families on [-1, 1] for triangular ones.
inline TensorBasis build_basis(const InputModel& model, int p, double q) {
    std::vector<Affine> maps;
    std::vector<Recurrence> families;
    for (const Marginal& m : model.marginals()) {
        auto [std_marginal, map] = m.standardized();
        maps.push_back(map);
        families.push_back(standardized_family(m, p));
    }
    return TensorBasis(model.names(), std::move(maps), std::move(families),
                       hyperbolic_enumerate(model.dim(), p, q), p, q);
}

}  // namespace senskit

#endif
