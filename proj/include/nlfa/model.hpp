#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlfa/dataset.hpp"
#include "nlfa/matrix.hpp"

namespace nlfa {

/// Model families. nlfa: factors only. bnlfa: factors plus one bias column
/// per side, always active. ebnl: factors plus bias matrices, always active.
/// dnlfa: bias matrices gated by binary masks that switch off when a bias
/// falls below the threshold e.
enum class Variant { NLFA, BNLFA, EBNL, DNLFA };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);  // throws config_error

struct Hyperparameters {
    int d1 = 20;            // latent dimension
    int d2 = 5;             // bias dimension; 0 disables biases
    double lambda = 0.05;   // L2 regularization coefficient, > 0
    double e = 0.01;        // mask deactivation threshold (dnlfa)
    int max_iters = 1000;
    double tol = 1e-5;      // stop when consecutive RMSEs differ by less
    std::uint64_t seed = 1;
    double init_scale = 0.05;  // entries drawn uniformly from (0, init_scale]
    Variant variant = Variant::DNLFA;

    /// Enforces the per-variant constraints (nlfa: d2=0; bnlfa: d2=1;
    /// ebnl: d2>=1; dnlfa: d2>=1 and e>0) plus basic ranges.
    /// Throws config_error; never starts work on a bad configuration.
    void validate() const;
};

struct FactorPair {
    Mat X;  // rows x d1, nonnegative
    Mat Y;  // cols x d1, nonnegative

    bool operator==(const FactorPair&) const = default;
};

struct BiasBank {
    Mat G;      // rows x d2, nonnegative
    Mat H;      // cols x d2, nonnegative
    MaskMat I;  // rows x d2, binary; an inactive (0) entry pins its bias to 0
    MaskMat J;  // cols x d2, binary

    bool operator==(const BiasBank&) const = default;
};

/// Plain value object: factors, biases (empty when d2=0) and the id maps of
/// the dataset it was trained on. Safe to share for concurrent reads.
struct Model {
    Hyperparameters hp;
    FactorPair factors;
    BiasBank biases;
    std::vector<std::int64_t> row_map;
    std::vector<std::int64_t> col_map;

    index_t rows() const { return static_cast<index_t>(factors.X.rows()); }
    index_t cols() const { return static_cast<index_t>(factors.Y.rows()); }
    bool has_biases() const { return hp.d2 > 0; }

    bool operator==(const Model&) const = default;
};

/// Fresh model: X, Y, G, H i.i.d. uniform on (0, init_scale], masks all
/// active. Draw order is X, Y, G, H row-major, so the same seed replays the
/// same model bit for bit.
Model init_model(const Hyperparameters& hp, index_t num_rows, index_t num_cols,
                 std::uint64_t seed);

/// Model estimate for cell (m, n): the factor inner product plus the sum of
/// masked biases, accumulated in fixed k order. Throws data_error when the
/// indices are out of range.
double predict(const Model& model, index_t m, index_t n);

/// Loss over the observed entries: for each entry, half the squared residual
/// plus (lambda/2) times the squared regularized quantities of its row and
/// column (factors and masked biases). The regularization lives inside the
/// per-entry sum, so a row's penalty is weighted by how often it is observed.
double objective(const Model& model, const SparseDataset& ds);

}  // namespace nlfa
