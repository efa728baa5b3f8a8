#include "nlfa/model.hpp"

#include <random>
#include <string>

#include "nlfa/errors.hpp"
#include "nlfa/rng.hpp"

namespace nlfa {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::NLFA: return "nlfa";
        case Variant::BNLFA: return "bnlfa";
        case Variant::EBNL: return "ebnl";
        case Variant::DNLFA: return "dnlfa";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "nlfa") return Variant::NLFA;
    if (name == "bnlfa") return Variant::BNLFA;
    if (name == "ebnl") return Variant::EBNL;
    if (name == "dnlfa") return Variant::DNLFA;
    throw config_error("unknown model variant `" + name + "` (expected nlfa|bnlfa|ebnl|dnlfa)");
}

void Hyperparameters::validate() const {
    if (d1 <= 0) throw config_error("d1 must be positive");
    if (d2 < 0) throw config_error("d2 must be nonnegative");
    if (!(lambda > 0.0)) throw config_error("lambda must be positive");
    if (!(e >= 0.0)) throw config_error("threshold e must be nonnegative");
    if (max_iters < 0) throw config_error("max-iters must be nonnegative");
    if (!(tol >= 0.0)) throw config_error("tol must be nonnegative");
    if (!(init_scale > 0.0)) throw config_error("init-scale must be positive");
    switch (variant) {
        case Variant::NLFA:
            if (d2 != 0) throw config_error("variant nlfa requires d2=0");
            break;
        case Variant::BNLFA:
            if (d2 != 1) throw config_error("variant bnlfa requires d2=1");
            break;
        case Variant::EBNL:
            if (d2 < 1) throw config_error("variant ebnl requires d2>=1");
            break;
        case Variant::DNLFA:
            if (d2 < 1) throw config_error("variant dnlfa requires d2>=1");
            if (!(e > 0.0)) throw config_error("variant dnlfa requires threshold e>0");
            break;
    }
}

namespace {

void fill_uniform(Mat& m, double scale, std::mt19937_64& gen) {
    for (double& v : m.data()) v = scale * unit_open(gen);
}

}  // namespace

Model init_model(const Hyperparameters& hp, index_t num_rows, index_t num_cols,
                 std::uint64_t seed) {
    hp.validate();
    if (num_rows == 0 || num_cols == 0)
        throw config_error("model dimensions must be positive");

    Model model;
    model.hp = hp;
    model.factors.X = Mat(num_rows, hp.d1);
    model.factors.Y = Mat(num_cols, hp.d1);

    std::mt19937_64 gen(seed);
    fill_uniform(model.factors.X, hp.init_scale, gen);
    fill_uniform(model.factors.Y, hp.init_scale, gen);

    if (hp.d2 > 0) {
        model.biases.G = Mat(num_rows, hp.d2);
        model.biases.H = Mat(num_cols, hp.d2);
        fill_uniform(model.biases.G, hp.init_scale, gen);
        fill_uniform(model.biases.H, hp.init_scale, gen);
        model.biases.I = MaskMat(num_rows, hp.d2, 1);
        model.biases.J = MaskMat(num_cols, hp.d2, 1);
    }
    return model;
}

double predict(const Model& model, index_t m, index_t n) {
    if (m >= model.rows() || n >= model.cols())
        throw data_error("predict: index (" + std::to_string(m) + ", " + std::to_string(n) +
                         ") out of range");

    const int d1 = model.hp.d1;
    const double* x = model.factors.X.row_ptr(m);
    const double* y = model.factors.Y.row_ptr(n);
    double acc = 0.0;
    for (int k = 0; k < d1; ++k) acc += x[k] * y[k];

    // The per-k bias pair is summed before accumulating so that swapping the
    // row and column roles reproduces the same floating-point result.
    if (model.has_biases()) {
        const int d2 = model.hp.d2;
        const double* g = model.biases.G.row_ptr(m);
        const double* h = model.biases.H.row_ptr(n);
        for (int k = 0; k < d2; ++k) {
            double gi = model.biases.I(m, k) ? g[k] : 0.0;
            double hj = model.biases.J(n, k) ? h[k] : 0.0;
            acc += gi + hj;
        }
    }
    return acc;
}

double objective(const Model& model, const SparseDataset& ds) {
    if (ds.rows() != model.rows() || ds.cols() != model.cols())
        throw data_error("objective: dataset dimensions do not match model");

    const int d1 = model.hp.d1;
    const int d2 = model.hp.d2;
    const double lambda = model.hp.lambda;
    double total = 0.0;
    for (const Entry& entry : ds.entries()) {
        const double* x = model.factors.X.row_ptr(entry.row);
        const double* y = model.factors.Y.row_ptr(entry.col);
        double rhat = 0.0;
        double reg = 0.0;
        for (int k = 0; k < d1; ++k) {
            rhat += x[k] * y[k];
            reg += x[k] * x[k] + y[k] * y[k];
        }
        if (d2 > 0) {
            const double* g = model.biases.G.row_ptr(entry.row);
            const double* h = model.biases.H.row_ptr(entry.col);
            for (int k = 0; k < d2; ++k) {
                double gi = model.biases.I(entry.row, k) ? g[k] : 0.0;
                double hj = model.biases.J(entry.col, k) ? h[k] : 0.0;
                rhat += gi + hj;
                reg += gi * gi + hj * hj;
            }
        }
        double resid = entry.value - rhat;
        total += 0.5 * (resid * resid + lambda * reg);
    }
    return total;
}

}  // namespace nlfa
