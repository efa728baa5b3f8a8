#include "nlfa/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "nlfa/errors.hpp"
#include "nlfa/eval.hpp"
#include "nlfa/text.hpp"

namespace nlfa {

namespace {

/// Runs fn over contiguous chunks of [0, count). Chunking never affects the
/// result: each index writes only its own outputs.
template <typename Fn>
void parallel_over(std::size_t count, int threads, Fn&& fn) {
    std::size_t workers = threads > 1 ? std::min<std::size_t>(threads, count) : 1;
    if (workers <= 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mtx;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                fn(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mtx);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void check_compatible(const Model& model, const SparseDataset& ds) {
    if (ds.rows() != model.rows() || ds.cols() != model.cols())
        throw data_error("trainer: dataset dimensions do not match model");
}

}  // namespace

const char* stop_reason_name(StopReason r) {
    return r == StopReason::MaxIters ? "max-iters" : "tol-reached";
}

void update_x(Model& model, const SparseDataset& ds, double delta, int threads) {
    check_compatible(model, ds);
    const int d1 = model.hp.d1;
    const double lambda = model.hp.lambda;
    parallel_over(ds.rows(), threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> rhat;
        for (std::size_t m = lo; m < hi; ++m) {
            const auto& row = ds.row_entries(static_cast<index_t>(m));
            if (row.empty()) continue;
            rhat.resize(row.size());
            for (std::size_t i = 0; i < row.size(); ++i)
                rhat[i] = predict(model, static_cast<index_t>(m), row[i].first);
            double* x = model.factors.X.row_ptr(m);
            for (int k = 0; k < d1; ++k) {
                double xk = x[k];
                if (xk == 0.0) continue;  // zero is an absorbing fixed point
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    double yk = model.factors.Y(row[i].first, k);
                    num += row[i].second * yk;
                    den += rhat[i] * yk + lambda * xk;
                }
                x[k] = xk * (num / (den + delta));
            }
        }
    });
}

void update_y(Model& model, const SparseDataset& ds, double delta, int threads) {
    check_compatible(model, ds);
    const int d1 = model.hp.d1;
    const double lambda = model.hp.lambda;
    parallel_over(ds.cols(), threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> rhat;
        for (std::size_t n = lo; n < hi; ++n) {
            const auto& col = ds.col_entries(static_cast<index_t>(n));
            if (col.empty()) continue;
            rhat.resize(col.size());
            for (std::size_t i = 0; i < col.size(); ++i)
                rhat[i] = predict(model, col[i].first, static_cast<index_t>(n));
            double* y = model.factors.Y.row_ptr(n);
            for (int k = 0; k < d1; ++k) {
                double yk = y[k];
                if (yk == 0.0) continue;
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < col.size(); ++i) {
                    double xk = model.factors.X(col[i].first, k);
                    num += col[i].second * xk;
                    den += rhat[i] * xk + lambda * yk;
                }
                y[k] = yk * (num / (den + delta));
            }
        }
    });
}

void update_g(Model& model, const SparseDataset& ds, double delta, int threads) {
    check_compatible(model, ds);
    if (!model.has_biases()) return;
    const int d2 = model.hp.d2;
    const double lambda = model.hp.lambda;
    parallel_over(ds.rows(), threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> rhat;
        for (std::size_t m = lo; m < hi; ++m) {
            const auto& row = ds.row_entries(static_cast<index_t>(m));
            if (row.empty()) continue;
            rhat.resize(row.size());
            for (std::size_t i = 0; i < row.size(); ++i)
                rhat[i] = predict(model, static_cast<index_t>(m), row[i].first);
            for (int k = 0; k < d2; ++k) {
                // An inactive bias has a vanished numerator; write the limit directly.
                if (!model.biases.I(m, k)) {
                    model.biases.G(m, k) = 0.0;
                    continue;
                }
                double gk = model.biases.G(m, k);
                if (gk == 0.0) continue;
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    num += row[i].second;
                    den += rhat[i] + lambda * gk;
                }
                model.biases.G(m, k) = gk * (num / (den + delta));
            }
        }
    });
}

void update_h(Model& model, const SparseDataset& ds, double delta, int threads) {
    check_compatible(model, ds);
    if (!model.has_biases()) return;
    const int d2 = model.hp.d2;
    const double lambda = model.hp.lambda;
    parallel_over(ds.cols(), threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> rhat;
        for (std::size_t n = lo; n < hi; ++n) {
            const auto& col = ds.col_entries(static_cast<index_t>(n));
            if (col.empty()) continue;
            rhat.resize(col.size());
            for (std::size_t i = 0; i < col.size(); ++i)
                rhat[i] = predict(model, col[i].first, static_cast<index_t>(n));
            for (int k = 0; k < d2; ++k) {
                if (!model.biases.J(n, k)) {
                    model.biases.H(n, k) = 0.0;
                    continue;
                }
                double hk = model.biases.H(n, k);
                if (hk == 0.0) continue;
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < col.size(); ++i) {
                    num += col[i].second;
                    den += rhat[i] + lambda * hk;
                }
                model.biases.H(n, k) = hk * (num / (den + delta));
            }
        }
    });
}

void update_masks(Model& model, double threshold) {
    if (!model.has_biases()) return;
    for (std::size_t i = 0; i < model.biases.G.size(); ++i)
        if (model.biases.G.data()[i] < threshold) model.biases.I.data()[i] = 0;
    for (std::size_t i = 0; i < model.biases.H.size(); ++i)
        if (model.biases.H.data()[i] < threshold) model.biases.J.data()[i] = 0;
}

void zero_inactive_biases(Model& model) {
    if (!model.has_biases()) return;
    for (std::size_t i = 0; i < model.biases.G.size(); ++i)
        if (!model.biases.I.data()[i]) model.biases.G.data()[i] = 0.0;
    for (std::size_t i = 0; i < model.biases.H.size(); ++i)
        if (!model.biases.J.data()[i]) model.biases.H.data()[i] = 0.0;
}

void report_to_csv(const TrainReport& report, std::ostream& out) {
    out << "iter,objective,train_rmse,valid_rmse,active_i,active_j,elapsed_s\n";
    for (const auto& rec : report.iterations) {
        out << rec.iter << ',' << to_shortest(rec.objective) << ',' << to_shortest(rec.train_rmse)
            << ',' << (rec.valid_rmse ? to_shortest(*rec.valid_rmse) : std::string()) << ','
            << rec.active_i << ',' << rec.active_j << ',' << to_shortest(rec.elapsed_s) << '\n';
    }
}

std::pair<Model, TrainReport> train(const Hyperparameters& hp, const SparseDataset& train_ds,
                                    const SparseDataset* valid_ds, std::uint64_t seed,
                                    const TrainOptions& options) {
    hp.validate();
    if (train_ds.nnz() == 0) throw data_error("train: empty training set");

    Model model = init_model(hp, train_ds.rows(), train_ds.cols(), seed);
    model.row_map = train_ds.row_map();
    model.col_map = train_ds.col_map();

    const bool use_valid = valid_ds != nullptr && valid_ds->nnz() > 0;
    if (use_valid) check_compatible(model, *valid_ds);

    TrainReport report;
    report.termination_stream = use_valid ? RmseStream::Validation : RmseStream::Training;
    report.reason = StopReason::MaxIters;

    const bool biased = model.has_biases();
    const bool dynamic_masks = hp.variant == Variant::DNLFA;
    const int threads = options.threads;
    const double delta = options.guard_delta;

    double prev_metric = 0.0;
    auto started = std::chrono::steady_clock::now();
    for (int iter = 1; iter <= hp.max_iters; ++iter) {
        update_x(model, train_ds, delta, threads);
        update_y(model, train_ds, delta, threads);
        if (biased) {
            update_g(model, train_ds, delta, threads);
            update_h(model, train_ds, delta, threads);
            if (dynamic_masks) {
                update_masks(model, hp.e);
                zero_inactive_biases(model);
            }
        }

        IterationRecord rec;
        rec.iter = iter;
        rec.objective = objective(model, train_ds);
        rec.train_rmse = rmse(model, train_ds);
        if (use_valid) rec.valid_rmse = rmse(model, *valid_ds);
        if (biased) {
            rec.active_i = model.biases.I.count_ones();
            rec.active_j = model.biases.J.count_ones();
        }
        rec.elapsed_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        report.iterations.push_back(rec);
        if (options.observer) options.observer(iter, model);

        double metric = use_valid ? *rec.valid_rmse : rec.train_rmse;
        if (iter >= 2 && std::abs(metric - prev_metric) < hp.tol) {
            report.reason = StopReason::TolReached;
            break;
        }
        prev_metric = metric;
    }
    return {std::move(model), std::move(report)};
}

}  // namespace nlfa
