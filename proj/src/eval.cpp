#include "nlfa/eval.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include "nlfa/errors.hpp"
#include "nlfa/folds.hpp"
#include "nlfa/text.hpp"

namespace nlfa {

double rmse(const SparseDataset& scored,
            const std::function<double(index_t, index_t)>& predictor) {
    if (scored.nnz() == 0) throw data_error("rmse: empty scored set");
    double acc = 0.0;
    for (const Entry& e : scored.entries()) {
        double resid = e.value - predictor(e.row, e.col);
        acc += resid * resid;
    }
    return std::sqrt(acc / static_cast<double>(scored.nnz()));
}

double rmse(const Model& model, const SparseDataset& scored) {
    if (scored.rows() != model.rows() || scored.cols() != model.cols())
        throw data_error("rmse: dataset dimensions do not match model");
    return rmse(scored, [&](index_t m, index_t n) { return predict(model, m, n); });
}

Summary summarize(const std::vector<EvalResult>& results) {
    Summary s;
    s.repetitions = results.size();
    if (results.empty()) return s;
    double rmse_sum = 0.0, time_sum = 0.0;
    for (const auto& r : results) {
        rmse_sum += r.rmse;
        time_sum += r.wall_time_s;
    }
    const double n = static_cast<double>(results.size());
    s.mean_rmse = rmse_sum / n;
    s.mean_time_s = time_sum / n;
    if (results.size() >= 2) {
        double rmse_ss = 0.0, time_ss = 0.0;
        for (const auto& r : results) {
            rmse_ss += (r.rmse - s.mean_rmse) * (r.rmse - s.mean_rmse);
            time_ss += (r.wall_time_s - s.mean_time_s) * (r.wall_time_s - s.mean_time_s);
        }
        s.std_rmse = std::sqrt(rmse_ss / (n - 1.0));
        s.std_time_s = std::sqrt(time_ss / (n - 1.0));
    }
    return s;
}

namespace {

EvalResult run_repetition(const Hyperparameters& hp, const SparseDataset& ds,
                          const FoldPlan& base_plan, int repetition, std::uint64_t seed,
                          int threads) {
    FoldPlan plan = rotate_folds(base_plan, repetition);
    SparseDataset train_ds = subset(ds, plan, FoldRole::Train);
    SparseDataset valid_ds = subset(ds, plan, FoldRole::Validation);
    SparseDataset test_ds = subset(ds, plan, FoldRole::Test);

    TrainOptions topts;
    topts.threads = threads;
    auto t0 = std::chrono::steady_clock::now();
    auto [model, report] = train(hp, train_ds, &valid_ds, seed + repetition, topts);
    auto t1 = std::chrono::steady_clock::now();

    EvalResult result;
    result.variant = hp.variant;
    result.repetition = repetition;
    result.entry_count = test_ds.nnz();
    result.rmse = rmse(model, test_ds);
    result.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    result.stop_reason = report.reason;
    result.iterations = static_cast<int>(report.iterations.size());
    return result;
}

}  // namespace

CvOutcome run_cv(const Hyperparameters& hp, const SparseDataset& ds, int repetitions,
                 std::uint64_t seed, const CvOptions& options) {
    hp.validate();
    if (repetitions < 1 || repetitions > FoldPlan::kFoldCount)
        throw config_error("repetitions must be in 1..10, got " + std::to_string(repetitions));

    FoldPlan base_plan = make_folds(ds, seed);

    CvOutcome outcome;
    outcome.fold_plan_hash = plan_hash(base_plan);
    outcome.results.resize(repetitions);

    if (options.parallel_repetitions && repetitions > 1) {
        std::vector<std::thread> pool;
        std::exception_ptr first_error;
        std::mutex err_mtx;
        for (int r = 0; r < repetitions; ++r) {
            pool.emplace_back([&, r] {
                try {
                    outcome.results[r] =
                        run_repetition(hp, ds, base_plan, r, seed, options.threads);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mtx);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    } else {
        for (int r = 0; r < repetitions; ++r)
            outcome.results[r] = run_repetition(hp, ds, base_plan, r, seed, options.threads);
    }

    outcome.summary = summarize(outcome.results);
    return outcome;
}

std::vector<ComparisonRow> compare_variants(const Hyperparameters& hp_base,
                                            const SparseDataset& ds,
                                            const std::vector<Variant>& variants,
                                            int repetitions, std::uint64_t seed,
                                            const CvOptions& options) {
    if (variants.empty()) throw config_error("compare_variants: no variants given");
    std::vector<ComparisonRow> rows;
    rows.reserve(variants.size());
    for (Variant v : variants) {
        Hyperparameters hp = hp_base;
        hp.variant = v;
        switch (v) {
            case Variant::NLFA: hp.d2 = 0; break;
            case Variant::BNLFA: hp.d2 = 1; break;
            case Variant::EBNL:
            case Variant::DNLFA: break;  // keep hp_base.d2; validate() rejects 0
        }
        hp.validate();
        CvOutcome outcome = run_cv(hp, ds, repetitions, seed, options);
        ComparisonRow row;
        row.variant = v;
        row.summary = outcome.summary;
        row.fold_plan_hash = outcome.fold_plan_hash;
        row.results = std::move(outcome.results);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string opt_str(const std::optional<double>& v) {
    return v ? to_shortest(*v) : std::string();
}

}  // namespace

void comparison_to_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
    out << "variant,repetitions,mean_rmse,std_rmse,mean_time_s,std_time_s\n";
    for (const auto& row : rows) {
        out << variant_name(row.variant) << ',' << row.summary.repetitions << ','
            << to_shortest(row.summary.mean_rmse) << ',' << opt_str(row.summary.std_rmse) << ','
            << to_shortest(row.summary.mean_time_s) << ',' << opt_str(row.summary.std_time_s)
            << '\n';
    }
}

void comparison_to_markdown(const std::vector<ComparisonRow>& rows, std::ostream& out) {
    std::vector<std::array<std::string, 6>> cells;
    cells.push_back({"variant", "repetitions", "mean_rmse", "std_rmse", "mean_time_s",
                     "std_time_s"});
    for (const auto& row : rows) {
        cells.push_back({variant_name(row.variant), std::to_string(row.summary.repetitions),
                         to_shortest(row.summary.mean_rmse), opt_str(row.summary.std_rmse),
                         to_shortest(row.summary.mean_time_s), opt_str(row.summary.std_time_s)});
    }
    std::array<std::size_t, 6> width{};
    for (const auto& r : cells)
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    auto emit_row = [&](const std::array<std::string, 6>& r) {
        out << '|';
        for (std::size_t c = 0; c < r.size(); ++c)
            out << ' ' << r[c] << std::string(width[c] - r[c].size(), ' ') << " |";
        out << '\n';
    };
    emit_row(cells[0]);
    out << '|';
    for (std::size_t c = 0; c < width.size(); ++c) out << std::string(width[c] + 2, '-') << '|';
    out << '\n';
    for (std::size_t i = 1; i < cells.size(); ++i) emit_row(cells[i]);
}

void runs_to_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
    out << "variant,repetition,rmse,entries,iterations,stop_reason,time_s,plan_hash\n";
    for (const auto& row : rows) {
        for (const auto& r : row.results) {
            out << variant_name(row.variant) << ',' << r.repetition << ',' << to_shortest(r.rmse)
                << ',' << r.entry_count << ',' << r.iterations << ','
                << stop_reason_name(r.stop_reason) << ',' << to_shortest(r.wall_time_s) << ','
                << row.fold_plan_hash << '\n';
        }
    }
}

}  // namespace nlfa
