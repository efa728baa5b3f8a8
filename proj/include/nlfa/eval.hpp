#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlfa/dataset.hpp"
#include "nlfa/model.hpp"
#include "nlfa/trainer.hpp"

namespace nlfa {

/// Root mean square residual over the scored entries, in entry order.
/// Throws data_error on an empty scored set.
double rmse(const Model& model, const SparseDataset& scored);

/// Model-free scoring path for arbitrary predictors.
double rmse(const SparseDataset& scored,
            const std::function<double(index_t, index_t)>& predictor);

struct EvalResult {
    double rmse = 0.0;
    std::size_t entry_count = 0;
    Variant variant = Variant::NLFA;
    int repetition = 0;
    double wall_time_s = 0.0;  // training only; loading and scoring excluded
    StopReason stop_reason = StopReason::MaxIters;
    int iterations = 0;
};

struct Summary {
    std::size_t repetitions = 0;
    double mean_rmse = 0.0;
    std::optional<double> std_rmse;  // sample std dev; absent below 2 repetitions
    double mean_time_s = 0.0;
    std::optional<double> std_time_s;
};

Summary summarize(const std::vector<EvalResult>& results);

struct CvOptions {
    int threads = 1;  // trainer workers per repetition
    /// Repetitions run one after another by default so wall times are clean.
    /// Concurrent repetitions give identical RMSEs but perturbed timings.
    bool parallel_repetitions = false;
};

struct CvOutcome {
    std::vector<EvalResult> results;  // one per repetition
    Summary summary;
    std::uint64_t fold_plan_hash = 0;
};

/// Tenfold protocol: one shared fold split, then per repetition r the fold
/// roles rotate by r, the model trains on the seven train folds with the
/// validation fold driving termination (init seed = seed + r), and the two
/// test folds are scored.
CvOutcome run_cv(const Hyperparameters& hp, const SparseDataset& ds, int repetitions,
                 std::uint64_t seed, const CvOptions& options = {});

struct ComparisonRow {
    Variant variant = Variant::NLFA;
    Summary summary;
    std::uint64_t fold_plan_hash = 0;
    std::vector<EvalResult> results;
};

/// run_cv per variant against the identical fold plan and the identical
/// per-repetition init seeds, so rows are directly comparable. d2 is forced
/// to each variant's shape: 0 for nlfa, 1 for bnlfa, hp_base.d2 otherwise.
std::vector<ComparisonRow> compare_variants(const Hyperparameters& hp_base,
                                            const SparseDataset& ds,
                                            const std::vector<Variant>& variants,
                                            int repetitions, std::uint64_t seed,
                                            const CvOptions& options = {});

/// `variant,repetitions,mean_rmse,std_rmse,mean_time_s,std_time_s`
void comparison_to_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);
/// Aligned Markdown table of the same columns.
void comparison_to_markdown(const std::vector<ComparisonRow>& rows, std::ostream& out);
/// Per-repetition detail: `variant,repetition,rmse,entries,iterations,stop_reason,time_s,plan_hash`
void runs_to_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);

}  // namespace nlfa
