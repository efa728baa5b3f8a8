#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "nlfa/dataset.hpp"
#include "nlfa/model.hpp"

namespace nlfa {

/// Guard added to every multiplicative-update denominator. Keeps zeroed
/// biases and degenerate rows away from 0/0; tests that compare against the
/// additive reference step pass 0 to switch it off.
inline constexpr double kGuardDelta = 1e-12;

struct IterationRecord {
    int iter = 0;  // 1-based
    double objective = 0.0;
    double train_rmse = 0.0;
    std::optional<double> valid_rmse;  // absent when trained without a validation set
    std::size_t active_i = 0;          // surviving row-bias mask entries
    std::size_t active_j = 0;
    double elapsed_s = 0.0;  // cumulative wall time since training started
};

enum class StopReason { MaxIters, TolReached };
enum class RmseStream { Training, Validation };

const char* stop_reason_name(StopReason r);

struct TrainReport {
    std::vector<IterationRecord> iterations;
    StopReason reason = StopReason::MaxIters;
    RmseStream termination_stream = RmseStream::Training;  // which RMSE drove rule 2
};

/// `iter,objective,train_rmse,valid_rmse,active_i,active_j,elapsed_s`
void report_to_csv(const TrainReport& report, std::ostream& out);

struct TrainOptions {
    int threads = 1;
    double guard_delta = kGuardDelta;
    /// Called after every completed iteration with the current state.
    std::function<void(int iter, const Model& model)> observer;
};

// One multiplicative pass per family. All estimates within a pass read the
// pre-pass state (rows/columns are independent, so they parallelize without
// changing the result); sums run in the dataset's fixed index order. Rows or
// columns without observed entries are left untouched.
void update_x(Model& model, const SparseDataset& ds, double delta = kGuardDelta, int threads = 1);
void update_y(Model& model, const SparseDataset& ds, double delta = kGuardDelta, int threads = 1);
void update_g(Model& model, const SparseDataset& ds, double delta = kGuardDelta, int threads = 1);
void update_h(Model& model, const SparseDataset& ds, double delta = kGuardDelta, int threads = 1);

/// Deactivates every mask entry whose bias fell strictly below `threshold`.
/// Never reactivates anything.
void update_masks(Model& model, double threshold);

/// Pins biases of inactive mask entries to 0 (they contribute nothing either
/// way; this keeps the stored state canonical).
void zero_inactive_biases(Model& model);

/// Full training run: init, then per iteration x -> y -> bias passes -> mask
/// update (variant permitting), with estimates refreshed between passes.
/// Stops at max_iters or when consecutive RMSEs (validation when supplied,
/// training otherwise) differ by less than hp.tol.
std::pair<Model, TrainReport> train(const Hyperparameters& hp, const SparseDataset& train_ds,
                                    const SparseDataset* valid_ds, std::uint64_t seed,
                                    const TrainOptions& options = {});

}  // namespace nlfa
