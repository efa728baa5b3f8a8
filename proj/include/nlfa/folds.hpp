#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nlfa/dataset.hpp"

namespace nlfa {

enum class FoldRole { Train, Validation, Test };

/// Partition of a dataset's entries into ten folds plus the current rotation
/// of fold roles: seven train folds, one validation fold, two test folds.
struct FoldPlan {
    static constexpr int kFoldCount = 10;

    std::uint64_t seed = 0;
    std::vector<std::uint8_t> assignment;  // fold label per entry, in entry order
    int repetition = 0;                    // rotation applied to fold roles

    int validation_fold() const { return (7 + repetition) % kFoldCount; }
    std::array<int, 2> test_folds() const {
        return {(8 + repetition) % kFoldCount, (9 + repetition) % kFoldCount};
    }
    FoldRole role_of(int fold) const;
};

/// Seeded balanced split of all entries into ten folds (sizes within 1),
/// with the default rotation (repetition 0). Requires at least 10 entries.
FoldPlan make_folds(const SparseDataset& ds, std::uint64_t seed);

/// Same partition, fold roles cyclically shifted by `repetition` (0..9).
FoldPlan rotate_folds(const FoldPlan& plan, int repetition);

/// Entries whose fold currently has `role`, as a dataset over the same dense
/// index space (dimensions and id maps preserved).
SparseDataset subset(const SparseDataset& ds, const FoldPlan& plan, FoldRole role);

/// Text form: header `folds=10 seed=<s>`, then one fold label per line.
void save_fold_plan(const FoldPlan& plan, std::ostream& out);
FoldPlan load_fold_plan(std::istream& in);

/// FNV-1a over seed and assignment; equal plans hash equal. Used to assert
/// that paired comparisons really share one fold assignment.
std::uint64_t plan_hash(const FoldPlan& plan);

}  // namespace nlfa
