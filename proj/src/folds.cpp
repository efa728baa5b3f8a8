#include "nlfa/folds.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "nlfa/errors.hpp"
#include "nlfa/rng.hpp"
#include "nlfa/text.hpp"

namespace nlfa {

FoldRole FoldPlan::role_of(int fold) const {
    if (fold == validation_fold()) return FoldRole::Validation;
    auto t = test_folds();
    if (fold == t[0] || fold == t[1]) return FoldRole::Test;
    return FoldRole::Train;
}

FoldPlan make_folds(const SparseDataset& ds, std::uint64_t seed) {
    if (ds.nnz() < FoldPlan::kFoldCount)
        throw data_error("fold split needs at least 10 entries, have " +
                         std::to_string(ds.nnz()));

    FoldPlan plan;
    plan.seed = seed;
    plan.assignment.resize(ds.nnz());
    // i % 10 keeps fold sizes within 1; the shuffle randomizes membership.
    for (std::size_t i = 0; i < plan.assignment.size(); ++i)
        plan.assignment[i] = static_cast<std::uint8_t>(i % FoldPlan::kFoldCount);
    std::mt19937_64 gen(seed);
    shuffle_portable(plan.assignment, gen);
    return plan;
}

FoldPlan rotate_folds(const FoldPlan& plan, int repetition) {
    if (repetition < 0 || repetition >= FoldPlan::kFoldCount)
        throw config_error("fold rotation must be in 0..9, got " + std::to_string(repetition));
    FoldPlan rotated = plan;
    rotated.repetition = repetition;
    return rotated;
}

SparseDataset subset(const SparseDataset& ds, const FoldPlan& plan, FoldRole role) {
    if (plan.assignment.size() != ds.nnz())
        throw data_error("fold plan covers " + std::to_string(plan.assignment.size()) +
                         " entries but dataset has " + std::to_string(ds.nnz()));
    std::vector<Entry> kept;
    for (std::size_t i = 0; i < ds.nnz(); ++i)
        if (plan.role_of(plan.assignment[i]) == role) kept.push_back(ds.entries()[i]);
    return SparseDataset(ds.rows(), ds.cols(), std::move(kept), ds.row_map(), ds.col_map());
}

void save_fold_plan(const FoldPlan& plan, std::ostream& out) {
    out << "folds=" << FoldPlan::kFoldCount << " seed=" << plan.seed << '\n';
    for (auto label : plan.assignment) out << static_cast<int>(label) << '\n';
}

FoldPlan load_fold_plan(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw data_error("fold plan: empty stream");
    FoldPlan plan;
    std::uint64_t folds = 0;
    auto eq1 = header.find("folds=");
    auto sp = header.find(' ');
    auto eq2 = header.find("seed=");
    if (eq1 != 0 || sp == std::string::npos || eq2 == std::string::npos ||
        !parse_u64(std::string_view(header).substr(6, sp - 6), folds) ||
        !parse_u64(std::string_view(header).substr(eq2 + 5), plan.seed))
        throw data_error("fold plan: bad header `" + header + "`");
    if (folds != FoldPlan::kFoldCount)
        throw data_error("fold plan: unsupported fold count " + std::to_string(folds));

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::uint64_t label = 0;
        if (!parse_u64(line, label) || label >= FoldPlan::kFoldCount)
            throw data_error("fold plan: bad fold label `" + line + "`");
        plan.assignment.push_back(static_cast<std::uint8_t>(label));
    }
    return plan;
}

std::uint64_t plan_hash(const FoldPlan& plan) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(plan.seed >> (8 * i)));
    for (auto label : plan.assignment) mix(label);
    return h;
}

}  // namespace nlfa
