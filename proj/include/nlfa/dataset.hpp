#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace nlfa {

using index_t = std::uint32_t;

/// One observed cell in dense coordinates.
struct Entry {
    index_t row = 0;
    index_t col = 0;
    double value = 0.0;

    bool operator==(const Entry&) const = default;
};

/// Sparse nonnegative matrix holding only the observed entries, with both a
/// row-major and a column-major index view and external-id <-> dense-index
/// maps. Immutable after construction; safe for concurrent reads.
class SparseDataset {
public:
    using IndexedValue = std::pair<index_t, double>;

    SparseDataset() = default;

    /// Builds from dense-indexed entries. Validates ranges, nonnegativity and
    /// uniqueness of (row, col) pairs; builds both sorted index views.
    SparseDataset(index_t num_rows, index_t num_cols, std::vector<Entry> entries,
                  std::vector<std::int64_t> row_map, std::vector<std::int64_t> col_map);

    index_t rows() const { return num_rows_; }
    index_t cols() const { return num_cols_; }
    std::size_t nnz() const { return entries_.size(); }

    const std::vector<Entry>& entries() const { return entries_; }
    const std::vector<IndexedValue>& row_entries(index_t m) const { return row_index_[m]; }
    const std::vector<IndexedValue>& col_entries(index_t n) const { return col_index_[n]; }

    const std::vector<std::int64_t>& row_map() const { return row_map_; }
    const std::vector<std::int64_t>& col_map() const { return col_map_; }
    std::int64_t external_row(index_t m) const { return row_map_[m]; }
    std::int64_t external_col(index_t n) const { return col_map_[n]; }
    std::optional<index_t> dense_row(std::int64_t external_id) const;
    std::optional<index_t> dense_col(std::int64_t external_id) const;

    bool operator==(const SparseDataset& other) const {
        return num_rows_ == other.num_rows_ && num_cols_ == other.num_cols_ &&
               entries_ == other.entries_ && row_map_ == other.row_map_ &&
               col_map_ == other.col_map_;
    }

private:
    index_t num_rows_ = 0, num_cols_ = 0;
    std::vector<Entry> entries_;
    std::vector<std::vector<IndexedValue>> row_index_;
    std::vector<std::vector<IndexedValue>> col_index_;
    std::vector<std::int64_t> row_map_;  // dense -> external
    std::vector<std::int64_t> col_map_;
    std::unordered_map<std::int64_t, index_t> row_lookup_;  // external -> dense
    std::unordered_map<std::int64_t, index_t> col_lookup_;
};

/// Parses `row col value` triples (whitespace/comma/tab separated, `#`
/// comments). External ids get dense indices in order of first appearance.
/// Throws data_error with the offending line number on malformed lines,
/// negative values, non-finite values and duplicate (row, col) pairs.
SparseDataset load_triples(std::istream& in);
SparseDataset load_triples_file(const std::string& path);

/// Writes entries as external-id triples, one per line, in entry order.
/// Reloading yields the same observations; datasets that came from
/// load_triples round-trip exactly (dense ids follow first appearance).
void save_triples(const SparseDataset& ds, std::ostream& out);

/// |observed| / (rows * cols). Throws data_error when either dimension is 0.
double density(const SparseDataset& ds);
double density_from_counts(std::size_t nnz, std::size_t rows, std::size_t cols);

/// "2.83%" style rendering of a fraction, two decimals.
std::string format_percent(double fraction);

struct ValueStats {
    double min = 0.0, max = 0.0, mean = 0.0;
};
/// min/max/mean over observed values; nullopt for an empty dataset.
std::optional<ValueStats> value_stats(const SparseDataset& ds);

}  // namespace nlfa
