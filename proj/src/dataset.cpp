#include "nlfa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nlfa/errors.hpp"
#include "nlfa/text.hpp"

namespace nlfa {

SparseDataset::SparseDataset(index_t num_rows, index_t num_cols, std::vector<Entry> entries,
                             std::vector<std::int64_t> row_map, std::vector<std::int64_t> col_map)
    : num_rows_(num_rows),
      num_cols_(num_cols),
      entries_(std::move(entries)),
      row_map_(std::move(row_map)),
      col_map_(std::move(col_map)) {
    if (row_map_.size() != num_rows_ || col_map_.size() != num_cols_)
        throw data_error("dataset: id map size does not match dimension");

    row_index_.resize(num_rows_);
    col_index_.resize(num_cols_);
    for (const Entry& e : entries_) {
        if (e.row >= num_rows_ || e.col >= num_cols_)
            throw data_error("dataset: entry index out of range");
        if (!(e.value >= 0.0) || !std::isfinite(e.value))
            throw data_error("dataset: entry value must be a finite nonnegative real");
        row_index_[e.row].emplace_back(e.col, e.value);
        col_index_[e.col].emplace_back(e.row, e.value);
    }
    // Sorted inner lists fix the summation order; a tie means a duplicate pair.
    for (auto& list : row_index_) {
        std::sort(list.begin(), list.end(),
                  [](const IndexedValue& a, const IndexedValue& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < list.size(); ++i)
            if (list[i].first == list[i - 1].first)
                throw data_error("dataset: duplicate (row, col) pair");
    }
    for (auto& list : col_index_) {
        std::sort(list.begin(), list.end(),
                  [](const IndexedValue& a, const IndexedValue& b) { return a.first < b.first; });
    }

    row_lookup_.reserve(row_map_.size());
    for (index_t m = 0; m < num_rows_; ++m) {
        if (!row_lookup_.emplace(row_map_[m], m).second)
            throw data_error("dataset: duplicate external row id in map");
    }
    col_lookup_.reserve(col_map_.size());
    for (index_t n = 0; n < num_cols_; ++n) {
        if (!col_lookup_.emplace(col_map_[n], n).second)
            throw data_error("dataset: duplicate external column id in map");
    }
}

std::optional<index_t> SparseDataset::dense_row(std::int64_t external_id) const {
    auto it = row_lookup_.find(external_id);
    if (it == row_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<index_t> SparseDataset::dense_col(std::int64_t external_id) const {
    auto it = col_lookup_.find(external_id);
    if (it == col_lookup_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::vector<std::string_view> split_tokens(std::string& line) {
    for (char& c : line)
        if (c == ',' || c == '\t') c = ' ';
    std::vector<std::string_view> toks;
    std::string_view sv(line);
    std::size_t pos = 0;
    while (pos < sv.size()) {
        while (pos < sv.size() && sv[pos] == ' ') ++pos;
        std::size_t start = pos;
        while (pos < sv.size() && sv[pos] != ' ') ++pos;
        if (pos > start) toks.push_back(sv.substr(start, pos - start));
    }
    return toks;
}

std::string line_msg(std::size_t line_no, const std::string& what) {
    return "line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

SparseDataset load_triples(std::istream& in) {
    std::vector<Entry> entries;
    std::vector<std::int64_t> row_map, col_map;
    std::unordered_map<std::int64_t, index_t> row_lookup, col_lookup;
    // first line number of each (row, col), for duplicate diagnostics
    std::unordered_map<std::uint64_t, std::size_t> seen;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string work = line;
        auto toks = split_tokens(work);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks.size() != 3)
            throw data_error(line_msg(line_no, "expected `row col value`, got " +
                                                   std::to_string(toks.size()) + " fields"));

        std::int64_t ext_row = 0, ext_col = 0;
        double value = 0.0;
        if (!parse_i64(toks[0], ext_row))
            throw data_error(line_msg(line_no, "bad row id `" + std::string(toks[0]) + "`"));
        if (!parse_i64(toks[1], ext_col))
            throw data_error(line_msg(line_no, "bad column id `" + std::string(toks[1]) + "`"));
        if (!parse_double(toks[2], value) || !std::isfinite(value))
            throw data_error(line_msg(line_no, "bad value `" + std::string(toks[2]) + "`"));
        if (value < 0.0)
            throw data_error(line_msg(line_no, "negative value " + to_shortest(value)));

        auto [rit, rnew] = row_lookup.emplace(ext_row, static_cast<index_t>(row_map.size()));
        if (rnew) row_map.push_back(ext_row);
        auto [cit, cnew] = col_lookup.emplace(ext_col, static_cast<index_t>(col_map.size()));
        if (cnew) col_map.push_back(ext_col);

        index_t m = rit->second, n = cit->second;
        std::uint64_t key = (static_cast<std::uint64_t>(m) << 32) | n;
        auto [sit, fresh] = seen.emplace(key, line_no);
        if (!fresh)
            throw data_error(line_msg(line_no, "duplicate pair (" + std::to_string(ext_row) + ", " +
                                                   std::to_string(ext_col) + "), first at line " +
                                                   std::to_string(sit->second)));
        entries.push_back({m, n, value});
    }

    // sizes first: the same call expression moves the maps away
    const index_t num_rows = static_cast<index_t>(row_map.size());
    const index_t num_cols = static_cast<index_t>(col_map.size());
    return SparseDataset(num_rows, num_cols, std::move(entries), std::move(row_map),
                         std::move(col_map));
}

SparseDataset load_triples_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open `" + path + "`");
    try {
        return load_triples(in);
    } catch (const data_error& e) {
        throw data_error(path + ": " + e.what());
    }
}

void save_triples(const SparseDataset& ds, std::ostream& out) {
    for (const Entry& e : ds.entries()) {
        out << ds.external_row(e.row) << ' ' << ds.external_col(e.col) << ' '
            << to_shortest(e.value) << '\n';
    }
}

double density_from_counts(std::size_t nnz, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw data_error("density undefined for a zero-dimension dataset");
    return static_cast<double>(nnz) /
           (static_cast<double>(rows) * static_cast<double>(cols));
}

double density(const SparseDataset& ds) {
    return density_from_counts(ds.nnz(), ds.rows(), ds.cols());
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
    return buf;
}

std::optional<ValueStats> value_stats(const SparseDataset& ds) {
    if (ds.nnz() == 0) return std::nullopt;
    ValueStats s;
    s.min = s.max = ds.entries().front().value;
    double sum = 0.0;
    for (const Entry& e : ds.entries()) {
        s.min = std::min(s.min, e.value);
        s.max = std::max(s.max, e.value);
        sum += e.value;
    }
    s.mean = sum / static_cast<double>(ds.nnz());
    return s;
}

}  // namespace nlfa
