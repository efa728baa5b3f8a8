#include "nlfa/model_io.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "nlfa/errors.hpp"
#include "nlfa/text.hpp"

namespace nlfa {

namespace {

constexpr const char* kMagic = "dnlfa-model v1";

void write_mat(std::ostream& out, const char* name, const Mat& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* p = m.row_ptr(r);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out << ' ';
            out << to_shortest(p[c]);
        }
        out << '\n';
    }
}

void write_mask(std::ostream& out, const char* name, const MaskMat& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out << ' ';
            out << static_cast<int>(m(r, c));
        }
        out << '\n';
    }
}

void write_ids(std::ostream& out, const char* name, const std::vector<std::int64_t>& ids) {
    out << name << ' ' << ids.size() << '\n';
    for (auto id : ids) out << id << '\n';
}

struct Reader {
    std::istream& in;
    std::size_t line_no = 0;

    std::string next_line() {
        std::string line;
        if (!std::getline(in, line))
            throw data_error("model file: corrupt or truncated stream (unexpected end at line " +
                             std::to_string(line_no + 1) + ")");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    std::vector<std::string_view> fields(const std::string& line) const {
        std::vector<std::string_view> out;
        std::string_view sv(line);
        std::size_t pos = 0;
        while (pos < sv.size()) {
            while (pos < sv.size() && sv[pos] == ' ') ++pos;
            std::size_t start = pos;
            while (pos < sv.size() && sv[pos] != ' ') ++pos;
            if (pos > start) out.push_back(sv.substr(start, pos - start));
        }
        return out;
    }

    // `name rows cols` header followed by rows lines of cols decimals
    Mat read_mat(const char* name, std::size_t rows, std::size_t cols) {
        expect_block_header(name, rows, cols);
        Mat m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            std::string line = next_line();
            auto toks = fields(line);
            if (toks.size() != cols)
                throw data_error(std::string("model file: corrupt matrix block `") + name +
                                 "` at line " + std::to_string(line_no));
            for (std::size_t c = 0; c < cols; ++c) {
                double v = 0.0;
                if (!parse_double(toks[c], v))
                    throw data_error(std::string("model file: corrupt matrix block `") + name +
                                     "` at line " + std::to_string(line_no));
                m(r, c) = v;
            }
        }
        return m;
    }

    MaskMat read_mask(const char* name, std::size_t rows, std::size_t cols) {
        expect_block_header(name, rows, cols);
        MaskMat m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            std::string line = next_line();
            auto toks = fields(line);
            if (toks.size() != cols)
                throw data_error(std::string("model file: corrupt matrix block `") + name +
                                 "` at line " + std::to_string(line_no));
            for (std::size_t c = 0; c < cols; ++c) {
                if (toks[c] == "0") m(r, c) = 0;
                else if (toks[c] == "1") m(r, c) = 1;
                else
                    throw data_error(std::string("model file: corrupt matrix block `") + name +
                                     "`: mask entries must be 0 or 1 (line " +
                                     std::to_string(line_no) + ")");
            }
        }
        return m;
    }

    std::vector<std::int64_t> read_ids(const char* name, std::size_t count) {
        std::string line = next_line();
        auto toks = fields(line);
        std::uint64_t n = 0;
        if (toks.size() != 2 || toks[0] != name || !parse_u64(toks[1], n) || n != count)
            throw data_error(std::string("model file: dimension mismatch in `") + name +
                             "` header at line " + std::to_string(line_no));
        std::vector<std::int64_t> ids(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::string id_line = next_line();
            if (!parse_i64(id_line, ids[i]))
                throw data_error(std::string("model file: corrupt `") + name + "` block at line " +
                                 std::to_string(line_no));
        }
        return ids;
    }

    void expect_block_header(const char* name, std::size_t rows, std::size_t cols) {
        std::string line = next_line();
        auto toks = fields(line);
        std::uint64_t r = 0, c = 0;
        if (toks.size() != 3 || toks[0] != name || !parse_u64(toks[1], r) || !parse_u64(toks[2], c))
            throw data_error(std::string("model file: corrupt block header, expected `") + name +
                             " rows cols` at line " + std::to_string(line_no));
        if (r != rows || c != cols)
            throw data_error(std::string("model file: dimension mismatch in block `") + name +
                             "` at line " + std::to_string(line_no));
    }
};

}  // namespace

void save_model(const Model& model, std::ostream& out) {
    const Hyperparameters& hp = model.hp;
    out << kMagic << '\n';
    out << "variant " << variant_name(hp.variant) << '\n';
    out << "rows " << model.rows() << " cols " << model.cols() << " d1 " << hp.d1 << " d2 "
        << hp.d2 << '\n';
    out << "lambda " << to_shortest(hp.lambda) << " e " << to_shortest(hp.e) << " tol "
        << to_shortest(hp.tol) << " init_scale " << to_shortest(hp.init_scale) << '\n';
    out << "max_iters " << hp.max_iters << " seed " << hp.seed << '\n';
    write_mat(out, "X", model.factors.X);
    write_mat(out, "Y", model.factors.Y);
    if (model.has_biases()) {
        write_mat(out, "G", model.biases.G);
        write_mat(out, "H", model.biases.H);
        write_mask(out, "I", model.biases.I);
        write_mask(out, "J", model.biases.J);
    }
    write_ids(out, "row_map", model.row_map);
    write_ids(out, "col_map", model.col_map);
    out << "end\n";
}

Model load_model(std::istream& in) {
    Reader reader{in};

    std::string magic = reader.next_line();
    if (magic != kMagic)
        throw data_error("model file: version mismatch, expected `" + std::string(kMagic) +
                         "`, got `" + magic + "`");

    Model model;
    Hyperparameters& hp = model.hp;

    {
        std::string line = reader.next_line();  // keep alive: fields() returns views
        auto toks = reader.fields(line);
        if (toks.size() != 2 || toks[0] != "variant")
            throw data_error("model file: corrupt variant line");
        hp.variant = variant_from_name(std::string(toks[1]));
    }

    std::uint64_t rows = 0, cols = 0, d1 = 0, d2 = 0;
    {
        std::string line = reader.next_line();
        auto toks = reader.fields(line);
        if (toks.size() != 8 || toks[0] != "rows" || toks[2] != "cols" || toks[4] != "d1" ||
            toks[6] != "d2" || !parse_u64(toks[1], rows) || !parse_u64(toks[3], cols) ||
            !parse_u64(toks[5], d1) || !parse_u64(toks[7], d2))
            throw data_error("model file: corrupt dimensions line");
        hp.d1 = static_cast<int>(d1);
        hp.d2 = static_cast<int>(d2);
    }
    {
        std::string line = reader.next_line();
        auto toks = reader.fields(line);
        if (toks.size() != 8 || toks[0] != "lambda" || toks[2] != "e" || toks[4] != "tol" ||
            toks[6] != "init_scale" || !parse_double(toks[1], hp.lambda) ||
            !parse_double(toks[3], hp.e) || !parse_double(toks[5], hp.tol) ||
            !parse_double(toks[7], hp.init_scale))
            throw data_error("model file: corrupt hyperparameter line");
    }
    {
        std::string line = reader.next_line();
        auto toks = reader.fields(line);
        std::uint64_t mi = 0;
        if (toks.size() != 4 || toks[0] != "max_iters" || toks[2] != "seed" ||
            !parse_u64(toks[1], mi) || !parse_u64(toks[3], hp.seed))
            throw data_error("model file: corrupt iteration/seed line");
        hp.max_iters = static_cast<int>(mi);
    }
    hp.validate();

    model.factors.X = reader.read_mat("X", rows, d1);
    model.factors.Y = reader.read_mat("Y", cols, d1);
    if (d2 > 0) {
        model.biases.G = reader.read_mat("G", rows, d2);
        model.biases.H = reader.read_mat("H", cols, d2);
        model.biases.I = reader.read_mask("I", rows, d2);
        model.biases.J = reader.read_mask("J", cols, d2);
    }
    model.row_map = reader.read_ids("row_map", rows);
    model.col_map = reader.read_ids("col_map", cols);
    if (reader.next_line() != "end") throw data_error("model file: missing end marker");
    return model;
}

void save_model_file(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write `" + path + "`");
    save_model(model, out);
    out.flush();
    if (!out) throw data_error("write failed for `" + path + "`");
}

Model load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open `" + path + "`");
    try {
        return load_model(in);
    } catch (const data_error& e) {
        throw data_error(path + ": " + e.what());
    }
}

}  // namespace nlfa
