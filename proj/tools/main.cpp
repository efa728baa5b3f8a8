// dnlfa: nonnegative latent factor analysis of sparse nonnegative matrices,
// with optional dynamic linear biases. Subcommands: stats, train, cv, predict.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlfa/dataset.hpp"
#include "nlfa/errors.hpp"
#include "nlfa/eval.hpp"
#include "nlfa/model.hpp"
#include "nlfa/model_io.hpp"
#include "nlfa/text.hpp"
#include "nlfa/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct HpFlags {
    std::string variant = "dnlfa";
    nlfa::Hyperparameters hp;
    int threads = 1;

    nlfa::Hyperparameters resolve() const {
        nlfa::Hyperparameters out = hp;
        out.variant = nlfa::variant_from_name(variant);
        out.validate();
        return out;
    }
};

void add_hp_flags(CLI::App* cmd, HpFlags& flags) {
    cmd->add_option("--model", flags.variant, "Model variant: nlfa|bnlfa|ebnl|dnlfa")
        ->envname("DNLFA_MODEL")
        ->capture_default_str();
    cmd->add_option("--d1", flags.hp.d1, "Latent dimension")
        ->envname("DNLFA_D1")
        ->capture_default_str();
    cmd->add_option("--d2", flags.hp.d2, "Bias dimension (0 disables biases)")
        ->envname("DNLFA_D2")
        ->capture_default_str();
    cmd->add_option("--lambda", flags.hp.lambda,
                    "L2 regularization coefficient (tuning default; adjust per dataset)")
        ->envname("DNLFA_LAMBDA")
        ->capture_default_str();
    cmd->add_option("--threshold-e", flags.hp.e,
                    "Bias deactivation threshold for dnlfa (tuning default; adjust per dataset)")
        ->envname("DNLFA_THRESHOLD_E")
        ->capture_default_str();
    cmd->add_option("--max-iters", flags.hp.max_iters, "Iteration budget")
        ->envname("DNLFA_MAX_ITERS")
        ->capture_default_str();
    cmd->add_option("--tol", flags.hp.tol,
                    "Stop when consecutive RMSEs differ by less than this")
        ->envname("DNLFA_TOL")
        ->capture_default_str();
    cmd->add_option("--seed", flags.hp.seed, "Seed for initialization and fold splits")
        ->envname("DNLFA_SEED")
        ->capture_default_str();
    cmd->add_option("--init-scale", flags.hp.init_scale,
                    "Entries start uniform in (0, init-scale] (tuning default; adjust per dataset)")
        ->envname("DNLFA_INIT_SCALE")
        ->capture_default_str();
    cmd->add_option("--threads", flags.threads, "Trainer worker threads")
        ->envname("DNLFA_THREADS")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

std::string opt_or(const std::optional<double>& v, const char* absent) {
    return v ? nlfa::to_shortest(*v) : std::string(absent);
}

int run_stats(const std::string& data_path) {
    nlfa::SparseDataset ds = nlfa::load_triples_file(data_path);
    std::cout << "rows " << ds.rows() << '\n';
    std::cout << "cols " << ds.cols() << '\n';
    std::cout << "entries " << ds.nnz() << '\n';
    if (ds.rows() == 0 || ds.cols() == 0)
        std::cout << "density n/a\n";
    else
        std::cout << "density " << nlfa::format_percent(nlfa::density(ds)) << '\n';
    auto stats = nlfa::value_stats(ds);
    if (stats) {
        std::cout << "value_min " << nlfa::to_shortest(stats->min) << '\n';
        std::cout << "value_max " << nlfa::to_shortest(stats->max) << '\n';
        std::cout << "value_mean " << nlfa::to_shortest(stats->mean) << '\n';
    } else {
        std::cout << "value_min n/a\nvalue_max n/a\nvalue_mean n/a\n";
    }
    return kExitOk;
}

int run_train(const HpFlags& flags, const std::string& train_path, const std::string& valid_path,
              const std::string& out_path, std::string report_path) {
    nlfa::Hyperparameters hp = flags.resolve();  // reject bad flags before any work

    nlfa::SparseDataset train_ds = nlfa::load_triples_file(train_path);
    nlfa::SparseDataset valid_ds;
    if (!valid_path.empty()) {
        valid_ds = nlfa::load_triples_file(valid_path);
        if (valid_ds.rows() != train_ds.rows() || valid_ds.cols() != train_ds.cols())
            throw nlfa::data_error(
                "validation set must live in the training set's index space "
                "(same external ids); consider a fold split of one file instead");
    }

    nlfa::TrainOptions topts;
    topts.threads = flags.threads;
    auto [model, report] =
        nlfa::train(hp, train_ds, valid_path.empty() ? nullptr : &valid_ds, hp.seed, topts);

    nlfa::save_model_file(model, out_path);
    if (report_path.empty()) report_path = out_path + ".report.csv";
    {
        std::ofstream out(report_path);
        if (!out) throw nlfa::data_error("cannot write `" + report_path + "`");
        nlfa::report_to_csv(report, out);
    }

    std::cout << "iterations " << report.iterations.size() << '\n';
    std::cout << "termination " << nlfa::stop_reason_name(report.reason) << " ("
              << (report.termination_stream == nlfa::RmseStream::Validation ? "validation"
                                                                            : "training")
              << " RMSE)\n";
    if (!report.iterations.empty()) {
        const auto& last = report.iterations.back();
        std::cout << "final_train_rmse " << nlfa::to_shortest(last.train_rmse) << '\n';
        std::cout << "final_valid_rmse " << opt_or(last.valid_rmse, "n/a") << '\n';
    }
    std::cout << "model " << out_path << '\n';
    std::cout << "report " << report_path << '\n';
    return kExitOk;
}

int run_cv(const HpFlags& flags, const std::string& data_path, const std::string& variants_csv,
           int repetitions, bool parallel_reps, const std::string& out_prefix) {
    std::vector<nlfa::Variant> variants;
    std::stringstream ss(variants_csv);
    std::string name;
    while (std::getline(ss, name, ','))
        if (!name.empty()) variants.push_back(nlfa::variant_from_name(name));
    if (variants.empty()) throw nlfa::config_error("--variants must name at least one variant");

    nlfa::Hyperparameters hp_base = flags.hp;
    hp_base.variant = variants.front();
    // Per-variant d2 shaping happens inside compare_variants; validate the rest.
    if (repetitions < 1 || repetitions > 10)
        throw nlfa::config_error("--repetitions must be in 1..10");

    nlfa::SparseDataset ds = nlfa::load_triples_file(data_path);

    nlfa::CvOptions copts;
    copts.threads = flags.threads;
    copts.parallel_repetitions = parallel_reps;
    auto rows = nlfa::compare_variants(hp_base, ds, variants, repetitions, hp_base.seed, copts);

    if (!out_prefix.empty()) {
        auto write = [&](const std::string& suffix, auto&& emit) {
            std::string path = out_prefix + suffix;
            std::ofstream out(path);
            if (!out) throw nlfa::data_error("cannot write `" + path + "`");
            emit(out);
            std::cout << "wrote " << path << '\n';
        };
        write(".csv", [&](std::ostream& o) { nlfa::comparison_to_csv(rows, o); });
        write(".md", [&](std::ostream& o) { nlfa::comparison_to_markdown(rows, o); });
        write(".runs.csv", [&](std::ostream& o) { nlfa::runs_to_csv(rows, o); });
    }
    nlfa::comparison_to_markdown(rows, std::cout);
    return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& pairs_path,
                const std::vector<std::int64_t>& inline_pair, const std::string& out_path) {
    nlfa::Model model = nlfa::load_model_file(model_path);

    std::ostream* out = &std::cout;
    std::ofstream file_out;
    if (!out_path.empty()) {
        file_out.open(out_path);
        if (!file_out) throw nlfa::data_error("cannot write `" + out_path + "`");
        out = &file_out;
    }

    // external ids -> dense indices via the maps stored with the model
    std::unordered_map<std::int64_t, nlfa::index_t> row_lookup, col_lookup;
    for (std::size_t m = 0; m < model.row_map.size(); ++m)
        row_lookup.emplace(model.row_map[m], static_cast<nlfa::index_t>(m));
    for (std::size_t n = 0; n < model.col_map.size(); ++n)
        col_lookup.emplace(model.col_map[n], static_cast<nlfa::index_t>(n));

    std::size_t total = 0, failed = 0;
    auto emit = [&](std::int64_t row, std::int64_t col) {
        ++total;
        auto rit = row_lookup.find(row);
        if (rit == row_lookup.end()) {
            *out << row << ' ' << col << " ERR:unknown-row\n";
            ++failed;
            return;
        }
        auto cit = col_lookup.find(col);
        if (cit == col_lookup.end()) {
            *out << row << ' ' << col << " ERR:unknown-col\n";
            ++failed;
            return;
        }
        *out << row << ' ' << col << ' '
             << nlfa::to_shortest(nlfa::predict(model, rit->second, cit->second)) << '\n';
    };

    if (!inline_pair.empty()) emit(inline_pair[0], inline_pair[1]);

    if (!pairs_path.empty()) {
        std::ifstream in(pairs_path);
        if (!in) throw nlfa::data_error("cannot open `" + pairs_path + "`");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            for (char& c : line)
                if (c == ',' || c == '\t') c = ' ';
            std::istringstream ls(line);
            std::string a, b, extra;
            if (!(ls >> a)) continue;  // blank
            if (a[0] == '#') continue;
            std::int64_t row = 0, col = 0;
            if (!(ls >> b) || (ls >> extra) || !nlfa::parse_i64(a, row) ||
                !nlfa::parse_i64(b, col)) {
                *out << "ERR:malformed-line " << line_no << '\n';
                ++total;
                ++failed;
                continue;
            }
            emit(row, col);
        }
    }

    if (total > 0 && failed == total) return kExitData;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "dnlfa: nonnegative latent factor analysis of sparse nonnegative matrices,\n"
        "with static or dynamically gated linear bias terms"};
    app.require_subcommand(1);

    HpFlags flags;

    auto* stats_cmd = app.add_subcommand("stats", "Summarize a triple file");
    std::string stats_data;
    stats_cmd->add_option("--data", stats_data, "Triple file (`row col value` per line)")
        ->envname("DNLFA_DATA")
        ->required();

    auto* train_cmd = app.add_subcommand("train", "Train a model on a triple file");
    std::string train_path, valid_path, model_out = "model.txt", report_out;
    train_cmd->add_option("--train", train_path, "Training triple file")
        ->envname("DNLFA_TRAIN")
        ->required();
    train_cmd->add_option("--valid", valid_path, "Validation triple file (drives termination)")
        ->envname("DNLFA_VALID");
    train_cmd->add_option("--out", model_out, "Model output path")
        ->envname("DNLFA_OUT")
        ->capture_default_str();
    train_cmd->add_option("--report", report_out, "Per-iteration report CSV (default <out>.report.csv)")
        ->envname("DNLFA_REPORT");
    add_hp_flags(train_cmd, flags);

    auto* cv_cmd = app.add_subcommand("cv", "Tenfold cross-validation over model variants");
    std::string cv_data, cv_variants = "dnlfa", cv_out;
    int repetitions = 10;
    bool parallel_reps = false;
    cv_cmd->add_option("--data", cv_data, "Triple file")->envname("DNLFA_DATA")->required();
    cv_cmd->add_option("--variants", cv_variants, "Comma-separated variants to compare")
        ->envname("DNLFA_VARIANTS")
        ->capture_default_str();
    cv_cmd->add_option("--repetitions", repetitions, "Fold rotations to run (1..10)")
        ->envname("DNLFA_REPETITIONS")
        ->capture_default_str();
    cv_cmd->add_flag("--parallel-reps", parallel_reps,
                     "Run repetitions concurrently (same RMSEs, perturbed wall times)")
        ->envname("DNLFA_PARALLEL_REPS");
    cv_cmd->add_option("--out", cv_out, "Prefix for .csv/.md/.runs.csv table files")
        ->envname("DNLFA_OUT");
    add_hp_flags(cv_cmd, flags);

    auto* predict_cmd = app.add_subcommand("predict", "Score (row, col) pairs with a saved model");
    std::string predict_model, pairs_path, predict_out;
    std::vector<std::int64_t> inline_pair;
    predict_cmd->add_option("--model-file", predict_model, "Saved model path")
        ->envname("DNLFA_MODEL_FILE")
        ->required();
    predict_cmd->add_option("--pairs", pairs_path, "File of `row col` pairs to score")
        ->envname("DNLFA_PAIRS");
    predict_cmd->add_option("--pair", inline_pair, "Single `ROW COL` pair")
        ->expected(2);
    predict_cmd->add_option("--out", predict_out, "Write predictions here instead of stdout")
        ->envname("DNLFA_OUT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*stats_cmd) return run_stats(stats_data);
        if (*train_cmd) return run_train(flags, train_path, valid_path, model_out, report_out);
        if (*cv_cmd) return run_cv(flags, cv_data, cv_variants, repetitions, parallel_reps, cv_out);
        if (*predict_cmd) return run_predict(predict_model, pairs_path, inline_pair, predict_out);
    } catch (const nlfa::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlfa::data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
