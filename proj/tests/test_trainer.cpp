#include <cmath>
#include <cstdint>
#include <sstream>

#include "doctest.h"
#include "nlfa/errors.hpp"
#include "nlfa/eval.hpp"
#include "nlfa/folds.hpp"
#include "nlfa/trainer.hpp"
#include "support/dense_oracle.hpp"
#include "support/synthetic.hpp"

using namespace nlfa;

namespace {

SparseDataset one_entry() {
    std::istringstream in("1 7 5.0\n");
    return load_triples(in);
}

Model one_entry_model(int d2) {
    Hyperparameters hp;
    hp.d1 = 1;
    hp.d2 = d2;
    hp.lambda = 0.1;
    hp.variant = d2 == 0 ? Variant::NLFA : Variant::BNLFA;
    Model model = init_model(hp, 1, 1, 1);
    model.factors.X(0, 0) = 2.0;
    model.factors.Y(0, 0) = 3.0;
    if (d2 > 0) {
        model.biases.G(0, 0) = 0.5;
        model.biases.H(0, 0) = 0.25;
    }
    return model;
}

struct EquivFixture {
    SparseDataset ds;
    Model model;
    testing::DenseData dense;
    testing::DenseState state;

    explicit EquivFixture(std::uint64_t seed) {
        ds = testing::random_dataset({.rows = 8, .cols = 7, .density = 0.5, .seed = seed});
        Hyperparameters hp;
        hp.d1 = 3;
        hp.d2 = 2;
        hp.lambda = 0.04;
        model = init_model(hp, ds.rows(), ds.cols(), seed + 1);
        testing::randomize_state(model, 0.3, 1.7, seed + 2);
        dense = testing::DenseData::from_dataset(ds);
        state = testing::DenseState::from_model(model);
    }
};

void check_close(const Mat& a, const Mat& b, double rel) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    for (std::size_t i = 0; i < a.data().size(); ++i)
        CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(rel));
}

}  // namespace

TEST_CASE("single-entry factor update matches the closed form") {
    SparseDataset ds = one_entry();
    Model model = one_entry_model(0);
    // rhat = 6; x' = x * (r*y) / (rhat*y + lambda*x) = 2 * 15 / 18.2
    update_x(model, ds, /*delta=*/0.0);
    CHECK(model.factors.X(0, 0) == doctest::Approx(30.0 / 18.2).epsilon(1e-15));
    CHECK(model.factors.Y(0, 0) == 3.0);  // untouched
}

TEST_CASE("single-entry bias update matches the closed form") {
    SparseDataset ds = one_entry();
    Model model = one_entry_model(1);
    // rhat = 6.75; g' = g * r / (rhat + lambda*g) = 0.5 * 5 / 6.8
    update_g(model, ds, /*delta=*/0.0);
    CHECK(model.biases.G(0, 0) == doctest::Approx(2.5 / 6.8).epsilon(1e-15));
    // h update then sees the fresh g
    double g = model.biases.G(0, 0);
    double rhat = 6.0 + g + 0.25;
    update_h(model, ds, /*delta=*/0.0);
    CHECK(model.biases.H(0, 0) == doctest::Approx(0.25 * 5.0 / (rhat + 0.1 * 0.25)).epsilon(1e-12));
}

TEST_CASE("multiplicative pass equals the additive step with canceling rates") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        CAPTURE(seed);
        EquivFixture fx(seed);
        {
            Model lib = fx.model;
            update_x(lib, fx.ds, 0.0);
            testing::DenseState ref = fx.state;
            testing::agd_family_step(ref, fx.dense, testing::Family::X,
                                     testing::canceling_eta(fx.state, fx.dense,
                                                            testing::Family::X));
            check_close(lib.factors.X, ref.X, 1e-10);
        }
        {
            Model lib = fx.model;
            update_y(lib, fx.ds, 0.0);
            testing::DenseState ref = fx.state;
            testing::agd_family_step(ref, fx.dense, testing::Family::Y,
                                     testing::canceling_eta(fx.state, fx.dense,
                                                            testing::Family::Y));
            check_close(lib.factors.Y, ref.Y, 1e-10);
        }
        {
            Model lib = fx.model;
            update_g(lib, fx.ds, 0.0);
            testing::DenseState ref = fx.state;
            testing::agd_family_step(ref, fx.dense, testing::Family::G,
                                     testing::canceling_eta(fx.state, fx.dense,
                                                            testing::Family::G));
            check_close(lib.biases.G, ref.G, 1e-10);
        }
        {
            Model lib = fx.model;
            update_h(lib, fx.ds, 0.0);
            testing::DenseState ref = fx.state;
            testing::agd_family_step(ref, fx.dense, testing::Family::H,
                                     testing::canceling_eta(fx.state, fx.dense,
                                                            testing::Family::H));
            check_close(lib.biases.H, ref.H, 1e-10);
        }
    }
}

TEST_CASE("updates preserve nonnegativity and absorb zeros") {
    EquivFixture fx(9);
    fx.model.factors.X(0, 0) = 0.0;
    fx.model.biases.G(1, 1) = 0.0;
    for (int it = 0; it < 25; ++it) {
        update_x(fx.model, fx.ds);
        update_y(fx.model, fx.ds);
        update_g(fx.model, fx.ds);
        update_h(fx.model, fx.ds);
        for (const Mat* m :
             {&fx.model.factors.X, &fx.model.factors.Y, &fx.model.biases.G, &fx.model.biases.H})
            for (double v : m->data()) REQUIRE(v >= 0.0);
        REQUIRE(fx.model.factors.X(0, 0) == 0.0);
        REQUIRE(fx.model.biases.G(1, 1) == 0.0);
    }
}

TEST_CASE("rows and columns without observations are never touched") {
    std::istringstream in("1 5 2.0\n3 5 4.0\n");
    SparseDataset full = load_triples(in);
    Hyperparameters hp;
    hp.d1 = 2;
    hp.d2 = 1;
    hp.variant = Variant::BNLFA;
    Model model = init_model(hp, full.rows(), full.cols(), 2);
    // same dimensions, but dense row 1 has no observations
    SparseDataset sparse_one(full.rows(), full.cols(), {full.entries()[0]}, full.row_map(),
                             full.col_map());
    double before_x = model.factors.X(1, 0);
    double before_g = model.biases.G(1, 0);
    update_x(model, sparse_one);
    update_g(model, sparse_one);
    CHECK(model.factors.X(1, 0) == before_x);
    CHECK(model.biases.G(1, 0) == before_g);
}

TEST_CASE("mask update uses strict inequality and never reactivates") {
    Hyperparameters hp;
    hp.d1 = 1;
    hp.d2 = 2;
    Model model = init_model(hp, 2, 2, 1);
    model.biases.G(0, 0) = 0.01;   // exactly at threshold: stays active
    model.biases.G(0, 1) = 0.009;  // below: deactivates
    model.biases.G(1, 0) = 0.5;
    model.biases.G(1, 1) = 0.0;
    model.biases.H(0, 0) = 1.0;
    model.biases.H(0, 1) = 1.0;
    model.biases.H(1, 0) = 0.0099;
    model.biases.H(1, 1) = 1.0;

    update_masks(model, 0.01);
    CHECK(model.biases.I(0, 0) == 1);
    CHECK(model.biases.I(0, 1) == 0);
    CHECK(model.biases.I(1, 0) == 1);
    CHECK(model.biases.I(1, 1) == 0);
    CHECK(model.biases.J(1, 0) == 0);
    CHECK(model.biases.J(0, 0) == 1);

    // raising the bias later must not bring the mask back
    model.biases.G(0, 1) = 10.0;
    update_masks(model, 0.01);
    CHECK(model.biases.I(0, 1) == 0);

    zero_inactive_biases(model);
    CHECK(model.biases.G(0, 1) == 0.0);
    CHECK(model.biases.H(1, 0) == 0.0);
    CHECK(model.biases.G(0, 0) == 0.01);  // active ones untouched
}

TEST_CASE("training runs the exact iteration budget when tol is zero") {
    auto ds = testing::random_dataset({.rows = 12, .cols = 10, .density = 0.5, .seed = 14});
    Hyperparameters hp;
    hp.d1 = 3;
    hp.d2 = 1;
    hp.max_iters = 8;
    hp.tol = 0.0;
    auto [model, report] = train(hp, ds, nullptr, 5);
    CHECK(report.iterations.size() == 8);
    CHECK(report.reason == StopReason::MaxIters);
    CHECK(report.termination_stream == RmseStream::Training);
    for (std::size_t i = 0; i < report.iterations.size(); ++i) {
        CHECK(report.iterations[i].iter == static_cast<int>(i) + 1);
        CHECK_FALSE(report.iterations[i].valid_rmse.has_value());
        if (i > 0) CHECK(report.iterations[i].elapsed_s >= report.iterations[i - 1].elapsed_s);
    }
}

TEST_CASE("a loose tolerance stops at the first eligible iteration") {
    auto ds = testing::random_dataset({.rows = 12, .cols = 10, .density = 0.5, .seed = 14});
    Hyperparameters hp;
    hp.d1 = 3;
    hp.d2 = 1;
    hp.max_iters = 100;
    hp.tol = 1e9;
    auto [model, report] = train(hp, ds, nullptr, 5);
    CHECK(report.iterations.size() == 2);  // rule needs two consecutive readings
    CHECK(report.reason == StopReason::TolReached);
    CHECK(stop_reason_name(report.reason) == std::string("tol-reached"));
    CHECK(stop_reason_name(StopReason::MaxIters) == std::string("max-iters"));
}

TEST_CASE("a zero iteration budget returns the freshly initialized model") {
    auto ds = testing::random_dataset({.rows = 10, .cols = 10, .density = 0.4, .seed = 3});
    Hyperparameters hp;
    hp.max_iters = 0;
    auto [model, report] = train(hp, ds, nullptr, 7);
    CHECK(report.iterations.empty());
    CHECK(report.reason == StopReason::MaxIters);
    Model fresh = init_model(hp, ds.rows(), ds.cols(), 7);
    CHECK(model.factors.X == fresh.factors.X);
    CHECK(model.row_map == ds.row_map());
}

TEST_CASE("validation RMSE drives termination when supplied") {
    auto ds = testing::random_dataset({.rows = 20, .cols = 16, .density = 0.5, .seed = 31});
    FoldPlan plan = rotate_folds(make_folds(ds, 31), 0);
    SparseDataset train_ds = subset(ds, plan, FoldRole::Train);
    SparseDataset valid_ds = subset(ds, plan, FoldRole::Validation);
    Hyperparameters hp;
    hp.d1 = 3;
    hp.d2 = 1;
    hp.max_iters = 50;
    hp.tol = 1e-3;
    auto [model, report] = train(hp, train_ds, &valid_ds, 2);
    CHECK(report.termination_stream == RmseStream::Validation);
    for (const auto& rec : report.iterations) CHECK(rec.valid_rmse.has_value());
    if (report.reason == StopReason::TolReached) {
        const auto& it = report.iterations;
        REQUIRE(it.size() >= 2);
        double last = *it.back().valid_rmse;
        double prev = *it[it.size() - 2].valid_rmse;
        CHECK(std::abs(last - prev) < hp.tol);
        // and no earlier consecutive pair satisfied the rule
        for (std::size_t i = 1; i + 1 < it.size(); ++i)
            CHECK(std::abs(*it[i].valid_rmse - *it[i - 1].valid_rmse) >= hp.tol);
    }
}

TEST_CASE("dynamic masks only shrink and inactive biases stay pinned") {
    auto ds = testing::planted_dataset({.rows = 40, .cols = 30, .seed = 11});
    Hyperparameters hp;
    hp.d1 = 3;
    hp.d2 = 4;
    hp.e = 0.05;
    hp.max_iters = 30;
    hp.tol = 0.0;
    std::size_t prev_i = SIZE_MAX, prev_j = SIZE_MAX;
    TrainOptions opts;
    opts.observer = [&](int, const Model& m) {
        for (std::size_t idx = 0; idx < m.biases.G.size(); ++idx)
            if (!m.biases.I.data()[idx]) REQUIRE(m.biases.G.data()[idx] == 0.0);
        for (std::size_t idx = 0; idx < m.biases.H.size(); ++idx)
            if (!m.biases.J.data()[idx]) REQUIRE(m.biases.H.data()[idx] == 0.0);
        for (double v : m.factors.X.data()) REQUIRE(v >= 0.0);
        for (double v : m.biases.G.data()) REQUIRE(v >= 0.0);
    };
    auto [model, report] = train(hp, ds, nullptr, 4, opts);
    for (const auto& rec : report.iterations) {
        CHECK(rec.active_i <= prev_i);
        CHECK(rec.active_j <= prev_j);
        prev_i = rec.active_i;
        prev_j = rec.active_j;
    }
    CHECK(report.iterations.front().objective > report.iterations.back().objective);
}

TEST_CASE("static-mask variants keep every bias active") {
    auto ds = testing::random_dataset({.rows = 15, .cols = 12, .density = 0.5, .seed = 6});
    for (Variant v : {Variant::BNLFA, Variant::EBNL}) {
        Hyperparameters hp;
        hp.variant = v;
        hp.d1 = 2;
        hp.d2 = v == Variant::BNLFA ? 1 : 3;
        hp.max_iters = 10;
        hp.tol = 0.0;
        auto [model, report] = train(hp, ds, nullptr, 8);
        CHECK(model.biases.I.count_ones() == model.biases.I.size());
        CHECK(model.biases.J.count_ones() == model.biases.J.size());
        CHECK(report.iterations.back().active_i == model.biases.I.size());
    }
}

TEST_CASE("training is deterministic and thread-count independent") {
    auto ds = testing::random_dataset({.rows = 30, .cols = 22, .density = 0.4, .seed = 77});
    Hyperparameters hp;
    hp.d1 = 4;
    hp.d2 = 2;
    hp.max_iters = 12;
    hp.tol = 0.0;

    TrainOptions t1;
    t1.threads = 1;
    TrainOptions t4;
    t4.threads = 4;
    auto [m1, r1] = train(hp, ds, nullptr, 10, t1);
    auto [m4, r4] = train(hp, ds, nullptr, 10, t4);

    CHECK(m1.factors.X == m4.factors.X);
    CHECK(m1.factors.Y == m4.factors.Y);
    CHECK(m1.biases.G == m4.biases.G);
    CHECK(m1.biases.H == m4.biases.H);
    CHECK(m1.biases.I == m4.biases.I);
    CHECK(m1.biases.J == m4.biases.J);
    REQUIRE(r1.iterations.size() == r4.iterations.size());
    for (std::size_t i = 0; i < r1.iterations.size(); ++i) {
        CHECK(r1.iterations[i].objective == r4.iterations[i].objective);
        CHECK(r1.iterations[i].train_rmse == r4.iterations[i].train_rmse);
        CHECK(r1.iterations[i].active_i == r4.iterations[i].active_i);
    }

    auto [m_other, r_other] = train(hp, ds, nullptr, 11, t1);
    CHECK(m_other.factors.X != m1.factors.X);
}

TEST_CASE("iteration log serializes to the documented CSV shape") {
    auto ds = testing::random_dataset({.rows = 10, .cols = 10, .density = 0.5, .seed = 1});
    Hyperparameters hp;
    hp.d1 = 2;
    hp.d2 = 1;
    hp.max_iters = 3;
    hp.tol = 0.0;
    auto [model, report] = train(hp, ds, nullptr, 1);
    std::ostringstream out;
    report_to_csv(report, out);
    std::istringstream lines(out.str());
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "iter,objective,train_rmse,valid_rmse,active_i,active_j,elapsed_s");
    int count = 0;
    while (std::getline(lines, line)) {
        ++count;
        // no validation set: the valid_rmse cell is empty
        auto first = line.find(',');
        auto second = line.find(',', first + 1);
        auto third = line.find(',', second + 1);
        CHECK(line[third + 1] == ',');
    }
    CHECK(count == 3);
}

TEST_CASE("training rejects bad input") {
    std::istringstream in("");
    SparseDataset empty = load_triples(in);
    Hyperparameters hp;
    CHECK_THROWS_AS(train(hp, empty, nullptr, 1), data_error);

    auto ds = testing::random_dataset({.rows = 5, .cols = 5, .density = 0.9, .seed = 2});
    auto other = testing::random_dataset({.rows = 6, .cols = 5, .density = 0.9, .seed = 2});
    CHECK_THROWS_AS(train(hp, ds, &other, 1), data_error);

    Hyperparameters bad;
    bad.d1 = 0;
    CHECK_THROWS_AS(train(bad, ds, nullptr, 1), config_error);
}
