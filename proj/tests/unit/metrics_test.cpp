#include "revsmell/error.hpp"
#include "revsmell/metrics.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace revsmell;
using namespace revsmell::metrics;

namespace {

Errc error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return Errc::IoError;
}

std::size_t at(Label l) { return index_of(l); }

ConfusionMatrix two_by_two(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    ConfusionMatrix m({"N", "P"});
    m.at(0, 0) = a;
    m.at(0, 1) = b;
    m.at(1, 0) = c;
    m.at(1, 1) = d;
    return m;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion from pairs") {
    const auto table5 = testing::transcribed_reference();
    const auto pairs = testing::pairs_from_matrix(table5);
    const auto m = confusion(pairs);
    CHECK(m == table5);
    CHECK(m.total() == 439);
    for (std::size_t k = 0; k < kLabelCount; ++k) CHECK(m.row_sum(k) == testing::kEvalSupports[k]);

    CHECK(confusion({}).total() == 0);
    const std::vector<LabelPair> three(3, {Label::Praise, Label::Praise});
    const auto p = confusion(three);
    CHECK(p.at(at(Label::Praise), at(Label::Praise)) == 3);
    CHECK(p.total() == 3);
}

TEST_CASE("per-class scores on the reference matrix") {
    const auto scores = per_class(testing::transcribed_reference());
    const auto& act = scores[at(Label::Actionable)];
    CHECK(act.precision == doctest::Approx(0.693).epsilon(0.0015));
    CHECK(round3(act.precision) == "0.693");
    CHECK(round3(act.recall) == "0.789");
    CHECK(round3(act.f1) == "0.738");
    const auto& inc = scores[at(Label::Incorrect)];
    CHECK(inc.precision == 0.0);
    CHECK(inc.recall == 0.0);
    CHECK(inc.f1 == 0.0);
    const auto& vague = scores[at(Label::Vague)];
    CHECK(vague.precision == doctest::Approx(2.0 / 26));
    CHECK(vague.recall == doctest::Approx(2.0 / 12));
    CHECK(round3(vague.f1) == "0.105");
}

TEST_CASE("summary on the reference matrix") {
    const auto r = summarize(testing::transcribed_reference());
    CHECK(std::abs(r.accuracy - 0.645) <= 0.001);
    CHECK(std::abs(r.macro_precision - 0.491) <= 0.001);
    CHECK(std::abs(r.macro_recall - 0.408) <= 0.001);
    CHECK(std::abs(r.macro_f1 - 0.409) <= 0.001);
    CHECK(std::abs(r.weighted_f1 - 0.616) <= 0.001);
    CHECK(std::abs(r.mcc - 0.533) <= 0.001);
    CHECK(r.accuracy == doctest::Approx(283.0 / 439));
    REQUIRE(r.binary);
    CHECK(round3(r.binary->smell.f1) == "0.623");
}

TEST_CASE("summary edge cases") {
    auto diag = ConfusionMatrix::full();
    for (std::size_t k = 0; k < kLabelCount; ++k) diag.at(k, k) = k + 1;
    const auto perfect = summarize(diag);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);
    CHECK(perfect.mcc == doctest::Approx(1.0));

    auto single = ConfusionMatrix::full();
    single.add(Label::Praise, Label::Toxic);
    CHECK(summarize(single).accuracy == 0.0);

    CHECK(error_of([] { summarize(ConfusionMatrix::full()); }) == Errc::EmptyMatrix);
    CHECK(error_of([] { mcc(ConfusionMatrix::full()); }) == Errc::EmptyMatrix);
}

TEST_CASE("mcc against the binary closed form") {
    // (TP*TN - FP*FN) / sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN)) with TP=1, TN=2, FP=0, FN=1.
    CHECK(mcc(two_by_two(2, 0, 1, 1)) == doctest::Approx(2.0 / std::sqrt(12.0)));
    CHECK(std::abs(mcc(two_by_two(2, 0, 1, 1)) - 0.577) <= 0.001);
    CHECK(mcc(two_by_two(1, 0, 0, 1)) == doctest::Approx(1.0));
    CHECK(mcc(two_by_two(0, 1, 1, 0)) == doctest::Approx(-1.0));
    CHECK(mcc(two_by_two(5, 0, 5, 0)) == 0.0);  // predictions constant

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> cell(0, 40);
    for (int i = 0; i < 500; ++i) {
        const double tn = cell(rng), fp = cell(rng), fn = cell(rng), tp = cell(rng);
        if (tn + fp + fn + tp == 0) continue;
        const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
        const double oracle = den == 0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den);
        const auto m = two_by_two(tn, fp, fn, tp);
        CHECK(mcc(m) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("binary collapse") {
    const auto b = collapse_binary(testing::transcribed_reference());
    CHECK(b.labels() == std::vector<std::string>{"NotSmell", "Smell"});
    CHECK(b.at(0, 0) == 262);
    CHECK(b.at(0, 1) == 24);
    CHECK(b.at(1, 0) == 73);
    CHECK(b.at(1, 1) == 80);
    CHECK(collapse_binary(ConfusionMatrix::full()).total() == 0);
    CHECK(error_of([] { collapse_binary(two_by_two(1, 0, 0, 1)); }) == Errc::ConfigError);
}

TEST_CASE("properties over random matrices") {
    std::mt19937_64 rng(1337);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = testing::random_matrix(rng);
        const auto r = summarize(m);

        CHECK(r.mcc >= -1.0 - 1e-12);
        CHECK(r.mcc <= 1.0 + 1e-12);

        double mean_f1 = 0, weighted = 0;
        for (std::size_t k = 0; k < kLabelCount; ++k) {
            mean_f1 += r.per_class[k].f1;
            weighted += r.per_class[k].f1 * static_cast<double>(m.row_sum(k));
            if (m.col_sum(k) == 0) CHECK(r.per_class[k].precision == 0.0);
            if (m.row_sum(k) == 0) CHECK(r.per_class[k].recall == 0.0);
        }
        CHECK(std::abs(r.macro_f1 - mean_f1 / kLabelCount) < 1e-12);
        CHECK(std::abs(r.weighted_f1 - weighted / static_cast<double>(m.total())) < 1e-12);

        std::uint64_t rows = 0, cols = 0;
        for (std::size_t k = 0; k < kLabelCount; ++k) {
            rows += m.row_sum(k);
            cols += m.col_sum(k);
        }
        CHECK(rows == m.total());
        CHECK(cols == m.total());

        // Brute-force regrouping of every cell.
        const auto b = collapse_binary(m);
        std::uint64_t brute[2][2] = {};
        for (std::size_t g = 0; g < kLabelCount; ++g)
            for (std::size_t p = 0; p < kLabelCount; ++p)
                brute[taxonomy::is_smell(taxonomy::label_set()[g])][taxonomy::is_smell(taxonomy::label_set()[p])] +=
                    m.at(g, p);
        for (int g = 0; g < 2; ++g)
            for (int p = 0; p < 2; ++p) CHECK(b.at(g, p) == brute[g][p]);
        CHECK(b.total() == m.total());
    }
}

TEST_CASE("shuffling the pair list changes nothing") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        auto pairs = testing::pairs_from_matrix(testing::random_matrix(rng, 8));
        const auto before = summarize(confusion(pairs));
        std::shuffle(pairs.begin(), pairs.end(), rng);
        const auto after = summarize(confusion(pairs));
        CHECK(after.accuracy == before.accuracy);
        CHECK(after.macro_f1 == before.macro_f1);
        CHECK(after.weighted_f1 == before.weighted_f1);
        CHECK(after.mcc == before.mcc);
    }
}

TEST_CASE("mcc is one exactly for diagonal matrices with two classes") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto m = testing::random_matrix(rng, 5);
        bool off_diagonal = false;
        int nonempty = 0;
        for (std::size_t g = 0; g < kLabelCount; ++g) {
            nonempty += m.row_sum(g) > 0;
            for (std::size_t p = 0; p < kLabelCount; ++p) off_diagonal |= g != p && m.at(g, p) > 0;
        }
        const bool expect_one = !off_diagonal && nonempty >= 2;
        CHECK((std::abs(mcc(m) - 1.0) < 1e-12) == expect_one);

        // Zeroing the off-diagonal cells must give exactly one when two classes remain.
        for (std::size_t g = 0; g < kLabelCount; ++g)
            for (std::size_t p = 0; p < kLabelCount; ++p)
                if (g != p) m.at(g, p) = 0;
        int classes = 0;
        for (std::size_t k = 0; k < kLabelCount; ++k) classes += m.at(k, k) > 0;
        if (classes >= 2) CHECK(mcc(m) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("cohen kappa") {
    const std::vector<Label> same{Label::Praise, Label::Vague, Label::Actionable, Label::Praise};
    CHECK(cohen_kappa(same, same).kappa == 1.0);
    const std::vector<Label> constant(4, Label::Praise);
    CHECK(cohen_kappa(constant, constant).kappa == 1.0);

    // Five X then five Y against a vector that swaps one of each: p_o 0.8, p_e 0.5.
    const Label X = Label::Question, Y = Label::Clarification;
    const std::vector<Label> a{X, X, X, X, X, Y, Y, Y, Y, Y};
    const std::vector<Label> b{X, X, X, X, Y, X, Y, Y, Y, Y};
    const auto r = cohen_kappa(a, b);
    CHECK(r.observed == doctest::Approx(0.8));
    CHECK(r.expected == doctest::Approx(0.5));
    CHECK(r.kappa == doctest::Approx(0.6));
    CHECK(r.disagreements == std::vector<std::size_t>{4, 5});
    CHECK(r.n == 10);

    const std::vector<Label> praise(6, Label::Praise), toxic(6, Label::Toxic);
    const auto disjoint = cohen_kappa(praise, toxic);
    CHECK(disjoint.observed == 0.0);
    CHECK(disjoint.kappa <= 0.0);
    const std::vector<Label> mixed_a{Label::Praise, Label::Toxic}, mixed_b{Label::Toxic, Label::Praise};
    CHECK(cohen_kappa(mixed_a, mixed_b).kappa < 0.0);

    CHECK(error_of([] { cohen_kappa({}, {}); }) == Errc::EmptyInput);
    CHECK(error_of([&] { cohen_kappa(a, same); }) == Errc::LengthMismatch);
}

TEST_CASE("kappa against explicit marginal products") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> len(1, 60), lab(0, 8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = len(rng);
        std::vector<Label> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = taxonomy::label_set()[lab(rng) % 4];
            b[i] = std::bernoulli_distribution(0.6)(rng) ? a[i] : taxonomy::label_set()[lab(rng)];
        }
        double pe = 0;
        for (Label k : taxonomy::label_set()) {
            double fa = 0, fb = 0;
            for (std::size_t i = 0; i < n; ++i) {
                fa += a[i] == k;
                fb += b[i] == k;
            }
            pe += (fa / n) * (fb / n);
        }
        const auto r = cohen_kappa(a, b);
        CHECK(std::abs(r.expected - pe) < 1e-12);
        CHECK(r.disagreements.size() == static_cast<std::size_t>(std::llround((1 - r.observed) * n)));
    }
}

TEST_CASE("presentation rounding is half-up") {
    CHECK(round3(0.0) == "0.000");
    CHECK(round3(0.0625) == "0.063");  // exact binary half; printf alone would give 0.062
    CHECK(round3(0.1234) == "0.123");
    CHECK(round3(1.0) == "1.000");
    CHECK(round3(0.9995) == "1.000");
}

TEST_CASE("matrix json") {
    const auto m = matrix_from_json(testing::read_text(testing::data_path("reference_confusion.json")));
    CHECK(m == testing::transcribed_reference());
    CHECK(matrix_from_json(matrix_to_json(m)) == m);
    CHECK(error_of([] { matrix_from_json(R"({"labels":["Praise"],"counts":[[1]]})"); }) != Errc::IoError);
    CHECK(error_of([] {
              matrix_from_json(
                  R"({"labels":["Incorrect","Toxic","Unrelated","Vague","Redundant","Praise","Question","Actionable","Useful"],"counts":[]})");
          }) != Errc::IoError);
}

}
