#include "revsmell/error.hpp"
#include "revsmell/taxonomy.hpp"

#include <doctest.h>
#include <json.hpp>

#include <set>

#include "test_support.hpp"

using namespace revsmell;

TEST_SUITE("taxonomy") {

TEST_CASE("label_set is the canonical nine-label order") {
    const auto& labels = taxonomy::label_set();
    REQUIRE(labels.size() == 9);
    CHECK(labels.front() == Label::Incorrect);
    const std::vector<std::string> expected{"Incorrect", "Toxic",    "Unrelated",  "Vague",        "Redundant",
                                            "Praise",    "Question", "Actionable", "Clarification"};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        CHECK(taxonomy::name(labels[i]) == expected[i]);
        CHECK(index_of(labels[i]) == i);
    }
    CHECK(&taxonomy::label_set() == &labels);
}

TEST_CASE("smell partition is six against three") {
    CHECK(taxonomy::is_smell(Label::Praise));
    CHECK(taxonomy::is_smell(Label::Toxic));
    CHECK_FALSE(taxonomy::is_smell(Label::Actionable));
    int smells = 0;
    for (Label l : taxonomy::label_set()) smells += taxonomy::is_smell(l);
    CHECK(smells == 6);
    for (Label l : {Label::Question, Label::Actionable, Label::Clarification}) CHECK_FALSE(taxonomy::is_smell(l));
}

TEST_CASE("parse_label normalises whitespace and case") {
    CHECK(taxonomy::parse_label("Praise") == Label::Praise);
    CHECK(taxonomy::parse_label("  actionable ") == Label::Actionable);
    CHECK(taxonomy::parse_label("\tCLARIFICATION\n") == Label::Clarification);
    for (Label l : taxonomy::label_set()) CHECK(taxonomy::parse_label(taxonomy::name(l)) == l);

    for (const char* bad : {"Useful", "Smell", "", "Praise!", "Act ionable"}) {
        try {
            taxonomy::parse_label(bad);
            FAIL("accepted " << bad);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::UnknownLabel);
        }
    }
}

TEST_CASE("counts match the reference distribution") {
    unsigned total = 0, smell = 0;
    for (Label l : taxonomy::label_set()) {
        const auto& info = taxonomy::info(l);
        CHECK(info.corpus_count == testing::kLabelCounts[index_of(l)]);
        total += info.corpus_count;
        if (info.smell) smell += info.corpus_count;
    }
    CHECK(total == 448);
    CHECK(smell == 159);
    CHECK(taxonomy::useful_group_count() == 289);
}

TEST_CASE("exemplar registry holds one verbatim exemplar per label") {
    CHECK(taxonomy::info(Label::Praise).exemplar_comment == "thank you for making this into something somewhat understandable with some code comments.");
    CHECK(taxonomy::info(Label::Vague).exemplar_comment == "Whoops");
    std::set<std::string_view> texts;
    for (Label l : taxonomy::label_set()) {
        CHECK_FALSE(taxonomy::info(l).exemplar_comment.empty());
        texts.insert(taxonomy::info(l).exemplar_comment);
    }
    CHECK(texts.size() == 9);
}

TEST_CASE("json export mirrors the table") {
    const auto j = nlohmann::json::parse(taxonomy::export_json());
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        const Label l = taxonomy::label_set()[i];
        CHECK(j[i]["name"] == std::string(taxonomy::name(l)));
        CHECK(j[i]["smell"] == taxonomy::is_smell(l));
        CHECK(j[i]["definition"] == std::string(taxonomy::info(l).definition));
        CHECK(j[i]["exemplar"] == std::string(taxonomy::info(l).exemplar_comment));
    }
}

TEST_CASE("definitions text lists every label without exemplars") {
    const auto text = taxonomy::definitions_text();
    for (Label l : taxonomy::label_set()) {
        CHECK(text.find(std::string(taxonomy::name(l))) != std::string::npos);
        CHECK(text.find(std::string(taxonomy::info(l).definition)) != std::string::npos);
        CHECK(text.find(std::string(taxonomy::info(l).exemplar_comment)) == std::string::npos);
    }
}

}
