#include "revsmell/error.hpp"
#include "revsmell/prompt.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>

#include "test_support.hpp"

using namespace revsmell;
using namespace revsmell::prompt;

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

ViolationKind violation_of(std::string_view raw) {
    try {
        check_response(raw);
    } catch (const ContractViolation& v) {
        return v.kind();
    }
    FAIL("accepted " << raw);
    return ViolationKind::NotObject;
}

struct Fixture {
    corpus::CorpusManifest manifest = testing::synthetic_manifest({1, 1, 1, 1, 1, 2, 1, 2, 2}, 3, true);
    corpus::ExemplarSplit split = corpus::split_exemplars(manifest, testing::flagged_exemplar_ids(manifest));
    ExemplarBlock block = ExemplarBlock::from_items(split.exemplars);
};

std::vector<std::string> titles(const PromptBundle& b) {
    std::vector<std::string> out;
    for (const auto& [name, body] : b.sections) out.push_back(name);
    return out;
}

} // namespace

TEST_SUITE("prompt") {

TEST_CASE("section skeleton") {
    Fixture f;
    REQUIRE(f.split.eval_set.size() == 3);
    const auto& item = f.split.eval_set[0];

    const auto zero = render_prompt(item, Mode::ZeroShot, nullptr);
    CHECK(titles(zero) == std::vector<std::string>{"task_description", "instructions", "taxonomy", "input"});
    const auto one = render_prompt(item, Mode::OneShot, &f.block);
    CHECK(titles(one) ==
          std::vector<std::string>{"task_description", "instructions", "taxonomy", "exemplars", "input"});
    CHECK(zero.system == PromptTemplate::builtin().system);
    CHECK(zero.sections[2].second == taxonomy::definitions_text());
}

TEST_CASE("exemplar block lists nine entries in canonical order") {
    Fixture f;
    const auto one = render_prompt(f.split.eval_set[0], Mode::OneShot, &f.block);
    const auto& block = one.sections[3].second;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < kLabelCount; ++k) {
        const auto marker = "Example " + std::to_string(k + 1) + "\n";
        const auto at = block.find(marker, pos);
        REQUIRE(at != std::string::npos);
        const auto answer = block.find("Answer: {\"label\":\"" + std::string(taxonomy::name(taxonomy::label_set()[k])) + "\"}", at);
        CHECK(answer != std::string::npos);
        CHECK(block.find(f.split.exemplars[k].comment_text, at) < answer);
        pos = answer;
    }
    CHECK(block.find("Example 10") == std::string::npos);
    CHECK(f.block.ids().size() == 9);
}

TEST_CASE("one-shot differs from zero-shot only by the exemplar section") {
    Fixture f;
    for (const auto& item : f.split.eval_set) {
        const auto zero = render_prompt(item, Mode::ZeroShot, nullptr);
        const auto one = render_prompt(item, Mode::OneShot, &f.block);
        auto without = one.sections;
        without.erase(without.begin() + 3);
        CHECK(without == zero.sections);
        CHECK(one.system == zero.system);

        // Textually, the one-shot render is the zero-shot render with one
        // contiguous block inserted.
        std::size_t prefix = 0;
        while (prefix < zero.rendered.size() && zero.rendered[prefix] == one.rendered[prefix]) ++prefix;
        const auto suffix = zero.rendered.size() - prefix;
        CHECK(one.rendered.compare(one.rendered.size() - suffix, suffix, zero.rendered, prefix, suffix) == 0);
        const auto inserted = one.rendered.substr(prefix, one.rendered.size() - zero.rendered.size());
        CHECK(inserted.find("### ") != std::string::npos);
        CHECK(inserted.find("Example 9") != std::string::npos);
        CHECK(inserted.find(item.comment_text) == std::string::npos);
    }
}

TEST_CASE("rendering is deterministic") {
    Fixture f;
    const auto& item = f.split.eval_set[1];
    CHECK(render_prompt(item, Mode::OneShot, &f.block).rendered ==
          render_prompt(item, Mode::OneShot, &f.block).rendered);
    CHECK(render_prompt(item, Mode::ZeroShot, nullptr).rendered ==
          render_prompt(item, Mode::ZeroShot, nullptr).rendered);
}

TEST_CASE("exemplar hunks can be left out") {
    Fixture f;
    RenderOptions opts;
    opts.exemplar_hunks = false;
    const auto lean = render_prompt(f.split.eval_set[0], Mode::OneShot, &f.block, opts);
    const auto& block = lean.sections[3].second;
    CHECK(block.find(std::string(Fences::hunk_open)) == std::string::npos);
    // The item itself still carries its hunk.
    CHECK(lean.sections.back().second.find(std::string(Fences::hunk_open)) != std::string::npos);
}

TEST_CASE("render errors") {
    Fixture f;
    const auto& item = f.split.eval_set[0];
    CHECK(error_of([&] { render_prompt(item, Mode::OneShot, nullptr); }) == Errc::IncompleteExemplars);
    CHECK(error_of([&] { render_prompt(f.split.exemplars[0], Mode::OneShot, &f.block); }) == Errc::ExemplarLeak);
    CHECK(error_of([&] { render_prompt(f.split.exemplars[0], Mode::ZeroShot, nullptr); }) == Errc::ExemplarLeak);
    std::vector<corpus::CorpusItem> eight(f.split.exemplars.begin(), f.split.exemplars.end() - 1);
    CHECK(error_of([&] { ExemplarBlock::from_items(eight); }) == Errc::IncompleteExemplars);
}

TEST_CASE("item content is fenced") {
    Fixture f;
    const auto& item = f.split.eval_set[2];
    const auto& input = render_prompt(item, Mode::ZeroShot, nullptr).sections.back().second;
    const auto c = input.find(std::string(Fences::comment_open) + "\n" + item.comment_text + "\n" +
                              std::string(Fences::comment_close));
    CHECK(c != std::string::npos);
    const auto h = input.find(std::string(Fences::hunk_open) + "\n" + item.hunk_text + std::string(Fences::hunk_close));
    CHECK(h != std::string::npos);
    CHECK(c < h);
}

TEST_CASE("golden prompts") {
    Fixture f;
    const bool update = std::getenv("REVSMELL_UPDATE_GOLDEN") != nullptr;
    for (const auto& item : f.split.eval_set) {
        for (Mode mode : {Mode::ZeroShot, Mode::OneShot}) {
            const auto bundle = render_prompt(item, mode, mode == Mode::OneShot ? &f.block : nullptr);
            const auto text = "[system]\n" + bundle.system + "\n[user]\n" + bundle.rendered;
            const auto path = testing::golden_path(item.id + "." + std::string(mode_name(mode)) + ".txt");
            if (update) testing::write_text(path, text);
            INFO(path.string());
            CHECK(testing::read_text(path) == text);
        }
    }
}

TEST_CASE("output contract") {
    const auto schema = nlohmann::json::parse(output_contract());
    CHECK(schema["type"] == "object");
    CHECK(schema["required"] == nlohmann::json::array({"label"}));
    CHECK(schema["additionalProperties"] == false);
    CHECK(schema["properties"]["label"]["enum"].size() == 9);

    CHECK(check_response(R"({"label":"Praise"})") == Label::Praise);
    CHECK(check_response(R"({"label":"Actionable"})") == Label::Actionable);
    CHECK(check_response(" {\"label\" : \" vague \"} ") == Label::Vague);
    CHECK(violation_of(R"({"label":"Praise","reason":"nice"})") == ViolationKind::ExtraFields);
    CHECK(violation_of(R"({"label":"Actionable","confidence":0.9})") == ViolationKind::ExtraFields);
    CHECK(violation_of("Praise") == ViolationKind::NotObject);
    CHECK(violation_of(R"(["Praise"])") == ViolationKind::NotObject);
    CHECK(violation_of(R"({"category":"Praise"})") == ViolationKind::MissingLabel);
    CHECK(violation_of(R"({"label":"useful"})") == ViolationKind::UnknownLabel);
    CHECK(violation_of(R"({"label":3})") == ViolationKind::UnknownLabel);
    CHECK(violation_of("```json\n{\"label\":\"Praise\"}\n```") == ViolationKind::NotObject);
}

TEST_CASE("templates") {
    const auto& builtin = PromptTemplate::builtin();
    CHECK(builtin.version == "v1");
    CHECK(builtin.hash().size() == 64);
    CHECK(PromptTemplate::from_json(builtin.to_json()).to_json() == builtin.to_json());
    CHECK(PromptTemplate::from_json(builtin.to_json()).hash() == builtin.hash());

    auto j = nlohmann::json::parse(builtin.to_json());
    j["input_intro"] = "Label this one.";
    const auto edited = PromptTemplate::from_json(j.dump());
    CHECK(edited.hash() != builtin.hash());

    j["surprise"] = 1;
    CHECK(error_of([&] { PromptTemplate::from_json(j.dump()); }) == Errc::ConfigError);
    CHECK(error_of([] { PromptTemplate::from_json("{}"); }) == Errc::ConfigError);

    testing::TempDir dir;
    testing::write_text(dir / "t.json", builtin.to_json());
    CHECK(PromptTemplate::load(dir / "t.json").hash() == builtin.hash());
}

TEST_CASE("modes") {
    CHECK(parse_mode("zero") == Mode::ZeroShot);
    CHECK(parse_mode("one_shot") == Mode::OneShot);
    CHECK(mode_name(Mode::OneShot) == "one_shot");
    CHECK(error_of([] { parse_mode("few"); }) == Errc::ConfigError);
}

}
