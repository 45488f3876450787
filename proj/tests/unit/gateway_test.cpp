#include "revsmell/error.hpp"
#include "revsmell/gateway.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <set>
#include <thread>

#include "test_support.hpp"

using namespace revsmell;
using namespace revsmell::gateway;

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

prompt::PromptBundle bundle_for(const std::string& comment) {
    corpus::CorpusItem item;
    item.id = "x";
    item.comment_text = comment;
    item.hunk_text = "@@ -1 +1 @@\n<<<REVIEW_SPAN>>>\n-a\n<<<END_REVIEW_SPAN>>>\n+b\n";
    return prompt::render_prompt(item, prompt::Mode::ZeroShot, nullptr);
}

ChatRequest request_for(std::string user) {
    ChatRequest r;
    r.model = "stub";
    r.user = std::move(user);
    return r;
}

ModelConfig config_with(unsigned attempts) {
    auto c = default_config("stub", "stub");
    c.max_attempts = attempts;
    return c;
}

// Counts concurrent calls to check the parallelism bound.
class CountingBackend final : public ChatBackend {
public:
    std::string complete(const ChatRequest& request) override {
        const int now = ++active_;
        int prev = peak_.load();
        while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        --active_;
        return stub_.complete(request);
    }
    int peak() const { return peak_.load(); }

private:
    StubBackend stub_{default_stub_rules()};
    std::atomic<int> active_{0};
    std::atomic<int> peak_{0};
};

} // namespace

TEST_SUITE("gateway") {

TEST_CASE("stub backend") {
    StubBackend stub(default_stub_rules());
    auto ask = [&](const std::string& comment) {
        return nlohmann::json::parse(stub.complete(request_for(bundle_for(comment).rendered)))["label"];
    };
    CHECK(ask("thank you, looks great") == "Praise");
    CHECK(ask("rename this variable") == "Actionable");
    CHECK(ask("Whoops") == "Vague");
    CHECK(ask("Why do you need this mock?") == "Question");
    const auto same = bundle_for("thank you").rendered;
    CHECK(stub.complete(request_for(same)) == stub.complete(request_for(same)));

    SUBCASE("first matching rule wins and only the item comment is read") {
        StubBackend custom({{"thank", Label::Praise}, {"thank", Label::Toxic}, {"mock", Label::Question}});
        CHECK(nlohmann::json::parse(custom.complete(request_for(bundle_for("Thank you!").rendered)))["label"] ==
              "Praise");
        // The taxonomy text mentions many keywords; none of it should leak into matching.
        CHECK(nlohmann::json::parse(custom.complete(request_for(bundle_for("ok").rendered)))["label"] ==
              "Actionable");
    }
    SUBCASE("rules from json") {
        const auto rules = parse_stub_rules(R"([["nit","Vague"],["lgtm","praise"]])");
        REQUIRE(rules.size() == 2);
        CHECK(rules[1].second == Label::Praise);
        CHECK(error_of([] { parse_stub_rules(R"({"nit":"Vague"})"); }) == Errc::ConfigError);
        CHECK(error_of([] { parse_stub_rules(R"([["nit","Useful"]])"); }) == Errc::ConfigError);
    }
}

TEST_CASE("classify_item retry contract") {
    const auto bundle = bundle_for("anything");

    SUBCASE("valid first answer") {
        ScriptedBackend b({R"({"label":"Praise"})"});
        const auto p = classify_item("i1", bundle, config_with(3), b);
        CHECK(p.status == Status::Ok);
        CHECK(p.label == Label::Praise);
        CHECK(p.attempts == 1);
    }
    SUBCASE("free text twice then valid") {
        ScriptedBackend b({"It is vague.", "Label: Vague", R"({"label":"Vague"})"});
        const auto p = classify_item("i1", bundle, config_with(3), b);
        CHECK(p.status == Status::Ok);
        CHECK(p.label == Label::Vague);
        CHECK(p.attempts == 3);
        CHECK(p.raw_responses.size() == 3);
        const auto reqs = b.requests();
        REQUIRE(reqs.size() == 3);
        for (const auto& r : reqs) {
            CHECK(r.user == reqs[0].user);
            CHECK(r.system == reqs[0].system);
            CHECK(r.model == reqs[0].model);
        }
        CHECK(reqs[0].user == bundle.rendered);
    }
    SUBCASE("malformed until the cap") {
        ScriptedBackend b({"x", R"({"label":"Praise","why":"?"})", R"({"label":"useful"})", R"({"label":"Praise"})"});
        const auto p = classify_item("i1", bundle, config_with(3), b);
        CHECK(p.status == Status::Unresolved);
        CHECK_FALSE(p.label);
        CHECK(p.attempts == 3);
        CHECK(b.requests().size() == 3);
    }
    SUBCASE("transport failure is not retried") {
        ScriptedBackend b({std::nullopt, R"({"label":"Praise"})"});
        const auto p = classify_item("i1", bundle, config_with(3), b);
        CHECK(p.status == Status::BackendError);
        CHECK_FALSE(p.label);
        CHECK(p.attempts == 1);
        CHECK_FALSE(p.error.empty());
    }
    SUBCASE("single attempt") {
        ScriptedBackend b({"nope"});
        CHECK(classify_item("i1", bundle, config_with(1), b).status == Status::Unresolved);
    }
}

TEST_CASE("configuration") {
    CHECK_FALSE(default_config("openai", "gpt-5-mini").temperature);
    CHECK(default_config("together", "meta-llama/Llama-3.3-70B-Instruct-Turbo").temperature == 0.0);
    CHECK(default_config("compat", "qwen").temperature == 0.0);
    auto c = default_config("stub", "stub");
    c.max_attempts = 0;
    CHECK(error_of([&] { c.validate(); }) == Errc::ConfigError);
    c = default_config("compat", "m");
    c.temperature = 2.5;
    CHECK(error_of([&] { c.validate(); }) == Errc::ConfigError);
    CHECK(error_of([] { default_config("nope", "m").validate(); }) == Errc::ConfigError);
    const auto ids = backend_ids();
    CHECK(std::set<std::string>(ids.begin(), ids.end()) == std::set<std::string>{"stub", "openai", "together", "compat"});

    SUBCASE("credentials") {
        const EnvLookup none = [](const std::string&) { return std::nullopt; };
        CHECK(error_of([&] { make_backend(default_config("openai", "m"), none); }) == Errc::ConfigError);
        CHECK(make_backend(default_config("stub", "stub"), none) != nullptr);
        const EnvLookup some = [](const std::string& n) -> std::optional<std::string> {
            if (n == "OPENAI_API_KEY") return "k";
            return std::nullopt;
        };
        CHECK(make_backend(default_config("openai", "m"), some) != nullptr);
    }
}

TEST_CASE("request bodies follow the backend profile") {
    ChatRequest req;
    req.model = "m";
    req.system = "sys";
    req.user = "user";
    req.temperature = 0.0;
    const auto openai = nlohmann::json::parse(RemoteChatBackend(*find_profile("openai"), "http://x", "k").request_body(req));
    CHECK_FALSE(openai.contains("temperature"));
    CHECK(openai["messages"][0]["role"] == "system");
    CHECK(openai["messages"][1]["content"] == "user");
    CHECK(openai["response_format"]["json_schema"]["schema"] == nlohmann::json::parse(prompt::output_contract()));
    const auto together =
        nlohmann::json::parse(RemoteChatBackend(*find_profile("together"), "http://x", "k").request_body(req));
    CHECK(together["temperature"] == 0.0);
}

TEST_CASE("remote backend against a local compatible server") {
    httplib::Server server;
    std::atomic<int> calls{0};
    std::string seen_auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++calls;
        seen_auth = req.get_header_value("Authorization");
        const auto body = nlohmann::json::parse(req.body);
        if (body["messages"][1]["content"].get<std::string>().find("fail") != std::string::npos) {
            res.status = 503;
            res.set_content("overloaded", "text/plain");
            return;
        }
        const std::string content = n == 1 ? "Sure! It's Praise." : R"({"label":"Praise"})";
        nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const EnvLookup env = [&](const std::string& n) -> std::optional<std::string> {
        if (n == "REVSMELL_COMPAT_API_KEY") return "secret";
        if (n == "REVSMELL_COMPAT_BASE_URL") return "http://127.0.0.1:" + std::to_string(port);
        return std::nullopt;
    };
    auto config = default_config("compat", "local-model");
    config.request_timeout = std::chrono::milliseconds(5000);
    auto backend = make_backend(config, env);

    const auto ok = classify_item("r1", bundle_for("thanks"), config, *backend);
    CHECK(ok.status == Status::Ok);
    CHECK(ok.label == Label::Praise);
    CHECK(ok.attempts == 2);
    CHECK(seen_auth == "Bearer secret");

    const auto failed = classify_item("r2", bundle_for("fail please"), config, *backend);
    CHECK(failed.status == Status::BackendError);
    CHECK(failed.error.find("503") != std::string::npos);

    server.stop();
    t.join();

    const auto down = classify_item("r3", bundle_for("thanks"), config, *backend);
    CHECK(down.status == Status::BackendError);
}

TEST_CASE("run_batch") {
    const auto manifest = testing::synthetic_manifest(testing::kEvalSupports, 21);
    REQUIRE(manifest.items.size() == 439);
    StubBackend stub(default_stub_rules());
    const auto config = config_with(3);
    BatchSpec spec;
    spec.run_id = "t";

    const auto one = run_batch(manifest.items, spec, config, stub, 1);
    REQUIRE(one.predictions.size() == 439);
    for (std::size_t i = 1; i < one.predictions.size(); ++i)
        CHECK(one.predictions[i - 1].item_id < one.predictions[i].item_id);
    CHECK(one.record.ok + one.record.unresolved + one.record.backend_error == 439);
    CHECK(one.record.item_count == 439);
    CHECK(one.record.template_hash == prompt::PromptTemplate::builtin().hash());

    CountingBackend counting;
    const auto eight = run_batch(manifest.items, spec, config, counting, 8);
    CHECK(eight.predictions == one.predictions);
    CHECK(predictions_to_jsonl(eight.predictions) == predictions_to_jsonl(one.predictions));
    CHECK(counting.peak() <= 8);
    CHECK(counting.peak() > 1);

    SUBCASE("empty input") {
        const auto none = run_batch({}, spec, config, stub, 4);
        CHECK(none.predictions.empty());
        CHECK(none.record.item_count == 0);
        CHECK(nlohmann::json::parse(run_record_to_json(none.record)).is_object());
    }
    SUBCASE("configuration errors abort") {
        CHECK(error_of([&] { run_batch(manifest.items, spec, config, stub, 0); }) == Errc::ConfigError);
        std::vector<corpus::CorpusItem> dup{manifest.items[0], manifest.items[0]};
        CHECK(error_of([&] { run_batch(dup, spec, config, stub, 1); }) == Errc::ConfigError);
        BatchSpec one_shot = spec;
        one_shot.mode = prompt::Mode::OneShot;
        CHECK_THROWS(run_batch(manifest.items, one_shot, config, stub, 1));
    }
    SUBCASE("per-item failures are recorded") {
        std::vector<std::optional<std::string>> script;
        for (int i = 0; i < 5; ++i) script.push_back(i == 2 ? std::nullopt : std::optional<std::string>(R"({"label":"Toxic"})"));
        ScriptedBackend scripted(script);
        std::vector<corpus::CorpusItem> five(manifest.items.begin(), manifest.items.begin() + 5);
        const auto r = run_batch(five, spec, config, scripted, 1);
        CHECK(r.record.ok == 4);
        CHECK(r.record.backend_error == 1);
    }
}

TEST_CASE("run record contents") {
    const auto manifest = testing::synthetic_manifest({1, 1, 1, 1, 1, 2, 1, 2, 2}, 3, true);
    const auto split = corpus::split_exemplars(manifest, testing::flagged_exemplar_ids(manifest));
    const auto block = prompt::ExemplarBlock::from_items(split.exemplars);
    StubBackend stub(default_stub_rules());
    BatchSpec spec;
    spec.mode = prompt::Mode::OneShot;
    spec.exemplars = &block;
    spec.run_id = "run-0001";
    spec.seed = 9;
    auto config = default_config("stub", "stub");
    const auto r = run_batch(split.eval_set, spec, config, stub, 2);
    const auto j = nlohmann::json::parse(run_record_to_json(r.record));
    CHECK(j["run_id"] == "run-0001");
    CHECK(j["mode"] == "one_shot");
    CHECK(j["seed"] == 9);
    CHECK(j["exemplar_ids"].size() == 9);
    CHECK(j["template_version"] == "v1");
    CHECK(j["template_hash"] == prompt::PromptTemplate::builtin().hash());
    CHECK(j["parallelism"] == 2);
    CHECK(j.contains("started_at"));
    CHECK(j.contains("finished_at"));
}

TEST_CASE("prediction persistence") {
    std::vector<Prediction> preds(3);
    preds[0] = {"a", Label::Praise, Status::Ok, 1, {R"({"label":"Praise"})"}, {}, {}};
    preds[1] = {"b", std::nullopt, Status::Unresolved, 3, {"x", "y", "z"}, {}, {}};
    preds[2] = {"c", std::nullopt, Status::BackendError, 1, {}, {}, "timeout"};
    const auto text = predictions_to_jsonl(preds);
    CHECK(predictions_from_jsonl(text) == preds);
    CHECK(text.find("latency") == std::string::npos);
    CHECK(error_of([] { predictions_from_jsonl(R"({"item_id":"a","status":"ok","attempts":1,"raw_responses":[]})"); }) ==
          Errc::SchemaViolation);
}

}
