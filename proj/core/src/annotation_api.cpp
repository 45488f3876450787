#include "revsmell/annotation_api.hpp"

#include "json_util.hpp"

#include <httplib.h>

#include <cctype>

namespace revsmell::annotation {

using detail::json;

namespace {

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        auto slash = path.find('/', pos);
        if (slash == std::string_view::npos) slash = path.size();
        if (slash > pos) parts.emplace_back(path.substr(pos, slash - pos));
        pos = slash + 1;
    }
    return parts;
}

ApiResponse ok(const json& body) { return {200, body.dump()}; }

ApiResponse error(int status, std::string_view code, const std::string& message) {
    return {status, json{{"code", code}, {"message", message}}.dump()};
}

json parse_body(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error(Errc::SchemaViolation, std::string("request body: ") + e.what());
    }
    if (!j.is_object()) throw Error(Errc::SchemaViolation, "request body must be a JSON object");
    return j;
}

std::string body_string(const json& j, const char* key, bool required = true) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (required) throw Error(Errc::SchemaViolation, std::string("missing field '") + key + "'");
        return {};
    }
    if (!it->is_string()) throw Error(Errc::SchemaViolation, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

json labels_json(const std::vector<std::pair<std::string, Label>>& labels) {
    json j = json::object();
    for (const auto& [who, label] : labels) j[who] = taxonomy::name(label);
    return j;
}

} // namespace

std::string AuthPolicy::env_name(std::string_view id) {
    std::string name = "REVSMELL_TOKEN_";
    for (unsigned char c : id) name += std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
    return name;
}

AuthPolicy AuthPolicy::from_env(const std::vector<std::string>& ids,
                                const std::function<std::optional<std::string>(const std::string&)>& env) {
    AuthPolicy policy;
    for (const auto& id : ids) {
        if (auto token = env(env_name(id)); token && !token->empty()) policy.tokens[id] = *token;
    }
    return policy;
}

bool AuthPolicy::allows(std::string_view id, std::string_view token) const {
    if (open()) return true;
    const auto it = tokens.find(std::string(id));
    return it != tokens.end() && it->second == token;
}

bool AuthPolicy::any(std::string_view token) const {
    if (open()) return true;
    for (const auto& [_, t] : tokens) {
        if (t == token) return true;
    }
    return false;
}

int http_status(Errc code) noexcept {
    switch (code) {
    case Errc::NotFound: return 404;
    case Errc::Unauthorized: return 401;
    case Errc::SessionComplete:
    case Errc::OutOfOrderSubmission:
    case Errc::DuplicateRecord:
    case Errc::IncompleteRound:
    case Errc::NotInDisputeQueue: return 409;
    case Errc::IoError: return 500;
    default: return 400;
    }
}

ApiResponse AnnotationApi::handle(const ApiRequest& request) {
    try {
        return dispatch(request);
    } catch (const Error& e) {
        return error(http_status(e.code()), errc_name(e.code()), e.what());
    } catch (const std::exception& e) {
        return error(500, "InternalError", e.what());
    }
}

ApiResponse AnnotationApi::dispatch(const ApiRequest& req) {
    const auto parts = split_path(req.path);
    const auto unauthorized = [] { return Error(Errc::Unauthorized, "missing or invalid bearer token"); };

    if (req.method == "GET" && parts.size() == 1 && parts[0] == "taxonomy")
        return {200, taxonomy::export_json()};

    // /session/{annotator}/{round}/{next|label}
    if (parts.size() == 4 && parts[0] == "session") {
        const std::string& annotator = parts[1];
        const Round round = parse_round(parts[2]);
        if (!auth_.allows(annotator, req.bearer_token)) throw unauthorized();
        if (req.method == "GET" && parts[3] == "next") {
            const ItemView v = service_.next_item(annotator, round);
            json out = {{"item_id", v.item_id},
                        {"comment_text", v.comment_text},
                        {"hunk_text", v.hunk_text},
                        {"discussion_url", v.discussion_url},
                        {"position", v.position},
                        {"total", v.total},
                        {"round", round_name(round)}};
            if (round == Round::Reconciliation) out["prior_labels"] = labels_json(v.prior_labels);
            return ok(out);
        }
        if (req.method == "POST" && parts[3] == "label") {
            const json body = parse_body(req.body);
            const auto item_id = body_string(body, "item_id");
            const Label label = taxonomy::parse_label(body_string(body, "label"));
            const auto cursor =
                service_.submit_label(annotator, round, item_id, label, body_string(body, "note", false));
            return ok({{"item_id", item_id}, {"cursor", cursor},
                       {"total", service_.session(annotator, round).item_order.size()}});
        }
    }

    if (req.method == "GET" && parts.size() == 2 && parts[0] == "agreement") {
        if (!auth_.any(req.bearer_token)) throw unauthorized();
        const Round round = parse_round(parts[1]);
        const auto a = req.query.count("a") ? req.query.at("a") : service_.config().annotator_a;
        const auto b = req.query.count("b") ? req.query.at("b") : service_.config().annotator_b;
        const auto agreement = service_.agreement(round, a, b);
        return ok({{"round", round_name(round)},
                   {"a", a},
                   {"b", b},
                   {"n", agreement.report.n},
                   {"observed", agreement.report.observed},
                   {"expected", agreement.report.expected},
                   {"kappa", agreement.report.kappa},
                   {"disagreements", agreement.disagreement_ids}});
    }

    if (req.method == "GET" && parts.size() == 2 && parts[0] == "progress") {
        if (!auth_.any(req.bearer_token)) throw unauthorized();
        const Round round = parse_round(parts[1]);
        json done = json::object();
        for (const auto& [who, n] : service_.progress(round)) done[who] = n;
        json total = nullptr;
        try {
            total = service_.round_items(round).size();
        } catch (const Error&) {
        }
        return ok({{"round", round_name(round)}, {"completed", done}, {"total", total}});
    }

    if (req.method == "GET" && parts.size() == 1 && parts[0] == "disputes") {
        if (!auth_.any(req.bearer_token)) throw unauthorized();
        json list = json::array();
        for (const auto& d : service_.disputes())
            list.push_back({{"item_id", d.item_id}, {"labels", labels_json(d.labels)}});
        return ok({{"disputes", list}});
    }

    if (req.method == "POST" && parts.size() == 1 && parts[0] == "adjudicate") {
        const json body = parse_body(req.body);
        const auto item_id = body_string(body, "item_id");
        const auto arbiter = body_string(body, "arbiter_id");
        if (!auth_.allows(arbiter, req.bearer_token)) throw unauthorized();
        const auto decision =
            service_.adjudicate(item_id, arbiter, taxonomy::parse_label(body_string(body, "label")));
        return ok({{"item_id", decision.item_id},
                   {"label", taxonomy::name(decision.label)},
                   {"resolved_by", resolution_name(decision.resolved_by)}});
    }

    throw Error(Errc::NotFound, "no route for " + req.method + " " + req.path);
}

// --- HTTP transport ------------------------------------------------------------------

struct ApiServer::Impl {
    AnnotationApi& api;
    httplib::Server server;

    explicit Impl(AnnotationApi& a) : api(a) {
        auto handler = [this](const httplib::Request& hreq, httplib::Response& hres) {
            ApiRequest req;
            req.method = hreq.method;
            req.path = hreq.path;
            for (const auto& [k, v] : hreq.params) req.query[k] = v;
            req.body = hreq.body;
            const auto auth = hreq.get_header_value("Authorization");
            if (auth.rfind("Bearer ", 0) == 0) req.bearer_token = auth.substr(7);
            const ApiResponse res = api.handle(req);
            hres.status = res.status;
            hres.set_content(res.body, "application/json; charset=utf-8");
        };
        server.Get(R"(/.*)", handler);
        server.Post(R"(/.*)", handler);
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    }
};

ApiServer::ApiServer(AnnotationApi& api) : impl_(std::make_unique<Impl>(api)) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : port;
    if (port != 0 && !impl_->server.bind_to_port(host, port))
        throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
    if (bound < 0) throw Error(Errc::IoError, "cannot bind " + host);
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void ApiServer::run(const std::string& host, int port) {
    if (!impl_->server.listen(host, port))
        throw Error(Errc::IoError, "cannot listen on " + host + ":" + std::to_string(port));
}

void ApiServer::stop() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace revsmell::annotation
