#include "commands.hpp"

#include "revsmell/annotation.hpp"
#include "revsmell/annotation_api.hpp"
#include "revsmell/gateway.hpp"
#include "revsmell/metrics.hpp"
#include "revsmell/prompt.hpp"
#include "revsmell/report.hpp"
#include "revsmell/taxonomy.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace revsmell::cli {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
}

std::string fixed(double v, int digits = 3) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

int exit_code_for(Errc code) noexcept {
    switch (code) {
    case Errc::ConfigError:
    case Errc::IncompleteExemplars:
    case Errc::ExemplarLeak:
    case Errc::UnknownLabel: return kUsageError;
    case Errc::BackendError: return kBackendError;
    default: return kDataError;
    }
}

fs::path allocate_run_dir(const fs::path& out) {
    fs::create_directories(out);
    for (int n = 1; n < 100000; ++n) {
        char name[16];
        std::snprintf(name, sizeof name, "run-%04d", n);
        const fs::path dir = out / name;
        if (fs::create_directory(dir)) return dir;
    }
    throw Error(Errc::IoError, "no free run directory under " + out.string());
}

std::vector<std::string> resolve_exemplar_ids(const corpus::CorpusManifest& manifest,
                                              const std::optional<fs::path>& list) {
    if (list) return corpus::read_id_list(*list);
    std::vector<std::string> ids;
    for (const auto& item : manifest.items) {
        if (item.is_exemplar) ids.push_back(item.id);
    }
    return ids;
}

// --- build ------------------------------------------------------------------------

fs::path cmd_build(const BuildArgs& args, std::ostream& out) {
    const auto records = corpus::load_upstream(args.upstream);
    corpus::UrlDiffSource source(args.diff_cache);
    corpus::BuildOptions options;
    options.seed = args.seed;
    options.sample_size = args.sample_size;
    const auto result = corpus::build_corpus(records, options, source);

    const fs::path dir = allocate_run_dir(args.out);
    spit(dir / "rejects.jsonl", corpus::rejects_to_jsonl(result.rejects));

    std::map<std::string, std::size_t> by_category;
    for (const auto& r : records) by_category[r.upstream_category]++;
    std::size_t candidates_kept = 0;
    for (const auto& item : result.manifest.items)
        candidates_kept += item.provenance == corpus::Provenance::SmellCandidate;

    out << "upstream records: " << records.size() << "\n";
    for (const auto& [category, n] : by_category) out << "  " << category << ": " << n << "\n";
    out << "smell candidates: " << result.smell_candidates << " (" << candidates_kept << " anchored)\n";
    out << "balanced sample: " << result.manifest.items.size() - candidates_kept << "\n";
    out << "rejects: " << result.rejects.size() << " of " << result.attempted << " anchoring attempts\n";
    out << "manifest items: " << result.manifest.items.size() << " (seed " << args.seed << ")\n";

    if (result.reject_rate() > args.max_reject_rate) {
        throw Error(Errc::NotAnchored, "reject rate " + fixed(result.reject_rate()) + " exceeds " +
                                           fixed(args.max_reject_rate) + "; see " +
                                           (dir / "rejects.jsonl").string());
    }
    corpus::save_manifest(result.manifest, dir / "manifest.jsonl");
    out << "wrote " << (dir / "manifest.jsonl").string() << "\n";
    return dir;
}

// --- classify ---------------------------------------------------------------------

fs::path cmd_classify(const ClassifyArgs& args, std::ostream& out, bool* had_backend_errors) {
    const auto mode = prompt::parse_mode(args.mode);
    if (args.parallelism < 1) throw Error(Errc::ConfigError, "--parallelism must be at least 1");

    auto config = gateway::default_config(args.backend, args.model);
    config.max_attempts = args.max_attempts;
    config.request_timeout = std::chrono::milliseconds(args.timeout_ms);
    config.validate();

    const auto manifest = corpus::load_manifest(args.corpus);
    const auto exemplar_ids = resolve_exemplar_ids(manifest, args.exemplars);
    if (mode == prompt::Mode::OneShot && exemplar_ids.empty())
        throw Error(Errc::IncompleteExemplars, "one-shot classification needs --exemplars");

    std::vector<corpus::CorpusItem> eval_set = manifest.items;
    std::optional<prompt::ExemplarBlock> block;
    if (!exemplar_ids.empty()) {
        auto split = corpus::split_exemplars(manifest, exemplar_ids);
        eval_set = std::move(split.eval_set);
        if (mode == prompt::Mode::OneShot) block = prompt::ExemplarBlock::from_items(split.exemplars);
    }
    // Items flagged as exemplars never reach evaluation, whichever list is in force.
    std::erase_if(eval_set, [](const corpus::CorpusItem& item) { return item.is_exemplar; });

    std::optional<prompt::PromptTemplate> tmpl;
    if (args.template_path) tmpl = prompt::PromptTemplate::load(*args.template_path);

    gateway::StubRules rules = gateway::default_stub_rules();
    if (args.stub_rules) rules = gateway::parse_stub_rules(slurp(*args.stub_rules));
    auto backend = gateway::make_backend(config, gateway::process_env, std::move(rules));

    const fs::path dir = allocate_run_dir(args.out);
    gateway::BatchSpec spec;
    spec.mode = mode;
    spec.exemplars = block ? &*block : nullptr;
    if (tmpl) spec.render.tmpl = &*tmpl;
    spec.render.exemplar_hunks = args.exemplar_hunks;
    spec.run_id = dir.filename().string();
    spec.seed = args.seed;

    const auto result = gateway::run_batch(eval_set, spec, config, *backend, args.parallelism);
    spit(dir / "predictions.jsonl", gateway::predictions_to_jsonl(result.predictions));
    spit(dir / "run_record.json", gateway::run_record_to_json(result.record));

    out << "classified " << result.predictions.size() << " items (" << prompt::mode_name(mode) << ", "
        << config.backend_id << "/" << config.model_name << ")\n";
    out << "  ok " << result.record.ok << ", unresolved " << result.record.unresolved
        << ", backend errors " << result.record.backend_error << "\n";
    out << "wrote " << (dir / "predictions.jsonl").string() << "\n";
    if (had_backend_errors != nullptr) *had_backend_errors = result.record.backend_error > 0;
    return dir;
}

// --- evaluate ---------------------------------------------------------------------

fs::path cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
    const auto predictions = gateway::predictions_from_jsonl(slurp(args.predictions));
    const auto manifest = corpus::load_manifest(args.corpus);
    const auto exemplar_ids = resolve_exemplar_ids(manifest, args.exemplars);
    const std::set<std::string> exemplars(exemplar_ids.begin(), exemplar_ids.end());

    std::map<std::string, const corpus::CorpusItem*> expected;
    for (const auto& item : manifest.items) {
        if (!exemplars.contains(item.id) && !item.is_exemplar) expected[item.id] = &item;
    }
    std::set<std::string> seen;
    for (const auto& p : predictions) {
        if (!expected.contains(p.item_id))
            throw Error(Errc::JoinMismatch, "prediction for " + p.item_id + " has no evaluation item");
        if (!seen.insert(p.item_id).second)
            throw Error(Errc::JoinMismatch, "duplicate prediction for " + p.item_id);
    }
    for (const auto& [id, item] : expected) {
        if (!seen.contains(id)) throw Error(Errc::JoinMismatch, "no prediction for item " + id);
        if (!item->gold_label) throw Error(Errc::JoinMismatch, "item " + id + " has no gold label");
    }

    std::vector<metrics::LabelPair> pairs;
    report::RunCounts counts;
    for (const auto& p : predictions) {
        switch (p.status) {
        case gateway::Status::Ok:
            pairs.emplace_back(*expected.at(p.item_id)->gold_label, *p.label);
            ++counts.evaluated;
            break;
        case gateway::Status::Unresolved: ++counts.unresolved; break;
        case gateway::Status::BackendError: ++counts.backend_error; break;
        }
    }
    const auto matrix = metrics::confusion(pairs);
    const auto summary = metrics::summarize(matrix);

    const fs::path dir = allocate_run_dir(args.out);
    const std::string text = report::full_text(args.setting, matrix, summary, counts);
    spit(dir / "report.txt", text);
    spit(dir / "report.jsonl", report::to_jsonl(args.setting, matrix, summary, counts));
    spit(dir / "confusion.json", metrics::matrix_to_json(matrix) + "\n");
    out << text;
    out << "wrote " << (dir / "report.jsonl").string() << "\n";
    return dir;
}

// --- replicate-table -------------------------------------------------------------------

void cmd_replicate_table(const ReplicateArgs& args, std::ostream& out) {
    const auto matrix = metrics::matrix_from_json(slurp(args.matrix));
    const auto summary = metrics::summarize(matrix);
    const report::RunCounts counts{static_cast<std::size_t>(matrix.total()), 0, 0};
    const std::string setting = "reference, one-shot";
    const std::string text = report::full_text(setting, matrix, summary, counts);
    out << text;
    if (args.out) {
        const fs::path dir = allocate_run_dir(*args.out);
        spit(dir / "report.txt", text);
        spit(dir / "report.jsonl", report::to_jsonl(setting, matrix, summary, counts));
        out << "wrote " << (dir / "report.jsonl").string() << "\n";
    }
}

// --- annotation ---------------------------------------------------------------------

namespace {

annotation::ProtocolConfig protocol(const AnnotateArgs& args) {
    annotation::ProtocolConfig config;
    config.annotator_a = args.annotator_a;
    config.annotator_b = args.annotator_b;
    config.arbiters = args.arbiters;
    config.pilot_size = args.pilot_size;
    config.seed = args.seed;
    return config;
}

} // namespace

void cmd_serve(const ServeArgs& args, std::ostream& out) {
    annotation::AnnotationService service(corpus::load_manifest(args.corpus), protocol(args), args.log);
    std::vector<std::string> ids{args.annotator_a, args.annotator_b};
    ids.insert(ids.end(), args.arbiters.begin(), args.arbiters.end());
    const auto auth = annotation::AuthPolicy::from_env(ids, gateway::process_env);
    annotation::AnnotationApi api(service, auth);
    annotation::ApiServer server(api);
    out << "annotation service on http://" << args.host << ":" << args.port
        << (auth.open() ? " (no tokens configured; open access)" : "") << std::endl;
    server.run(args.host, args.port);
}

fs::path cmd_apply_labels(const ApplyLabelsArgs& args, std::ostream& out) {
    annotation::AnnotationService service(corpus::load_manifest(args.corpus), protocol(args), args.log);
    for (auto round : {annotation::Round::Pilot, annotation::Round::Main, annotation::Round::Reconciliation}) {
        try {
            const auto a = service.agreement(round, args.annotator_a, args.annotator_b);
            out << annotation::round_name(round) << " kappa " << fixed(a.report.kappa) << " (n="
                << a.report.n << ", disagreements " << a.disagreement_ids.size() << ")\n";
        } catch (const Error& e) {
            out << annotation::round_name(round) << ": " << e.what() << "\n";
        }
    }
    const auto decisions = service.final_labels();
    std::map<std::string_view, std::size_t> by_resolution;
    for (const auto& d : decisions) by_resolution[annotation::resolution_name(d.resolved_by)]++;
    out << "final labels: " << decisions.size() << " of " << service.round_items(annotation::Round::Main).size()
        << "\n";
    for (const auto& [how, n] : by_resolution) out << "  " << how << ": " << n << "\n";

    const fs::path dir = allocate_run_dir(args.out);
    corpus::save_manifest(service.labeled_corpus(), dir / "manifest.jsonl");
    out << "wrote " << (dir / "manifest.jsonl").string() << "\n";
    return dir;
}

// --- entry point ------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Review-comment smell classification toolkit"};
    app.require_subcommand(1);

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "Build a corpus manifest from upstream review comments");
    build_cmd->add_option("--upstream", build.upstream, "Upstream records (JSON lines)")->required();
    build_cmd->add_option("--seed", build.seed, "Sampling seed");
    build_cmd->add_option("--out", build.out, "Output directory")->required();
    build_cmd->add_option("--sample-size", build.sample_size, "Size of the balanced sample");
    build_cmd->add_option("--diff-cache", build.diff_cache, "Directory caching fetched diffs");
    build_cmd->add_option("--max-reject-rate", build.max_reject_rate, "Abort above this anchoring reject rate");

    ClassifyArgs classify;
    auto* classify_cmd = app.add_subcommand("classify", "Classify the evaluation split with a chat backend");
    classify_cmd->add_option("--corpus", classify.corpus, "Corpus manifest")->required();
    classify_cmd->add_option("--mode", classify.mode, "zero | one")->check(CLI::IsMember({"zero", "one"}));
    classify_cmd->add_option("--backend", classify.backend, "Backend id")->check(CLI::IsMember(gateway::backend_ids()));
    classify_cmd->add_option("--model", classify.model, "Model name");
    classify_cmd->add_option("--seed", classify.seed, "Run seed (recorded)");
    classify_cmd->add_option("--parallelism", classify.parallelism, "Concurrent requests");
    classify_cmd->add_option("--out", classify.out, "Output directory")->required();
    classify_cmd->add_option("--exemplars", classify.exemplars, "Exemplar id list file");
    classify_cmd->add_option("--max-attempts", classify.max_attempts, "Attempts per item");
    classify_cmd->add_option("--timeout-ms", classify.timeout_ms, "Request timeout");
    classify_cmd->add_option("--template", classify.template_path, "Prompt template JSON");
    classify_cmd->add_option("--stub-rules", classify.stub_rules, "Stub backend rules JSON");
    bool no_hunks = false;
    classify_cmd->add_flag("--no-exemplar-hunks", no_hunks, "Omit diff hunks from exemplars");

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold labels");
    evaluate_cmd->add_option("--predictions", evaluate.predictions, "predictions.jsonl")->required();
    evaluate_cmd->add_option("--corpus", evaluate.corpus, "Corpus manifest")->required();
    evaluate_cmd->add_option("--exemplars", evaluate.exemplars, "Exemplar id list file");
    evaluate_cmd->add_option("--out", evaluate.out, "Output directory")->required();
    evaluate_cmd->add_option("--setting", evaluate.setting, "Row name in the report");

    ReplicateArgs replicate;
    replicate.matrix = fs::path(REVSMELL_DATA_DIR) / "reference_confusion.json";
    auto* replicate_cmd = app.add_subcommand("replicate-table", "Recompute all scores from a stored confusion matrix");
    replicate_cmd->add_option("--matrix", replicate.matrix, "Confusion matrix JSON");
    replicate_cmd->add_option("--out", replicate.out, "Output directory");

    auto add_protocol = [](CLI::App* cmd, AnnotateArgs& a) {
        cmd->add_option("--corpus", a.corpus, "Corpus manifest")->required();
        cmd->add_option("--log", a.log, "Append-only annotation log (JSON lines)")->required();
        cmd->add_option("--annotator-a", a.annotator_a, "First annotator id");
        cmd->add_option("--annotator-b", a.annotator_b, "Second annotator id");
        cmd->add_option("--arbiters", a.arbiters, "Arbiter ids")->delimiter(',');
        cmd->add_option("--pilot-size", a.pilot_size, "Pilot sample size");
        cmd->add_option("--seed", a.seed, "Pilot and ordering seed");
    };
    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the annotation HTTP service");
    add_protocol(serve_cmd, serve);
    serve_cmd->add_option("--host", serve.host, "Bind address");
    serve_cmd->add_option("--port", serve.port, "Port");

    ApplyLabelsArgs apply;
    auto* apply_cmd = app.add_subcommand("apply-labels", "Write final annotation decisions into a manifest");
    add_protocol(apply_cmd, apply);
    apply_cmd->add_option("--out", apply.out, "Output directory")->required();

    app.add_subcommand("taxonomy", "Print the label taxonomy as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsageError;
    }

    try {
        if (*build_cmd) cmd_build(build, out);
        else if (*classify_cmd) {
            classify.exemplar_hunks = !no_hunks;
            bool backend_errors = false;
            cmd_classify(classify, out, &backend_errors);
            if (backend_errors) return kBackendError;
        } else if (*evaluate_cmd) cmd_evaluate(evaluate, out);
        else if (*replicate_cmd) cmd_replicate_table(replicate, out);
        else if (*serve_cmd) cmd_serve(serve, out);
        else if (*apply_cmd) cmd_apply_labels(apply, out);
        else out << taxonomy::export_json() << "\n";
    } catch (const Error& e) {
        err << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "error [IoError]: " << e.what() << "\n";
        return kDataError;
    }
    return kOk;
}

} // namespace revsmell::cli
