#include "hgcode/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "hgcode/adapter.hpp"
#include "hgcode/checks.hpp"
#include "hgcode/clone.hpp"
#include "hgcode/generator.hpp"
#include "hgcode/incidence.hpp"
#include "hgcode/parsing.hpp"
#include "hgcode/tokenizer.hpp"

namespace hgcode {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Nested JSON objects map onto subcommand sections, e.g.
// {"extract": {"max-tokens": 64}}.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            input >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

private:
    static void walk(const nlohmann::json& j, const std::vector<std::string>& parents,
                     std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto p = parents;
                p.push_back(key);
                walk(value, p, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            auto scalar = [&](const nlohmann::json& v) -> std::string {
                if (v.is_string()) return v.get<std::string>();
                if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
                if (v.is_number()) return v.dump();
                throw CLI::ConversionError(fmt::format("config: unsupported value for '{}'", key));
            };
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    out << text;
}

std::optional<Language> language_option(const std::string& name) {
    if (name.empty()) return std::nullopt;
    try {
        return language_from_string(name);
    } catch (const UnsupportedLanguage& e) {
        throw UsageError(e.what());
    }
}

TypeSet enabled_types(const std::string& ablate) {
    if (ablate.empty()) return all_types();
    if (ablate == "all") return {};
    try {
        TypeSet out = all_types();
        for (HyperedgeType t : parse_type_list(ablate)) out.erase(t);
        return out;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

Tokenizer tokenizer_option(const std::string& path) {
    if (path.empty()) return Tokenizer::fallback();
    return load_vocabulary(path);
}

AstScope scope_option(const std::string& name) {
    if (name == "all") return AstScope::AllInternalNodes;
    if (name == "direct") return AstScope::DirectParentsOnly;
    throw UsageError(fmt::format("unknown AST scope '{}' (expected all or direct)", name));
}

std::string with_commas(std::uint64_t v) {
    std::string digits = std::to_string(v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

// "125M", "6.7B", "1.1e9" or a plain integer.
double parse_count(const std::string& text) {
    if (text.empty()) throw UsageError("empty parameter count");
    double scale = 1.0;
    std::string body = text;
    const char last = static_cast<char>(std::toupper(static_cast<unsigned char>(body.back())));
    if (last == 'K' || last == 'M' || last == 'B') {
        scale = last == 'K' ? 1e3 : last == 'M' ? 1e6 : 1e9;
        body.pop_back();
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(body, &used);
        if (used != body.size() || v <= 0) throw std::invalid_argument("bad");
        return v * scale;
    } catch (const std::exception&) {
        throw UsageError(fmt::format("cannot read parameter count '{}'", text));
    }
}

// ---- subcommands -------------------------------------------------------------

struct ExtractOptions {
    std::vector<std::string> paths;
    std::string language;
    std::string tokenizer;
    std::string ablate;
    std::size_t max_tokens = 0;
    std::string out;
    std::size_t min_tokens = 3;
    std::string ast_scope = "all";
    bool no_comments = false;
    unsigned threads = 0;
};

int cmd_extract(const ExtractOptions& o, std::ostream& out, std::ostream& err) {
    const auto lang = language_option(o.language);
    const TypeSet types = enabled_types(o.ablate);
    GeneratorConfig gen;
    gen.min_tokens_for_hyperedge = o.min_tokens;
    gen.ast_scope = scope_option(o.ast_scope);
    gen.include_comments = !o.no_comments;
    try {
        gen.check();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const Tokenizer tok = tokenizer_option(o.tokenizer);

    std::vector<Snippet> inputs;
    bool single_file = o.paths.size() == 1;
    for (const auto& p : o.paths) {
        if (fs::is_directory(p)) {
            single_file = false;
            for (auto& s : load_snippets(p, lang)) {
                s.name = (fs::path(p) / s.name).generic_string();
                inputs.push_back(std::move(s));
            }
            continue;
        }
        if (!fs::exists(p)) throw UsageError(fmt::format("no such file: {}", p));
        Language l;
        if (lang) {
            l = *lang;
        } else {
            try {
                l = language_from_extension(fs::path(p).extension().string());
            } catch (const UnsupportedLanguage& e) {
                throw UsageError(fmt::format("{}: {}; pass --language", p, e.what()));
            }
        }
        inputs.push_back(Snippet{fs::path(p).generic_string(), read_file(p), l});
    }
    std::sort(inputs.begin(), inputs.end(), [](const Snippet& a, const Snippet& b) { return a.name < b.name; });

    std::vector<std::optional<TokenizedHypergraph>> graphs(inputs.size());
    std::vector<std::string> errors(inputs.size());
    {
        const unsigned workers = std::max(1u, o.threads ? o.threads : std::thread::hardware_concurrency());
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < std::min<std::size_t>(workers, std::max<std::size_t>(inputs.size(), 1)); ++w) {
            pool.emplace_back([&, w, workers] {
                for (std::size_t i = w; i < inputs.size(); i += workers) {
                    try {
                        TokenizedHypergraph g = generate(inputs[i].source, inputs[i].language, tok, gen);
                        g = filter_types(g, types);
                        if (o.max_tokens > 0) g = truncate_remap(g, o.max_tokens);
                        const ValidationReport v = validate(g);
                        if (!v.ok) {
                            errors[i] = fmt::format("invalid graph: {} ({})", v.violations.front().rule,
                                                    v.violations.front().detail);
                        } else {
                            graphs[i] = std::move(g);
                        }
                    } catch (const std::exception& e) {
                        errors[i] = e.what();
                    }
                }
            });
        }
    }

    bool failed = false;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!errors[i].empty()) {
            err << inputs[i].name << ": " << errors[i] << '\n';
            failed = true;
        }
    }
    if (failed) return kExitFailure;

    nlohmann::ordered_json doc;
    if (single_file && inputs.size() == 1) {
        doc = to_json(*graphs[0]);
    } else {
        doc = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            nlohmann::ordered_json entry;
            entry["path"] = inputs[i].name;
            entry["graph"] = to_json(*graphs[i]);
            doc.push_back(std::move(entry));
        }
    }
    const std::string text = doc.dump(2) + "\n";
    if (o.out.empty()) {
        out << text;
    } else {
        write_text(o.out, text);
    }
    return kExitOk;
}

struct StatsOptions {
    std::string dir;
    std::string language;
    std::string tokenizer;
    std::size_t min_tokens = 3;
    std::string ast_scope = "all";
    bool json = false;
    unsigned threads = 0;
};

int cmd_stats(const StatsOptions& o, std::ostream& out, std::ostream& err) {
    const auto lang = language_option(o.language);
    if (!fs::is_directory(o.dir)) throw UsageError(fmt::format("not a directory: {}", o.dir));
    GeneratorConfig gen;
    gen.min_tokens_for_hyperedge = o.min_tokens;
    gen.ast_scope = scope_option(o.ast_scope);
    const Tokenizer tok = tokenizer_option(o.tokenizer);
    const auto snippets = load_snippets(o.dir, lang);
    if (snippets.empty()) {
        err << "no source files found under " << o.dir << '\n';
        return kExitFailure;
    }

    std::map<Language, std::vector<Snippet>> by_lang;
    for (const auto& s : snippets) by_lang[s.language].push_back(s);

    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    std::string table = fmt::format("{:<11} {:>8} {:>6} {:>12} {:>16} {:>11} {:>8} {:>6}\n", "language", "snippets",
                                    "failed", "Avg. tokens", "Avg. hyperedges", "ast_family", "lexical", "line");
    bool any_failed = false;
    for (const auto& [l, group] : by_lang) {
        const CorpusStats st = compute_stats(group, tok, gen, o.threads);
        any_failed = any_failed || st.failed_count > 0;
        const std::size_t n = st.snippet_count;
        auto mean = [&](std::size_t total) { return n ? format_mean(total, n) : std::string("-"); };
        table += fmt::format("{:<11} {:>8} {:>6} {:>12} {:>16} {:>11} {:>8} {:>6}\n", to_string(l), n, st.failed_count,
                             mean(st.total_tokens), mean(st.total_hyperedges), mean(st.total_by_type[0]),
                             mean(st.total_by_type[1]), mean(st.total_by_type[2]));
        nlohmann::ordered_json j;
        j["language"] = to_string(l);
        j["snippets"] = n;
        j["failed"] = st.failed;
        j["total_tokens"] = st.total_tokens;
        j["total_hyperedges"] = st.total_hyperedges;
        for (HyperedgeType t : kAllHyperedgeTypes) {
            j[fmt::format("total_{}", to_string(t))] = st.total_by_type[static_cast<std::size_t>(t)];
        }
        j["avg_tokens"] = mean(st.total_tokens);
        j["avg_hyperedges"] = mean(st.total_hyperedges);
        doc.push_back(std::move(j));
        for (const auto& name : st.failed) err << name << ": extraction failed\n";
    }
    out << (o.json ? doc.dump(2) + "\n" : table);
    return any_failed ? kExitFailure : kExitOk;
}

struct ParamsOptions {
    std::size_t layers = 0;
    std::size_t hidden = 0;
    std::size_t bottleneck = 64;
    std::string plm_params;
    bool json = false;
};

int cmd_params(const ParamsOptions& o, std::ostream& out) {
    const PlmShapeConfig cfg{o.layers, o.hidden, o.bottleneck};
    try {
        cfg.check();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const std::uint64_t plain = count_parameters(cfg, AdapterVariant::PlainAdapter);
    const std::uint64_t hg = count_parameters(cfg, AdapterVariant::HgAdapter);
    const double exact = 100.0 * static_cast<double>(hg - plain) / static_cast<double>(plain);
    const auto tp = tenths_of_million(plain);
    const auto th = tenths_of_million(hg);
    const double shown = tp ? 100.0 * (static_cast<double>(th) - static_cast<double>(tp)) / static_cast<double>(tp) : 0.0;

    nlohmann::ordered_json j;
    j["layers"] = o.layers;
    j["hidden"] = o.hidden;
    j["bottleneck"] = o.bottleneck;
    j["plain_adapter"] = plain;
    j["hgadapter"] = hg;
    j["plain_adapter_display"] = format_millions(plain);
    j["hgadapter_display"] = format_millions(hg);
    j["overhead_percent_exact"] = exact;
    j["overhead_percent_display"] = shown;

    std::string text = fmt::format("config            L={} C={} C_down={}\n", o.layers, o.hidden, o.bottleneck);
    text += fmt::format("plain adapter     {:>12}  ({})\n", with_commas(plain), format_millions(plain));
    text += fmt::format("HGAdapter         {:>12}  ({})\n", with_commas(hg), format_millions(hg));
    text += fmt::format("extra parameters  {:>12}\n", with_commas(hg - plain));
    text += fmt::format("overhead          {:.2f}% exact, {:.2f}% from the 0.1M display values\n", exact, shown);
    if (!o.plm_params.empty()) {
        const double plm = parse_count(o.plm_params);
        const double ratio = 100.0 * static_cast<double>(hg) / plm;
        const double ratio_shown = 100.0 * static_cast<double>(th) * 1e5 / plm;
        j["plm_params"] = plm;
        j["hgadapter_over_plm_percent_exact"] = ratio;
        j["hgadapter_over_plm_percent_display"] = ratio_shown;
        text += fmt::format("share of PLM      {:.3f}% exact, {:.3f}% from the display value ({} params)\n", ratio,
                            ratio_shown, o.plm_params);
    }
    out << (o.json ? j.dump(2) + "\n" : text);
    return kExitOk;
}

struct GradcheckOptions {
    std::uint64_t seed = 7;
    std::size_t trials = 20;
    double tol = 1e-5;
    bool json = false;
};

int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out) {
    const GradSuiteResult r = run_gradcheck_suite(o.seed, o.trials, o.tol);
    if (o.json) {
        nlohmann::ordered_json j;
        j["seed"] = o.seed;
        j["trials"] = o.trials;
        j["checks"] = r.trials.size();
        j["coordinates"] = r.checked;
        j["skipped_kinks"] = r.skipped;
        j["max_rel_error"] = r.max_rel_error;
        j["passed"] = r.passed;
        out << j.dump(2) << '\n';
    } else {
        std::map<std::string, double> worst;
        for (const auto& t : r.trials) worst[t.kind] = std::max(worst[t.kind], t.report.max_rel_error);
        for (const auto& [kind, e] : worst) out << fmt::format("{:<14} max rel err {:.3e}\n", kind, e);
        out << fmt::format("{} checks, {} coordinates, {} skipped at kinks\n", r.trials.size(), r.checked, r.skipped);
        out << fmt::format("max rel err {:.3e} (tolerance {:.0e}): {}\n", r.max_rel_error, o.tol,
                           r.passed ? "PASS" : "FAIL");
    }
    return r.passed ? kExitOk : kExitFailure;
}

struct DemoOptions {
    std::uint64_t seed = 1;
    std::string ablate;
    std::string preset = "desk";
    std::optional<std::size_t> epochs;
    std::optional<double> lr;
    std::optional<std::size_t> batch;
    std::size_t train_size = 256;
    std::size_t val_size = 64;
    std::string tokenizer;
    std::string dataset;
    std::string dataset_out;
    std::string checkpoint;
    std::string out;
    bool json = false;
    unsigned threads = 0;
};

int cmd_demo(const DemoOptions& o, std::ostream& out, std::ostream& err) {
    TrainConfig tc;
    try {
        tc = train_preset(o.preset);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (o.epochs) tc.epochs = *o.epochs;
    if (o.lr) tc.optimizer.learning_rate = *o.lr;
    if (o.batch) tc.batch = *o.batch;
    tc.threads = o.threads;
    tc.shuffle_seed = o.seed + 4;

    std::vector<CloneExample> train, val;
    if (!o.dataset.empty()) {
        auto all = read_jsonl(o.dataset);
        if (all.size() < 2) throw std::runtime_error("dataset needs at least two pairs");
        const std::size_t cut = all.size() - std::max<std::size_t>(1, all.size() / 5);
        train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cut));
        val.assign(all.begin() + static_cast<std::ptrdiff_t>(cut), all.end());
    } else {
        train = make_synthetic_clone_set(o.seed, o.train_size);
        val = make_synthetic_clone_set(o.seed + 1000, o.val_size);
    }
    if (!o.dataset_out.empty()) {
        auto all = train;
        all.insert(all.end(), val.begin(), val.end());
        write_jsonl(o.dataset_out, all);
    }

    PipelineConfig pc;
    pc.encoder.seed = o.seed;
    pc.adapter_seed = o.seed + 7;
    pc.head_seed = o.seed + 9;
    pc.types = enabled_types(o.ablate);
    ClonePipeline pipeline(pc, tokenizer_option(o.tokenizer));
    const TrainReport r = train_adapters(pipeline, train, val, tc);

    nlohmann::ordered_json j = r.to_json();
    j["seed"] = o.seed;
    j["ablate"] = o.ablate;
    j["learning_rate"] = tc.optimizer.learning_rate;
    j["optimizer"] = to_string(tc.optimizer.kind);
    j["batch"] = tc.batch;
    j["epochs"] = tc.epochs;

    std::string table = fmt::format("preset {}  optimizer {}  lr {}  batch {}  epochs {}  seed {}\n", r.preset,
                                    to_string(tc.optimizer.kind), tc.optimizer.learning_rate, tc.batch, tc.epochs,
                                    o.seed);
    table += fmt::format("{:>5} {:>10} {:>8}\n", "epoch", "loss", "val F1");
    for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
        table += fmt::format("{:>5} {:>10.4f} {:>8.4f}\n", e + 1, r.epoch_loss[e],
                             e < r.epoch_val_f1.size() ? r.epoch_val_f1[e] : 0.0);
    }
    table += fmt::format("train loss {:.4f} -> {:.4f}\n", r.initial_loss, r.final_loss);
    table += fmt::format("validation P {:.4f}  R {:.4f}  F1 {:.4f}  (best F1 {:.4f} at epoch {})\n",
                         r.final_val.precision, r.final_val.recall, r.final_val.f1, r.best_val_f1, r.best_epoch);
    table += fmt::format("frozen digest {} -> {}\n", r.frozen_digest_before, r.frozen_digest_after);

    if (!o.out.empty()) write_text(o.out, j.dump(2) + "\n");
    if (!o.checkpoint.empty()) save_checkpoint(o.checkpoint, r.best_checkpoint);
    if (o.json) {
        out << j.dump(2) << '\n';
        err << table;
    } else {
        out << table;
    }
    if (r.frozen_digest_before != r.frozen_digest_after) {
        err << "frozen encoder weights changed during training\n";
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_selftest(std::uint64_t seed, std::ostream& out) {
    bool ok = true;
    for (const auto& c : run_selftest(seed)) {
        ok = ok && c.passed;
        out << fmt::format("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    }
    return ok ? kExitOk : kExitFailure;
}

std::string version_text() {
    std::string text = fmt::format("hgcode {}\ntree-sitter {}\n", kToolkitVersion, runtime_version());
    for (const auto& g : grammar_versions()) {
        text += fmt::format("  {:<11} {} (abi {})\n", to_string(g.language), g.package_version, g.abi_version);
    }
    return text;
}

// Looks ahead for --config so the right file format is installed before
// parsing.
std::string find_config(const std::vector<std::string>& args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return {};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Code hypergraph extraction and HGAdapter toolkit", "hgcode"};
    app.require_subcommand(0, 1);
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "TOML or JSON file with option values; command line flags win");
    const std::string config_path = find_config(args);
    if (config_path.size() > 5 && config_path.substr(config_path.size() - 5) == ".json") {
        app.config_formatter(std::make_shared<JsonConfig>());
    }
    bool show_version = false;
    app.add_flag("--version", show_version, "Print toolkit and grammar versions");

    ExtractOptions ex;
    auto* extract = app.add_subcommand("extract", "Extract the token hypergraph of source files as JSON");
    extract->add_option("paths", ex.paths, "Source files or directories")->required();
    extract->add_option("--language,-l", ex.language, "ruby, javascript, java, go, php or python");
    extract->add_option("--tokenizer", ex.tokenizer, "Byte-level BPE vocabulary JSON");
    extract->add_option("--ablate", ex.ablate, "Hyperedge types to drop: ast_family,lexical,line or all");
    extract->add_option("--max-tokens", ex.max_tokens, "Truncate to this many tokens (0: no limit)");
    extract->add_option("--out,-o", ex.out, "Write JSON here instead of standard output");
    extract->add_option("--min-tokens", ex.min_tokens, "Minimum size of lexical and AST family hyperedges");
    extract->add_option("--ast-scope", ex.ast_scope, "all or direct");
    extract->add_flag("--no-comments", ex.no_comments, "Leave comment leaves out of the token sequence");
    extract->add_option("--threads", ex.threads, "Worker threads (0: all cores)");

    StatsOptions st;
    auto* stats = app.add_subcommand("stats", "Average tokens and hyperedges per snippet");
    stats->add_option("dir", st.dir, "Corpus directory")->required();
    stats->add_option("--language,-l", st.language, "Only files of this language");
    stats->add_option("--tokenizer", st.tokenizer, "Byte-level BPE vocabulary JSON");
    stats->add_option("--min-tokens", st.min_tokens, "Minimum size of lexical and AST family hyperedges");
    stats->add_option("--ast-scope", st.ast_scope, "all or direct");
    stats->add_flag("--json", st.json, "Print JSON");
    stats->add_option("--threads", st.threads, "Worker threads (0: all cores)");

    ParamsOptions pa;
    auto* params = app.add_subcommand("params", "Adapter parameter counts");
    params->add_option("--layers", pa.layers, "Number of layers L")->required();
    params->add_option("--hidden", pa.hidden, "Hidden width C")->required();
    params->add_option("--bottleneck", pa.bottleneck, "Adapter width C_down")->capture_default_str();
    params->add_option("--plm-params", pa.plm_params, "Host model size, e.g. 125M or 6.7B");
    params->add_flag("--json", pa.json, "Print JSON");

    GradcheckOptions gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference checks of the adapter backward pass");
    gradcheck->add_option("--seed", gc.seed, "Seed for the random instances")->capture_default_str();
    gradcheck->add_option("--trials", gc.trials, "Random instances per check")->capture_default_str();
    gradcheck->add_option("--tol", gc.tol, "Maximum relative error")->capture_default_str();
    gradcheck->add_flag("--json", gc.json, "Print JSON");

    DemoOptions de;
    std::size_t epochs = 0, batch = 0;
    double lr = 0.0;
    auto* demo = app.add_subcommand("train-clone-demo", "Train adapters on the synthetic clone set");
    demo->add_option("--seed", de.seed, "Seed for data, initialization and shuffling")->capture_default_str();
    demo->add_option("--ablate", de.ablate, "Hyperedge types to drop: ast_family,lexical,line or all");
    demo->add_option("--preset", de.preset, "desk, paper-clone or paper-summarization")->capture_default_str();
    auto* epochs_opt = demo->add_option("--epochs", epochs, "Override the preset's epoch count");
    auto* lr_opt = demo->add_option("--lr", lr, "Override the preset's learning rate");
    auto* batch_opt = demo->add_option("--batch", batch, "Override the preset's batch size");
    demo->add_option("--train-size", de.train_size, "Generated training pairs")->capture_default_str();
    demo->add_option("--val-size", de.val_size, "Generated validation pairs")->capture_default_str();
    demo->add_option("--tokenizer", de.tokenizer, "Byte-level BPE vocabulary JSON");
    demo->add_option("--dataset", de.dataset, "JSON lines dataset; the last fifth is used for validation");
    demo->add_option("--dataset-out", de.dataset_out, "Write the generated pairs as JSON lines");
    demo->add_option("--checkpoint", de.checkpoint, "Write the best-validation trainable tensors here");
    demo->add_option("--out,-o", de.out, "Write the report JSON here");
    demo->add_flag("--json", de.json, "Print the report JSON on standard output");
    demo->add_option("--threads", de.threads, "Worker threads (0: all cores)");

    std::uint64_t self_seed = 1;
    auto* selftest = app.add_subcommand("selftest", "Run the invariant suite");
    selftest->add_option("--seed", self_seed, "Seed for the random instances")->capture_default_str();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (show_version) {
            out << version_text();
            return kExitOk;
        }
        if (*extract) return cmd_extract(ex, out, err);
        if (*stats) return cmd_stats(st, out, err);
        if (*params) return cmd_params(pa, out);
        if (*gradcheck) return cmd_gradcheck(gc, out);
        if (*demo) {
            if (*epochs_opt) de.epochs = epochs;
            if (*lr_opt) de.lr = lr;
            if (*batch_opt) de.batch = batch;
            return cmd_demo(de, out, err);
        }
        if (*selftest) return cmd_selftest(self_seed, out);
        err << app.help();
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace hgcode
