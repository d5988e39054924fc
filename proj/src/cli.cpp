#include "semforge/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "semforge/compiler.hpp"
#include "semforge/config.hpp"
#include "semforge/defaults.hpp"
#include "semforge/fnl.hpp"
#include "semforge/kgraph.hpp"
#include "semforge/latex_ingest.hpp"
#include "semforge/prompting.hpp"
#include "semforge/semlayer.hpp"
#include "semforge/text.hpp"

namespace semforge::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error("Usage", message) {}
};

std::string rate_string(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", rate);
  return buf;
}

std::string count_line(std::size_t errors, std::size_t warnings) {
  return std::to_string(errors) + " error(s), " + std::to_string(warnings) + " warning(s)\n";
}

class Session {
 public:
  Session(config::PipelineConfig cfg, std::ostream& out, std::ostream& err,
          std::shared_ptr<prompting::Transport> transport)
      : cfg_(std::move(cfg)), out_(out), err_(err), transport_(std::move(transport)) {
    vocab_ = cfg_.vocabulary ? fnl::Vocabulary::from_toml(text::read_file(*cfg_.vocabulary))
                             : fnl::Vocabulary::builtin();
    tmpl_ = cfg_.template_path ? prompting::PromptTemplate::parse(text::read_file(*cfg_.template_path))
                               : prompting::PromptTemplate::builtin();
  }

  int split();
  int prompt(std::uint32_t snippet);
  int extract(std::optional<std::uint32_t> from, std::optional<std::uint32_t> to);
  int lint(const std::optional<std::string>& file);
  int diff(const std::string& old_file, const std::string& new_file);
  int compile(const std::optional<std::string>& file);
  int query(const std::string& pattern, const std::optional<std::string>& graph_file);
  int render();
  int pipeline();

 private:
  fs::path out_path(const std::string& rel) const { return cfg_.output_dir / rel; }
  fs::path extracted_path() const { return out_path("fnl/extracted.fnl"); }

  void write(const fs::path& path, const std::string& content) const {
    fs::create_directories(path.parent_path());
    text::write_file(path, content);
  }

  const latex::SourceDocument& doc() {
    if (!doc_) doc_ = latex::split_document(text::read_file(cfg_.source), cfg_.source.filename().string());
    return *doc_;
  }

  kg::KnowledgeGraph base_graph() const {
    if (!cfg_.base_graph) return kg::KnowledgeGraph(cfg_.ns);
    auto g = kg::parse(text::read_file(*cfg_.base_graph));
    if (g.ns() != cfg_.ns) {
      throw config::ConfigError({{"base_graph", "BadValue",
                                  "namespace '" + g.ns() + "' differs from the configured '" + cfg_.ns + "'"}});
    }
    return g;
  }

  prompting::LlmClient client() const {
    prompting::ClientOptions o;
    o.mode = cfg_.mode;
    o.endpoint = cfg_.endpoint;
    o.model = cfg_.model;
    o.cache_dir = cfg_.cache_dir;
    auto transport = transport_ ? transport_ : std::make_shared<prompting::HttpTransport>();
    return prompting::LlmClient(std::move(o), std::move(transport));
  }

  // Invalid blocks are dropped from the document and kept as diagnostics.
  fnl::ParseResult read_fnl(const fs::path& path) const {
    return fnl::parse_fnl(text::read_file(path), vocab_);
  }

  void print_diagnostics(const std::vector<fnl::Diagnostic>& diags, const std::string& file, std::ostream& os) const {
    for (const auto& d : diags) os << fnl::format_diagnostic(d, file) << "\n";
  }

  // The reviewed file when present, else the extracted one.
  fs::path default_fnl_input() const {
    if (fs::exists(cfg_.reviewed_fnl)) return cfg_.reviewed_fnl;
    return extracted_path();
  }

  // FNL accepted so far: extracted blocks overlaid with reviewed ones.
  fnl::Document accepted(const fnl::Document& extracted) const {
    fnl::Document d = extracted;
    if (!fs::exists(cfg_.reviewed_fnl)) return d;
    auto reviewed = read_fnl(cfg_.reviewed_fnl);
    for (const auto& [id, block] : reviewed.document.blocks) d.blocks[id] = block;
    return d;
  }

  // The budget must cover the untruncatable parts of every prompt, taken
  // with an empty FNL context.
  void check_budget() {
    fnl::Document empty;
    prompting::AssembleInput in{tmpl_, doc(), empty, vocab_, cfg_.model};
    for (const auto& s : doc().snippets) {
      auto need = prompting::minimum_budget(in, s.id);
      if (cfg_.budget < need) {
        throw config::ConfigError({{"budget", "BadValue",
                                    std::to_string(cfg_.budget) + " is below the minimum of " +
                                        std::to_string(need) + " bytes for snippet " + std::to_string(s.id)}});
      }
    }
  }

  std::size_t failed_lint_gate(const fs::path& input);
  void write_intervention_report();

  config::PipelineConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  std::shared_ptr<prompting::Transport> transport_;
  fnl::Vocabulary vocab_;
  prompting::PromptTemplate tmpl_;
  std::optional<latex::SourceDocument> doc_;
};

int Session::split() {
  const auto& d = doc();
  for (const auto& s : d.snippets) {
    out_ << "snippet " << s.id << ": lines " << s.first_line << "-" << s.last_line << ", " << s.sentence_estimate
         << " sentence(s)\n";
  }
  for (const auto& w : latex::validate_snippets(d)) {
    err_ << "warning: snippet " << w.snippet << ": " << latex::to_string(w.kind) << ": " << w.message << "\n";
  }
  return kExitOk;
}

int Session::prompt(std::uint32_t snippet) {
  check_budget();
  fnl::Document extracted;
  if (fs::exists(extracted_path())) extracted = read_fnl(extracted_path()).document;
  auto context = accepted(extracted);
  prompting::AssembleInput in{tmpl_, doc(), context, vocab_, cfg_.model};
  auto bundle = prompting::assemble_prompt(in, snippet, cfg_.budget);
  out_ << bundle.text;
  err_ << "content hash: " << bundle.content_hash << "\n";
  return kExitOk;
}

int Session::extract(std::optional<std::uint32_t> from, std::optional<std::uint32_t> to) {
  const auto& d = doc();
  check_budget();
  fnl::Document extracted;
  if (fs::exists(extracted_path())) extracted = read_fnl(extracted_path()).document;
  auto llm = client();
  std::ostringstream report;
  std::size_t failures = 0;
  std::size_t done = 0;
  for (const auto& s : d.snippets) {
    if ((from && s.id < *from) || (to && s.id > *to)) continue;
    auto context = accepted(extracted);
    prompting::AssembleInput in{tmpl_, d, context, vocab_, cfg_.model};
    auto bundle = prompting::assemble_prompt(in, s.id, cfg_.budget);
    auto raw_name = "snippet-" + std::to_string(s.id) + ".txt";
    try {
      auto ex = prompting::extract_snippet_fnl(bundle, llm, vocab_);
      write(out_path("fnl/raw/" + raw_name), ex.raw);
      extracted.blocks[s.id] = ex.block;
      report << "snippet " << s.id << ": " << fnl::count_statements(ex.block) << " statement(s), prompt "
             << bundle.content_hash << "\n";
      print_diagnostics(ex.diagnostics, raw_name, report);
    } catch (const prompting::ResponseUnparseable& e) {
      write(out_path("fnl/raw/" + raw_name), e.raw());
      extracted.blocks.erase(s.id);
      ++failures;
      report << "snippet " << s.id << ": rejected, prompt " << bundle.content_hash << "\n";
      print_diagnostics(e.diagnostics(), raw_name, report);
      print_diagnostics(e.diagnostics(), raw_name, err_);
    } catch (const prompting::LlmError& e) {
      // Later prompts depend on this block, so stop here.
      write(extracted_path(), fnl::serialize_fnl(extracted));
      report << "snippet " << s.id << ": " << e.code() << "\n";
      write(out_path("reports/extract.txt"), report.str());
      err_ << "error: " << e.code() << ": " << e.what() << "\n";
      return kExitFailure;
    }
    ++done;
  }
  write(extracted_path(), fnl::serialize_fnl(extracted));
  report << done << " snippet(s) processed, " << failures << " rejected\n";
  write(out_path("reports/extract.txt"), report.str());
  out_ << "extracted " << done - failures << " of " << done << " snippet(s) into " << extracted_path().string()
       << "\n";
  return failures ? kExitFailure : kExitOk;
}

int Session::lint(const std::optional<std::string>& file) {
  fs::path input = file ? fs::path(*file) : default_fnl_input();
  return failed_lint_gate(input) ? kExitFailure : kExitOk;
}

// Writes reports/lint.txt and returns the number of errors.
std::size_t Session::failed_lint_gate(const fs::path& input) {
  if (!fs::exists(input)) throw Error("FileNotFound", "FNL file '" + input.string() + "' not found");
  auto parsed = read_fnl(input);
  auto diags = parsed.diagnostics;
  if (parsed.ok()) {
    auto more = fnl::lint(parsed.document, vocab_, base_graph());
    diags.insert(diags.end(), more.begin(), more.end());
  }
  std::size_t errors = 0;
  for (const auto& d : diags) errors += d.severity == fnl::Severity::Error;
  std::ostringstream report;
  print_diagnostics(diags, input.filename().string(), report);
  report << count_line(errors, diags.size() - errors);
  write(out_path("reports/lint.txt"), report.str());
  out_ << report.str();
  return errors;
}

int Session::diff(const std::string& old_file, const std::string& new_file) {
  auto a = read_fnl(old_file);
  auto b = read_fnl(new_file);
  if (!a.ok() || !b.ok()) {
    print_diagnostics(a.diagnostics, fs::path(old_file).filename().string(), err_);
    print_diagnostics(b.diagnostics, fs::path(new_file).filename().string(), err_);
    return kExitFailure;
  }
  auto s = fnl::diff_summary(a.document, b.document);
  out_ << "statements: " << fnl::count_statements(a.document) << " -> " << fnl::count_statements(b.document) << "\n"
       << "added: " << s.added << "\nremoved: " << s.removed << "\nmodified: " << s.modified << "\n"
       << "intervention rate: " << rate_string(s.intervention_rate) << "\n";
  return kExitOk;
}

void Session::write_intervention_report() {
  if (!fs::exists(cfg_.reviewed_fnl) || !fs::exists(extracted_path())) return;
  auto raw = read_fnl(extracted_path()).document;
  auto reviewed = read_fnl(cfg_.reviewed_fnl).document;
  auto s = fnl::diff_summary(raw, reviewed);
  std::ostringstream r;
  r << "extracted statements: " << fnl::count_statements(raw) << "\n"
    << "reviewed statements: " << fnl::count_statements(reviewed) << "\n"
    << "added: " << s.added << "\nremoved: " << s.removed << "\nmodified: " << s.modified << "\n"
    << "intervention rate: " << rate_string(s.intervention_rate) << "\n";
  write(out_path("reports/intervention.txt"), r.str());
}

int Session::compile(const std::optional<std::string>& file) {
  fs::path input = file ? fs::path(*file) : default_fnl_input();
  if (!fs::exists(input)) throw Error("FileNotFound", "FNL file '" + input.string() + "' not found");
  auto parsed = read_fnl(input);
  auto name = input.filename().string();
  if (!parsed.ok()) {
    print_diagnostics(parsed.diagnostics, name, err_);
    err_ << "refusing to compile FNL with errors\n";
    return kExitFailure;
  }
  auto graph = base_graph();
  compiler::CompileReport report;
  try {
    report = compiler::compile(parsed.document, graph, vocab_);
  } catch (const compiler::CompileError& e) {
    err_ << name << ":" << e.line() << ": error: " << e.code() << ": " << e.what() << " (snippet " << e.snippet()
         << ")\n";
    return kExitFailure;
  }
  write(out_path("graph.kgt"), kg::serialize(graph));
  write(out_path("graph.kgb"), kg::export_builder_script(graph));
  write(out_path("fnl/compiled.fnl"), fnl::serialize_fnl(parsed.document));
  write(out_path("reports/compile.txt"), compiler::format_report(report, graph));
  write_intervention_report();
  out_ << "compiled " << name << ": " << report.created_entities.size() << " entities, "
       << report.asserted_statements.size() << " statements, " << report.diagnostics.size() << " warning(s)\n";
  return kExitOk;
}

namespace {

std::vector<std::string> tokenize_pattern(const std::string& pattern) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == ' ' || pattern[i] == '\t') {
      ++i;
      continue;
    }
    std::string tok;
    if (pattern[i] == '"' || pattern.compare(i, 9, "lit:str:\"") == 0) {
      // A quoted run, possibly behind the lit:str: prefix.
      auto open = pattern.find('"', i);
      tok = pattern.substr(i, open - i + 1);
      std::size_t j = open + 1;
      bool closed = false;
      while (j < pattern.size()) {
        tok += pattern[j];
        if (pattern[j] == '\\' && j + 1 < pattern.size()) {
          tok += pattern[++j];
        } else if (pattern[j] == '"') {
          closed = true;
          ++j;
          break;
        }
        ++j;
      }
      if (!closed) throw UsageError("unterminated quote in pattern");
      i = j;
    } else {
      while (i < pattern.size() && pattern[i] != ' ' && pattern[i] != '\t') tok += pattern[i++];
    }
    out.push_back(tok);
  }
  return out;
}

// Label or identifier lookup over items and relations.
std::optional<kg::Uri> lookup_name(const kg::KnowledgeGraph& g, const std::string& name, bool relation_first) {
  auto rel = g.relation_by_label(name);
  auto item = g.item_by_label(name);
  if (relation_first && rel) return rel;
  if (item) return item;
  if (rel) return rel;
  std::optional<kg::Uri> found;
  for (const auto& [key, e] : g.entities()) {
    const auto& label = std::visit([](const auto& x) -> const std::string& { return x.label; }, e);
    if (text::identifier_of(label) != name) continue;
    auto uri = std::visit([](const auto& x) { return x.uri; }, e);
    if (found) throw Error("AmbiguousReference", "'" + name + "' names more than one entity");
    found = uri;
  }
  return found;
}

std::optional<kg::Object> resolve_query_term(const kg::KnowledgeGraph& g, const std::string& tok, bool predicate) {
  if (tok == "?") return std::nullopt;
  if (text::starts_with(tok, "kb://")) {
    auto uri = kg::Uri::parse(tok);
    if (!uri) throw UsageError("malformed URI '" + tok + "'");
    return *uri;
  }
  if (text::starts_with(tok, "lit:")) {
    auto lit = kg::Literal::decode(tok);
    if (!lit) throw UsageError("malformed literal '" + tok + "'");
    return *lit;
  }
  auto name = tok.front() == '"' ? text::unquote(tok).value_or(tok) : tok;
  auto uri = lookup_name(g, name, predicate);
  if (!uri) throw kg::GraphError("UnknownEntity", "no entity named '" + name + "'");
  return *uri;
}

}  // namespace

int Session::query(const std::string& pattern, const std::optional<std::string>& graph_file) {
  fs::path path = graph_file ? fs::path(*graph_file) : out_path("graph.kgt");
  if (!fs::exists(path)) throw Error("FileNotFound", "graph '" + path.string() + "' not found; run compile first");
  auto g = kg::parse(text::read_file(path));
  auto toks = tokenize_pattern(pattern);
  if (toks.size() != 3) throw UsageError("a pattern has three terms: \"S P O\", '?' for a wildcard");
  kg::Pattern p;
  auto as_uri = [&](const std::string& tok, bool predicate, const char* what) -> std::optional<kg::Uri> {
    auto o = resolve_query_term(g, tok, predicate);
    if (!o) return std::nullopt;
    if (!std::holds_alternative<kg::Uri>(*o)) throw UsageError(std::string(what) + " cannot be a literal");
    return std::get<kg::Uri>(*o);
  };
  p.subject = as_uri(toks[0], false, "the subject");
  p.predicate = as_uri(toks[1], true, "the predicate");
  p.object = resolve_query_term(g, toks[2], false);
  for (const auto& st : g.query(p)) out_ << "S\t" << kg::format_statement(st) << "\n";
  return kExitOk;
}

int Session::render() {
  auto path = out_path("graph.kgt");
  if (!fs::exists(path)) throw Error("FileNotFound", "graph '" + path.string() + "' not found; run compile first");
  auto graph = kg::parse(text::read_file(path));
  const auto& d = doc();
  auto index = semlayer::index_occurrences(d, graph);
  std::vector<std::string> warnings = index.warnings;

  std::optional<prompting::LlmClient> llm;
  if (cfg_.refine_tooltips) llm.emplace(client());
  std::map<kg::Uri, semlayer::TooltipSpec> tooltips;
  for (const auto& o : index.occurrences) {
    if (tooltips.count(o.entity)) continue;
    tooltips.emplace(o.entity, semlayer::generate_tooltip_content(o.entity, graph, &d, llm ? &*llm : nullptr,
                                                                  &warnings));
  }
  semlayer::RenderOptions options;
  if (cfg_.stylesheet) options.stylesheet = text::read_file(*cfg_.stylesheet);
  options.mathjax = cfg_.mathjax;
  auto rendered = semlayer::render(d, graph, index.occurrences, tooltips, options);
  warnings.insert(warnings.end(), rendered.warnings.begin(), rendered.warnings.end());
  write(out_path("doc.html"), rendered.html);

  std::ostringstream report;
  report << "occurrences: " << index.occurrences.size() << "\ntooltips: " << tooltips.size() << "\n";
  for (const auto& o : index.occurrences) {
    const auto* item = graph.find_item(o.entity);
    const auto& body = d.find(o.snippet)->body;
    report << "snippet " << o.snippet << " [" << o.begin << "," << o.end << ") " << o.entity.str() << " "
           << (item ? item->label : std::string()) << " <- " << body.substr(o.begin, o.end - o.begin) << "\n";
  }
  for (const auto& w : warnings) report << "warning: " << w << "\n";
  write(out_path("reports/render.txt"), report.str());
  for (const auto& w : warnings) err_ << "warning: " << w << "\n";
  out_ << "rendered " << out_path("doc.html").string() << ": " << index.occurrences.size() << " tooltip anchor(s)\n";
  return kExitOk;
}

int Session::pipeline() {
  if (int rc = extract(std::nullopt, std::nullopt)) return rc;
  auto input = default_fnl_input();
  if (failed_lint_gate(input)) {
    err_ << "pipeline stopped: " << input.filename().string() << " has errors\n";
    return kExitFailure;
  }
  if (int rc = compile(std::nullopt)) return rc;
  return render();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::shared_ptr<prompting::Transport> transport) {
  CLI::App app{"semforge: LaTeX to knowledge graph pipeline", "semforge"};
  app.require_subcommand(1);
  std::string config_file = "semforge.toml";
  std::string mode;
  std::string stylesheet;
  app.add_option("--config", config_file, "pipeline configuration (TOML)");
  app.add_option("--stylesheet", stylesheet, "CSS file replacing the built-in stylesheet")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "LLM mode: live, record or replay")->check(CLI::IsMember({"live", "record", "replay"}));

  std::function<int(Session&)> action;

  app.add_subcommand("split", "show snippets and validation warnings")->callback([&] {
    action = [](Session& s) { return s.split(); };
  });

  std::uint32_t prompt_snippet = 0;
  auto* prompt = app.add_subcommand("prompt", "print the extraction prompt for one snippet");
  prompt->add_option("--snippet", prompt_snippet, "snippet id")->required();
  prompt->callback([&] { action = [&](Session& s) { return s.prompt(prompt_snippet); }; });

  std::optional<std::uint32_t> from, to;
  auto* extract = app.add_subcommand("extract", "extract FNL for a range of snippets");
  extract->add_option("--from", from, "first snippet id");
  extract->add_option("--to", to, "last snippet id");
  extract->callback([&] { action = [&](Session& s) { return s.extract(from, to); }; });

  std::optional<std::string> lint_file;
  auto* lint = app.add_subcommand("lint", "check an FNL file");
  lint->add_option("file", lint_file, "FNL file (default: reviewed, else extracted)");
  lint->callback([&] { action = [&](Session& s) { return s.lint(lint_file); }; });

  std::string diff_old, diff_new;
  auto* diff = app.add_subcommand("diff", "intervention summary between two FNL files");
  diff->add_option("old", diff_old)->required();
  diff->add_option("new", diff_new)->required();
  diff->callback([&] { action = [&](Session& s) { return s.diff(diff_old, diff_new); }; });

  std::optional<std::string> compile_file;
  auto* compile = app.add_subcommand("compile", "compile FNL into the knowledge graph");
  compile->add_option("file", compile_file, "FNL file (default: reviewed, else extracted)");
  compile->callback([&] { action = [&](Session& s) { return s.compile(compile_file); }; });

  std::string pattern;
  std::optional<std::string> graph_file;
  auto* query = app.add_subcommand("query", "list statements matching \"S P O\"");
  query->add_option("pattern", pattern, "three terms; ? is a wildcard")->required();
  query->add_option("--graph", graph_file, "graph file (default: <out>/graph.kgt)");
  query->callback([&] { action = [&](Session& s) { return s.query(pattern, graph_file); }; });

  app.add_subcommand("render", "write the HTML document with tooltips")->callback([&] {
    action = [](Session& s) { return s.render(); };
  });
  app.add_subcommand("pipeline", "extract, lint, compile and render")->callback([&] {
    action = [](Session& s) { return s.pipeline(); };
  });

  std::vector<std::string> argv_store{"semforge"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto cfg = config::load_config(config_file);
    if (!mode.empty()) cfg.mode = *prompting::mode_from_string(mode);
    if (!stylesheet.empty()) cfg.stylesheet = fs::path(stylesheet);
    for (const auto& w : cfg.warnings) err << "warning: " << config_file << ": " << w << "\n";
    Session session(std::move(cfg), out, err, std::move(transport));
    return action(session);
  } catch (const config::ConfigError& e) {
    for (const auto& d : e.diagnostics()) err << "error: " << config_file << ": " << d.code << "(" << d.key << "): "
                                              << d.message << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return e.code() == "BudgetTooSmall" ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace semforge::cli
