#include "xlemb/cli.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <deque>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "xlemb/embedding_store.hpp"
#include "xlemb/error.hpp"
#include "xlemb/lexicon.hpp"
#include "xlemb/retrieval.hpp"
#include "xlemb/text.hpp"

#ifndef XLEMB_DATA_DIR
#define XLEMB_DATA_DIR "data"
#endif

namespace xlemb::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config fields

namespace {

[[noreturn]] void bad_value(const std::string& field, const std::string& value,
                            const std::string& expected) {
  throw Error(ErrorKind::Config, field + ": '" + value + "' is not " + expected);
}

template <typename T>
T parse_int(const std::string& field, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_value(field, value, "a non-negative integer");
  return out;
}

double parse_double(const std::string& field, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(field, value, "a number");
  return out;
}

bool parse_bool(const std::string& field, const std::string& value) {
  std::string v = to_lower_utf8(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(field, value, "a boolean");
}

std::string fmt_double(double v) {
  std::string s;
  append_exact(s, v);
  return s;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(const std::string& field, const std::string&)> set;
  std::function<std::string()> get;
};

Field bool_field(std::string s, std::string k, bool& ref) {
  return {std::move(s), std::move(k),
          [&ref](const std::string& f, const std::string& v) { ref = parse_bool(f, v); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

template <typename T>
Field int_field(std::string s, std::string k, T& ref) {
  return {std::move(s), std::move(k),
          [&ref](const std::string& f, const std::string& v) { ref = parse_int<T>(f, v); },
          [&ref] { return std::to_string(ref); }};
}

Field double_field(std::string s, std::string k, double& ref) {
  return {std::move(s), std::move(k),
          [&ref](const std::string& f, const std::string& v) { ref = parse_double(f, v); },
          [&ref] { return fmt_double(ref); }};
}

Field string_field(std::string s, std::string k, std::string& ref) {
  return {std::move(s), std::move(k), [&ref](const std::string&, const std::string& v) { ref = v; },
          [&ref] { return ref; }};
}

std::vector<Field> fields(RunConfig& c) {
  return {
      bool_field("tokenizer", "lowercase", c.tokenizer.lowercase),
      bool_field("tokenizer", "strip_urls", c.tokenizer.strip_urls),
      bool_field("tokenizer", "strip_mentions", c.tokenizer.strip_mentions),
      bool_field("tokenizer", "keep_hashtag_body", c.tokenizer.keep_hashtag_body),
      int_field("sgns", "dim", c.sgns.dim),
      int_field("sgns", "window", c.sgns.window),
      int_field("sgns", "negatives", c.sgns.negatives),
      int_field("sgns", "epochs", c.sgns.epochs),
      double_field("sgns", "learning_rate", c.sgns.learning_rate),
      int_field("sgns", "min_count", c.sgns.min_count),
      double_field("sgns", "subsample_t", c.sgns.subsample_t),
      int_field("sgns", "seed", c.sgns.rng_seed),
      int_field("sgns", "threads", c.sgns.threads),
      string_field("alignment", "pivot", c.alignment.pivot),
      double_field("alignment", "lambda", c.alignment.lambda),
      double_field("alignment", "kept_ratio", c.alignment.kept_ratio),
      bool_field("alignment", "normalize", c.alignment.normalize),
      double_field("alignment", "train_fraction", c.train_fraction),
      int_field("alignment", "split_seed", c.lexicon_split_seed),
      int_field("mining", "top_n", c.mining.top_n_antecedents),
      double_field("mining", "min_support", c.mining.min_support),
      double_field("mining", "min_confidence", c.mining.min_confidence),
      string_field("mining", "stopwords_dir", c.stopwords_dir),
      {"similarity", "variant",
       [&c](const std::string&, const std::string& v) { c.variant = parse_sim_variant(v); },
       [&c] { return std::string(to_string(c.variant)); }},
      int_field("similarity", "top_m", c.top_m),
      int_field("classify", "epochs", c.logreg.epochs),
      double_field("classify", "lr", c.logreg.learning_rate),
      double_field("classify", "l2", c.logreg.l2),
      int_field("classify", "seed", c.logreg.seed),
      double_field("classify", "init_jitter", c.logreg.init_jitter),
      double_field("classify", "threshold", c.threshold),
      int_field("classify", "split_seed", c.dataset_split_seed),
      string_field("paths", "output", c.output),
  };
}

// paths.embeddings.<lang>, paths.lexicon.<lang>, paths.dataset.<lang>
std::map<std::string, std::string>* path_map(RunConfig& c, const std::string& prefix) {
  if (prefix == "embeddings") return &c.embeddings;
  if (prefix == "lexicon") return &c.lexicons;
  if (prefix == "dataset") return &c.datasets;
  return nullptr;
}

}  // namespace

void set_field(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string name = section + "." + key;
  if (section == "paths") {
    auto dot = key.find('.');
    if (dot != std::string::npos) {
      auto* m = path_map(cfg, key.substr(0, dot));
      std::string lang = key.substr(dot + 1);
      if (m && !lang.empty()) {
        (*m)[lang] = value;
        return;
      }
    }
  }
  for (auto& f : fields(cfg)) {
    if (f.section == section && f.key == key) {
      f.set(name, value);
      return;
    }
  }
  throw Error(ErrorKind::Config, "unknown configuration key '" + name + "'");
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path.string());
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#' || view.front() == ';') continue;
    if (view.front() == '[') {
      if (view.back() != ']')
        throw Error(ErrorKind::Config, path.string() + ":" + std::to_string(line_no) +
                                           ": unterminated section header");
      section = std::string(trim(view.substr(1, view.size() - 2)));
      continue;
    }
    auto eq = view.find('=');
    if (eq == std::string_view::npos || section.empty())
      throw Error(ErrorKind::Config, path.string() + ":" + std::to_string(line_no) +
                                         ": expected 'key = value' inside a [section]");
    set_field(cfg, section, std::string(trim(view.substr(0, eq))),
              std::string(trim(view.substr(eq + 1))));
  }
}

void validate(const RunConfig& cfg) {
  validate(cfg.sgns);
  validate(cfg.alignment);
  validate(cfg.mining);
  validate(cfg.logreg);
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw Error(ErrorKind::Config, "alignment.train_fraction must lie in (0, 1)");
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0))
    throw Error(ErrorKind::Config, "classify.threshold must lie in (0, 1)");
  if (cfg.top_m < 1) throw Error(ErrorKind::Config, "similarity.top_m must be >= 1");
}

json snapshot(const RunConfig& cfg) {
  RunConfig copy = cfg;
  json out = json::object();
  for (auto& f : fields(copy)) out[f.section][f.key] = f.get();
  for (const auto& [prefix, m] :
       {std::pair{"embeddings", &copy.embeddings}, {"lexicon", &copy.lexicons},
        {"dataset", &copy.datasets}})
    for (const auto& [lang, p] : *m) out["paths"][std::string(prefix) + "." + lang] = p;
  return out;
}

// ---------------------------------------------------------------------------
// Helpers shared by subcommands

namespace {

std::pair<std::string, std::string> split_assignment(const std::string& arg, const std::string& flag) {
  auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
    throw Error(ErrorKind::Config, flag + " expects LANG=PATH, got '" + arg + "'");
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Records what a run consumed and produced, enough to repeat it.
class Manifest {
 public:
  Manifest(std::string subcommand, const RunConfig& cfg, std::vector<std::string> argv)
      : subcommand_(std::move(subcommand)), config_(snapshot(cfg)), argv_(std::move(argv)) {}

  void input(const fs::path& p) {
    if (fs::is_directory(p)) {
      for (const auto& entry : std::set<fs::path>(fs::directory_iterator(p), {}))
        if (fs::is_regular_file(entry) && entry.filename() != "manifest.json") input(entry);
      return;
    }
    std::string bytes = read_file(p);
    inputs_.push_back({{"path", p.string()},
                       {"bytes", bytes.size()},
                       {"fnv1a64", hex64(fnv1a64(bytes))}});
  }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

  void write(const fs::path& path) const {
    json j;
    j["tool"] = "xlemb";
    j["version"] = kVersion;
    j["subcommand"] = subcommand_;
    j["argv"] = argv_;
    j["config"] = config_;
    j["seeds"] = seeds_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["created_at"] = utc_timestamp();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
  }

 private:
  std::string subcommand_;
  json config_;
  std::vector<std::string> argv_;
  json inputs_ = json::array();
  json outputs_ = json::array();
  json seeds_ = json::object();
};

fs::path manifest_path_for_file(const fs::path& output) {
  return fs::path(output.string() + ".manifest.json");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

std::ofstream open_output(const fs::path& p) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
  return out;
}

const std::string& require(const std::string& value, const std::string& what) {
  if (value.empty()) throw Error(ErrorKind::Config, what + " is required");
  return value;
}

void write_jsonl(std::ostream& out, const json& record) { out << record.dump() << '\n'; }

SpaceSet load_spaces(const std::map<std::string, std::string>& paths, std::ostream& err) {
  SpaceSet spaces;
  for (const auto& [lang, path] : paths) {
    LoadReport report;
    spaces.emplace(lang, load_embeddings(path, lang, &report));
    if (report.duplicate_rows)
      err << "warning: " << path << ": " << report.duplicate_rows
          << " duplicate rows ignored (first occurrence kept)\n";
  }
  return spaces;
}

std::map<std::string, std::string> read_embedding_index(const fs::path& model_dir) {
  std::map<std::string, std::string> out;
  std::ifstream in(model_dir / "embeddings.tsv");
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    auto cells = split(line, '\t');
    if (cells.size() == 2) out.emplace(std::string(cells[0]), std::string(cells[1]));
  }
  return out;
}

// Embedding paths recorded by `align`, with explicit ones taking precedence.
std::map<std::string, std::string> model_embeddings(const fs::path& model_dir, const RunConfig& cfg) {
  auto paths = read_embedding_index(model_dir);
  for (const auto& [lang, p] : cfg.embeddings) paths[lang] = p;
  return paths;
}

Label parse_class(const std::string& s) {
  if (s == "hate" || s == "1") return Label::Hate;
  if (s == "non-hate" || s == "0") return Label::NonHate;
  throw Error(ErrorKind::Config, "--class must be 'hate' or 'non-hate', got '" + s + "'");
}

std::set<std::string> stopwords_for(const RunConfig& cfg, const std::string& lang) {
  if (cfg.stopwords_dir == "none") return {};
  fs::path dir = cfg.stopwords_dir.empty() ? fs::path(XLEMB_DATA_DIR) / "stopwords"
                                           : fs::path(cfg.stopwords_dir);
  return load_stopwords(dir / (lang + ".txt"));
}

std::map<std::string, LabeledDataset> load_datasets(const RunConfig& cfg, Manifest& manifest) {
  std::map<std::string, LabeledDataset> out;
  for (const auto& [lang, path] : cfg.datasets) {
    out.emplace(lang, load_labeled_dataset(path, lang, cfg.tokenizer));
    manifest.input(path);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Context {
  RunConfig cfg;
  std::vector<std::string> argv;
  std::ostream& out;
  std::ostream& err;
};

struct FilterArgs {
  std::string input, seeds;
};

void cmd_filter_corpus(Context& ctx, const FilterArgs& a) {
  const std::string& output = require(ctx.cfg.output, "--output");
  std::size_t skipped = 0;
  auto seeds = load_seed_terms(require(a.seeds, "--seeds"), ctx.cfg.tokenizer, &skipped);
  if (skipped) ctx.err << "warning: " << skipped << " multi-word seed terms skipped\n";
  std::ifstream in(require(a.input, "--input"));
  if (!in) throw Error(ErrorKind::Io, "cannot open " + a.input);
  auto out = open_output(output);
  std::size_t kept = filter_corpus(in, out, seeds, ctx.cfg.tokenizer);
  out.close();
  Manifest m("filter-corpus", ctx.cfg, ctx.argv);
  m.input(a.input);
  m.input(a.seeds);
  m.output(output);
  m.write(manifest_path_for_file(output));
  ctx.err << "kept " << kept << " lines\n";
}

struct TrainArgs {
  std::string corpus, lang;
};

void cmd_train_embeddings(Context& ctx, const TrainArgs& a) {
  const std::string& output = require(ctx.cfg.output, "--output");
  auto corpus = read_corpus(require(a.corpus, "--corpus"), ctx.cfg.tokenizer);
  EmbeddingSpace space = train_sgns(corpus, ctx.cfg.sgns, require(a.lang, "--lang"));
  ensure_parent(output);
  save_embeddings(space, output);
  Manifest m("train-embeddings", ctx.cfg, ctx.argv);
  m.input(a.corpus);
  m.output(output);
  m.seed("sgns.seed", ctx.cfg.sgns.rng_seed);
  m.write(manifest_path_for_file(output));
  ctx.err << "trained " << space.size() << " x " << space.dim() << " vectors for " << a.lang << '\n';
}

void cmd_align(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path dir = require(cfg.output, "--output");
  if (!cfg.embeddings.count(cfg.alignment.pivot))
    throw Error(ErrorKind::Config, "paths.embeddings." + cfg.alignment.pivot +
                                       " (the pivot space) is required");
  Manifest m("align", cfg, ctx.argv);
  SpaceSet spaces = load_spaces(cfg.embeddings, ctx.err);
  for (const auto& [lang, p] : cfg.embeddings) m.input(p);

  std::vector<BilingualLexicon> train_lexicons;
  std::vector<std::pair<BilingualLexicon, BilingualLexicon>> splits;
  json summary = json::array();
  for (const auto& [lang, path] : cfg.lexicons) {
    if (!spaces.count(lang))
      throw Error(ErrorKind::Config, "paths.embeddings." + lang + " is required for its lexicon");
    LexiconLoadReport load_report;
    BilingualLexicon lex = load_lexicon(path, cfg.alignment.pivot, lang, &load_report);
    m.input(path);
    std::size_t dropped = 0;
    BilingualLexicon usable = [&] {
      try {
        return restrict_to_vocab(lex, spaces.at(cfg.alignment.pivot), spaces.at(lang), &dropped);
      } catch (const Error& e) {
        throw Error(e.kind(), "[" + lang + "] " + e.detail());
      }
    }();
    LexiconSplit split = split_lexicon(usable, cfg.train_fraction, cfg.lexicon_split_seed);
    json s;
    s["lang"] = lang;
    s["pairs"] = lex.size();
    s["dropped_oov"] = dropped;
    s["dropped_multiword"] = load_report.multiword_dropped;
    s["train_pairs"] = split.train.size();
    s["validation_pairs"] = split.validation.size();
    summary.push_back(s);
    train_lexicons.push_back(split.train);
    splits.emplace_back(std::move(split.train), std::move(split.validation));
  }
  for (const auto& [lang, space] : spaces)
    if (lang != cfg.alignment.pivot && !cfg.lexicons.count(lang))
      throw Error(ErrorKind::Config, "paths.lexicon." + lang + " is required");

  AlignmentModel model = fit_hub_alignment(spaces, train_lexicons, cfg.alignment);
  save_alignment(model, dir);
  {
    auto index = open_output(dir / "embeddings.tsv");
    for (const auto& [lang, p] : cfg.embeddings)
      index << lang << '\t' << fs::absolute(p).lexically_normal().string() << '\n';
  }
  for (const auto& [train, validation] : splits) {
    save_lexicon(train, dir / ("lexicon.train." + train.tgt_lang() + ".tsv"));
    save_lexicon(validation, dir / ("lexicon.validation." + validation.tgt_lang() + ".tsv"));
  }
  for (auto& s : summary) {
    const LanguageMap& lm = model.map_for(s["lang"].get<std::string>());
    s["kept_dims"] = lm.correlations.size();
    s["top_correlation"] = lm.correlations.size() ? lm.correlations(0) : 0.0;
    write_jsonl(ctx.out, s);
  }
  m.seed("alignment.split_seed", cfg.lexicon_split_seed);
  m.output(dir);
  m.write(dir / "manifest.json");
}

struct ModelArgs {
  std::string model;
};

struct BliArgs {
  std::string lexicon, src, tgt, lang;
  std::size_t k = 1;
};

void cmd_bli(Context& ctx, const ModelArgs& ma, const BliArgs& a) {
  const fs::path dir = require(ma.model, "--model");
  AlignmentModel model = load_alignment(dir);
  SpaceSet spaces = load_spaces(model_embeddings(dir, ctx.cfg), ctx.err);
  Manifest m("bli", ctx.cfg, ctx.argv);
  m.input(dir);

  std::vector<BilingualLexicon> lexicons;
  if (!a.lexicon.empty()) {
    std::string src = a.src.empty() ? model.pivot() : a.src;
    lexicons.push_back(load_lexicon(a.lexicon, src, require(a.tgt, "--tgt")));
    m.input(a.lexicon);
  } else {
    for (const auto& lang : model.languages()) {
      if (lang == model.pivot() || (!a.lang.empty() && lang != a.lang)) continue;
      fs::path p = dir / ("lexicon.validation." + lang + ".tsv");
      lexicons.push_back(load_lexicon(p, model.pivot(), lang));
    }
  }
  if (lexicons.empty()) throw Error(ErrorKind::Config, "no validation lexicon selected");

  std::ofstream file;
  if (!ctx.cfg.output.empty()) file = open_output(ctx.cfg.output);
  std::ostream& out = ctx.cfg.output.empty() ? ctx.out : file;
  for (const auto& lex : lexicons) {
    BliResult r = bli_precision_at_k(model, spaces, lex, a.k);
    for (const auto& w : r.per_word) {
      json rec = to_json(w.neighbors, lex.tgt_lang());
      rec["gold"] = w.gold;
      rec["hit"] = w.hit;
      write_jsonl(out, rec);
    }
    write_jsonl(out, bli_summary_json(r, lex));
    ctx.err << lex.src_lang() << "->" << lex.tgt_lang() << " P@" << a.k << " = " << r.precision
            << " (" << r.evaluated << " words, " << r.excluded << " excluded)\n";
  }
  if (!ctx.cfg.output.empty()) {
    file.close();
    m.output(ctx.cfg.output);
    m.write(manifest_path_for_file(ctx.cfg.output));
  }
}

struct KnnArgs {
  std::string word, lang, target;
  std::size_t k = 10;
};

void cmd_knn(Context& ctx, const ModelArgs& ma, const KnnArgs& a) {
  const fs::path dir = require(ma.model, "--model");
  AlignmentModel model = load_alignment(dir);
  SpaceSet spaces = load_spaces(model_embeddings(dir, ctx.cfg), ctx.err);
  NeighborList list = knn(model, spaces, require(a.word, "--word"), require(a.lang, "--lang"),
                          require(a.target, "--target"), a.k);
  std::ofstream file;
  if (!ctx.cfg.output.empty()) file = open_output(ctx.cfg.output);
  std::ostream& out = ctx.cfg.output.empty() ? ctx.out : file;
  std::size_t rank = 0;
  for (const auto& n : list.neighbors) {
    json rec;
    rec["query"] = list.query_word;
    rec["lang"] = list.query_lang;
    rec["target"] = a.target;
    rec["rank"] = ++rank;
    rec["word"] = n.word;
    rec["score"] = n.score;
    rec["truncated"] = list.truncated;
    write_jsonl(out, rec);
  }
  if (list.truncated)
    ctx.err << "warning: k=" << a.k << " exceeds the " << list.neighbors.size()
            << " candidate words\n";
  if (!ctx.cfg.output.empty()) {
    file.close();
    Manifest m("knn", ctx.cfg, ctx.argv);
    m.input(dir);
    m.output(ctx.cfg.output);
    m.write(manifest_path_for_file(ctx.cfg.output));
  }
}

struct MineArgs {
  std::string dataset, lang, cls = "hate";
};

void cmd_mine_rules(Context& ctx, const MineArgs& a) {
  LabeledDataset ds =
      load_labeled_dataset(require(a.dataset, "--dataset"), require(a.lang, "--lang"), ctx.cfg.tokenizer);
  std::vector<Tokens> docs = a.cls == "all" ? ds.all_tokens() : ds.partition(parse_class(a.cls));
  MiningConfig mining = ctx.cfg.mining;
  mining.stopwords = stopwords_for(ctx.cfg, a.lang);
  auto rules = mine_rules(docs, mining);

  std::ofstream file;
  if (!ctx.cfg.output.empty()) file = open_output(ctx.cfg.output);
  std::ostream& out = ctx.cfg.output.empty() ? ctx.out : file;
  for (const auto& r : rules) {
    json rec;
    rec["lang"] = a.lang;
    rec["class"] = a.cls;
    rec["antecedent"] = r.antecedent;
    rec["consequent"] = r.consequent;
    rec["support"] = r.support;
    rec["confidence"] = r.confidence;
    write_jsonl(out, rec);
  }
  ctx.err << ds.language << ": " << ds.count(Label::Hate) << " hate, " << ds.count(Label::NonHate)
          << " non-hate, " << ds.dropped_empty << " empty dropped; " << rules.size() << " rules\n";
  if (!ctx.cfg.output.empty()) {
    file.close();
    Manifest m("mine-rules", ctx.cfg, ctx.argv);
    m.input(a.dataset);
    m.output(ctx.cfg.output);
    m.write(manifest_path_for_file(ctx.cfg.output));
  }
}

struct ContextSimArgs {
  std::vector<std::string> seeds;
  std::string seeds_file, cls = "hate", tsv;
};

std::vector<SeedTerm> parse_seeds(const ContextSimArgs& a, const TokenizerConfig& tok) {
  std::vector<SeedTerm> out;
  auto add = [&](const std::string& word, const std::string& lang) {
    Tokens t = tokenize(word, tok);
    if (t.size() != 1) throw Error(ErrorKind::Config, "seed '" + word + "' is not a single token");
    out.push_back({t.front(), lang});
  };
  for (const auto& s : a.seeds) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
      throw Error(ErrorKind::Config, "--seed expects WORD:LANG, got '" + s + "'");
    add(s.substr(0, colon), s.substr(colon + 1));
  }
  if (!a.seeds_file.empty()) {
    std::ifstream in(a.seeds_file);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + a.seeds_file);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty() || trim(line).front() == '#') continue;
      auto cells = split(line, '\t');
      if (cells.size() != 2)
        throw Error(ErrorKind::Format, a.seeds_file + ": expected 'word<TAB>lang' rows");
      add(std::string(trim(cells[0])), std::string(trim(cells[1])));
    }
  }
  return out;
}

std::string flatten_cell(const json& terms) {
  std::string cell;
  for (const auto& t : terms) {
    if (!cell.empty()) cell += ", ";
    cell += t["word"].get<std::string>() + " (";
    append_fixed(cell, t["score"].get<double>(), 2);
    cell += ")";
  }
  return cell;
}

void cmd_context_sim(Context& ctx, const ModelArgs& ma, const ContextSimArgs& a) {
  const fs::path dir = require(ma.model, "--model");
  AlignmentModel model = load_alignment(dir);
  SpaceSet spaces = load_spaces(model_embeddings(dir, ctx.cfg), ctx.err);
  Manifest m("context-sim", ctx.cfg, ctx.argv);
  m.input(dir);
  auto datasets = load_datasets(ctx.cfg, m);

  ReportConfig rc;
  rc.mining = ctx.cfg.mining;
  for (const auto& [lang, ds] : datasets) rc.stopwords[lang] = stopwords_for(ctx.cfg, lang);
  rc.top_m = ctx.cfg.top_m;
  rc.variant = ctx.cfg.variant;
  rc.class_filter = parse_class(a.cls);
  auto records = cross_lingual_report(parse_seeds(a, ctx.cfg.tokenizer), datasets, model, spaces, rc);

  std::ofstream file;
  if (!ctx.cfg.output.empty()) file = open_output(ctx.cfg.output);
  std::ostream& out = ctx.cfg.output.empty() ? ctx.out : file;
  for (const auto& r : records) write_jsonl(out, to_json(r));
  if (!a.tsv.empty()) {
    auto tsv = open_output(a.tsv);
    tsv << "seed\tsource_lang\ttarget_lang\tclass\tvariant\tterms\n";
    for (const auto& r : records) {
      json j = to_json(r);
      tsv << r.seed.word << '\t' << r.seed.language << '\t' << r.target_lang << '\t'
          << j["class"].get<std::string>() << '\t' << j["variant"].get<std::string>() << '\t'
          << (r.has_context ? flatten_cell(j["terms"]) : std::string("no context")) << '\n';
    }
  }
  if (!ctx.cfg.output.empty()) {
    file.close();
    m.output(ctx.cfg.output);
    m.write(manifest_path_for_file(ctx.cfg.output));
  }
}

struct ClassifyArgs {
  std::string train, test;
  bool monolingual = false;
};

void cmd_classify(Context& ctx, const ModelArgs& ma, const ClassifyArgs& a) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path dir = require(ma.model, "--model");
  const fs::path out_dir = require(cfg.output, "--output");
  AlignmentModel model = load_alignment(dir);
  SpaceSet spaces = load_spaces(model_embeddings(dir, cfg), ctx.err);
  Manifest m("classify", cfg, ctx.argv);
  m.input(dir);
  auto datasets = load_datasets(cfg, m);
  if (datasets.empty()) throw Error(ErrorKind::Config, "at least one --dataset LANG=PATH is required");

  std::map<std::string, DatasetSplit> splits;
  for (const auto& [lang, ds] : datasets) splits.emplace(lang, split_dataset(ds, cfg.dataset_split_seed));

  std::vector<std::pair<std::string, std::string>> directions;
  if (!a.train.empty() || !a.test.empty()) {
    directions.emplace_back(require(a.train, "--train"), require(a.test, "--test"));
  } else {
    for (const auto& [src, s1] : datasets)
      for (const auto& [tgt, s2] : datasets)
        if (src != tgt || a.monolingual) directions.emplace_back(src, tgt);
  }

  ZeroShotConfig zs;
  zs.logreg = cfg.logreg;
  zs.threshold = cfg.threshold;
  zs.monolingual = a.monolingual;
  ensure_dir(out_dir);
  auto jsonl = open_output(out_dir / "metrics.jsonl");
  auto tsv = open_output(out_dir / "metrics.tsv");
  tsv << "train\ttest\tprecision\trecall\tf1\taccuracy\ttp\tfp\tfn\ttn\n";
  for (const auto& [src, tgt] : directions) {
    if (!splits.count(src) || !splits.count(tgt))
      throw Error(ErrorKind::Config, "no dataset loaded for " + (splits.count(src) ? tgt : src));
    Metrics met = zero_shot_eval(splits.at(src).train, splits.at(tgt).test, model, spaces, zs);
    json rec;
    rec["train"] = src;
    rec["test"] = tgt;
    rec["mode"] = src == tgt ? "monolingual" : "zero-shot";
    rec["train_docs"] = splits.at(src).train.docs.size();
    rec["test_docs"] = splits.at(tgt).test.docs.size();
    rec["metrics"] = to_json(met);
    write_jsonl(jsonl, rec);
    tsv << to_tsv_row(met, src, tgt) << '\n';
    ctx.out << src << " -> " << tgt << ": F1 = " << met.f1 << '\n';
  }
  jsonl.close();
  tsv.close();
  m.seed("classify.split_seed", cfg.dataset_split_seed);
  m.seed("classify.seed", cfg.logreg.seed);
  m.output(out_dir / "metrics.jsonl");
  m.output(out_dir / "metrics.tsv");
  m.write(out_dir / "manifest.json");
}

struct ReportArgs {
  std::string input;
};

// Rows are queries or seeds, columns are target languages.
void cmd_report(Context& ctx, const ReportArgs& a) {
  std::ifstream in(require(a.input, "--input"));
  if (!in) throw Error(ErrorKind::Io, "cannot open " + a.input);
  std::vector<std::string> row_order;
  std::set<std::string> columns;
  std::map<std::string, std::map<std::string, json>> cells;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw format_error(a.input, line_no, "not a JSON object");
    }
    std::string row, col;
    json term;
    if (rec.contains("seed") && rec.contains("target_lang")) {
      row = rec["seed"].get<std::string>() + "\t" + rec["source_lang"].get<std::string>() + "\t" +
            rec["class"].get<std::string>();
      col = rec["target_lang"].get<std::string>();
      auto& cell = cells[row][col];
      cell = rec["status"] == "ok" ? json(flatten_cell(rec["terms"])) : json("no context");
    } else if (rec.contains("query") && rec.contains("rank")) {
      row = rec["query"].get<std::string>() + "\t" + rec["lang"].get<std::string>() + "\t-";
      col = rec["target"].get<std::string>();
      auto& cell = cells[row][col];
      std::string s = cell.is_string() ? cell.get<std::string>() : std::string();
      json one = json::array({{{"word", rec["word"]}, {"score", rec["score"]}}});
      s += (s.empty() ? "" : ", ") + flatten_cell(one);
      cell = s;
    } else {
      continue;
    }
    if (std::find(row_order.begin(), row_order.end(), row) == row_order.end()) row_order.push_back(row);
    columns.insert(col);
  }

  std::ofstream file;
  if (!ctx.cfg.output.empty()) file = open_output(ctx.cfg.output);
  std::ostream& out = ctx.cfg.output.empty() ? ctx.out : file;
  out << "term\tlang\tclass";
  for (const auto& c : columns) out << '\t' << c;
  out << '\n';
  for (const auto& row : row_order) {
    out << row;
    for (const auto& c : columns) {
      auto it = cells[row].find(c);
      out << '\t' << (it == cells[row].end() ? std::string() : it->second.get<std::string>());
    }
    out << '\n';
  }
}

int exit_code(ErrorKind kind) {
  return kind == ErrorKind::Config || kind == ErrorKind::Protocol ? 1 : 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Domain-specific multilingual word embeddings: train, align, evaluate."};
  app.name("xlemb");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "Sectioned key = value configuration file");
  app.add_option("--set", sets, "Override one field, e.g. --set sgns.dim=50")->allow_extra_args(false);

  // Flag -> config key, applied after the file and --set.
  std::deque<std::string> storage;
  std::vector<std::tuple<CLI::Option*, std::string, std::string, std::string*>> bound;
  auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& section,
                  const std::string& key, const std::string& help) {
    std::string* slot = &storage.emplace_back();
    bound.emplace_back(sub->add_option(flag, *slot, help), section, key, slot);
  };
  std::vector<std::string> embeddings_args, lexicon_args, dataset_args;
  bool no_normalize = false;

  auto* filter = app.add_subcommand("filter-corpus", "Keep corpus lines containing a seed term");
  FilterArgs filter_args;
  filter->add_option("--input", filter_args.input, "Corpus, one document per line")->required();
  filter->add_option("--seeds", filter_args.seeds, "Seed terms, one per line")->required();
  bind(filter, "--output", "paths", "output", "Filtered corpus path");

  auto* train = app.add_subcommand("train-embeddings", "Train skip-gram embeddings");
  TrainArgs train_args;
  train->add_option("--corpus", train_args.corpus, "Corpus, one sentence per line")->required();
  train->add_option("--lang", train_args.lang, "Language code")->required();
  bind(train, "--output", "paths", "output", "word2vec text output path");
  bind(train, "--dim", "sgns", "dim", "Vector dimension");
  bind(train, "--window", "sgns", "window", "Context radius");
  bind(train, "--negatives", "sgns", "negatives", "Negative samples per positive");
  bind(train, "--epochs", "sgns", "epochs", "Passes over the corpus");
  bind(train, "--lr", "sgns", "learning_rate", "Initial learning rate");
  bind(train, "--min-count", "sgns", "min_count", "Minimum word frequency");
  bind(train, "--subsample", "sgns", "subsample_t", "Subsampling threshold (0 disables)");
  bind(train, "--seed", "sgns", "seed", "RNG seed");
  bind(train, "--threads", "sgns", "threads", "Worker threads (1 = deterministic)");

  auto* align = app.add_subcommand("align", "Fit the hub CCA alignment");
  align->add_option("--embeddings", embeddings_args, "LANG=PATH, repeatable");
  align->add_option("--lexicon", lexicon_args, "LANG=PATH lexicon from the pivot to LANG, repeatable");
  bind(align, "--pivot", "alignment", "pivot", "Pivot language");
  bind(align, "--lambda", "alignment", "lambda", "Covariance regularization");
  bind(align, "--kept-ratio", "alignment", "kept_ratio", "Fraction of canonical directions kept");
  bind(align, "--train-fraction", "alignment", "train_fraction", "Lexicon share used for fitting");
  bind(align, "--split-seed", "alignment", "split_seed", "Lexicon split seed");
  align->add_flag("--no-normalize", no_normalize, "Skip length normalization");
  bind(align, "--output", "paths", "output", "Model directory");

  ModelArgs model_args;
  auto* bli = app.add_subcommand("bli", "Bilingual lexicon induction precision@k");
  BliArgs bli_args;
  bli->add_option("--model", model_args.model, "Model directory")->required();
  bli->add_option("--embeddings", embeddings_args, "LANG=PATH overrides, repeatable");
  bli->add_option("--lexicon", bli_args.lexicon, "Validation lexicon (default: held-out split)");
  bli->add_option("--src", bli_args.src, "Source language of --lexicon (default: pivot)");
  bli->add_option("--tgt", bli_args.tgt, "Target language of --lexicon");
  bli->add_option("--lang", bli_args.lang, "Only evaluate this held-out language");
  bli->add_option("--k", bli_args.k, "Neighbors considered")->check(CLI::PositiveNumber);
  bind(bli, "--output", "paths", "output", "JSON-lines output (default stdout)");

  auto* knn_cmd = app.add_subcommand("knn", "Nearest neighbors in another language");
  KnnArgs knn_args;
  knn_cmd->add_option("--model", model_args.model, "Model directory")->required();
  knn_cmd->add_option("--embeddings", embeddings_args, "LANG=PATH overrides, repeatable");
  knn_cmd->add_option("--word", knn_args.word, "Query word")->required();
  knn_cmd->add_option("--lang", knn_args.lang, "Query language")->required();
  knn_cmd->add_option("--target", knn_args.target, "Target language")->required();
  knn_cmd->add_option("--k", knn_args.k, "Neighbors returned")->check(CLI::PositiveNumber);
  bind(knn_cmd, "--output", "paths", "output", "JSON-lines output (default stdout)");

  auto* mine = app.add_subcommand("mine-rules", "Association rules {x} => {u} over a dataset");
  MineArgs mine_args;
  mine->add_option("--dataset", mine_args.dataset, "label<TAB>text dataset")->required();
  mine->add_option("--lang", mine_args.lang, "Dataset language")->required();
  mine->add_option("--class", mine_args.cls, "hate, non-hate or all");
  bind(mine, "--top-n", "mining", "top_n", "Number of antecedents");
  bind(mine, "--min-support", "mining", "min_support", "Support lower bound");
  bind(mine, "--min-confidence", "mining", "min_confidence", "Confidence lower bound");
  bind(mine, "--stopwords-dir", "mining", "stopwords_dir", "Directory of <lang>.txt lists, or 'none'");
  bind(mine, "--output", "paths", "output", "JSON-lines output (default stdout)");

  auto* csim = app.add_subcommand("context-sim", "Cross-lingual context similarity report");
  ContextSimArgs csim_args;
  csim->add_option("--model", model_args.model, "Model directory")->required();
  csim->add_option("--embeddings", embeddings_args, "LANG=PATH overrides, repeatable");
  csim->add_option("--dataset", dataset_args, "LANG=PATH labeled dataset, repeatable");
  csim->add_option("--seed", csim_args.seeds, "WORD:LANG seed term, repeatable");
  csim->add_option("--seeds-file", csim_args.seeds_file, "word<TAB>lang rows");
  csim->add_option("--class", csim_args.cls, "hate or non-hate");
  csim->add_option("--tsv", csim_args.tsv, "Also write a flattened TSV");
  bind(csim, "--top-m", "similarity", "top_m", "Terms listed per seed and language");
  bind(csim, "--variant", "similarity", "variant", "literal or bounded");
  bind(csim, "--top-n", "mining", "top_n", "Candidate terms per target language");
  bind(csim, "--min-support", "mining", "min_support", "Support lower bound");
  bind(csim, "--min-confidence", "mining", "min_confidence", "Confidence lower bound");
  bind(csim, "--stopwords-dir", "mining", "stopwords_dir", "Directory of <lang>.txt lists, or 'none'");
  bind(csim, "--output", "paths", "output", "JSON-lines output (default stdout)");

  auto* cls = app.add_subcommand("classify", "Zero-shot cross-lingual classification");
  ClassifyArgs cls_args;
  cls->add_option("--model", model_args.model, "Model directory")->required();
  cls->add_option("--embeddings", embeddings_args, "LANG=PATH overrides, repeatable");
  cls->add_option("--dataset", dataset_args, "LANG=PATH labeled dataset, repeatable");
  cls->add_option("--train", cls_args.train, "Training language (default: all pairs)");
  cls->add_option("--test", cls_args.test, "Test language");
  cls->add_flag("--monolingual", cls_args.monolingual, "Allow same-language train and test");
  bind(cls, "--epochs", "classify", "epochs", "Gradient descent epochs");
  bind(cls, "--lr", "classify", "lr", "Learning rate");
  bind(cls, "--l2", "classify", "l2", "L2 penalty");
  bind(cls, "--threshold", "classify", "threshold", "Decision threshold");
  bind(cls, "--split-seed", "classify", "split_seed", "70/10/20 split seed");
  bind(cls, "--output", "paths", "output", "Output directory");

  auto* report = app.add_subcommand("report", "Flatten knn or context-sim JSON lines into a TSV table");
  ReportArgs report_args;
  report->add_option("--input", report_args.input, "JSON-lines input")->required();
  bind(report, "--output", "paths", "output", "TSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }

  Context ctx{RunConfig{}, std::vector<std::string>(argv + 1, argv + argc), out, err};
  try {
    RunConfig& cfg = ctx.cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& s : sets) {
      auto eq = s.find('=');
      auto dot = s.find('.');
      if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw Error(ErrorKind::Config, "--set expects SECTION.KEY=VALUE, got '" + s + "'");
      set_field(cfg, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
    }
    for (const auto& [opt, section, key, slot] : bound)
      if (opt->count() > 0) set_field(cfg, section, key, *slot);
    for (const auto& e : embeddings_args) {
      auto [lang, path] = split_assignment(e, "--embeddings");
      cfg.embeddings[lang] = path;
    }
    for (const auto& e : lexicon_args) {
      auto [lang, path] = split_assignment(e, "--lexicon");
      cfg.lexicons[lang] = path;
    }
    for (const auto& e : dataset_args) {
      auto [lang, path] = split_assignment(e, "--dataset");
      cfg.datasets[lang] = path;
    }
    if (no_normalize) cfg.alignment.normalize = false;
    validate(cfg);

    if (filter->parsed()) cmd_filter_corpus(ctx, filter_args);
    else if (train->parsed()) cmd_train_embeddings(ctx, train_args);
    else if (align->parsed()) cmd_align(ctx);
    else if (bli->parsed()) cmd_bli(ctx, model_args, bli_args);
    else if (knn_cmd->parsed()) cmd_knn(ctx, model_args, knn_args);
    else if (mine->parsed()) cmd_mine_rules(ctx, mine_args);
    else if (csim->parsed()) cmd_context_sim(ctx, model_args, csim_args);
    else if (cls->parsed()) cmd_classify(ctx, model_args, cls_args);
    else if (report->parsed()) cmd_report(ctx, report_args);
  } catch (const Error& e) {
    err << "xlemb: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "xlemb: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace xlemb::cli
