#include "xlemb/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>
#include <unordered_map>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "xlemb/error.hpp"
#include "xlemb/text.hpp"

namespace xlemb {

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_word_char(UChar32 c) {
  return u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

void append_runs(std::string_view chunk, bool lowercase, Tokens& out) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(chunk.data());
  const int32_t length = static_cast<int32_t>(chunk.size());
  int32_t i = 0;
  int32_t run_start = -1;
  auto flush = [&](int32_t end) {
    if (run_start < 0) return;
    std::string_view run = chunk.substr(run_start, end - run_start);
    out.push_back(lowercase ? to_lower_utf8(run) : std::string(run));
    run_start = -1;
  };
  while (i < length) {
    int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c >= 0 && is_word_char(c)) {
      if (run_start < 0) run_start = start;
    } else {
      flush(start);
    }
  }
  flush(length);
}

}  // namespace

Tokens tokenize(std::string_view text, const TokenizerConfig& cfg) {
  Tokens out;
  for (std::string_view chunk : split_whitespace(text)) {
    if (cfg.strip_urls && (starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") ||
                           starts_with_ci(chunk, "www.")))
      continue;
    if (chunk.front() == '@' && cfg.strip_mentions) continue;
    if (chunk.front() == '#' && !cfg.keep_hashtag_body) continue;
    append_runs(chunk, cfg.lowercase, out);
  }
  return out;
}

std::set<std::string> load_seed_terms(const std::filesystem::path& path, const TokenizerConfig& cfg,
                                      std::size_t* skipped_multiword) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::set<std::string> seeds;
  std::size_t skipped = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view term = trim(line);
    if (term.empty() || term.front() == '#') continue;
    Tokens toks = tokenize(term, cfg);
    if (toks.size() == 1)
      seeds.insert(std::move(toks.front()));
    else if (toks.size() > 1)
      ++skipped;
  }
  if (skipped_multiword) *skipped_multiword = skipped;
  return seeds;
}

namespace {

bool matches_seed(std::string_view line, const std::set<std::string>& seeds,
                  const TokenizerConfig& cfg) {
  for (const auto& tok : tokenize(line, cfg))
    if (seeds.count(tok)) return true;
  return false;
}

void require_seeds(const std::set<std::string>& seeds) {
  if (seeds.empty()) throw Error(ErrorKind::Config, "seed term set is empty");
}

}  // namespace

std::vector<std::string> filter_corpus(const std::vector<std::string>& lines,
                                       const std::set<std::string>& seeds,
                                       const TokenizerConfig& cfg) {
  require_seeds(seeds);
  std::vector<std::string> out;
  for (const auto& line : lines)
    if (matches_seed(line, seeds, cfg)) out.push_back(line);
  return out;
}

std::size_t filter_corpus(std::istream& in, std::ostream& out, const std::set<std::string>& seeds,
                          const TokenizerConfig& cfg) {
  require_seeds(seeds);
  std::size_t kept = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!matches_seed(line, seeds, cfg)) continue;
    out << line << '\n';
    ++kept;
  }
  return kept;
}

std::vector<Tokens> read_corpus(const std::filesystem::path& path, const TokenizerConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<Tokens> docs;
  std::string line;
  while (std::getline(in, line)) docs.push_back(tokenize(line, cfg));
  return docs;
}

Vocabulary build_vocab(const std::vector<Tokens>& corpus, std::uint64_t min_count) {
  if (min_count < 1) throw Error(ErrorKind::Config, "min_count must be >= 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : corpus)
    for (const auto& tok : doc) ++counts[tok];
  Vocabulary vocab;
  for (auto& [word, c] : counts)
    if (c >= min_count) vocab.emplace(word, c);
  return vocab;
}

void validate(const SgnsConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& rule) {
    throw Error(ErrorKind::Config, "sgns." + field + " " + rule);
  };
  if (cfg.dim < 2) fail("dim", "must be >= 2");
  if (cfg.window < 1) fail("window", "must be >= 1");
  if (cfg.negatives < 1) fail("negatives", "must be >= 1");
  if (cfg.epochs < 1) fail("epochs", "must be >= 1");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    fail("learning_rate", "must be > 0");
  if (cfg.min_count < 1) fail("min_count", "must be >= 1");
  if (!(cfg.subsample_t >= 0.0)) fail("subsample_t", "must be >= 0");
  if (cfg.threads < 1) fail("threads", "must be >= 1");
}

double keep_probability(std::uint64_t count, std::uint64_t total, double subsample_t) {
  if (subsample_t <= 0.0 || count == 0) return 1.0;
  double threshold = subsample_t * static_cast<double>(total);
  double c = static_cast<double>(count);
  return std::min(1.0, (std::sqrt(c / threshold) + 1.0) * threshold / c);
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Negative-sampling distribution: unigram counts raised to 3/4.
class NoiseSampler {
 public:
  explicit NoiseSampler(const std::vector<std::uint64_t>& counts) {
    cumulative_.reserve(counts.size());
    double acc = 0.0;
    for (auto c : counts) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(acc);
    }
  }

  std::size_t draw(std::mt19937_64& rng) const {
    double r = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

struct SgnsState {
  const SgnsConfig& cfg;
  std::size_t vocab_size;
  std::vector<float> input;   // word vectors, row-major vocab_size x dim
  std::vector<float> output;  // context (negative-sampling) vectors
  const std::vector<std::vector<std::uint32_t>>& sentences;
  const std::vector<double>& keep_prob;
  const NoiseSampler& noise;
  std::uint64_t schedule_total;
  std::atomic<std::uint64_t> processed{0};

  double current_rate() const {
    double progress = static_cast<double>(processed.load(std::memory_order_relaxed)) /
                      static_cast<double>(schedule_total + 1);
    return cfg.learning_rate * std::max(1e-4, 1.0 - progress);
  }

  void train_pair(std::uint32_t center, std::uint32_t context, float rate, std::vector<float>& grad,
                  std::mt19937_64& rng) {
    const std::size_t dim = cfg.dim;
    float* in = input.data() + static_cast<std::size_t>(context) * dim;
    std::fill(grad.begin(), grad.end(), 0.0f);
    for (std::size_t d = 0; d <= cfg.negatives; ++d) {
      std::size_t target;
      float label;
      if (d == 0) {
        target = center;
        label = 1.0f;
      } else {
        target = noise.draw(rng);
        if (target == center) continue;
        label = 0.0f;
      }
      float* out = output.data() + target * dim;
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) dot += static_cast<double>(in[j]) * out[j];
      dot = std::clamp(dot, -30.0, 30.0);
      float g = static_cast<float>((label - 1.0 / (1.0 + std::exp(-dot))) * rate);
      for (std::size_t j = 0; j < dim; ++j) grad[j] += g * out[j];
      for (std::size_t j = 0; j < dim; ++j) out[j] += g * in[j];
    }
    for (std::size_t j = 0; j < dim; ++j) in[j] += grad[j];
  }

  void train_sentences(std::size_t begin, std::size_t end, std::mt19937_64& rng) {
    std::vector<float> grad(cfg.dim);
    std::vector<std::uint32_t> kept;
    for (std::size_t s = begin; s < end; ++s) {
      const auto& sentence = sentences[s];
      kept.clear();
      for (auto w : sentence)
        if (keep_prob[w] >= 1.0 || uniform01(rng) < keep_prob[w]) kept.push_back(w);
      float rate = static_cast<float>(current_rate());
      for (std::size_t pos = 0; pos < kept.size(); ++pos) {
        std::size_t shrink = rng() % cfg.window;
        std::size_t radius = cfg.window - shrink;
        std::size_t lo = pos >= radius ? pos - radius : 0;
        std::size_t hi = std::min(kept.size() - 1, pos + radius);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          train_pair(kept[pos], kept[c], rate, grad, rng);
        }
      }
      processed.fetch_add(sentence.size(), std::memory_order_relaxed);
    }
  }
};

}  // namespace

EmbeddingSpace train_sgns(const std::vector<Tokens>& corpus, const SgnsConfig& cfg,
                          const std::string& language) {
  validate(cfg);
  Vocabulary vocab = build_vocab(corpus, cfg.min_count);
  if (vocab.size() < 2)
    throw Error(ErrorKind::InsufficientData,
                "need at least 2 vocabulary words with count >= " + std::to_string(cfg.min_count) +
                    ", found " + std::to_string(vocab.size()));

  // Frequency-descending ids, ties lexicographic (the map is already sorted).
  std::vector<std::pair<std::string, std::uint64_t>> entries(vocab.begin(), vocab.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  for (auto& [w, c] : entries) {
    ids.emplace(w, static_cast<std::uint32_t>(words.size()));
    words.push_back(w);
    counts.push_back(c);
  }

  std::vector<std::vector<std::uint32_t>> sentences;
  sentences.reserve(corpus.size());
  std::uint64_t total = 0;
  for (const auto& doc : corpus) {
    std::vector<std::uint32_t> ids_in_line;
    for (const auto& tok : doc) {
      auto it = ids.find(tok);
      if (it != ids.end()) ids_in_line.push_back(it->second);
    }
    total += ids_in_line.size();
    if (ids_in_line.size() >= 2) sentences.push_back(std::move(ids_in_line));
  }
  if (sentences.empty())
    throw Error(ErrorKind::InsufficientData, "no line has two in-vocabulary tokens");

  std::vector<double> keep(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    keep[i] = keep_probability(counts[i], total, cfg.subsample_t);

  NoiseSampler noise(counts);
  std::uint64_t per_epoch = 0;
  for (const auto& s : sentences) per_epoch += s.size();

  SgnsState state{cfg, words.size(), {}, {}, sentences, keep, noise, per_epoch * cfg.epochs};
  state.input.resize(words.size() * cfg.dim);
  state.output.assign(words.size() * cfg.dim, 0.0f);
  std::mt19937_64 init_rng(cfg.rng_seed);
  for (auto& v : state.input)
    v = static_cast<float>((uniform01(init_rng) - 0.5) / static_cast<double>(cfg.dim));

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.threads == 1) {
      std::mt19937_64 rng(cfg.rng_seed * 1000003ull + epoch);
      state.train_sentences(0, sentences.size(), rng);
      continue;
    }
    std::vector<std::thread> workers;
    const std::size_t n = sentences.size();
    for (std::size_t t = 0; t < cfg.threads; ++t) {
      std::size_t begin = n * t / cfg.threads, end = n * (t + 1) / cfg.threads;
      workers.emplace_back([&state, &cfg, begin, end, epoch, t] {
        std::mt19937_64 rng(cfg.rng_seed * 1000003ull + epoch * 7919ull + t + 1);
        state.train_sentences(begin, end, rng);
      });
    }
    for (auto& w : workers) w.join();
  }

  RowMatrixF vectors(words.size(), cfg.dim);
  std::copy(state.input.begin(), state.input.end(), vectors.data());
  return EmbeddingSpace(language, std::move(words), std::move(vectors));
}

}  // namespace xlemb
