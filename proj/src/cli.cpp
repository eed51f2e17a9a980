#include "dcrec/cli.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "dcrec/aspects.hpp"
#include "dcrec/balance.hpp"
#include "dcrec/corpus.hpp"
#include "dcrec/dcnn.hpp"
#include "dcrec/embedding.hpp"
#include "dcrec/error.hpp"
#include "dcrec/eval.hpp"
#include "dcrec/recommend.hpp"
#include "dcrec/rng.hpp"
#include "dcrec/tagger.hpp"
#include "dcrec/text_file.hpp"

namespace dcrec {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

const char* const kPathKeys[] = {"dataset",         "embeddings", "stopwords",      "contractions",
                                 "opinion_lexicon", "negations",  "tagger_lexicon", "out"};

fs::path* path_field(PipelineConfig& c, const std::string& key) {
  if (key == "dataset") return &c.dataset;
  if (key == "embeddings") return &c.embeddings;
  if (key == "stopwords") return &c.stopwords;
  if (key == "contractions") return &c.contractions;
  if (key == "opinion_lexicon") return &c.opinion_lexicon;
  if (key == "negations") return &c.negations;
  if (key == "tagger_lexicon") return &c.tagger_lexicon;
  if (key == "out") return &c.out;
  return nullptr;
}

std::size_t* count_field(PipelineConfig& c, const std::string& key) {
  if (key == "seq_len") return &c.seq_len;
  if (key == "word_dim") return &c.word_dim;
  if (key == "word_filters") return &c.word_filters;
  if (key == "pos_filters") return &c.pos_filters;
  if (key == "svd_rank") return &c.svd_rank;
  if (key == "cp_rank") return &c.cp_rank;
  if (key == "cp_max_iters") return &c.cp_max_iters;
  if (key == "smote_k") return &c.smote_k;
  if (key == "neighbors") return &c.neighbors;
  if (key == "power_iters") return &c.power_iters;
  if (key == "oversample") return &c.oversample;
  if (key == "epochs") return &c.epochs;
  if (key == "batch_size") return &c.batch_size;
  if (key == "min_count") return &c.min_count;
  if (key == "window") return &c.window;
  if (key == "top_n") return &c.top_n;
  return nullptr;
}

double* real_field(PipelineConfig& c, const std::string& key) {
  if (key == "dropout") return &c.dropout;
  if (key == "theta") return &c.theta;
  if (key == "alpha") return &c.alpha;
  if (key == "lambda") return &c.lambda;
  if (key == "learning_rate") return &c.learning_rate;
  if (key == "train_fraction") return &c.train_fraction;
  return nullptr;
}

std::size_t read_embedding_dim(const fs::path& p) {
  std::ifstream in(p);
  std::size_t count = 0, dim = 0;
  if (!(in >> count >> dim)) throw ConfigError("embeddings file " + p.string() + " has no header");
  return dim;
}

}  // namespace

void PipelineConfig::set(const std::string& key, const json& value, const fs::path& base_dir) {
  try {
    if (auto* p = path_field(*this, key)) {
      const fs::path raw = value.get<std::string>();
      *p = raw.empty() || raw.is_absolute() || base_dir.empty() ? raw : base_dir / raw;
    } else if (auto* n = count_field(*this, key)) {
      if (!value.is_number_integer() || value.get<long long>() < 0)
        throw ConfigError("'" + key + "' must be a non-negative integer");
      *n = value.get<std::size_t>();
    } else if (auto* r = real_field(*this, key)) {
      if (!value.is_number()) throw ConfigError("'" + key + "' must be a number");
      *r = value.get<double>();
    } else if (key == "seed") {
      if (!value.is_number_integer() || value.get<long long>() < 0)
        throw ConfigError("'seed' must be a non-negative integer");
      seed = value.get<std::uint64_t>();
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  for (const auto& [key, value] : j.items()) c.set(key, value, base_dir);
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

void PipelineConfig::validate() const {
  if (!seed) throw ConfigError("a seed is required (config key 'seed' or --seed)");
  if (dataset.empty()) throw ConfigError("config key 'dataset' is required");
  const std::pair<const char*, const fs::path*> inputs[] = {
      {"dataset", &dataset},           {"embeddings", &embeddings},
      {"stopwords", &stopwords},       {"contractions", &contractions},
      {"opinion_lexicon", &opinion_lexicon}, {"negations", &negations},
      {"tagger_lexicon", &tagger_lexicon}};
  for (const auto& [name, p] : inputs)
    if (!p->empty() && !fs::is_regular_file(*p))
      throw ConfigError(std::string(name) + " file not found: " + p->string());
  auto at_least = [](const char* name, std::size_t v, std::size_t lo) {
    if (v < lo) throw ConfigError(std::string(name) + " must be >= " + std::to_string(lo));
  };
  at_least("seq_len", seq_len, 1);
  at_least("word_dim", word_dim, 1);
  at_least("svd_rank", svd_rank, 1);
  at_least("cp_rank", cp_rank, 1);
  at_least("cp_max_iters", cp_max_iters, 1);
  at_least("smote_k", smote_k, 1);
  at_least("neighbors", neighbors, 1);
  at_least("power_iters", power_iters, kMinPowerIters);
  at_least("batch_size", batch_size, 1);
  at_least("min_count", min_count, 1);
  at_least("top_n", top_n, 1);
  if (word_filters + pos_filters == 0) throw ConfigError("word_filters + pos_filters must be > 0");
  auto in_range = [](const char* name, double v, double lo, double hi, bool open_hi) {
    if (!(v >= lo && (open_hi ? v < hi : v <= hi)))
      throw ConfigError(std::string(name) + " out of range");
  };
  in_range("dropout", dropout, 0.0, 1.0, true);
  in_range("theta", theta, -1.0, 1.0, false);
  in_range("alpha", alpha, 0.0, 1.0, false);
  in_range("lambda", lambda, 0.0, 1e6, false);
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate out of range");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must be in (0, 1)");
  if (!embeddings.empty() && read_embedding_dim(embeddings) != word_dim)
    throw ConfigError("word_dim does not match the embeddings file dimension");
}

json PipelineConfig::to_json() const {
  json j;
  for (const char* key : kPathKeys) j[key] = path_field(const_cast<PipelineConfig&>(*this), key)->string();
  for (const char* key : {"seq_len", "word_dim", "word_filters", "pos_filters", "svd_rank", "cp_rank",
                          "cp_max_iters", "smote_k", "neighbors", "power_iters", "oversample",
                          "epochs", "batch_size", "min_count", "window", "top_n"})
    j[key] = *count_field(const_cast<PipelineConfig&>(*this), key);
  for (const char* key : {"dropout", "theta", "alpha", "lambda", "learning_rate", "train_fraction"})
    j[key] = *real_field(const_cast<PipelineConfig&>(*this), key);
  if (seed) j["seed"] = *seed;
  return j;
}

std::string PipelineConfig::hash() const {
  auto j = to_json();
  j.erase("out");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

std::uint64_t PipelineConfig::seed_value() const {
  if (!seed) throw ConfigError("a seed is required (config key 'seed' or --seed)");
  return *seed;
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  return kExitFailure;
}

// ---------------------------------------------------------------------------
// Shared stage plumbing

namespace {

// Stream ids for mix_seed, one per consumer of randomness.
enum Stream : std::uint64_t { kSplit = 1, kInit, kSmote, kTrain, kCp, kSvd };

std::uint64_t stream_seed(const PipelineConfig& cfg, Stream s) {
  const std::array<std::uint64_t, 1> coords{s};
  return mix_seed(cfg.seed_value(), coords);
}

json stamp(const PipelineConfig& cfg) {
  return {{"config_hash", cfg.hash()}, {"seed", cfg.seed_value()}};
}

std::string tsv_header(const PipelineConfig& cfg) {
  return "# config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed_value()) + "\n";
}

fs::path require(const PipelineConfig& cfg, const char* name, const char* stage) {
  const auto p = cfg.out / name;
  if (!fs::exists(p))
    throw IoError(p.string() + " is missing: run stage '" + stage + "' first");
  return p;
}

void check_stamp(const PipelineConfig& cfg, const std::string& found, const char* name,
                 const char* stage) {
  if (found != cfg.hash())
    throw ConfigError(std::string(name) + " was produced with a different config (hash " + found +
                      ", expected " + cfg.hash() + "); rerun stage '" + stage + "'");
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw IoError("cannot parse " + p.string() + ": " + e.what());
  }
}

void check_json_stamp(const PipelineConfig& cfg, const json& j, const char* name, const char* stage) {
  check_stamp(cfg, j.value("config_hash", std::string("<none>")), name, stage);
}

void check_tsv_stamp(const PipelineConfig& cfg, const fs::path& p, const char* name, const char* stage) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  const auto at = line.find("config_hash=");
  check_stamp(cfg, at == std::string::npos ? "<none>" : line.substr(at + 12, 16), name, stage);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path or_default(const fs::path& p, const char* file) {
  return p.empty() ? default_data_dir() / file : p;
}

struct Resources {
  StopwordSet stopwords;
  ContractionTable contractions;
};

Resources text_resources(const PipelineConfig& cfg) {
  Resources r;
  r.stopwords = cfg.stopwords.empty() ? StopwordSet::load_default() : StopwordSet::load(cfg.stopwords);
  r.contractions = cfg.contractions.empty() ? ContractionTable::load_default()
                                            : ContractionTable::load(cfg.contractions);
  return r;
}

OpinionLexicon opinion_lexicon(const PipelineConfig& cfg) {
  return OpinionLexicon::load(or_default(cfg.opinion_lexicon, "opinion_lexicon.tsv"),
                              or_default(cfg.negations, "negations.txt"));
}

// One normalized review as stored in corpus.jsonl.
struct CorpusRow {
  TokenSeq seq;
  double rating = 0.0;
  bool train = false;
  std::vector<PosTag> pos;
  std::optional<std::vector<BioTag>> gold;
};

char bio_char(BioTag t) { return t == BioTag::B ? 'B' : t == BioTag::I ? 'I' : 'O'; }

BioTag parse_bio(char c) {
  switch (c) {
    case 'B': return BioTag::B;
    case 'I': return BioTag::I;
    case 'O': return BioTag::O;
  }
  throw IoError(std::string("bad tag character '") + c + "' in corpus");
}

json row_to_json(const CorpusRow& r) {
  json surf = json::array(), stems = json::array(), pos = json::array();
  for (const auto& t : r.seq.tokens) {
    surf.push_back(t.surface);
    stems.push_back(t.stem);
  }
  for (auto t : r.pos) pos.push_back(std::string(tag_name(t)));
  json j = {{"user", r.seq.user_id}, {"item", r.seq.item_id}, {"rating", r.rating},
            {"split", r.train ? "train" : "test"}, {"surface", surf}, {"stem", stems}, {"pos", pos}};
  j["label"] = r.seq.label ? json(static_cast<int>(*r.seq.label)) : json(nullptr);
  if (r.gold) {
    std::string g;
    for (auto t : *r.gold) g += bio_char(t);
    j["gold"] = g;
  } else {
    j["gold"] = nullptr;
  }
  return j;
}

CorpusRow row_from_json(const json& j) {
  CorpusRow r;
  r.seq.user_id = j.at("user").get<std::string>();
  r.seq.item_id = j.at("item").get<std::string>();
  r.rating = j.at("rating").get<double>();
  r.train = j.at("split").get<std::string>() == "train";
  const auto surf = j.at("surface").get<std::vector<std::string>>();
  const auto stems = j.at("stem").get<std::vector<std::string>>();
  const auto pos = j.at("pos").get<std::vector<std::string>>();
  if (surf.size() != stems.size() || pos.size() != stems.size())
    throw IoError("corpus row has misaligned token fields");
  for (std::size_t k = 0; k < surf.size(); ++k) {
    r.seq.tokens.push_back({surf[k], stems[k]});
    const auto t = parse_tag(pos[k]);
    if (!t) throw IoError("unknown POS tag '" + pos[k] + "' in corpus");
    r.pos.push_back(*t);
  }
  if (!j.at("label").is_null()) r.seq.label = static_cast<Polarity>(j.at("label").get<int>());
  if (!j.at("gold").is_null()) {
    const auto g = j.at("gold").get<std::string>();
    if (g.size() != surf.size()) throw IoError("corpus row has misaligned gold tags");
    r.gold.emplace();
    for (char c : g) r.gold->push_back(parse_bio(c));
  }
  return r;
}

std::vector<CorpusRow> load_corpus(const PipelineConfig& cfg) {
  const auto path = require(cfg, artifacts::kCorpus, "preprocess");
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  std::vector<CorpusRow> rows;
  try {
    check_json_stamp(cfg, json::parse(line), artifacts::kCorpus, "preprocess");
    while (std::getline(in, line))
      if (!line.empty()) rows.push_back(row_from_json(json::parse(line)));
  } catch (const json::exception& e) {
    throw IoError("bad corpus line in " + path.string() + ": " + e.what());
  }
  return rows;
}

Vocabulary load_vocab(const PipelineConfig& cfg) {
  return Vocabulary::load(require(cfg, artifacts::kVocab, "preprocess"));
}

EmbeddingTable embedding_table(const PipelineConfig& cfg, const Vocabulary& vocab) {
  if (cfg.embeddings.empty()) return EmbeddingTable::build(vocab, cfg.word_dim);
  return EmbeddingTable::build(vocab, WordVectors::load(cfg.embeddings));
}

std::vector<std::size_t> token_ids(const TokenSeq& seq, const Vocabulary& vocab) {
  std::vector<std::size_t> ids;
  ids.reserve(seq.tokens.size());
  for (const auto& t : seq.tokens) ids.push_back(vocab.id(t.stem));
  return ids;
}

DcnnInput network_input(const CorpusRow& r, const Vocabulary& vocab, const EmbeddingTable& emb,
                        std::size_t seq_len) {
  DcnnInput in;
  in.word = emb.embed(token_ids(r.seq, vocab), seq_len);
  in.pos = pos_matrix(r.pos, seq_len);
  in.length = std::min(r.seq.tokens.size(), seq_len);
  return in;
}

/// Predicted tags for every token; positions past the network's window are O.
std::vector<BioTag> full_tags(const DcnnModel& model, const DcnnInput& input, std::size_t n) {
  auto tags = predict(model, input).tags;
  tags.resize(n, BioTag::O);
  return tags;
}

struct LoadedModel {
  DcnnModel model;
  json meta;
};

LoadedModel load_network(const PipelineConfig& cfg) {
  LoadedModel m;
  m.model = load_model(require(cfg, artifacts::kModel, "train"), &m.meta);
  check_json_stamp(cfg, m.meta, artifacts::kModel, "train");
  return m;
}

std::vector<RatingTriple> read_triples(const fs::path& p) {
  std::vector<RatingTriple> out;
  for (const auto& f : read_tsv(p, 3)) {
    try {
      out.push_back({f[0], f[1], std::stod(f[2])});
    } catch (const std::exception&) {
      throw IoError("bad rating value '" + f[2] + "' in " + p.string());
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages

StageSummary cmd_preprocess(const PipelineConfig& cfg) {
  cfg.validate();
  const auto loaded = load_reviews(cfg.dataset);
  if (loaded.records.size() < 2) throw DomainError("dataset has fewer than 2 usable reviews");
  const auto res = text_resources(cfg);
  const auto tagger = cfg.tagger_lexicon.empty() ? TagLexicon::load_default()
                                                 : TagLexicon::load(cfg.tagger_lexicon);

  std::vector<CorpusRow> rows;
  rows.reserve(loaded.records.size());
  std::size_t annotated = 0;
  for (const auto& rec : loaded.records) {
    CorpusRow r;
    r.seq.tokens = normalize(rec.text, res.stopwords, res.contractions);
    r.seq.label = derive_label(rec.rating);
    r.seq.user_id = rec.user_id;
    r.seq.item_id = rec.item_id;
    r.rating = rec.rating;
    std::vector<std::string> surfaces;
    for (const auto& t : r.seq.tokens) surfaces.push_back(t.surface);
    r.pos = tag_sequence(surfaces, tagger);
    if (!rec.aspect_terms.empty()) {
      std::vector<std::vector<std::string>> phrases;
      for (const auto& term : rec.aspect_terms) {
        std::vector<std::string> stems;
        for (const auto& t : normalize(term, res.stopwords, res.contractions)) stems.push_back(t.stem);
        if (!stems.empty()) phrases.push_back(std::move(stems));
      }
      r.gold = tag_aspect_phrases(r.seq.tokens, phrases);
      ++annotated;
    }
    rows.push_back(std::move(r));
  }

  const auto order = split_order(rows.size(), stream_seed(cfg, kSplit));
  const auto cut = split_point(rows.size(), cfg.train_fraction);
  for (std::size_t k = 0; k < cut; ++k) rows[order[k]].train = true;

  std::vector<TokenSeq> train_seqs;
  for (const auto& r : rows)
    if (r.train) train_seqs.push_back(r.seq);
  const auto vocab = build_vocabulary(train_seqs, cfg.min_count);

  fs::create_directories(cfg.out);
  json header = stamp(cfg);
  header["artifact"] = "corpus";
  header["vocab_hash"] = vocab.hash();
  std::string text = header.dump() + "\n";
  for (const auto& r : rows) text += row_to_json(r).dump() + "\n";
  write_file(cfg.out / artifacts::kCorpus, text);
  vocab.save(cfg.out / artifacts::kVocab);

  return {"preprocess",
          {{"reviews", rows.size()},
           {"skipped", loaded.skipped},
           {"malformed", loaded.malformed},
           {"annotated", annotated},
           {"train", cut},
           {"test", rows.size() - cut},
           {"vocabulary", vocab.size()}}};
}

StageSummary cmd_train(const PipelineConfig& cfg) {
  cfg.validate();
  const auto rows = load_corpus(cfg);
  const auto vocab = load_vocab(cfg);
  const auto emb = embedding_table(cfg, vocab);
  const std::size_t L = cfg.seq_len;

  std::vector<DcnnSample> samples;
  std::vector<FeatureSample> labeled;
  for (const auto& r : rows) {
    if (!r.train) continue;
    DcnnSample s;
    s.input = network_input(r, vocab, emb, L);
    if (r.gold) s.tags.assign(r.gold->begin(), r.gold->begin() + static_cast<std::ptrdiff_t>(s.input.length));
    s.label = r.seq.label;
    if (r.seq.label)
      labeled.push_back(embed_for_smote(token_ids(r.seq, vocab), r.pos, emb, L, *r.seq.label));
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw DomainError("no training reviews");

  std::size_t counts[2] = {0, 0};
  for (const auto& f : labeled) ++counts[static_cast<int>(f.label)];
  const std::size_t minority = std::min(counts[0], counts[1]);
  std::size_t synthetic = 0, k_used = 0;
  if (minority >= 2 && counts[0] != counts[1]) {
    const auto res = smote(labeled, cfg.smote_k, stream_seed(cfg, kSmote));
    k_used = res.k_used;
    const std::size_t word_len = L * emb.dim();
    for (std::size_t k = labeled.size(); k < res.samples.size(); ++k) {
      const auto& f = res.samples[k].features;
      DcnnSample s;
      s.input.word = Matrix(L, emb.dim());
      s.input.pos = Matrix(L, kPosTagCount);
      std::copy(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(word_len), s.input.word.flat().begin());
      std::copy(f.begin() + static_cast<std::ptrdiff_t>(word_len), f.end(), s.input.pos.flat().begin());
      s.input.length = L;
      s.label = res.samples[k].label;
      s.synthetic = true;
      samples.push_back(std::move(s));
      ++synthetic;
    }
  } else if (counts[0] != counts[1]) {
    std::clog << "warning: minority class has " << minority << " labeled reviews; SMOTE skipped\n";
  }

  DcnnConfig net;
  net.seq_len = L;
  net.word_dim = emb.dim();
  net.word_filters = cfg.word_filters;
  net.pos_filters = cfg.pos_filters;
  net.dropout = cfg.dropout;
  DcnnModel model(net, stream_seed(cfg, kInit));

  TrainOptions opts;
  opts.epochs = cfg.epochs;
  opts.batch_size = cfg.batch_size;
  opts.learning_rate = cfg.learning_rate;
  opts.lambda = cfg.lambda;
  opts.seed = stream_seed(cfg, kTrain);
  const auto report = train(model, samples, opts);

  json meta = stamp(cfg);
  meta["vocab_hash"] = vocab.hash();
  save_model(model, cfg.out / artifacts::kModel, meta);

  json info = {{"samples", samples.size()},   {"synthetic", synthetic},
               {"smote_k", k_used},           {"negative", counts[0]},
               {"positive", counts[1]},       {"steps", report.steps},
               {"epoch_loss", report.epoch_loss}};
  json doc = stamp(cfg);
  doc.update(info);
  write_file(cfg.out / artifacts::kTrainReport, doc.dump(2) + "\n");
  info.erase("epoch_loss");
  info["final_loss"] = report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back();
  return {"train", info};
}

StageSummary cmd_extract(const PipelineConfig& cfg) {
  cfg.validate();
  const auto rows = load_corpus(cfg);
  const auto vocab = load_vocab(cfg);
  const auto net = load_network(cfg);
  if (net.meta.value("vocab_hash", std::uint64_t{0}) != vocab.hash())
    throw ConfigError("network was trained on a different vocabulary; rerun stage 'train'");
  const auto emb = embedding_table(cfg, vocab);
  const auto lexicon = opinion_lexicon(cfg);

  // Aspects are mined from training reviews only so that held-out ratings
  // never leak into the rating matrix.
  std::vector<AspectMention> mentions;
  std::vector<RatingTriple> overall;
  for (const auto& r : rows) {
    if (!r.train) continue;
    overall.push_back({r.seq.user_id, r.seq.item_id, r.rating});
    const auto input = network_input(r, vocab, emb, cfg.seq_len);
    const auto tags = full_tags(net.model, input, r.seq.tokens.size());
    for (auto& m : extract_mentions(tags, r.seq, lexicon, cfg.window)) mentions.push_back(std::move(m));
  }

  std::map<std::string, std::size_t> head_counts;
  for (const auto& m : mentions) ++head_counts[m.head];
  std::vector<AspectStem> stems;
  for (const auto& [stem, count] : head_counts) {
    AspectStem a{stem, count, {}};
    const auto id = vocab.id(stem);
    if (id != vocab.oov_id()) {
      const auto row = emb.row(id);
      a.vector.assign(row.begin(), row.end());
    } else {
      a.vector = hashed_embedding(stem, emb.dim());
    }
    stems.push_back(std::move(a));
  }
  auto clusters = cluster_aspects(stems, cfg.theta);
  const auto tensor = build_tensor(mentions, clusters);
  CpOptions cp_opts;
  cp_opts.rank = cfg.cp_rank;
  cp_opts.max_iters = cfg.cp_max_iters;
  cp_opts.seed = stream_seed(cfg, kCp);
  const auto cp = cp_weights(tensor, cp_opts);
  for (std::size_t k = 0; k < clusters.size(); ++k) clusters[k].weight = cp.weights[k];
  const auto weighted = weighted_rating_matrix(tensor, cp.weights, overall, cfg.alpha);

  const auto index = cluster_index(clusters);
  std::string tsv = tsv_header(cfg) + "# user\titem\tstart\tend\thead\ta\ts\tcluster\n";
  for (const auto& m : mentions)
    tsv += m.user_id + '\t' + m.item_id + '\t' + std::to_string(m.span.start) + '\t' +
           std::to_string(m.span.end) + '\t' + m.head + '\t' + fmt("%.6f", m.rating) + '\t' +
           fmt("%.6f", m.sentiment) + '\t' + std::to_string(index.at(m.head)) + '\n';
  write_file(cfg.out / artifacts::kAspects, tsv);

  json cl = json::array();
  for (const auto& c : clusters)
    cl.push_back({{"id", c.id}, {"medoid", c.medoid}, {"members", c.members}, {"weight", c.weight}});
  json doc = stamp(cfg);
  doc["clusters"] = cl;
  doc["cp_rank"] = cfg.cp_rank;
  doc["cp_iterations"] = cp.iterations;
  doc["cp_relative_residual"] = cp.relative_residual;
  doc["tensor_entries"] = tensor.entries.size();
  write_file(cfg.out / artifacts::kClusters, doc.dump(2) + "\n");

  std::string wt = tsv_header(cfg);
  for (const auto& t : weighted) wt += t.user + '\t' + t.item + '\t' + fmt("%.17g", t.value) + '\n';
  write_file(cfg.out / artifacts::kWeighted, wt);

  return {"extract",
          {{"mentions", mentions.size()},
           {"clusters", clusters.size()},
           {"tensor_entries", tensor.entries.size()},
           {"ratings", weighted.size()}}};
}

StageSummary cmd_recommend(const PipelineConfig& cfg, const std::string& user,
                           std::optional<std::size_t> n) {
  cfg.validate();
  const auto path = require(cfg, artifacts::kWeighted, "extract");
  check_tsv_stamp(cfg, path, artifacts::kWeighted, "extract");
  const auto ratings = read_triples(path);
  if (ratings.empty()) throw DomainError("weighted rating matrix is empty");

  RatingModelOptions opts;
  opts.rank = cfg.svd_rank;
  opts.neighbors = cfg.neighbors;
  opts.power_iters = cfg.power_iters;
  opts.oversample = cfg.oversample;
  opts.seed = stream_seed(cfg, kSvd);
  const auto fitted = RatingModel::fit(ratings, opts);
  json meta = stamp(cfg);
  meta["rank"] = fitted.rank();
  fitted.save(cfg.out / artifacts::kRatingModel, meta);
  // Serve from the persisted model so every stage sees the same numbers.
  const auto model = RatingModel::load(cfg.out / artifacts::kRatingModel);

  std::set<std::string> users;
  if (!user.empty()) {
    users.insert(user);
  } else {
    for (const auto& r : ratings) users.insert(r.user);
  }
  const std::size_t count = n.value_or(cfg.top_n);
  std::string tsv = tsv_header(cfg) + "# user\titem\trank\tpredicted_rating\n";
  std::size_t lines = 0;
  for (const auto& u : users) {
    const auto recs = model.top_n(u, count, model.rated_items(u));
    for (std::size_t k = 0; k < recs.size(); ++k, ++lines)
      tsv += u + '\t' + recs[k].item + '\t' + std::to_string(k + 1) + '\t' +
             fmt("%.6f", recs[k].predicted) + '\n';
  }
  write_file(cfg.out / artifacts::kRecommendations, tsv);
  return {"recommend",
          {{"users", model.users()},
           {"items", model.items()},
           {"rank", model.rank()},
           {"recommendations", lines}}};
}

StageSummary cmd_evaluate(const PipelineConfig& cfg) {
  cfg.validate();
  const auto rows = load_corpus(cfg);
  const auto vocab = load_vocab(cfg);
  const auto net = load_network(cfg);
  check_json_stamp(cfg, read_json(require(cfg, artifacts::kClusters, "extract")),
                   artifacts::kClusters, "extract");
  const auto rm_path = require(cfg, artifacts::kRatingModel, "recommend");
  check_json_stamp(cfg, read_json(rm_path).value("meta", json::object()), artifacts::kRatingModel,
                   "recommend");
  const auto rating_model = RatingModel::load(rm_path);
  const auto emb = embedding_table(cfg, vocab);

  ConfusionCounts counts;
  bool any_gold = false;
  std::vector<Polarity> pred_labels, gold_labels;
  std::vector<EvalPair> pairs;
  for (const auto& r : rows) {
    if (r.train) continue;
    const auto input = network_input(r, vocab, emb, cfg.seq_len);
    const auto p = predict(net.model, input);
    if (r.gold) {
      auto tags = p.tags;
      tags.resize(r.seq.tokens.size(), BioTag::O);
      count_tags(tags, *r.gold, counts);
      any_gold = true;
    }
    if (r.seq.label) {
      pred_labels.push_back(p.sentiment_prob >= 0.5 ? Polarity::Positive : Polarity::Negative);
      gold_labels.push_back(*r.seq.label);
    }
    pairs.push_back({r.seq.user_id, r.seq.item_id,
                     rating_model.predict(r.seq.user_id, r.seq.item_id), r.rating});
  }
  if (pairs.empty()) throw DomainError("test split is empty");

  json metrics = stamp(cfg);
  metrics["mae"] = mae(pairs);
  metrics["rmse"] = rmse(pairs);
  if (any_gold) {
    const auto s = scores(counts);
    metrics["precision"] = s.precision;
    metrics["recall"] = s.recall;
    metrics["f1"] = s.f1;
  } else {
    metrics["precision"] = metrics["recall"] = metrics["f1"] = nullptr;
  }
  metrics["accuracy"] = gold_labels.empty() ? json(nullptr)
                                            : json(sentiment_accuracy(pred_labels, gold_labels));
  metrics["n_test"] = pairs.size();
  write_file(cfg.out / artifacts::kMetrics, metrics.dump(2) + "\n");
  json info = metrics;
  info.erase("config_hash");
  info.erase("seed");
  return {"evaluate", info};
}

json cmd_pipeline(const PipelineConfig& cfg) {
  json out = json::object();
  for (const auto& s : {cmd_preprocess(cfg), cmd_train(cfg), cmd_extract(cfg), cmd_recommend(cfg),
                        cmd_evaluate(cfg)})
    out[s.stage] = s.info;
  return out;
}

}  // namespace dcrec
