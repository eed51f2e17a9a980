// Writes a synthetic review corpus with planted aspects: reviews.jsonl
// (with gold `aspectTerms`), embeddings.txt keyed by stem, and a matching
// config.json.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcrec/corpus.hpp"
#include "dcrec/rng.hpp"

namespace {

using json = nlohmann::json;

struct AspectGroup {
  std::vector<std::string> phrases;
};

const std::vector<AspectGroup> kAspects = {
    {{"battery", "battery life", "charger"}},
    {{"screen", "display"}},
    {{"sound", "speaker", "sound quality"}},
    {{"price", "cost"}},
    {{"camera", "lens"}},
};

const std::vector<std::string> kPositive = {"great",   "excellent", "amazing",  "perfect",
                                            "good",    "solid",     "fantastic", "reliable"};
const std::vector<std::string> kNegative = {"terrible", "awful",        "poor",   "bad",
                                            "weak",     "disappointing", "flimsy", "horrible"};

const std::vector<std::string> kFillers = {
    "Arrived quickly in a small box.",
    "Bought this for my brother last month.",
    "Using it every day now.",
    "Shipping took two weeks.",
    "My old one broke after 3 years.",
    "Setup took about 10 minutes.",
    "It's my second purchase from this seller.",
    "The package was dented but the contents were fine.",
    "Ordered it on a Monday.",
    "Came with a manual in several languages.",
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

template <typename T>
const T& pick(const std::vector<T>& v, dcrec::Lcg64& rng) {
  return v[rng.below(v.size())];
}

std::string mention_sentence(const std::string& aspect, bool positive, dcrec::Lcg64& rng) {
  const auto& good = positive ? kPositive : kNegative;
  const auto& flipped = positive ? kNegative : kPositive;
  switch (rng.below(5)) {
    case 0: return "The " + aspect + " is " + pick(good, rng) + ".";
    case 1: return capitalize(pick(good, rng)) + " " + aspect + ", honestly.";
    case 2: return "I found the " + aspect + " really " + pick(good, rng) + ".";
    case 3: return "The " + aspect + " isn't " + pick(flipped, rng) + ".";
    default: return capitalize(aspect) + " seems " + pick(good, rng) + " to me.";
  }
}

std::vector<double> unit(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

std::vector<double> gaussian(std::size_t dim, dcrec::Lcg64& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  return unit(std::move(v));
}

std::vector<double> around(const std::vector<double>& center, double spread, dcrec::Lcg64& rng) {
  auto noise = gaussian(center.size(), rng);
  std::vector<double> v(center.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = center[k] + spread * noise[k];
  return unit(std::move(v));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic planted-aspect review corpus"};
  std::string out_dir;
  std::size_t reviews = 500, users = 60, items = 40, dim = 50;
  std::uint64_t seed = 7;
  app.add_option("out", out_dir, "Output directory")->required();
  app.add_option("--reviews", reviews, "Number of reviews");
  app.add_option("--users", users, "Number of users");
  app.add_option("--items", items, "Number of items");
  app.add_option("--dim", dim, "Embedding dimension");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);
  if (reviews > users * items) {
    std::cerr << "error: more reviews than user-item pairs\n";
    return 2;
  }

  dcrec::Lcg64 rng(seed);
  std::vector<double> user_bias(users);
  for (auto& b : user_bias) b = 0.3 + 0.4 * rng.normal();
  std::vector<std::vector<double>> quality(items, std::vector<double>(kAspects.size()));
  for (auto& row : quality)
    for (auto& q : row) q = 0.4 + rng.normal();

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t i = 0; i < items; ++i) pairs.emplace_back(u, i);
  dcrec::shuffle_in_place(pairs, rng);
  pairs.resize(reviews);
  std::sort(pairs.begin(), pairs.end());

  std::filesystem::create_directories(out_dir);
  std::ofstream jsonl(std::filesystem::path(out_dir) / "reviews.jsonl");
  const auto stopwords = dcrec::StopwordSet::load_default();
  const auto contractions = dcrec::ContractionTable::load_default();
  std::map<std::string, std::size_t> stem_count;

  char id[32];
  for (const auto& [u, i] : pairs) {
    std::vector<std::size_t> order(kAspects.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    dcrec::shuffle_in_place(order, rng);
    const std::size_t n_mentions = 1 + rng.below(3);
    std::vector<std::string> sentences, terms;
    double polarity = 0.0;
    for (std::size_t m = 0; m < n_mentions; ++m) {
      const auto k = order[m];
      const bool positive = quality[i][k] + 0.5 * rng.normal() > 0.0;
      polarity += positive ? 1.0 : -1.0;
      const auto& phrase = pick(kAspects[k].phrases, rng);
      sentences.push_back(mention_sentence(phrase, positive, rng));
      if (std::find(terms.begin(), terms.end(), phrase) == terms.end()) terms.push_back(phrase);
    }
    const std::size_t n_fill = rng.below(3);
    for (std::size_t f = 0; f < n_fill; ++f)
      sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(rng.below(sentences.size() + 1)),
                       pick(kFillers, rng));
    std::string text;
    for (const auto& s : sentences) text += (text.empty() ? "" : " ") + s;

    const double raw = 3.0 + user_bias[u] + 1.5 * polarity / static_cast<double>(n_mentions) +
                       0.3 * rng.normal();
    const double rating = std::clamp(std::round(raw), 1.0, 5.0);

    json rec;
    std::snprintf(id, sizeof id, "U%03zu", u);
    rec["reviewerID"] = id;
    std::snprintf(id, sizeof id, "B%05zu", i);
    rec["asin"] = id;
    rec["overall"] = rating;
    rec["reviewText"] = text;
    rec["category"] = "Electronics";
    rec["aspectTerms"] = terms;
    jsonl << rec.dump() << '\n';

    for (const auto& t : dcrec::normalize(text, stopwords, contractions)) ++stem_count[t.stem];
  }

  // Embeddings: aspect stems sit near one center per aspect group, opinion
  // stems near a positive or a negative center, the rest are random. A few
  // filler stems are left out so the hashed fallback is exercised.
  std::map<std::string, std::vector<double>> vectors;
  dcrec::Lcg64 erng(dcrec::fnv1a("embeddings", seed));
  for (const auto& group : kAspects) {
    const auto center = gaussian(dim, erng);
    for (const auto& phrase : group.phrases)
      for (const auto& t : dcrec::normalize(phrase, stopwords, contractions))
        if (!vectors.contains(t.stem)) vectors[t.stem] = around(center, 0.35, erng);
  }
  const auto pos_center = gaussian(dim, erng);
  const auto neg_center = gaussian(dim, erng);
  for (const auto* list : {&kPositive, &kNegative})
    for (const auto& w : *list) {
      const auto stem = dcrec::porter_stem(w);
      if (!vectors.contains(stem))
        vectors[stem] = around(list == &kPositive ? pos_center : neg_center, 0.5, erng);
    }
  for (const auto& [stem, count] : stem_count)
    if (!vectors.contains(stem) && dcrec::fnv1a(stem) % 10 != 0) vectors[stem] = gaussian(dim, erng);

  std::ofstream emb(std::filesystem::path(out_dir) / "embeddings.txt");
  emb << vectors.size() << ' ' << dim << '\n';
  char num[32];
  for (const auto& [stem, v] : vectors) {
    emb << stem;
    for (double x : v) {
      std::snprintf(num, sizeof num, " %.6f", x);
      emb << num;
    }
    emb << '\n';
  }

  json cfg = {{"dataset", "reviews.jsonl"},
              {"embeddings", "embeddings.txt"},
              {"out", "out"},
              {"seed", 42},
              {"seq_len", 32},
              {"word_dim", dim},
              {"word_filters", 32},
              {"pos_filters", 8},
              {"dropout", 0.5},
              {"epochs", 20},
              {"batch_size", 16},
              {"learning_rate", 0.002},
              {"lambda", 1.0},
              {"smote_k", 5},
              {"theta", 0.6},
              {"alpha", 0.5},
              {"cp_rank", 3},
              {"svd_rank", 5},
              {"neighbors", 20},
              {"power_iters", 5},
              {"train_fraction", 0.8},
              {"top_n", 5}};
  std::ofstream(std::filesystem::path(out_dir) / "config.json") << cfg.dump(2) << '\n';
  std::cout << "wrote " << reviews << " reviews and " << vectors.size() << " embeddings to "
            << out_dir << '\n';
  return 0;
}
