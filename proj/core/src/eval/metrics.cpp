// SPDX-License-Identifier: Apache-2.0
#include "stancegen/eval/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "stancegen/error.hpp"
#include "stancegen/sdmg/encoder.hpp"
#include "stancegen/util/hash.hpp"
#include "stancegen/util/jsonl.hpp"
#include "stancegen/util/rng.hpp"

namespace stancegen::eval {

using nlohmann::json;

std::string to_string(Modality m) {
  switch (m) {
    case Modality::textual: return "Textual";
    case Modality::visual: return "Visual";
    case Modality::multimodal: return "Multi-modal";
  }
  return "Textual";
}

std::optional<Modality> try_parse_modality(const std::string& s) {
  if (s == "Textual" || s == "textual" || s == "TEXTUAL") return Modality::textual;
  if (s == "Visual" || s == "visual" || s == "VISUAL") return Modality::visual;
  if (s == "Multi-modal" || s == "multimodal" || s == "multi-modal" || s == "MULTIMODAL") {
    return Modality::multimodal;
  }
  return std::nullopt;
}

json to_json(const EvalItem& it) {
  json j{{"item_id", it.item_id},         {"sample_id", it.sample_id},
         {"requested_stance", to_string(it.requested)},
         {"generated", it.generated},     {"reference", it.reference},
         {"image_path", it.image_path}};
  if (it.model) j["model"] = *it.model;
  if (it.modality) j["modality"] = to_string(*it.modality);
  if (it.target) j["target"] = *it.target;
  return j;
}

EvalItem eval_item_from_json(const json& j) {
  EvalItem it;
  try {
    it.item_id = j.at("item_id").get<std::string>();
    it.sample_id = j.value("sample_id", "");
    it.requested = parse_stance(j.at("requested_stance").get<std::string>());
    it.generated = j.at("generated").get<std::string>();
    it.reference = j.value("reference", "");
    it.image_path = j.value("image_path", "");
    if (j.contains("model") && !j["model"].is_null()) it.model = j["model"].get<std::string>();
    if (j.contains("modality") && !j["modality"].is_null()) {
      it.modality = try_parse_modality(j["modality"].get<std::string>());
      if (!it.modality) fail(ErrorCode::schema_error, "unknown modality " + j["modality"].dump());
    }
    if (j.contains("target") && !j["target"].is_null()) it.target = j["target"].get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_error, std::string("eval item: ") + e.what());
  }
  if (it.generated.empty()) fail(ErrorCode::schema_error, "eval item " + it.item_id + ": empty generated text");
  return it;
}

std::vector<EvalItem> load_eval_items(const std::filesystem::path& path) {
  std::vector<EvalItem> items;
  util::for_each_jsonl(path, [&](const json& j, std::size_t) { items.push_back(eval_item_from_json(j)); });
  return items;
}

// --- backends ---------------------------------------------------------------

namespace {

std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string normalize_word(const std::string& w) {
  std::string out;
  for (const char c : w) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

Stance KeywordClassifier::classify(const std::string& text) const {
  const auto f = text.find("[FAVOR]");
  const auto a = text.find("[AGAINST]");
  if (f != std::string::npos || a != std::string::npos) return f < a ? Stance::favor : Stance::against;
  static const std::set<std::string> favor{"support", "agree", "great", "love", "proud", "yes",
                                           "strong", "hope", "win", "thank", "best", "good"};
  static const std::set<std::string> against{"wrong", "never", "disagree", "shame", "fail", "lies",
                                             "no", "worse", "stop", "bad", "reject", "fake",
                                             "terrible", "worst", "liar"};
  int score = 0;
  for (const auto& w : words_of(text)) {
    const std::string n = normalize_word(w);
    score += static_cast<int>(favor.count(n)) - static_cast<int>(against.count(n));
  }
  return score > 0 ? Stance::favor : Stance::against;
}

Stance ScriptedClassifier::classify(const std::string& text) const {
  const auto it = table_.find(text);
  if (it == table_.end()) fail(ErrorCode::classifier_unavailable, "scripted classifier has no entry for text");
  return it->second;
}

LmScore UniformScorer::score(const std::string& text) const {
  if (vocab_ == 0) fail(ErrorCode::scorer_unavailable, "uniform scorer needs a positive vocabulary");
  LmScore s;
  s.tokens = words_of(text).size();
  s.log_likelihood = -static_cast<long double>(s.tokens) * std::log(static_cast<long double>(vocab_));
  return s;
}

LmScore ScriptedScorer::score(const std::string& text) const {
  const auto it = table_.find(text);
  if (it == table_.end()) fail(ErrorCode::scorer_unavailable, "scripted scorer has no entry for text");
  LmScore s;
  s.tokens = it->second.size();
  for (const double lp : it->second) s.log_likelihood += lp;
  return s;
}

std::vector<double> HashingEmbedder::embed(const std::string& text) const {
  if (dim_ == 0) fail(ErrorCode::embedder_unavailable, "hashing embedder needs a positive dim");
  std::vector<double> v(dim_, 0.0);
  for (const auto& w : words_of(text)) {
    const std::string n = normalize_word(w);
    if (n.empty()) continue;
    const std::uint64_t h = util::fnv1a64(n) ^ (seed_ * 0x9e3779b97f4a7c15ULL);
    v[(h >> 1) % dim_] += (h & 1) ? 1.0 : -1.0;
  }
  return v;
}

std::vector<double> ScriptedEmbedder::embed(const std::string& text) const {
  const auto it = table_.find(text);
  if (it == table_.end()) fail(ErrorCode::embedder_unavailable, "scripted embedder has no entry for text");
  return it->second;
}

HashingJointEmbedder::HashingJointEmbedder(std::size_t dim, std::uint64_t seed, std::size_t context_limit)
    : text_(dim, seed), dim_(dim), seed_(seed), context_limit_(context_limit) {}

std::vector<double> HashingJointEmbedder::embed_text(const std::string& text) const {
  return text_.embed(text);
}

std::vector<double> HashingJointEmbedder::embed_image(const std::filesystem::path& image) const {
  std::string bytes;
  try {
    bytes = util::read_text(image);
  } catch (const Error&) {
    fail(ErrorCode::image_unreadable, "cannot read image " + image.string());
  }
  if (bytes.empty()) fail(ErrorCode::image_unreadable, "image is empty: " + image.string());
  constexpr sdmg::Index feat = 16;
  const sdmg::MatD patches = sdmg::image_patches(bytes, 4, feat, seed_);
  const sdmg::VecD pooled = patches.colwise().mean().transpose();
  util::Rng rng(seed_ ^ 0x632be59bd9b4e019ULL);
  std::vector<double> out(dim_, 0.0);
  for (std::size_t r = 0; r < dim_; ++r)
    for (sdmg::Index c = 0; c < feat; ++c) out[r] += rng.normal() * pooled(c);
  return out;
}

std::vector<double> ScriptedJointEmbedder::embed_text(const std::string& text) const {
  const auto it = text_.find(text);
  if (it == text_.end()) fail(ErrorCode::embedder_unavailable, "scripted joint embedder has no entry for text");
  return it->second;
}

std::vector<double> ScriptedJointEmbedder::embed_image(const std::filesystem::path& image) const {
  const auto it = images_.find(image.string());
  if (it == images_.end()) fail(ErrorCode::image_unreadable, "no scripted image " + image.string());
  return it->second;
}

// --- metrics ----------------------------------------------------------------

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorCode::dimension_mismatch, "cosine of vectors with different dims");
  long double dot = 0.0L, na = 0.0L, nb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  if (na == 0.0L || nb == 0.0L) return 0.0;
  const long double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return static_cast<double>(std::clamp(c, -1.0L, 1.0L));
}

double response_perplexity(const LmScore& s) {
  if (s.tokens == 0) fail(ErrorCode::zero_tokens, "perplexity of a response with zero tokens");
  return static_cast<double>(std::exp(-s.log_likelihood / static_cast<long double>(s.tokens)));
}

std::string truncate_to_context(const std::string& text, std::size_t limit) {
  const auto words = words_of(text);
  if (words.size() <= limit) return text;
  spdlog::warn("truncating text from {} to {} tokens for the joint embedder", words.size(), limit);
  std::string out;
  for (std::size_t i = 0; i < limit; ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

namespace {

/// Sorted long-double summation: identical across item orders.
double stable_mean(std::vector<double> v) {
  if (v.empty()) fail(ErrorCode::empty_input, "metric over zero items");
  std::sort(v.begin(), v.end());
  long double sum = 0.0L;
  for (const double x : v) sum += x;
  return static_cast<double>(sum / static_cast<long double>(v.size()));
}

template <class Fn>
std::vector<double> per_item(const std::vector<EvalItem>& items, Fn fn) {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(fn(it));
  return out;
}

}  // namespace

double controllability(const std::vector<EvalItem>& items, const StanceClassifier* classifier) {
  if (!classifier) fail(ErrorCode::classifier_unavailable, "no stance classifier configured");
  if (items.empty()) fail(ErrorCode::empty_input, "controllability over zero items");
  std::size_t hits = 0;
  for (const auto& it : items) hits += classifier->classify(it.generated) == it.requested ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(items.size());
}

PerplexityResult perplexity(const std::vector<EvalItem>& items, const LmScorer* scorer) {
  if (!scorer) fail(ErrorCode::scorer_unavailable, "no language-model scorer configured");
  if (items.empty()) fail(ErrorCode::empty_input, "perplexity over zero items");
  PerplexityResult r;
  long double total_ll = 0.0L;
  std::size_t total_tokens = 0;
  std::vector<long double> lls;
  for (const auto& it : items) {
    const LmScore s = scorer->score(it.generated);
    r.per_item.push_back(response_perplexity(s));
    lls.push_back(s.log_likelihood);
    total_tokens += s.tokens;
  }
  std::sort(lls.begin(), lls.end());
  for (const long double ll : lls) total_ll += ll;
  r.mean = stable_mean(r.per_item);
  r.token_weighted = static_cast<double>(std::exp(-total_ll / static_cast<long double>(total_tokens)));
  return r;
}

double relevance(const std::vector<EvalItem>& items, const TextEmbedder* embedder) {
  if (!embedder) fail(ErrorCode::embedder_unavailable, "no text embedder configured");
  return stable_mean(per_item(items, [&](const EvalItem& it) {
    return cosine(embedder->embed(it.generated), embedder->embed(it.reference));
  }));
}

double cmss(const std::vector<EvalItem>& items, const JointEmbedder* embedder) {
  if (!embedder) fail(ErrorCode::embedder_unavailable, "no joint embedder configured");
  return stable_mean(per_item(items, [&](const EvalItem& it) {
    const std::string text = truncate_to_context(it.generated, embedder->context_limit());
    return cosine(embedder->embed_text(text), embedder->embed_image(it.image_path));
  }));
}

// --- backend factory ----------------------------------------------------------

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <class V>
std::map<std::string, V> table_from(const json& j, const char* what) {
  try {
    return j.get<std::map<std::string, V>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::config_error, std::string(what) + " table: " + e.what());
  }
}

}  // namespace

EvalBackends make_backends(const json& config, const std::filesystem::path& base_dir) {
  EvalBackends b;
  auto section = [&](const char* key) -> json {
    if (!config.contains(key)) return json::object();
    if (!config[key].is_object()) fail(ErrorCode::config_error, std::string(key) + " must be an object");
    return config[key];
  };
  auto load_table = [&](const json& s) {
    if (!s.contains("path")) fail(ErrorCode::config_error, "scripted backend needs a path");
    return util::read_json(resolve(base_dir, s["path"].get<std::string>()));
  };

  const json c = section("classifier");
  const std::string ct = c.value("type", "keyword");
  if (ct == "keyword") {
    b.classifier = std::make_shared<KeywordClassifier>();
  } else if (ct == "scripted") {
    std::map<std::string, Stance> t;
    for (const auto& [text, st] : table_from<std::string>(load_table(c), "classifier")) t[text] = parse_stance(st);
    b.classifier = std::make_shared<ScriptedClassifier>(std::move(t));
  } else {
    fail(ErrorCode::classifier_unavailable, "unknown classifier type '" + ct + "'");
  }

  const json s = section("scorer");
  const std::string st = s.value("type", "uniform");
  if (st == "uniform") {
    b.scorer = std::make_shared<UniformScorer>(s.value("vocab", std::size_t{100}));
  } else if (st == "scripted") {
    b.scorer = std::make_shared<ScriptedScorer>(table_from<std::vector<double>>(load_table(s), "scorer"));
  } else {
    fail(ErrorCode::scorer_unavailable, "unknown scorer type '" + st + "'");
  }

  const json e = section("embedder");
  const std::string et = e.value("type", "hashing");
  if (et == "hashing") {
    b.embedder = std::make_shared<HashingEmbedder>(e.value("dim", std::size_t{256}), e.value("seed", std::uint64_t{0}));
  } else if (et == "scripted") {
    b.embedder = std::make_shared<ScriptedEmbedder>(table_from<std::vector<double>>(load_table(e), "embedder"));
  } else {
    fail(ErrorCode::embedder_unavailable, "unknown embedder type '" + et + "'");
  }

  const json je = section("joint_embedder");
  const std::string jt = je.value("type", "hashing");
  const auto limit = je.value("context_limit", std::size_t{77});
  if (jt == "hashing") {
    b.joint_embedder = std::make_shared<HashingJointEmbedder>(je.value("dim", std::size_t{64}),
                                                              je.value("seed", std::uint64_t{0}), limit);
  } else if (jt == "scripted") {
    const json t = load_table(je);
    b.joint_embedder = std::make_shared<ScriptedJointEmbedder>(
        table_from<std::vector<double>>(t.value("text", json::object()), "joint text"),
        table_from<std::vector<double>>(t.value("images", json::object()), "joint image"), limit);
  } else {
    fail(ErrorCode::embedder_unavailable, "unknown joint embedder type '" + jt + "'");
  }
  b.threads = std::max<std::size_t>(1, config.value("threads", std::size_t{1}));
  return b;
}

std::vector<ItemScores> score_items(const std::vector<EvalItem>& items, const EvalBackends& b) {
  if (!b.classifier) fail(ErrorCode::classifier_unavailable, "no stance classifier configured");
  if (!b.scorer) fail(ErrorCode::scorer_unavailable, "no language-model scorer configured");
  if (!b.embedder || !b.joint_embedder) fail(ErrorCode::embedder_unavailable, "no embedder configured");

  std::size_t threads = std::max<std::size_t>(1, b.threads);
  for (const std::size_t cap : {b.classifier->max_concurrency(), b.scorer->max_concurrency(),
                                b.embedder->max_concurrency(), b.joint_embedder->max_concurrency()}) {
    if (cap > 0) threads = std::min(threads, cap);
  }
  threads = std::min(threads, std::max<std::size_t>(1, items.size()));

  std::vector<ItemScores> out(items.size());
  auto score_one = [&](std::size_t i) {
    const EvalItem& it = items[i];
    ItemScores& s = out[i];
    s.predicted = b.classifier->classify(it.generated);
    s.stance_match = s.predicted == it.requested;
    const LmScore lm = b.scorer->score(it.generated);
    s.log_likelihood = lm.log_likelihood;
    s.tokens = lm.tokens;
    s.perplexity = response_perplexity(lm);
    s.relevance = cosine(b.embedder->embed(it.generated), b.embedder->embed(it.reference));
    const std::string text = truncate_to_context(it.generated, b.joint_embedder->context_limit());
    s.cmss = cosine(b.joint_embedder->embed_text(text), b.joint_embedder->embed_image(it.image_path));
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        score_one(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = items.size();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace stancegen::eval
