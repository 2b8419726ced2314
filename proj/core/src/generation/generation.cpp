// SPDX-License-Identifier: Apache-2.0
#include "stancegen/generation/generation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "stancegen/error.hpp"
#include "stancegen/util/hash.hpp"
#include "stancegen/util/jsonl.hpp"
#include "stancegen/util/rng.hpp"

namespace stancegen::generation {

using nlohmann::json;

const TemplateRegistry::Contract& instruction_contract() {
  static const TemplateRegistry::Contract c{{"post_text", "stance", "image_marker"},
                                            {"target", "directive"}};
  return c;
}

TemplateRegistry instruction_templates(const std::optional<std::filesystem::path>& dir) {
  return TemplateRegistry::with_builtins("instruction_", instruction_contract(), dir);
}

std::string stance_directive(Stance s) { return s == Stance::favor ? "in favor of" : "against"; }

std::string target_name(Author a) {
  switch (a) {
    case Author::harris: return "Kamala Harris";
    case Author::trump: return "Donald Trump";
    case Author::other: break;
  }
  return "the post author";
}

std::string build_instruction(const corpus::Sample& sample, Stance stance,
                              const TemplateRegistry& registry, const std::string& template_id) {
  const auto& tpl = registry.get(template_id);
  if (sample.post_text.empty()) fail(ErrorCode::invalid_argument, "sample has no post text");
  if (sample.image.uri.empty()) fail(ErrorCode::invalid_argument, "sample has no image");
  return tpl.render({{"post_text", sample.post_text},
                     {"stance", std::string(to_string(stance))},
                     {"image_marker", image_marker},
                     {"directive", stance_directive(stance)},
                     {"target", target_name(sample.author)}});
}

// --- split ----------------------------------------------------------------

SplitResult split_dataset(const std::vector<corpus::Sample>& samples, double ratio,
                          std::uint64_t seed) {
  if (samples.empty()) fail(ErrorCode::empty_corpus, "cannot split an empty corpus");
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorCode::invalid_argument, "ratio must lie in (0, 1)");

  std::set<std::string> ids;
  for (const auto& s : samples) ids.insert(s.post_id);
  std::vector<std::string> posts(ids.begin(), ids.end());
  util::Rng rng(seed);
  for (std::size_t i = posts.size(); i > 1; --i) {
    std::swap(posts[i - 1], posts[rng.below(i)]);
  }
  const auto n_train = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(posts.size())));
  const std::set<std::string> train_ids(posts.begin(), posts.begin() + static_cast<long>(n_train));

  SplitResult r;
  r.train_posts = n_train;
  r.test_posts = posts.size() - n_train;
  for (const auto& s : samples) (train_ids.count(s.post_id) ? r.train : r.test).push_back(s);
  if (r.test.empty()) r.warnings.push_back("test split is empty (" + std::to_string(posts.size()) + " post group(s))");
  if (r.train.empty()) r.warnings.push_back("train split is empty (" + std::to_string(posts.size()) + " post group(s))");
  for (const auto& w : r.warnings) spdlog::warn("split_dataset: {}", w);
  return r;
}

// --- fine-tuning configuration --------------------------------------------

void validate(const FinetuneConfig& c) {
  auto bad = [](const std::string& m) { fail(ErrorCode::invalid_override, m); };
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) bad("learning_rate must be positive");
  if (c.batch_size <= 0) bad("batch_size must be positive");
  if (c.max_seq_len <= 0) bad("max_seq_len must be positive");
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) bad("split_ratio must lie in (0, 1)");
  if (c.adapter.empty() || c.optimizer.empty() || c.sharding.empty()) bad("tags must be nonempty");
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(ErrorCode::invalid_override, key + ": cannot parse '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  // from_chars<double> is missing in older libstdc++.
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size()) fail(ErrorCode::invalid_override, key + ": cannot parse '" + v + "'");
  return out;
}

}  // namespace

FinetuneConfig apply_overrides(FinetuneConfig c, const std::map<std::string, std::string>& overrides) {
  for (const auto& [key, value] : overrides) {
    if (key == "learning_rate" || key == "lr") {
      c.learning_rate = parse_real(key, value);
    } else if (key == "batch_size") {
      c.batch_size = parse_number<int>(key, value);
    } else if (key == "max_seq_len") {
      c.max_seq_len = parse_number<int>(key, value);
    } else if (key == "split_ratio" || key == "split") {
      c.split_ratio = parse_real(key, value);
    } else if (key == "adapter") {
      c.adapter = value;
    } else if (key == "optimizer") {
      c.optimizer = value;
    } else if (key == "sharding") {
      c.sharding = value;
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else {
      fail(ErrorCode::invalid_override, "unknown key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

json to_json(const FinetuneConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"max_seq_len", c.max_seq_len},     {"split_ratio", c.split_ratio},
          {"adapter", c.adapter},             {"optimizer", c.optimizer},
          {"sharding", c.sharding},           {"seed", c.seed}};
}

FinetuneConfig finetune_config_from_json(const json& j) {
  FinetuneConfig c;
  try {
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.max_seq_len = j.at("max_seq_len").get<int>();
    c.split_ratio = j.at("split_ratio").get<double>();
    c.adapter = j.at("adapter").get<std::string>();
    c.optimizer = j.at("optimizer").get<std::string>();
    c.sharding = j.at("sharding").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_error, std::string("finetune config: ") + e.what());
  }
  validate(c);
  return c;
}

void write_finetune_config(const std::filesystem::path& path, const FinetuneConfig& c) {
  validate(c);
  util::write_json(path, to_json(c));
}

FinetuneConfig read_finetune_config(const std::filesystem::path& path) {
  return finetune_config_from_json(util::read_json(path));
}

// --- backends ---------------------------------------------------------------

BackendOutput EchoGenerator::complete(const GenerationRequest& request) {
  std::string text = "[" + std::string(to_string(request.stance)) + "] " + request.instruction;
  return {text, json{{"backend", "echo"}}};
}

namespace {

const std::vector<std::string>& phrase_bank(Stance s) {
  static const std::vector<std::string> favor{"support", "agree", "great", "love", "proud",
                                              "yes", "vote", "strong", "forward", "together",
                                              "hope", "win", "thank", "right", "best"};
  static const std::vector<std::string> against{"wrong", "never", "disagree", "shame", "fail",
                                                "lies", "no", "worse", "stop", "bad",
                                                "reject", "done", "fake", "enough", "terrible"};
  return s == Stance::favor ? favor : against;
}

std::vector<double> word_vector(const std::string& w, std::size_t dim, std::uint64_t seed) {
  util::Rng rng(util::fnv1a64(w) ^ seed);
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

ToyPrefixGenerator::ToyPrefixGenerator(std::uint64_t seed, std::size_t words)
    : seed_(seed), words_(words) {}

BackendOutput ToyPrefixGenerator::complete(const GenerationRequest& request) {
  std::vector<std::string> pool = phrase_bank(request.stance);
  std::set<std::string> seen(pool.begin(), pool.end());
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && seen.insert(cur).second) pool.push_back(cur);
    cur.clear();
  };
  for (const char ch : request.post_text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else {
      flush();
    }
  }
  flush();

  const std::vector<double> prefix =
      request.conditioning ? *request.conditioning : word_vector(request.sample_id, 16, seed_);
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& w : pool) {
    const auto v = word_vector(w, prefix.size(), seed_);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * prefix[i];
    scored.emplace_back(s, w);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::string text = "[" + std::string(to_string(request.stance)) + "]";
  for (std::size_t i = 0; i < std::min(words_, scored.size()); ++i) text += " " + scored[i].second;
  return {text, json{{"backend", "toy-prefix"}, {"prefix_dim", prefix.size()}}};
}

ChatGenerator::ChatGenerator(std::string id, std::shared_ptr<ChatBackend> backend, ChatOptions options,
                             RetryPolicy retry)
    : id_(std::move(id)), backend_(std::move(backend)), options_(std::move(options)), retry_(std::move(retry)) {
  if (!backend_) fail(ErrorCode::backend_unavailable, "generator '" + id_ + "' has no backend");
}

BackendOutput ChatGenerator::complete(const GenerationRequest& request) {
  const std::string text =
      with_retry(retry_, [&] { return backend_->complete(request.instruction, options_); });
  return {text, json{{"backend", id_}, {"temperature", options_.temperature}}};
}

GeneratedResponse generate(const GenerationRequest& request, Generator& generator) {
  if (request.instruction.empty()) fail(ErrorCode::invalid_argument, "instruction is empty");
  const auto t0 = std::chrono::steady_clock::now();
  BackendOutput out;
  try {
    out = generator.complete(request);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::backend_unavailable, generator.id() + ": " + e.what());
  }
  const auto t1 = std::chrono::steady_clock::now();
  const bool blank = std::all_of(out.text.begin(), out.text.end(),
                                 [](unsigned char c) { return std::isspace(c) != 0; });
  if (blank) fail(ErrorCode::empty_generation, generator.id() + " returned an empty text for " + request.request_id);
  GeneratedResponse r;
  r.request_id = request.request_id;
  r.text = std::move(out.text);
  r.backend_id = generator.id();
  r.latency = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0);
  r.raw = std::move(out.raw);
  return r;
}

std::vector<GeneratedResponse> generate_batch(const std::vector<GenerationRequest>& requests,
                                              Generator& generator, std::size_t max_in_flight) {
  std::vector<GeneratedResponse> out(requests.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(max_in_flight, requests.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        out[i] = generate(requests[i], generator);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = requests.size();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// --- serialization ----------------------------------------------------------

json to_json(const GenerationRequest& r) {
  json j{{"request_id", r.request_id}, {"sample_id", r.sample_id},   {"instruction", r.instruction},
         {"post_text", r.post_text},   {"image_path", r.image_path}, {"stance", to_string(r.stance)},
         {"backend_id", r.backend_id}};
  if (r.conditioning) j["conditioning"] = *r.conditioning;
  if (r.reference_comment) j["reference_comment"] = *r.reference_comment;
  if (r.target) j["target"] = *r.target;
  return j;
}

GenerationRequest request_from_json(const json& j) {
  GenerationRequest r;
  try {
    r.request_id = j.at("request_id").get<std::string>();
    r.sample_id = j.value("sample_id", "");
    r.instruction = j.at("instruction").get<std::string>();
    r.post_text = j.value("post_text", "");
    r.image_path = j.value("image_path", "");
    r.stance = parse_stance(j.at("stance").get<std::string>());
    r.backend_id = j.value("backend_id", "");
    if (j.contains("conditioning")) r.conditioning = j["conditioning"].get<std::vector<double>>();
    if (j.contains("reference_comment")) r.reference_comment = j["reference_comment"].get<std::string>();
    if (j.contains("target")) r.target = j["target"].get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_error, std::string("generation request: ") + e.what());
  }
  if (r.instruction.empty()) fail(ErrorCode::schema_error, "generation request: empty instruction");
  return r;
}

json to_json(const GeneratedResponse& r, bool with_latency) {
  json j{{"request_id", r.request_id}, {"text", r.text}, {"backend_id", r.backend_id}, {"raw", r.raw}};
  if (with_latency) j["latency_us"] = r.latency.count();
  return j;
}

GeneratedResponse response_from_json(const json& j) {
  GeneratedResponse r;
  try {
    r.request_id = j.at("request_id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.backend_id = j.value("backend_id", "");
    r.latency = std::chrono::microseconds(j.value("latency_us", std::int64_t{0}));
    r.raw = j.value("raw", json::object());
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_error, std::string("generated response: ") + e.what());
  }
  return r;
}

json to_json(const InstructionRecord& r) {
  return {{"sample_id", r.sample_id},
          {"instruction", r.instruction},
          {"image_path", r.image_path},
          {"stance", to_string(r.stance)},
          {"reference_comment", r.reference_comment}};
}

InstructionRecord instruction_record_from_json(const json& j) {
  InstructionRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.instruction = j.at("instruction").get<std::string>();
    r.image_path = j.at("image_path").get<std::string>();
    r.stance = parse_stance(j.at("stance").get<std::string>());
    r.reference_comment = j.at("reference_comment").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_error, std::string("instruction record: ") + e.what());
  }
  return r;
}

std::vector<InstructionRecord> build_instruction_dataset(const std::vector<corpus::Sample>& samples,
                                                         const TemplateRegistry& registry,
                                                         const std::string& template_id) {
  std::vector<InstructionRecord> out;
  for (const auto& s : samples) {
    if (!s.stance) continue;
    out.push_back({s.sample_id, build_instruction(s, *s.stance, registry, template_id), s.image.uri,
                   *s.stance, s.comment.text});
  }
  return out;
}

}  // namespace stancegen::generation
