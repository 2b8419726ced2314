// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "stancegen/generation/generation.hpp"
#include "stancegen/templates.hpp"

using namespace stancegen;
using namespace stancegen::generation;
using testing_support::fuzz_corpus;
using testing_support::make_sample;

namespace {

std::vector<std::string> ids(const std::vector<corpus::Sample>& v) {
  std::vector<std::string> r;
  for (const auto& s : v) r.push_back(s.sample_id);
  return r;
}

}  // namespace

TEST(Instruction, BuiltinTemplateFillsEverySlot) {
  const auto reg = instruction_templates();
  const auto s = make_sample("s1", "p1", Author::harris, Stance::against);
  const std::string text = build_instruction(s, Stance::favor, reg);
  EXPECT_NE(text.find(image_marker), std::string::npos);
  EXPECT_NE(text.find(s.post_text), std::string::npos);
  EXPECT_NE(text.find("FAVOR"), std::string::npos);
  EXPECT_NE(text.find("in favor of Kamala Harris"), std::string::npos);
  EXPECT_EQ(text.find('{'), std::string::npos);
  EXPECT_EQ(stance_directive(Stance::against), "against");
  EXPECT_EQ(target_name(Author::trump), "Donald Trump");
}

TEST(Instruction, DirectoryTemplatesAndLinting) {
  testing_support::TempDir dir;
  std::ofstream(dir / "instruction_short.txt") << "{image_marker} {post_text} -> {stance}";
  const auto reg = instruction_templates(dir.path());
  EXPECT_TRUE(reg.contains("instruction_short"));
  EXPECT_TRUE(reg.contains("instruction_v1"));
  const auto s = make_sample("s1", "p1", Author::harris, Stance::against);
  EXPECT_EQ(build_instruction(s, Stance::against, reg, "instruction_short"),
            "<image> " + s.post_text + " -> AGAINST");
  EXPECT_STG_ERROR(build_instruction(s, Stance::against, reg, "missing"), ErrorCode::unknown_template);
  std::ofstream(dir / "instruction_bad.txt") << "{post_text} {stance} {surprise}";
  EXPECT_STG_ERROR(instruction_templates(dir.path()), ErrorCode::unknown_template);
}

TEST(Instruction, DatasetSkipsUnlabeled) {
  auto a = make_sample("a", "p", Author::trump, Stance::favor);
  auto b = make_sample("b", "p", Author::trump, Stance::against);
  b.stance.reset();
  const auto recs = build_instruction_dataset({a, b}, instruction_templates());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].reference_comment, a.comment.text);
  EXPECT_EQ(instruction_record_from_json(to_json(recs[0])).instruction, recs[0].instruction);
}

TEST(Split, FuzzedIntegrity) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const auto samples = fuzz_corpus(rng);
    const std::uint64_t seed = rng();
    const auto r = split_dataset(samples, 0.8, seed);
    const auto sample_ids = ids(samples);
    const std::set<std::string> all(sample_ids.begin(), sample_ids.end());
    std::multiset<std::string> got;
    for (const auto& s : r.train) got.insert(s.sample_id);
    for (const auto& s : r.test) got.insert(s.sample_id);
    ASSERT_EQ(got.size(), samples.size());
    ASSERT_EQ(std::set<std::string>(got.begin(), got.end()), all);
    std::set<std::string> train_posts, test_posts;
    for (const auto& s : r.train) train_posts.insert(s.post_id);
    for (const auto& s : r.test) test_posts.insert(s.post_id);
    for (const auto& p : train_posts) ASSERT_FALSE(test_posts.count(p)) << p << " straddles";
    const double groups = static_cast<double>(train_posts.size() + test_posts.size());
    ASSERT_LE(std::abs(static_cast<double>(train_posts.size()) - 0.8 * groups), 1.0);
    ASSERT_EQ(r.train_posts, train_posts.size());
    ASSERT_EQ(r.test_posts, test_posts.size());
    const auto again = split_dataset(samples, 0.8, seed);
    ASSERT_EQ(ids(again.train), ids(r.train));
    ASSERT_EQ(ids(again.test), ids(r.test));
  }
}

TEST(Split, SeedMattersAndEdgeCases) {
  std::mt19937_64 rng(1);
  std::vector<corpus::Sample> samples;
  for (int p = 0; p < 40; ++p) samples.push_back(make_sample("s" + std::to_string(p), "p" + std::to_string(p), Author::harris, Stance::favor));
  EXPECT_NE(ids(split_dataset(samples, 0.8, 1).test), ids(split_dataset(samples, 0.8, 2).test));
  const auto one = split_dataset({samples[0]}, 0.8, 1);
  EXPECT_EQ(one.train.size(), 1u);
  EXPECT_FALSE(one.warnings.empty());
  EXPECT_STG_ERROR(split_dataset({}, 0.8, 1), ErrorCode::empty_corpus);
}

TEST(FinetuneConfig, DefaultsOverridesAndRoundTrip) {
  const FinetuneConfig d;
  EXPECT_DOUBLE_EQ(d.learning_rate, 2e-4);
  EXPECT_EQ(d.batch_size, 16);
  EXPECT_EQ(d.max_seq_len, 2048);
  EXPECT_DOUBLE_EQ(d.split_ratio, 0.8);
  EXPECT_EQ(d.optimizer, "adamw");
  const auto o = apply_overrides(d, {{"lr", "1e-4"}, {"batch_size", "8"}, {"sharding", "none"}});
  EXPECT_DOUBLE_EQ(o.learning_rate, 1e-4);
  EXPECT_EQ(o.batch_size, 8);
  EXPECT_STG_ERROR(apply_overrides(d, {{"nope", "1"}}), ErrorCode::invalid_override);
  EXPECT_STG_ERROR(apply_overrides(d, {{"batch_size", "many"}}), ErrorCode::invalid_override);
  EXPECT_STG_ERROR(apply_overrides(d, {{"batch_size", "-1"}}), ErrorCode::invalid_override);
  EXPECT_STG_ERROR(apply_overrides(d, {{"split_ratio", "1.5"}}), ErrorCode::invalid_override);
  testing_support::TempDir dir;
  write_finetune_config(dir / "ft.json", o);
  EXPECT_EQ(read_finetune_config(dir / "ft.json"), o);
  EXPECT_EQ(finetune_config_from_json(to_json(d)), d);
}

TEST(Generate, EchoBackend) {
  EchoGenerator echo;
  GenerationRequest r;
  r.request_id = "r1";
  r.instruction = "say something";
  r.stance = Stance::against;
  const auto resp = generate(r, echo);
  EXPECT_EQ(resp.text, "[AGAINST] say something");
  EXPECT_EQ(resp.backend_id, "echo");
  EXPECT_EQ(resp.request_id, "r1");
  const auto j = to_json(resp, false);
  EXPECT_FALSE(j.contains("latency_us"));
  EXPECT_EQ(response_from_json(j).text, resp.text);
  EXPECT_EQ(request_from_json(to_json(r)).instruction, r.instruction);
}

TEST(Generate, ErrorsAreTyped) {
  struct Blank : Generator {
    std::string id() const override { return "blank"; }
    BackendOutput complete(const GenerationRequest&) override { return {"   ", {}}; }
  } blank;
  struct Down : Generator {
    std::string id() const override { return "down"; }
    BackendOutput complete(const GenerationRequest&) override { throw TransientError("503"); }
  } down;
  GenerationRequest r;
  r.instruction = "x";
  EXPECT_STG_ERROR(generate(r, blank), ErrorCode::empty_generation);
  EXPECT_STG_ERROR(generate(r, down), ErrorCode::backend_unavailable);
  struct Broken : ChatBackend {
    std::string complete(const std::string&, const ChatOptions&) override { throw TransientError("timeout"); }
  };
  RetryPolicy retry;
  retry.sleep = [](std::chrono::milliseconds) {};
  ChatGenerator chat("http", std::make_shared<Broken>(), {}, retry);
  EXPECT_STG_ERROR(generate(r, chat), ErrorCode::backend_unavailable);
}

TEST(Generate, BatchKeepsPairingUnderConcurrency) {
  struct Slow : Generator {
    std::atomic<int> in_flight{0}, peak{0};
    std::string id() const override { return "slow"; }
    BackendOutput complete(const GenerationRequest& r) override {
      const int now = ++in_flight;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1 + (std::hash<std::string>{}(r.request_id) % 5)));
      --in_flight;
      return {"reply to " + r.request_id, {}};
    }
  } slow;
  std::vector<GenerationRequest> reqs(40);
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    reqs[i].request_id = "q" + std::to_string(i);
    reqs[i].instruction = "i";
  }
  const auto out = generate_batch(reqs, slow, 4);
  ASSERT_EQ(out.size(), reqs.size());
  for (std::size_t i = 0; i < reqs.size(); ++i) EXPECT_EQ(out[i].text, "reply to " + reqs[i].request_id);
  EXPECT_LE(slow.peak.load(), 4);
}

TEST(Generate, ToyPrefixIsDeterministicAndStanceTagged) {
  ToyPrefixGenerator toy(3);
  GenerationRequest r;
  r.request_id = "r";
  r.post_text = "we will secure the border and lower prices";
  r.stance = Stance::favor;
  r.conditioning = std::vector<double>{0.1, -0.4, 0.3, 0.9};
  const auto a = toy.complete(r);
  EXPECT_EQ(a.text.rfind("[FAVOR] ", 0), 0u);
  EXPECT_EQ(toy.complete(r).text, a.text);
  r.stance = Stance::against;
  EXPECT_EQ(toy.complete(r).text.rfind("[AGAINST] ", 0), 0u);
  r.conditioning = std::vector<double>{-0.9, 0.4, -0.3, 0.1};
  EXPECT_NO_THROW(toy.complete(r));
}
