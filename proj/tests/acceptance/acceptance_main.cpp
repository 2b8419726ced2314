// SPDX-License-Identifier: Apache-2.0
// Acceptance runner: one PASS/FAIL line per criterion, exit 1 on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stancegen/annotation/kappa.hpp"
#include "stancegen/annotation/queue.hpp"
#include "stancegen/corpus/corpus.hpp"
#include "stancegen/corpus/stats.hpp"
#include "stancegen/eval/metrics.hpp"
#include "stancegen/eval/report.hpp"
#include "stancegen/generation/generation.hpp"
#include "stancegen/run/run.hpp"
#include "stancegen/sdmg/fusion.hpp"
#include "stancegen/sdmg/gradcheck.hpp"
#include "stancegen/util/jsonl.hpp"

using namespace stancegen;
using sdmg::Index;
using sdmg::MatD;
using sdmg::VecD;
using testing_support::random_matrix;
using testing_support::random_vector;

namespace {

/// Collects failures for one criterion; the first few are echoed.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    if (failures_.size() < 5) failures_.push_back(what);
    ++failed_;
  }
  void note(std::string s) { notes_.push_back(std::move(s)); }
  bool ok() const { return failed_ == 0; }
  std::string detail() const {
    std::ostringstream o;
    o << total_ - failed_ << "/" << total_ << " checks";
    for (const auto& n : notes_) o << "; " << n;
    for (const auto& f : failures_) o << "; FAILED " << f;
    return o.str();
  }

 private:
  std::size_t total_ = 0, failed_ = 0;
  std::vector<std::string> failures_, notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

bool bitwise_equal(const VecD& a, const VecD& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

sdmg::ProjectionParams<double> random_proj(std::mt19937_64& rng, Index d, Index dv, Index dt) {
  return {random_matrix(rng, d, dv, 0.3), random_matrix(rng, d, dt, 0.3), random_matrix(rng, d, dv, 0.3)};
}

// --- sdmg -----------------------------------------------------------------

void literal_degeneracy(Check& c) {
  std::mt19937_64 rng(101);
  const Index dims[] = {4, 64, 256};
  std::vector<std::array<VecD, 3>> triples;
  for (int i = 0; i < 1000; ++i) {
    const Index d = dims[i % 3];
    triples.push_back({random_vector(rng, d, 3.0), random_vector(rng, d, 3.0), random_vector(rng, d)});
  }
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t same = 0;
  for (const auto& [q, k, v] : triples) same += bitwise_equal(sdmg::tsa_attend_literal(q, k, v), v);
  const double secs = seconds_since(t0);
  c.expect(same == triples.size(), std::to_string(triples.size() - same) + " triples differ");
  c.expect(secs < 1.0, "runtime " + fmt(secs) + " s");
  c.note("1000 triples bitwise, " + fmt(secs * 1e3) + " ms");
}

void pooled_oracle(Check& c) {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> mdist(1, 8), ddist(1, 64);
  double worst_out = 0.0, worst_w = 0.0, worst_sum = 0.0;
  bool envelope = true;
  for (int i = 0; i < 500; ++i) {
    const Index m = mdist(rng), d = ddist(rng), dv = ddist(rng), dt = ddist(rng);
    const auto p = random_proj(rng, d, dv, dt);
    const MatD tokens = random_matrix(rng, m, dv);
    const VecD text = random_vector(rng, dt);
    const auto got = sdmg::tsa_attend_pooled_detail(tokens, text, p);
    const auto want = oracle::pooled_attention(testing_support::to_rows(tokens), testing_support::to_std(text),
                                               testing_support::to_rows(p.W_q), testing_support::to_rows(p.W_k),
                                               testing_support::to_rows(p.W_v));
    for (Index j = 0; j < d; ++j) worst_out = std::max(worst_out, std::abs(got.output(j) - want.output[j]));
    for (Index j = 0; j < m; ++j) worst_w = std::max(worst_w, std::abs(got.weights(j) - want.weights[j]));
    worst_sum = std::max(worst_sum, std::abs(got.weights.sum() - 1.0));
    envelope &= (got.weights.array() >= 0.0).all();
    for (Index j = 0; j < d; ++j) {
      envelope &= got.output(j) <= got.values.row(j).maxCoeff() + 1e-12;
      envelope &= got.output(j) >= got.values.row(j).minCoeff() - 1e-12;
    }
  }
  c.expect(worst_out <= 1e-12, "output error " + fmt(worst_out));
  c.expect(worst_w <= 1e-12, "weight error " + fmt(worst_w));
  c.expect(worst_sum <= 1e-12, "weight sum error " + fmt(worst_sum));
  c.expect(envelope, "convex envelope violated");
  c.note("max abs error " + fmt(worst_out) + ", max |sum-1| " + fmt(worst_sum));
}

void grad_check_all(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_at;
  bool saw_prompt = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto in = sdmg::make_gradcheck_inputs({}, seed);
    for (sdmg::GradOp op : sdmg::all_grad_ops()) {
      const auto r = sdmg::grad_check(op, in, 1e-5);
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        worst_at = sdmg::to_string(op) + " seed " + std::to_string(seed);
      }
      if (op == sdmg::GradOp::prompt_pipeline) {
        saw_prompt &= std::any_of(r.blocks.begin(), r.blocks.end(), [](const auto& b) { return b.name == "P_V"; });
      }
    }
  }
  const double secs = seconds_since(t0);
  c.expect(worst < 1e-4, "max rel error " + fmt(worst) + " at " + worst_at);
  c.expect(saw_prompt, "P_V block not checked");
  c.expect(secs < 30.0, "runtime " + fmt(secs) + " s");
  c.note(std::to_string(sdmg::all_grad_ops().size()) + " ops x 100 seeds, max rel error " + fmt(worst) + ", " +
         fmt(secs) + " s");
}

void single_token_reduction(Check& c) {
  std::mt19937_64 rng(104);
  std::size_t same = 0;
  for (int i = 0; i < 200; ++i) {
    const Index d = 1 + static_cast<Index>(rng() % 64);
    const auto p = random_proj(rng, d, d, d);
    const MatD token = random_matrix(rng, 1, d);
    const VecD text = random_vector(rng, d);
    const auto pr = sdmg::project_qkv(VecD(token.row(0).transpose()), text, p);
    same += bitwise_equal(sdmg::tsa_attend_pooled(token, text, p), sdmg::tsa_attend_literal(pr.q, pr.k, pr.v));
  }
  c.expect(same == 200, std::to_string(200 - same) + " instances differ");
  c.note("200 instances bitwise");
}

// --- annotation -----------------------------------------------------------

using Table = std::vector<std::vector<std::size_t>>;

double kappa(const Table& t) { return annotation::cohen_kappa(annotation::ContingencyTable{t}); }

void kappa_properties(Check& c) {
  c.expect(kappa({{10, 0}, {0, 15}}) == 1.0, "perfect agreement");
  c.expect(std::abs(kappa({{25, 25}, {25, 25}})) <= 1e-12, "chance agreement");
  const double k = kappa({{20, 5}, {10, 15}});
  c.expect(std::abs(k - 0.4) <= 1e-12, "[[20,5],[10,15]] gave " + fmt(k, 17));
  c.expect(std::abs(k - oracle::kappa({{20, 5}, {10, 15}})) <= 1e-12, "oracle disagrees");
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<int> k_dist(2, 5), c_dist(0, 30);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = static_cast<std::size_t>(k_dist(rng));
    Table tab(n, std::vector<std::size_t>(n));
    for (auto& row : tab) for (auto& v : row) v = static_cast<std::size_t>(c_dist(rng));
    tab[0][0] += 1;
    Table swapped = tab, renamed = tab;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        swapped[i][j] = tab[j][i];
        renamed[perm[i]][perm[j]] = tab[i][j];
      }
    }
    const double base = kappa(tab);
    c.expect(std::abs(base - oracle::kappa(tab)) <= 1e-12, "oracle table " + std::to_string(t));
    c.expect(kappa(swapped) == base, "swap table " + std::to_string(t));
    c.expect(kappa(renamed) == base, "renaming table " + std::to_string(t));
  }
  c.note("kappa([[20,5],[10,15]]) = " + fmt(k, 17));
}

annotation::AnnotationRecord rec(const std::string& who, const std::string& sample, Stance s,
                                 Topic t = Topic::other) {
  return {who, sample, s, t, std::nullopt, "2024-11-01T00:00:00Z"};
}

void state_machine(Check& c) {
  using annotation::QueueState;
  const std::vector<std::string> who{"ann1", "ann2", "ann3"};
  std::size_t paths = 0;
  for (unsigned bits = 0; bits < 8; ++bits) {
    std::vector<Stance> seq;
    for (int i = 0; i < 3; ++i) seq.push_back((bits >> i) & 1u ? Stance::against : Stance::favor);
    annotation::QueueEntry e;
    e.sample_id = "s";
    std::size_t applied = 0;
    for (; applied < 3; ++applied) {
      if (e.state == QueueState::resolved) break;
      e = annotation::apply_human_label(e, rec(who[applied], "s", seq[applied]));
    }
    const Stance want = seq[0] == seq[1] ? seq[0] : seq[2];
    const std::string where = "sequence " + std::to_string(bits);
    c.expect(e.state == QueueState::resolved, where + " not resolved");
    c.expect(e.final_label && e.final_label->stance == want, where + " wrong final label");
    c.expect(applied == (seq[0] == seq[1] ? 2u : 3u), where + " wrong number of labels used");
    ++paths;
  }
  // Prefixes must stay open.
  for (unsigned bits = 0; bits < 4; ++bits) {
    annotation::QueueEntry e;
    e.sample_id = "s";
    e = annotation::apply_human_label(e, rec("ann1", "s", bits & 1u ? Stance::against : Stance::favor));
    c.expect(e.state == QueueState::awaiting_second && !e.final_label, "one label resolved early");
    e = annotation::apply_human_label(e, rec("ann2", "s", bits & 2u ? Stance::against : Stance::favor));
    const bool agree = ((bits & 1u) != 0) == ((bits & 2u) != 0);
    c.expect(e.state == (agree ? QueueState::resolved : QueueState::needs_third), "two-label state");
    ++paths;
  }

  std::mt19937_64 rng(106);
  std::uniform_int_distribution<int> samples(0, 3), ann(0, 4), coin(0, 1), len(1, 12);
  std::size_t backward = 0, replay_mismatch = 0;
  for (int log = 0; log < 10000; ++log) {
    annotation::AnnotationQueue q;
    for (int s = 0; s <= 3; ++s) q.enqueue("s" + std::to_string(s), {"post", "img", "c"}, {});
    std::map<std::string, annotation::QueueEntry> last;
    for (const auto& e : q.entries()) last[e.sample_id] = e;
    for (int step = len(rng); step > 0; --step) {
      const std::string sid = "s" + std::to_string(samples(rng));
      try {
        q.submit(rec("h" + std::to_string(ann(rng)), sid, coin(rng) ? Stance::favor : Stance::against,
                     coin(rng) ? Topic::other : Topic::self_promotion));
      } catch (const Error&) {
      }
      const auto now = *q.entry(sid);
      const auto& before = last[sid];
      if (static_cast<int>(now.state) < static_cast<int>(before.state) ||
          now.human_labels.size() < before.human_labels.size() ||
          (before.final_label && now.final_label != before.final_label)) {
        ++backward;
      }
      last[sid] = now;
    }
    replay_mismatch += annotation::AnnotationQueue::replay(q.events()).snapshot().dump() != q.snapshot().dump();
  }
  c.expect(backward == 0, std::to_string(backward) + " backward moves");
  c.expect(replay_mismatch == 0, std::to_string(replay_mismatch) + " replays differ");
  c.note(std::to_string(paths) + " label paths, 10000 fuzzed logs");
}

// --- corpus ---------------------------------------------------------------

void cleaning(Check& c) {
  std::map<std::string, std::string> golden;
  util::for_each_jsonl(testing_support::data_path("clean/clean_golden.jsonl"),
                       [&](const nlohmann::json& j, std::size_t) {
                         golden[j.at("id").get<std::string>()] = j.at("clean").get<std::string>();
                       });
  std::size_t n = 0, match = 0;
  util::for_each_jsonl(testing_support::data_path("clean/raw_tweets.jsonl"), [&](const nlohmann::json& j, std::size_t) {
    ++n;
    const auto it = golden.find(j.at("id").get<std::string>());
    match += it != golden.end() && corpus::clean_text(j.at("raw").get<std::string>()) == it->second;
  });
  c.expect(n == 100, "fixture has " + std::to_string(n) + " tweets");
  c.expect(match == n, std::to_string(n - match) + " goldens differ");

  using testing_support::words;
  c.expect(!corpus::passes_length_filter(words(9)), "9 words accepted");
  c.expect(corpus::passes_length_filter(words(10)), "10 words rejected");
  c.expect(corpus::passes_length_filter(words(128)), "128 words rejected");
  c.expect(!corpus::passes_length_filter(words(129)), "129 words accepted");

  std::mt19937_64 rng(107);
  std::size_t stable = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string once = corpus::clean_text(testing_support::fuzz_string(rng));
    stable += corpus::clean_text(once) == once;
  }
  c.expect(stable == 1000, std::to_string(1000 - stable) + " fuzz strings not idempotent");
  c.note(std::to_string(match) + "/100 goldens, 1000 fuzz strings idempotent");
}

void expansion(Check& c) {
  std::mt19937_64 rng(108);
  std::uniform_int_distribution<int> count(0, 6), kind(0, 2);
  std::bernoulli_distribution has_frame(0.5);
  std::size_t samples = 0;
  for (int i = 0; i < 500; ++i) {
    corpus::Post p;
    p.id = "p" + std::to_string(i);
    p.text = testing_support::words(12);
    std::size_t images = 0, framed = 0;
    for (int m = count(rng); m > 0; --m) {
      const auto k = static_cast<MediaKind>(kind(rng));
      const std::string uri = "m" + std::to_string(m);
      if (k == MediaKind::image) {
        p.media.push_back({k, uri, std::nullopt});
        ++images;
      } else if (has_frame(rng)) {
        p.media.push_back({k, uri, uri + ".frame0.jpg"});
        ++framed;
      } else {
        p.media.push_back({k, uri, std::nullopt});
      }
    }
    std::size_t got = 0;
    try {
      got = corpus::expand_post(p).stubs.size();
    } catch (const Error& e) {
      c.expect(e.code() == ErrorCode::no_usable_media, "unexpected error on post " + p.id);
    }
    c.expect(got == images + framed, "post " + p.id + ": " + std::to_string(got) + " samples");
    samples += got;
  }
  c.note("500 posts, " + std::to_string(samples) + " samples");
}

void harris_stats(Check& c) {
  const auto corpus = testing_support::synthetic_corpus({{Author::harris, 837, 1596, 10529}});
  const auto r = corpus::corpus_stats(corpus);
  const auto& h = r.by_author.at(Author::harris);
  const double against_pct = std::round(h.against_proportion * 1000.0) / 10.0;
  const double favor_pct = std::round(h.favor_proportion * 1000.0) / 10.0;
  c.expect(h.favor == 1596, "favor " + std::to_string(h.favor));
  c.expect(h.against == 10529, "against " + std::to_string(h.against));
  c.expect(h.samples == 12125, "samples " + std::to_string(h.samples));
  c.expect(against_pct == 86.8, "against " + fmt(against_pct) + "%");
  c.expect(favor_pct == 13.2, "favor " + fmt(favor_pct) + "%");
  c.note("1596 favor / 10529 against, " + fmt(against_pct) + "% against");
}

// --- eval -----------------------------------------------------------------

eval::EvalItem item(const std::string& id, Stance requested, const std::string& generated) {
  eval::EvalItem it;
  it.item_id = id;
  it.sample_id = id;
  it.requested = requested;
  it.generated = generated;
  it.reference = "ref " + id;
  it.image_path = "img/" + id + ".jpg";
  it.model = "m";
  it.modality = eval::Modality::multimodal;
  it.target = "H";
  return it;
}

void metrics(Check& c) {
  std::mt19937_64 rng(109);
  {
    std::map<std::string, Stance> table;
    std::vector<eval::EvalItem> items;
    for (int i = 0; i < 50; ++i) {
      const Stance want = rng() % 2 ? Stance::favor : Stance::against;
      const Stance got = rng() % 3 ? want : (want == Stance::favor ? Stance::against : Stance::favor);
      const std::string text = "response " + std::to_string(i);
      table[text] = got;
      items.push_back(item(std::to_string(i), want, text));
    }
    const eval::ScriptedClassifier cls(table);
    std::size_t hits = 0;
    for (const auto& it : items) hits += table.at(it.generated) == it.requested;
    const double ctrl = eval::controllability(items, &cls);
    c.expect(ctrl == static_cast<double>(hits) / 50.0, "controllability " + fmt(ctrl));
  }
  for (std::size_t vocab : {2u, 100u, 32000u, 128256u}) {
    const eval::UniformScorer u(vocab);
    std::vector<eval::EvalItem> items;
    for (int n = 1; n <= 40; ++n) {
      std::string text;
      for (int w = 0; w < n; ++w) text += "w" + std::to_string(w) + " ";
      items.push_back(item(std::to_string(n), Stance::favor, text));
    }
    const auto r = eval::perplexity(items, &u);
    c.expect(r.mean == static_cast<double>(vocab), "uniform perplexity " + fmt(r.mean, 17));
  }
  {
    std::normal_distribution<double> n(0, 1);
    std::map<std::string, std::vector<double>> text, images;
    std::vector<eval::EvalItem> items;
    auto vec = [&](std::size_t d) {
      std::vector<double> v(d);
      for (auto& x : v) x = n(rng);
      return v;
    };
    for (int i = 0; i < 50; ++i) {
      auto it = item(std::to_string(i), Stance::favor, "gen " + std::to_string(i));
      text[it.generated] = vec(32);
      text[it.reference] = vec(32);
      images[it.image_path] = vec(32);
      items.push_back(it);
    }
    const eval::ScriptedEmbedder te(text);
    const eval::ScriptedJointEmbedder je(text, images);
    std::vector<double> rel, cm;
    for (const auto& it : items) {
      rel.push_back(oracle::cosine(text[it.generated], text[it.reference]));
      cm.push_back(oracle::cosine(text[it.generated], images[it.image_path]));
    }
    c.expect(std::abs(eval::relevance(items, &te) - oracle::mean(rel)) <= 1e-9, "relevance vs oracle");
    c.expect(std::abs(eval::cmss(items, &je) - oracle::mean(cm)) <= 1e-9, "cmss vs oracle");
  }
  {
    const auto report = testing_support::load_published_table("eval/table2_published.json");
    const auto marks = util::read_json(testing_support::data_path("eval/table2_published.json"))["published_marks"];
    const std::string text = eval::render_text(report);
    std::vector<std::string> data;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
      if (l.find("0.") != std::string::npos) data.push_back(l);
    }
    c.expect(data.size() == 8, "table has " + std::to_string(data.size()) + " data rows");
    if (data.size() == 8) {
      const std::string& row = data.back();
      c.expect(row.find("LLaVA-SDMG") != std::string::npos, "LLaVA-SDMG is not the last row");
      for (const char* v : {"0.9257", "0.1908", "0.5442", "58.6329"}) {
        c.expect(row.find(v) != std::string::npos, std::string("missing ") + v);
      }
      c.expect(row.find("**0.9257**") != std::string::npos, "0.9257 not bold");
      c.expect(data[4].find("Multi-modal") != std::string::npos, "Multi-modal block start");
    }
    // Bold marks across every column must match the published table.
    const auto h = eval::highlights(report);
    const std::map<eval::Metric, std::string> names{{eval::Metric::controllability, "controllability"},
                                                    {eval::Metric::cmss, "cmss"},
                                                    {eval::Metric::relevance, "relevance"},
                                                    {eval::Metric::perplexity, "perplexity"}};
    const std::size_t sdmg_row = report.rows.size() - 1;
    for (const auto& [metric, name] : names) {
      const auto& col = h.at({metric, ""});
      bool published_bold = false, published_under = false;
      const std::string key = "Multi-modal/" + report.rows[sdmg_row].model;
      for (const auto& k : marks[name]["bold"]) published_bold |= k == key;
      for (const auto& k : marks[name]["underline"]) published_under |= k == key;
      c.expect((col[sdmg_row] == eval::Highlight::bold) == published_bold, "LLaVA-SDMG bold on " + name);
      if ((col[sdmg_row] == eval::Highlight::underline) != published_under) {
        c.note("LLaVA-SDMG " + name + " underline differs from the published marks (a higher value exists)");
      }
    }
  }
}

void split_integrity(Check& c) {
  std::mt19937_64 rng(111);
  std::size_t bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto samples = testing_support::fuzz_corpus(rng);
    const std::uint64_t seed = rng();
    const auto r = generation::split_dataset(samples, 0.8, seed);
    std::multiset<std::string> got;
    std::set<std::string> all, train_posts, test_posts;
    for (const auto& s : samples) all.insert(s.sample_id);
    for (const auto& s : r.train) got.insert(s.sample_id), train_posts.insert(s.post_id);
    for (const auto& s : r.test) got.insert(s.sample_id), test_posts.insert(s.post_id);
    bool ok = got.size() == samples.size() && std::set<std::string>(got.begin(), got.end()) == all;
    for (const auto& p : train_posts) ok &= test_posts.count(p) == 0;
    const double groups = static_cast<double>(train_posts.size() + test_posts.size());
    ok &= std::abs(static_cast<double>(train_posts.size()) - 0.8 * groups) <= 1.0;
    const auto again = generation::split_dataset(samples, 0.8, seed);
    ok &= again.train.size() == r.train.size();
    for (std::size_t i = 0; ok && i < r.train.size(); ++i) ok &= again.train[i].sample_id == r.train[i].sample_id;
    for (std::size_t i = 0; ok && i < r.test.size(); ++i) ok &= again.test[i].sample_id == r.test[i].sample_id;
    if (!ok) c.expect(false, "corpus " + std::to_string(t));
    bad += !ok;
  }
  c.expect(bad == 0, std::to_string(bad) + " corpora broken");
  c.note("1000 corpora");
}

// --- end to end -----------------------------------------------------------

void end_to_end(Check& c) {
  testing_support::TempDir dir("stancegen-accept");
  auto cfg = run::load_run_config(testing_support::data_path("e2e/config.json"));
  cfg.output = dir / "out";
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = run::run_end_to_end(cfg);
  const double secs = seconds_since(t0);
  const auto golden = util::read_json(testing_support::data_path("e2e/golden_manifest.json"));
  const auto want = golden.at("artifacts").get<std::map<std::string, std::string>>();
  const auto diffs = run::compare_artifacts(want, m.artifacts());
  for (const auto& d : diffs) c.expect(false, d);
  c.expect(diffs.empty(), std::to_string(diffs.size()) + " artifacts differ");
  c.expect(nlohmann::json(m.inputs) == golden.at("inputs"), "input hashes differ");
  c.expect(secs < 60.0, "runtime " + fmt(secs) + " s");
  c.note(std::to_string(want.size()) + " artifact hashes, " + fmt(secs) + " s");
}

struct Criterion {
  const char* name;
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  // Tiny fuzzed corpora trip the empty-split warning on purpose.
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria = {
      {"literal attention returns V bitwise (1000 triples, < 1 s)", literal_degeneracy},
      {"pooled attention matches oracle within 1e-12 (500 instances)", pooled_oracle},
      {"gradient check max rel error < 1e-4 (100 seeds, eps 1e-5, < 30 s)", grad_check_all},
      {"single-token pooled equals literal exactly (200 instances)", single_token_reduction},
      {"cohen kappa fixtures and invariances (200 tables)", kappa_properties},
      {"annotation state machine paths, 10000 fuzzed logs, replay", state_machine},
      {"text cleaning goldens, length bounds, idempotence", cleaning},
      {"media expansion arithmetic (500 posts)", expansion},
      {"corpus statistics on the Harris row", harris_stats},
      {"metrics with stub backends and results table layout", metrics},
      {"train/test split integrity (1000 corpora)", split_integrity},
      {"offline end-to-end run reproduces manifest (< 60 s)", end_to_end},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Check c;
    try {
      crit.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.ok() ? "PASS" : "FAIL") << "  " << crit.name << "  [" << c.detail() << "]" << std::endl;
    failed += !c.ok();
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
