#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "hclgp/miniworld/world.hpp"
#include "hclgp/retrieval/index.hpp"
#include "hclgp/retrieval/ir_metrics.hpp"
#include "hclgp/retrieval/kernels.hpp"
#include "retrieval_fixtures.hpp"

namespace hclgp::retrieval {
namespace {

using hclgp::testing::published_row_fixture;
using hclgp::testing::brute_force_ir;
using hclgp::testing::random_unit_vectors;

// Independent n-gram oracle: count grams in a map first, then hash.
std::vector<double> oracle_ngram(const std::string& text) {
  std::string s;
  for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::map<std::string, int> grams;
  for (size_t i = 0; i + 3 <= s.size(); ++i) ++grams[s.substr(i, 3)];
  std::vector<double> v(256, 0.0);
  for (const auto& [g, n] : grams) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : g) {
      h ^= c;
      h *= 1099511628211ull;
    }
    v[h % 256] += n;
  }
  double norm = 0;
  for (double x : v) norm += x * x;
  for (double& x : v) x /= std::sqrt(norm);
  return v;
}

double oracle_cosine(const std::string& a, const std::string& b) {
  auto va = oracle_ngram(a), vb = oracle_ngram(b);
  double s = 0;
  for (size_t i = 0; i < va.size(); ++i) s += va[i] * vb[i];
  return s;
}

// --- embed ------------------------------------------------------------------

TEST(Embed, MockIsDeterministic) {
  NgramEmbedding e;
  EXPECT_EQ(e.embed("transfer money"), e.embed("transfer money"));
  EXPECT_EQ(e.embed("transfer money").dim(), 256u);
}

TEST(Embed, SelfCosineIsOne) {
  NgramEmbedding e;
  for (const char* t : {"a", "ab", "transfer money", "Login To The Pay App"}) {
    auto v = e.embed(t);
    EXPECT_NEAR(cosine(v, v), 1.0, 1e-12) << t;
  }
}

TEST(Embed, PaymentPhrasesAreCloserThanMusic) {
  NgramEmbedding e;
  auto money = e.embed("transfer money");
  double pay = cosine(money, e.embed("send payment"));
  double song = cosine(money, e.embed("play a song"));
  EXPECT_NEAR(pay, oracle_cosine("transfer money", "send payment"), 1e-12);
  EXPECT_NEAR(song, oracle_cosine("transfer money", "play a song"), 1e-12);
  EXPECT_GT(pay, song);
}

TEST(Embed, MatchesOracleOnAssortedTexts) {
  NgramEmbedding e;
  for (const char* t : {"Send Money", "fn login_to_pay() { }", "pay::transfer: Send money"}) {
    auto v = e.embed(t).values();
    auto o = oracle_ngram(t);
    for (size_t i = 0; i < v.size(); ++i) ASSERT_NEAR(v[i], o[i], 1e-15);
  }
}

TEST(Embed, EmptyTextIsRejected) {
  NgramEmbedding e;
  EXPECT_THROW(e.embed(""), Error);
}

TEST(Embed, BatchParallelMatchesSerialBitForBit) {
  NgramEmbedding e;
  std::vector<std::string> texts;
  for (int i = 0; i < 300; ++i) texts.push_back("text number " + std::to_string(i * 7919));
  EXPECT_EQ(embed_batch(e, texts), embed_batch_serial(e, texts));
  texts.push_back("");
  EXPECT_THROW(embed_batch(e, texts), Error);
}

TEST(UnitVectorType, NormInvariant) {
  EXPECT_THROW(UnitVector::normalize({0, 0}), Error);
  EXPECT_THROW(UnitVector::from_normalized({1, 1}), Error);
  auto v = UnitVector::normalize({3, 4});
  EXPECT_DOUBLE_EQ(v.values()[0], 0.6);
  EXPECT_NO_THROW(UnitVector::from_normalized(v.values()));
  EXPECT_THROW(cosine(v, UnitVector::normalize({1, 0, 0})), Error);
}

TEST(Cosine, SymmetricAndBounded) {
  auto vs = random_unit_vectors(60, 16, 5);
  for (size_t i = 0; i < vs.size(); ++i) {
    for (size_t j = 0; j < vs.size(); ++j) {
      double a = cosine(vs[i], vs[j]);
      EXPECT_EQ(a, cosine(vs[j], vs[i]));
      EXPECT_GE(a, -1.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

// --- search -----------------------------------------------------------------

VectorIndex index_of(const std::vector<UnitVector>& vs, const std::string& prefix = "v") {
  VectorIndex idx;
  for (size_t i = 0; i < vs.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%s%04zu", prefix.c_str(), i);
    idx.add({id, EntryKind::kComponent, vs[i], "", ""});
  }
  return idx;
}

std::vector<SearchHit> oracle_search(const VectorIndex& idx, const UnitVector& q, size_t k) {
  std::vector<SearchHit> all;
  for (const auto& e : idx.entries()) {
    double s = 0;
    for (size_t i = 0; i < q.dim(); ++i) s += e.vector.values()[i] * q.values()[i];
    all.push_back({e.id, s});
  }
  std::sort(all.begin(), all.end(), [](const SearchHit& a, const SearchHit& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

TEST(Search, SingletonIndex) {
  NgramEmbedding e;
  VectorIndex idx;
  idx.add({"only", EntryKind::kApiDoc, e.embed("pay money"), "", ""});
  auto q = e.embed("play music");
  auto hits = idx.search(q, 5);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].id, "only");
  EXPECT_EQ(hits[0].score, cosine(q, e.embed("pay money")));
}

TEST(Search, IndexedVectorRanksFirstWithScoreOne) {
  auto vs = random_unit_vectors(50, 32, 9);
  VectorIndex idx = index_of(vs);
  auto hits = idx.search(vs[17], 3);
  EXPECT_EQ(hits[0].id, "v0017");
  EXPECT_NEAR(hits[0].score, 1.0, 1e-12);
}

TEST(Search, MatchesExhaustiveSortOracle) {
  auto vs = random_unit_vectors(100, 24, 1);
  VectorIndex idx = index_of(vs);
  auto queries = random_unit_vectors(20, 24, 2);
  for (const auto& q : queries) {
    auto hits = idx.search(q, 20);
    auto oracle = oracle_search(idx, q, 20);
    ASSERT_EQ(hits.size(), 20u);
    for (size_t i = 0; i < hits.size(); ++i) {
      EXPECT_EQ(hits[i].id, oracle[i].id);
      EXPECT_NEAR(hits[i].score, oracle[i].score, 1e-12);
    }
    EXPECT_EQ(hits, idx.search_serial(q, 20));
  }
}

TEST(Search, ExactnessHoldsForAllSizes) {
  for (size_t n : {1u, 2u, 7u, 33u, 128u}) {
    auto vs = random_unit_vectors(n, 8, static_cast<unsigned>(n));
    VectorIndex idx = index_of(vs);
    auto q = random_unit_vectors(1, 8, 999)[0];
    for (size_t k : {size_t{1}, n / 2 + 1, n, n + 5}) {
      auto hits = idx.search(q, k);
      ASSERT_EQ(hits.size(), std::min(k, n));
      auto oracle = oracle_search(idx, q, k);
      for (size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(hits[i].id, oracle[i].id);
      for (size_t i = 1; i < hits.size(); ++i) EXPECT_GE(hits[i - 1].score, hits[i].score);
    }
  }
}

TEST(Search, TiesBreakByLexicographicId) {
  auto v = random_unit_vectors(1, 8, 4)[0];
  VectorIndex idx;
  for (const char* id : {"c", "a", "b"}) idx.add({id, EntryKind::kComponent, v, "", ""});
  auto hits = idx.search(v, 3);
  EXPECT_EQ(hits[0].id, "a");
  EXPECT_EQ(hits[1].id, "b");
  EXPECT_EQ(hits[2].id, "c");
}

TEST(Search, ErrorsAndFilters) {
  NgramEmbedding e;
  VectorIndex idx;
  idx.add({"doc", EntryKind::kApiDoc, e.embed("a doc"), "", ""});
  idx.add({"comp", EntryKind::kComponent, e.embed("a component"), "", ""});
  EXPECT_THROW(idx.search(e.embed("q"), 0), Error);
  EXPECT_THROW(idx.search(UnitVector::normalize({1, 0}), 1), Error);
  EXPECT_THROW(idx.add({"doc", EntryKind::kApiDoc, e.embed("x"), "", ""}), Error);
  EXPECT_THROW(idx.add({"z", EntryKind::kApiDoc, UnitVector::normalize({1, 0}), "", ""}), Error);
  auto hits = idx.search(e.embed("a"), 10, EntryKind::kApiDoc);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].id, "doc");
  EXPECT_TRUE(VectorIndex().search(e.embed("q"), 3).empty());
  EXPECT_TRUE(idx.remove("doc"));
  EXPECT_FALSE(idx.remove("doc"));
  EXPECT_EQ(idx.search(e.embed("a"), 10).size(), 1u);
}

TEST(Search, ConcurrentSearchesAgree) {
  auto vs = random_unit_vectors(400, 16, 21);
  VectorIndex idx = index_of(vs);
  auto qs = random_unit_vectors(16, 16, 22);
  std::vector<std::vector<SearchHit>> expected, got(qs.size());
  for (const auto& q : qs) expected.push_back(idx.search_serial(q, 10));
  std::vector<std::thread> threads;
  for (size_t i = 0; i < qs.size(); ++i) {
    threads.emplace_back([&, i] { got[i] = idx.search(qs[i], 10); });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(got, expected);
}

// --- kernels ------------------------------------------------------------------

TEST(Kernels, ParallelEqualsSerial) {
  auto vs = random_unit_vectors(257, 19, 77);
  std::vector<double> rows;
  for (const auto& v : vs) rows.insert(rows.end(), v.values().begin(), v.values().end());
  std::vector<double> a(vs.size()), b(vs.size());
  cosine_scan(rows.data(), vs.size(), 19, vs[3].data(), a.data());
  cosine_scan_serial(rows.data(), vs.size(), 19, vs[3].data(), b.data());
  EXPECT_EQ(a, b);
  auto p = pairwise_similarity(rows.data(), vs.size(), 19);
  auto s = pairwise_similarity_serial(rows.data(), vs.size(), 19);
  EXPECT_EQ(p, s);
  for (size_t i = 0; i < vs.size(); ++i) {
    for (size_t j = 0; j < vs.size(); ++j) ASSERT_EQ(p[i * vs.size() + j], p[j * vs.size() + i]);
  }
}

// --- indexing helpers ---------------------------------------------------------

TEST(IndexDocs, OneEntryPerDocAndDuplicatesRejected) {
  NgramEmbedding e;
  VectorIndex idx;
  const auto& docs = miniworld::api_docs();
  index_api_docs(idx, e, docs);
  EXPECT_EQ(idx.size(), docs.size());
  EXPECT_THROW(index_api_docs(idx, e, {docs.front()}), Error);
  EXPECT_EQ(idx.size(), docs.size());
}

TEST(IndexDocs, ComponentTextIncludesSignature) {
  NgramEmbedding e;
  VectorIndex idx;
  ComponentCard card{"c0001", PolicySignature::parse("login_to_app(app: string)"),
                     "Log into any app."};
  index_components(idx, e, {card});
  auto entry = idx.find("c0001");
  ASSERT_TRUE(entry.has_value());
  EXPECT_NE(entry->text.find("login_to_app(app: string)"), std::string::npos);
  EXPECT_EQ(entry->text_hash, hash_hex(entry->text));
  EXPECT_EQ(entry->vector, e.embed(entry->text));
}

TEST(IndexDocs, TransferRetrievesPayApis) {
  NgramEmbedding e;
  VectorIndex idx;
  index_api_docs(idx, e, miniworld::api_docs());
  auto hits = idx.search(e.embed("pay::transfer: Send money from the logged-in account"), 1);
  EXPECT_EQ(hits[0].id, "pay::transfer");
}

TEST(IndexEntryJson, RoundTripsBitForBit) {
  NgramEmbedding e;
  IndexEntry entry{"x", EntryKind::kApiDoc, e.embed("hello world"), "hello world",
                   hash_hex("hello world")};
  Json j = entry;
  IndexEntry back = Json::parse(j.dump()).get<IndexEntry>();
  EXPECT_EQ(back, entry);
}

// --- ir metrics ---------------------------------------------------------------

TEST(IrMetrics, AllFirstRankGivesOne) {
  auto m = ir_metrics({{"a", "x"}, {"b"}}, {{"a"}, {"b"}}, {1, 5});
  EXPECT_EQ(m.mrr, 1.0);
  EXPECT_EQ(m.map, 1.0);
  EXPECT_EQ(m.recall_at[1], 1.0);
}

TEST(IrMetrics, SingleQueryRankFour) {
  auto m = ir_metrics({{"a", "b", "c", "r", "e"}}, {{"r"}}, {5});
  EXPECT_EQ(m.mrr, 0.25);
  EXPECT_EQ(m.recall_at[5], 1.0);
  EXPECT_EQ(m.map, 0.25);
}

TEST(IrMetrics, NoHitsGiveZeroAndEmptyRelevantIsAnError) {
  auto m = ir_metrics({{"a"}}, {{"z"}}, {1});
  EXPECT_EQ(m.mrr, 0.0);
  EXPECT_EQ(m.map, 0.0);
  EXPECT_EQ(m.recall_at[1], 0.0);
  EXPECT_THROW(ir_metrics({{"a"}}, {{}}, {1}), Error);
  EXPECT_THROW(ir_metrics({{"a"}}, {}, {1}), Error);
  EXPECT_THROW(ir_metrics({{"a"}}, {{"a"}}, {0}), Error);
}

TEST(IrMetrics, MatchesBruteForceOnRandomRankings) {
  std::mt19937 rng(5);
  for (int round = 0; round < 20; ++round) {
    std::vector<std::vector<std::string>> rankings;
    std::vector<std::set<std::string>> relevants;
    for (int q = 0; q < 50; ++q) {
      std::vector<std::string> ids;
      for (int i = 0; i < 30; ++i) ids.push_back("d" + std::to_string(i));
      std::shuffle(ids.begin(), ids.end(), rng);
      ids.resize(rng() % 25);
      std::set<std::string> rel;
      for (int i = 0, n = 1 + rng() % 4; i < n; ++i) rel.insert("d" + std::to_string(rng() % 30));
      rankings.push_back(ids);
      relevants.push_back(rel);
    }
    auto m = ir_metrics(rankings, relevants, {1, 5, 10, 20});
    auto o = brute_force_ir(rankings, relevants, {1, 5, 10, 20});
    EXPECT_NEAR(m.mrr, o.mrr, 1e-12);
    EXPECT_NEAR(m.map, o.map, 1e-12);
    for (int k : {1, 5, 10, 20}) EXPECT_NEAR(m.recall_at[k], o.recall_at[k], 1e-12);
    // Bounds and monotonicity.
    EXPECT_GE(m.mrr, 0.0);
    EXPECT_LE(m.mrr, 1.0);
    EXPECT_LE(m.map, 1.0);
    EXPECT_LE(m.recall_at[1], m.recall_at[5]);
    EXPECT_LE(m.recall_at[5], m.recall_at[10]);
    EXPECT_LE(m.recall_at[10], m.recall_at[20]);
  }
}

TEST(IrMetrics, MapIsOneExactlyWhenRelevantHitsFormAPrefix) {
  EXPECT_EQ(ir_metrics({{"a", "b", "x"}}, {{"a", "b"}}, {1}).map, 1.0);
  EXPECT_LT(ir_metrics({{"a", "x", "b"}}, {{"a", "b"}}, {1}).map, 1.0);
}

TEST(IrMetrics, PublishedRowFixture) {
  auto fx = published_row_fixture();
  auto m = ir_metrics(fx.rankings, fx.relevants, {5, 10, 20});
  EXPECT_EQ(m.mrr, 0.24);
  EXPECT_EQ(m.recall_at[10], 0.565);
  EXPECT_EQ(m.recall_at[5], 0.362);
  EXPECT_EQ(m.recall_at[20], 0.683);
  EXPECT_EQ(std::round(m.map * 100) / 100, 0.44);
}

}  // namespace
}  // namespace hclgp::retrieval
