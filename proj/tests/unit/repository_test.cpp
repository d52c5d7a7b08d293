#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "hclgp/lang/instantiate.hpp"
#include "hclgp/lang/parser.hpp"
#include "hclgp/repo/repository.hpp"
#include "test_util.hpp"

namespace hclgp::repo {
namespace {

using hclgp::testing::TempDir;

const char* kLoginMail = R"(fn login_to_mail() {
  let profile = supervisor::profile()
  let secret = supervisor::password(app: "mail")
  mail::login(username: profile.email, password: secret.password)
})";

const char* kLoginPay = R"(fn login_to_pay() {
  let profile = supervisor::profile()
  let secret = supervisor::password(app: "pay")
  pay::login(username: profile.email, password: secret.password)
})";

const char* kLoginApp = R"(fn login_to_app(app: string) {
  let profile = supervisor::profile()
  let secret = supervisor::password(app: app)
  api(app, "login", username: profile.email, password: secret.password)
})";

std::shared_ptr<retrieval::EmbeddingProvider> ngram() {
  return std::make_shared<retrieval::NgramEmbedding>();
}

Component learned(const char* body, const std::string& domain) {
  auto c = make_component(body, "Log in.", "Call before any app api.");
  c.origin_domains = {domain};
  return c;
}

double round_to(double x, int digits) {
  double scale = std::pow(10.0, digits);
  return std::round(x * scale) / scale;
}

// --- stores -------------------------------------------------------------

TEST(Repository, AddLearnedThenGet) {
  Repository repo(ngram());
  auto c = learned(kLoginMail, "mail_send");
  auto id = repo.add_learned(c);
  auto got = repo.get(id);
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(got->body, c.body);
  EXPECT_EQ(got->name, "login_to_mail");
  EXPECT_EQ(got->provenance, Provenance::kLearned);
  EXPECT_EQ(repo.status(id), ComponentStatus::kLearned);
  EXPECT_EQ(repo.learned_count(), 1u);
  EXPECT_EQ(repo.live_count(), 0u);
}

TEST(Repository, LearnedStoreAllowsDuplicateNames) {
  Repository repo(ngram());
  auto a = repo.add_learned(learned(kLoginMail, "d1"));
  auto b = repo.add_learned(learned(kLoginMail, "d2"));
  EXPECT_NE(a, b);
  EXPECT_EQ(repo.learned_count(), 2u);
  EXPECT_LT(repo.get(a)->created_at, repo.get(b)->created_at);
}

TEST(Repository, AddLearnedRejectsBadBodies) {
  Repository repo(ngram());
  Component bad;
  bad.name = "broken";
  bad.body = "fn broken() { return missing_var }";
  EXPECT_THROW(repo.add_learned(bad), lang::ParseError);
  auto renamed = learned(kLoginMail, "d");
  renamed.name = "other";
  EXPECT_THROW(repo.add_learned(renamed), InvariantError);
  EXPECT_EQ(repo.learned_count(), 0u);
}

TEST(Repository, PromoteOneReplacingTwoIsNetMinusOne) {
  Repository repo(ngram());
  auto mail = repo.add_learned(learned(kLoginMail, "mail_send"));
  auto pay = repo.add_learned(learned(kLoginPay, "pay_friend"));
  repo.promote({*repo.get(mail), *repo.get(pay)}, {});
  ASSERT_EQ(repo.live_count(), 2u);
  EXPECT_EQ(repo.learned_count(), 0u);

  auto ids = repo.promote({make_component(kLoginApp, "Log into any app.")}, {mail, pay});
  EXPECT_EQ(repo.live_count(), 1u);
  EXPECT_EQ(repo.status(mail), ComponentStatus::kTombstoned);
  EXPECT_EQ(repo.status(pay), ComponentStatus::kTombstoned);
  auto merged = repo.get(ids[0]);
  EXPECT_EQ(merged->provenance, Provenance::kLearned);
  EXPECT_EQ(merged->origin_domains, (std::vector<std::string>{"mail_send", "pay_friend"}));
}

TEST(Repository, MergingSeedComponentsMarksSeedModified) {
  Repository training(ngram());
  auto mail = training.add_learned(learned(kLoginMail, "mail_send"));
  training.promote({*training.get(mail)}, {});
  Repository repo = training.seed_snapshot();
  EXPECT_EQ(repo.get(mail)->provenance, Provenance::kSeedUnchanged);

  auto pay = repo.add_learned(learned(kLoginPay, "pay_many"));
  auto ids = repo.promote({make_component(kLoginApp)}, {mail, pay});
  EXPECT_EQ(repo.get(ids[0])->provenance, Provenance::kSeedModified);

  // Learned-only merges never become seed.
  auto a = repo.add_learned(learned(kLoginMail, "x"));
  auto lone = make_component(kLoginMail);
  lone.name = "login_mail_only";
  lone.body = R"(fn login_mail_only() {
  login_to_app("mail")
})";
  lone.signature = PolicySignature::parse("login_mail_only()");
  auto ids2 = repo.promote({lone}, {a});
  EXPECT_EQ(repo.get(ids2[0])->provenance, Provenance::kLearned);
}

TEST(Repository, NameCollisionLeavesStoreUnchanged) {
  Repository repo(ngram());
  auto first = repo.add_learned(learned(kLoginMail, "d1"));
  repo.promote({*repo.get(first)}, {});
  auto second = repo.add_learned(learned(kLoginMail, "d2"));
  auto before = repo.state_hash();
  EXPECT_THROW(repo.promote({*repo.get(second)}, {}), Error);
  EXPECT_EQ(repo.state_hash(), before);
  // Replacing the holder of the name clears the collision.
  EXPECT_NO_THROW(repo.promote({*repo.get(second)}, {first}));
  EXPECT_EQ(repo.status(first), ComponentStatus::kTombstoned);
}

TEST(Repository, PromoteRejectsUnknownOrDeadIds) {
  Repository repo(ngram());
  auto id = repo.add_learned(learned(kLoginMail, "d"));
  EXPECT_THROW(repo.promote({}, {"c9999"}), Error);
  repo.promote({make_component(kLoginApp)}, {id});
  auto before = repo.state_hash();
  EXPECT_THROW(repo.promote({}, {id}), Error);
  auto copy = *repo.get(id);
  EXPECT_THROW(repo.promote({copy}, {}), Error);
  EXPECT_EQ(repo.state_hash(), before);
}

TEST(Repository, TombstonesStayOutOfSearchAndSummaries) {
  Repository repo(ngram());
  auto mail = repo.add_learned(learned(kLoginMail, "d"));
  repo.promote({*repo.get(mail)}, {});
  auto q = repo.embedder().embed("login mail");
  EXPECT_EQ(repo.search(q, 5).size(), 1u);
  auto ids = repo.promote({make_component(kLoginApp)}, {mail});
  auto hits = repo.search(q, 5);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].id, ids[0]);
  EXPECT_TRUE(repo.summaries_for_prompt({mail}).empty());
  EXPECT_TRUE(repo.get(mail).has_value());
  EXPECT_EQ(repo.tombstoned().size(), 1u);
}

TEST(Repository, SummariesCarrySignatureAndUsageButNoBody) {
  Repository repo(ngram());
  auto id = repo.add_learned(learned(kLoginMail, "d"));
  repo.promote({*repo.get(id)}, {});
  auto blocks = repo.summaries_for_prompt({id});
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_NE(blocks[0].find("login_to_mail()"), std::string::npos);
  EXPECT_NE(blocks[0].find("Call before any app api."), std::string::npos);
  EXPECT_EQ(blocks[0].find("supervisor::profile"), std::string::npos);
  EXPECT_TRUE(repo.summaries_for_prompt({}).empty());
}

TEST(Repository, SummariesFollowInputOrder) {
  Repository repo(ngram());
  std::vector<Component> incoming;
  for (int i = 0; i < 20; ++i) {
    std::string name = "step_" + std::to_string(i);
    incoming.push_back(make_component("fn " + name + "() {\n  notes::list_notes()\n}"));
  }
  auto ids = repo.promote(incoming, {});
  std::vector<std::string> shuffled = ids;
  std::mt19937 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto blocks = repo.summaries_for_prompt(shuffled);
  ASSERT_EQ(blocks.size(), 20u);
  for (size_t i = 0; i < 20; ++i) {
    auto name = repo.get(shuffled[i])->name;
    EXPECT_EQ(blocks[i].rfind("name: " + name + "\n", 0), 0u) << i;
  }
}

TEST(Repository, ResolverPrefersTheDomainsOwnLearnedComponent) {
  Repository repo(ngram());
  auto live = repo.promote({make_component(kLoginMail)}, {})[0];
  auto mine = repo.add_learned(learned(kLoginMail, "mail_send"));
  EXPECT_EQ(repo.resolve_id("mail_send", "login_to_mail"), mine);
  EXPECT_EQ(repo.resolve_id("other", "login_to_mail"), live);
  EXPECT_FALSE(repo.resolve_id("other", "nope").has_value());
  auto resolve = repo.resolver("other");
  EXPECT_NE(resolve("login_to_mail"), nullptr);
  EXPECT_EQ(resolve("login_to_pay"), nullptr);
}

TEST(Repository, UsageRecordsDirectAndIndirectOnce) {
  Repository repo(ngram());
  auto app = repo.promote({make_component(kLoginApp)}, {})[0];
  auto wrapper = repo.promote(
      {make_component("fn login_mail_only() {\n  login_to_app(\"mail\")\n}")}, {})[0];
  auto policy = lang::make_policy(
      "fn send(to: string) {\n  login_mail_only()\n  login_to_app(\"mail\")\n"
      "  mail::send_email(to: to, subject: \"s\", body: \"b\")\n}");
  repo.record_usage(policy, "mail_send", 1);
  repo.record_usage(policy, "mail_send", 2);
  auto usage = repo.usage();
  std::set<std::pair<std::string, UsageMode>> seen;
  for (const auto& r : usage) seen.insert({r.component_id, r.mode});
  EXPECT_EQ(usage.size(), 3u);
  EXPECT_EQ(seen, (std::set<std::pair<std::string, UsageMode>>{
                      {app, UsageMode::kDirect},
                      {app, UsageMode::kIndirect},
                      {wrapper, UsageMode::kDirect}}));
  auto stats = repo.stats(1);
  EXPECT_EQ(stats[Provenance::kLearned].total_used, 2);
}

TEST(Repository, SaveLoadRoundTrip) {
  TempDir dir("repo");
  Repository repo(ngram());
  auto mail = repo.add_learned(learned(kLoginMail, "mail_send"));
  auto pay = repo.add_learned(learned(kLoginPay, "pay_friend"));
  repo.promote({*repo.get(pay)}, {});
  repo.promote({make_component(kLoginApp, "Any app.")}, {pay});
  repo.add_learned(learned(kLoginPay, "pay_many"));
  repo.archive({"mail_send", lang::make_policy("fn m() {\n  login_to_mail()\n}"), {{"t-1", {}}}});
  repo.record_usage(repo.archived("mail_send")->policy, "mail_send", 4);
  repo.save(dir.str());

  auto back = Repository::load(dir.str(), ngram());
  EXPECT_EQ(back.state_hash(), repo.state_hash());
  EXPECT_EQ(back.all(), repo.all());
  EXPECT_EQ(back.usage(), repo.usage());
  EXPECT_EQ(back.archive_entries(), repo.archive_entries());
  EXPECT_EQ(back.index().entries(), repo.index().entries());
  EXPECT_EQ(back.status(mail), ComponentStatus::kLearned);
  EXPECT_EQ(back.status(pay), ComponentStatus::kTombstoned);

  // The next id continues where the saved repository stopped.
  EXPECT_EQ(back.add_learned(learned(kLoginMail, "z")), repo.add_learned(learned(kLoginMail, "z")));

  // A missing sidecar is rebuilt to the same index.
  std::filesystem::remove(dir.path() / "index.jsonl");
  auto rebuilt = Repository::load(dir.str(), ngram());
  EXPECT_EQ(rebuilt.index().entries(), back.index().entries());
}

TEST(Repository, SeedSnapshotKeepsOnlyLiveComponents) {
  Repository repo(ngram());
  auto a = repo.add_learned(learned(kLoginMail, "d"));
  repo.add_learned(learned(kLoginPay, "d"));
  repo.promote({*repo.get(a)}, {});
  repo.archive({"d", lang::make_policy("fn m() {\n  login_to_mail()\n}"), {}});
  auto seed = repo.seed_snapshot();
  EXPECT_EQ(seed.live_count(), 1u);
  EXPECT_EQ(seed.learned_count(), 0u);
  EXPECT_TRUE(seed.archive_entries().empty());
  EXPECT_EQ(seed.validated()[0].provenance, Provenance::kSeedUnchanged);
}

// --- usage statistics ---------------------------------------------------

std::vector<Component> pool(Provenance p, int n, const std::string& prefix) {
  std::vector<Component> out;
  for (int i = 0; i < n; ++i) {
    Component c;
    c.id = prefix + std::to_string(i);
    c.provenance = p;
    out.push_back(c);
  }
  return out;
}

TEST(UsageStats, NoRecordsGivesZeros) {
  auto stats = usage_stats(pool(Provenance::kLearned, 4, "l"), {}, 3);
  const auto& s = stats[Provenance::kLearned];
  EXPECT_EQ(s.available, 4);
  EXPECT_EQ(s.total_used, 0);
  EXPECT_EQ(s.utilization_pct, 0);
  EXPECT_EQ(s.per_scenario_mean, 0);
  EXPECT_EQ(s.reuse_rate, 0);
  EXPECT_EQ(s.multi_use_pct, 0);
}

TEST(UsageStats, OneComponentInEveryScenario) {
  std::vector<UsageRecord> records;
  for (const char* d : {"a", "b", "c"}) records.push_back({"l0", d, UsageMode::kDirect, 1});
  auto s = usage_stats(pool(Provenance::kLearned, 1, "l"), records, 3)[Provenance::kLearned];
  EXPECT_EQ(s.utilization_pct, 100.0);
  EXPECT_EQ(s.reuse_rate, 3.0);
  EXPECT_EQ(s.multi_use_pct, 100.0);
  EXPECT_EQ(s.per_scenario_mean, 1.0);
}

TEST(UsageStats, ModesCountOncePerScenario) {
  std::vector<UsageRecord> records = {{"l0", "a", UsageMode::kDirect, 1},
                                      {"l0", "a", UsageMode::kIndirect, 1}};
  auto s = usage_stats(pool(Provenance::kLearned, 1, "l"), records, 1)[Provenance::kLearned];
  EXPECT_EQ(s.reuse_rate, 1.0);
}

TEST(UsageStats, Errors) {
  EXPECT_THROW(usage_stats({}, {}, 0), Error);
  EXPECT_THROW(usage_stats({}, {{"ghost", "a", UsageMode::kDirect, 0}}, 1), Error);
}

// Normal split of the component-usage table: 56 scenarios. Learned: 270
// available, 200 components used once and 3 used in 4 scenarios each.
// Modified: 5 available, one used in 46 scenarios.
TEST(UsageStats, ReproducesNormalSplitRows) {
  auto available = pool(Provenance::kLearned, 270, "l");
  auto modified = pool(Provenance::kSeedModified, 5, "m");
  available.insert(available.end(), modified.begin(), modified.end());
  std::vector<UsageRecord> records;
  int scenario = 0;
  for (int i = 0; i < 200; ++i) {
    records.push_back({"l" + std::to_string(i), "s" + std::to_string(scenario++ % 56),
                       UsageMode::kDirect, 0});
  }
  for (int i = 200; i < 203; ++i) {
    for (int k = 0; k < 4; ++k) {
      records.push_back({"l" + std::to_string(i), "s" + std::to_string(k * 11 + i % 7),
                         UsageMode::kDirect, 0});
    }
  }
  for (int k = 0; k < 46; ++k) records.push_back({"m0", "s" + std::to_string(k), UsageMode::kIndirect, 0});

  auto stats = usage_stats(available, records, 56);
  const auto& l = stats[Provenance::kLearned];
  EXPECT_EQ(l.total_used, 203);
  EXPECT_EQ(round_to(l.utilization_pct, 0), 75);
  EXPECT_EQ(round_to(l.per_scenario_mean, 1), 3.8);
  EXPECT_EQ(round_to(l.reuse_rate, 1), 1.0);
  EXPECT_EQ(round_to(l.multi_use_pct, 1), 1.5);

  const auto& m = stats[Provenance::kSeedModified];
  EXPECT_EQ(m.total_used, 1);
  EXPECT_EQ(round_to(m.utilization_pct, 0), 20);
  EXPECT_EQ(round_to(m.per_scenario_mean, 1), 0.8);
  EXPECT_EQ(round_to(m.reuse_rate, 1), 46.0);
  EXPECT_EQ(round_to(m.multi_use_pct, 1), 100.0);
}

TEST(UsageStats, ArithmeticIdentitiesOnRandomLogs) {
  std::mt19937 rng(11);
  for (int round = 0; round < 200; ++round) {
    int n = 1 + rng() % 30;
    auto available = pool(static_cast<Provenance>(rng() % 3), n, "x");
    int scenarios = 1 + rng() % 10;
    std::vector<UsageRecord> records;
    for (int i = 0, m = rng() % 60; i < m; ++i) {
      records.push_back({"x" + std::to_string(rng() % n), "s" + std::to_string(rng() % scenarios),
                         rng() % 2 ? UsageMode::kDirect : UsageMode::kIndirect, i});
    }
    for (const auto& [p, s] : usage_stats(available, records, scenarios)) {
      EXPECT_LE(s.total_used, s.available);
      EXPECT_LE(s.multi_use_pct, 100.0);
      EXPECT_LE(s.utilization_pct, 100.0);
      if (s.total_used > 0) EXPECT_GE(s.reuse_rate, 1.0);
      EXPECT_LE(s.reuse_rate, scenarios);
    }
  }
}

}  // namespace
}  // namespace hclgp::repo
