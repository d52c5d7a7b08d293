#include <random>
#include <set>

#include <gtest/gtest.h>

#include "engine_fixture.hpp"
#include "hclgp/generalize/generalize.hpp"
#include "hclgp/lang/instantiate.hpp"

namespace hclgp::generalize {
namespace {

using hclgp::testing::bundled_domain;
using hclgp::testing::make_harness;
using hclgp::testing::rule;

retrieval::UnitVector unit(std::vector<double> v) {
  return retrieval::UnitVector::normalize(std::move(v));
}

std::vector<ClusterInput> random_points(std::mt19937_64& rng, int centers, int per_center,
                                        std::size_t dim, double noise) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> c(centers, std::vector<double>(dim));
  for (auto& v : c) {
    for (auto& x : v) x = g(rng);
  }
  std::vector<ClusterInput> out;
  for (int i = 0; i < centers * per_center; ++i) {
    auto v = c[i % centers];
    for (auto& x : v) x += noise * g(rng);
    out.push_back({"p" + std::to_string(i), unit(v)});
  }
  return out;
}

TEST(GreedyCluster, HandComputedTwoDimensionalCase) {
  // cos(a, b) = 0.9, cos(a, c) = 0, cos(b, c) = 0.436
  std::vector<ClusterInput> items = {{"a", unit({1, 0})},
                                     {"b", unit({0.9, std::sqrt(1 - 0.81)})},
                                     {"c", unit({0, 1})}};
  auto clusters = greedy_cluster(items, 0.85);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0].member_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(clusters[1].member_ids, (std::vector<std::string>{"c"}));
  EXPECT_EQ(clusters[1].id(), "cluster-c");
}

TEST(GreedyCluster, JoinsTheEarliestQualifyingSeed) {
  // m is within 0.85 of both seeds; it goes to the first one.
  std::vector<ClusterInput> items = {{"s1", unit({1, 0})}, {"s2", unit({0, 1})},
                                     {"m", unit({1, 1})}};
  EXPECT_EQ(greedy_cluster(items, 0.7).size(), 2u);
  EXPECT_EQ(greedy_cluster(items, 0.7)[0].member_ids, (std::vector<std::string>{"s1", "m"}));
}

TEST(GreedyCluster, TauOneGivesSingletonsOnDistinctEmbeddings) {
  retrieval::NgramEmbedding e;
  std::vector<ClusterInput> items;
  for (const char* s : {"fn a() { mail::login() }", "fn b() { pay::login() }",
                        "fn c(x: string) { notes::create_note(title: x) }", "fn d() {}"}) {
    items.push_back({s, e.embed(s)});
  }
  auto clusters = greedy_cluster(items, 1.0);
  ASSERT_EQ(clusters.size(), items.size());
  for (const auto& c : clusters) EXPECT_EQ(c.member_ids.size(), 1u);
}

TEST(GreedyCluster, MembersReachSeedAndCoverInputExactlyOnce) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto items = random_points(rng, 5, 8, 16, 0.3);
    auto clusters = greedy_cluster(items, 0.85);
    std::map<std::string, retrieval::UnitVector> by_id;
    for (const auto& i : items) by_id.emplace(i.id, i.vector);
    std::multiset<std::string> seen;
    for (const auto& c : clusters) {
      EXPECT_EQ(c.member_ids.front(), c.seed_id);
      for (const auto& m : c.member_ids) {
        seen.insert(m);
        EXPECT_GE(retrieval::cosine(by_id.at(m), c.seed_vector), 0.85);
      }
    }
    EXPECT_EQ(seen.size(), items.size());
    EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), items.size());
  }
}

TEST(GreedyCluster, DeterministicAcrossRepeatedRuns) {
  std::mt19937_64 rng(11);
  auto items = random_points(rng, 6, 10, 24, 0.5);
  auto first = greedy_cluster(items, 0.85);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(greedy_cluster(items, 0.85), first);
}

TEST(GreedyCluster, EdgeCases) {
  EXPECT_TRUE(greedy_cluster({}, 0.85).empty());
  std::vector<ClusterInput> items = {{"a", unit({1, 0})}, {"b", unit({0, 1})}};
  EXPECT_EQ(greedy_cluster(items, -1.0).size(), 1u);
  items.push_back({"c", unit({1, 0, 0})});
  EXPECT_THROW(greedy_cluster(items, 0.5), Error);
}

// ---------------------------------------------------------------- fixtures

const char* kLoginMail = R"(fn login_mail() {
  let profile = supervisor::profile()
  let secret = supervisor::password(app: "mail")
  mail::login(username: profile.email, password: secret.password)
})";

const char* kLoginPay = R"(fn login_pay() {
  let profile = supervisor::profile()
  let secret = supervisor::password(app: "pay")
  pay::login(username: profile.email, password: secret.password)
})";

const char* kLoginApp = R"(fn login_to_app(app: string) {
  let profile = supervisor::profile()
  let secret = supervisor::password(app: app)
  api(app, "login", username: profile.email, password: secret.password)
})";

// login_to_app that always logs in to mail: breaks the pay policy.
const char* kLoginWrong = R"(fn login_to_app(app: string) {
  let profile = supervisor::profile()
  let secret = supervisor::password(app: "mail")
  mail::login(username: profile.email, password: secret.password)
})";

const char* kMailPolicy = "fn mail_send(to: string, subject: string, body: string) {\n"
                          "  login_mail()\n"
                          "  mail::send_email(to: to, subject: subject, body: body)\n}";
const char* kPayPolicy = "fn pay_friend(recipient: string, amount: number, note: string) {\n"
                         "  login_pay()\n"
                         "  pay::transfer(to: recipient, amount: amount, note: note)\n}";

std::vector<ParameterBinding> reference_bindings(const std::string& domain) {
  return hclgp::testing::bundled_pack()->find(domain)->reference_bindings;
}

// Two learned login components, each used by its domain's archived policy.
void seed_login_pair(repo::Repository& r) {
  auto a = repo::make_component(kLoginMail, "log in to mail", "call first");
  a.origin_domains = {"mail_send"};
  auto b = repo::make_component(kLoginPay, "log in to pay", "call first");
  b.origin_domains = {"pay_friend"};
  r.add_learned(a);
  r.add_learned(b);
  r.archive({"mail_send", lang::make_policy(kMailPolicy), reference_bindings("mail_send")});
  r.archive({"pay_friend", lang::make_policy(kPayPolicy), reference_bindings("pay_friend")});
}

std::string block(const std::string& tag, const std::string& body) {
  return "```" + tag + "\n" + body + "\n```\n";
}

std::string merge_reply(const char* component) {
  return block("components", component) + block("usage-notes", "login_to_app: log in to an app") +
         block("replaces", "c0001\nc0002") +
         "```policy mail_send\nfn mail_send(to: string, subject: string, body: string) {\n"
         "  login_to_app(\"mail\")\n  mail::send_email(to: to, subject: subject, body: body)\n}\n```\n"
         "```policy pay_friend\nfn pay_friend(recipient: string, amount: number, note: string) {\n"
         "  login_to_app(\"pay\")\n  pay::transfer(to: recipient, amount: amount, note: note)\n}\n```\n";
}

Cluster whole_store(const repo::Repository& r) {
  Cluster c;
  for (const auto& comp : r.all()) c.member_ids.push_back(comp.id);
  c.seed_id = c.member_ids.front();
  return c;
}

bool archive_valid(const orchestrator::Engine& e) {
  for (const auto& a : orchestrator::audit_archive(e)) {
    if (!a.passed) return false;
  }
  return true;
}

TEST(AffectedDomains, FollowsComponentCallsTransitively) {
  auto h = make_harness({});
  seed_login_pair(*h.repo);
  auto ids = h.repo->promote({repo::make_component(kLoginApp, "", "")}, {}, {});
  h.repo->promote({repo::make_component("fn pay_setup() {\n  login_to_app(\"pay\")\n}", "", "")},
                  {}, {});
  h.repo->archive({"note_save",
                   lang::make_policy("fn note_save(title: string, body: string) {\n  pay_setup()\n}"),
                   {}});
  EXPECT_EQ(affected_domains(*h.repo, {"c0001"}), std::vector<std::string>{"mail_send"});
  EXPECT_EQ(affected_domains(*h.repo, ids), std::vector<std::string>{"note_save"});
  EXPECT_TRUE(affected_domains(*h.repo, {"c9999"}).empty());
}

TEST(GeneralizeCluster, AcceptedMergeTombstonesMembersAndKeepsPoliciesValid) {
  auto h = make_harness({rule({"TASK: GENERALIZE cluster=cluster-c0001"}, merge_reply(kLoginApp))});
  seed_login_pair(*h.repo);
  ASSERT_TRUE(archive_valid(h.engine));

  auto out = generalize_cluster(whole_store(*h.repo), *h.repo, h.agents(), *h.engine.validator,
                                h.engine.lookup(), 3);
  ASSERT_TRUE(out.accepted) << out.failure;
  EXPECT_EQ(out.attempts, 1);
  EXPECT_EQ(out.replaced, (std::vector<std::string>{"c0001", "c0002"}));
  EXPECT_EQ(out.affected_domains, (std::vector<std::string>{"mail_send", "pay_friend"}));
  EXPECT_EQ(h.repo->status("c0001"), repo::ComponentStatus::kTombstoned);
  ASSERT_EQ(h.repo->validated().size(), 1u);
  EXPECT_EQ(h.repo->validated()[0].name, "login_to_app");
  EXPECT_EQ(h.repo->validated()[0].provenance, repo::Provenance::kLearned);
  EXPECT_TRUE(archive_valid(h.engine));
}

TEST(GeneralizeCluster, RejectedProposalLeavesStateHashUnchanged) {
  auto h = make_harness({rule({"TASK: GENERALIZE"}, merge_reply(kLoginWrong))});
  seed_login_pair(*h.repo);
  const auto before = h.repo->state_hash();
  auto out = generalize_cluster(whole_store(*h.repo), *h.repo, h.agents(), *h.engine.validator,
                                h.engine.lookup(), 3);
  EXPECT_FALSE(out.accepted);
  EXPECT_EQ(out.attempts, 4);
  EXPECT_NE(out.failure.find("pay_friend"), std::string::npos);
  EXPECT_EQ(h.repo->state_hash(), before);
  EXPECT_TRUE(archive_valid(h.engine));
}

TEST(GeneralizeCluster, FeedbackReachesTheRetry) {
  auto h = make_harness({rule({"attempt=2", "validation failed", "domain pay_friend"},
                              merge_reply(kLoginApp)),
                         rule({"TASK: GENERALIZE"}, merge_reply(kLoginWrong))});
  seed_login_pair(*h.repo);
  auto out = generalize_cluster(whole_store(*h.repo), *h.repo, h.agents(), *h.engine.validator,
                                h.engine.lookup(), 3);
  EXPECT_TRUE(out.accepted);
  EXPECT_EQ(out.attempts, 2);
  EXPECT_TRUE(archive_valid(h.engine));
}

TEST(GeneralizeCluster, ZeroBudgetMeansOneAttempt) {
  auto h = make_harness({rule({"TASK: GENERALIZE"}, "no blocks")});
  seed_login_pair(*h.repo);
  auto out = generalize_cluster(whole_store(*h.repo), *h.repo, h.agents(), *h.engine.validator,
                                h.engine.lookup(), 0);
  EXPECT_FALSE(out.accepted);
  EXPECT_EQ(out.attempts, 1);
  EXPECT_EQ(h.gateway->ledger().size(), 1u);
}

TEST(GeneralizeCluster, OrphanedCallerBlocksTheProposal) {
  // A live component outside the cluster still calls login_pay by name.
  auto h = make_harness({rule({"TASK: GENERALIZE"}, merge_reply(kLoginApp))});
  seed_login_pair(*h.repo);
  h.repo->promote({repo::make_component(kLoginPay, "", "")}, {}, {});
  h.repo->promote({repo::make_component("fn pay_setup() {\n  login_pay()\n}", "", "")}, {}, {});
  Cluster c;
  c.seed_id = "c0001";
  c.member_ids = {"c0001", "c0002", "c0003"};
  const auto before = h.repo->state_hash();
  auto reply = block("components", kLoginApp) + block("replaces", "c0001\nc0002\nc0003") +
               "```policy mail_send\nfn mail_send(to: string, subject: string, body: string) {\n"
               "  login_to_app(\"mail\")\n  mail::send_email(to: to, subject: subject, body: body)\n}\n```\n"
               "```policy pay_friend\nfn pay_friend(recipient: string, amount: number, note: string) {\n"
               "  login_to_app(\"pay\")\n  pay::transfer(to: recipient, amount: amount, note: note)\n}\n```\n";
  auto h2 = make_harness({rule({"TASK: GENERALIZE"}, reply)}, {}, h.repo);
  auto out = generalize_cluster(c, *h2.repo, h2.agents(), *h2.engine.validator, h2.engine.lookup(), 0);
  EXPECT_FALSE(out.accepted);
  EXPECT_NE(out.failure.find("pay_setup"), std::string::npos);
  EXPECT_EQ(h2.repo->state_hash(), before);
}

TEST(RunGeneralization, SkipsLiveSingletonsAndPromotesKeptLearned) {
  auto h = make_harness({rule({"TASK: GENERALIZE"}, block("components", "") + block("replaces", ""))});
  h.repo->promote({repo::make_component(
                      "fn save_note(title: string, body: string) {\n"
                      "  notes::create_note(title: title, body: body)\n}", "", "")},
                  {}, {});
  auto learned = repo::make_component(kLoginMail, "", "");
  learned.origin_domains = {"mail_send"};
  h.repo->add_learned(learned);

  auto report = run_generalization(*h.repo, h.agents(), *h.engine.validator, h.engine.lookup(),
                                   h.engine.config);
  EXPECT_EQ(report.clusters, 2);
  EXPECT_EQ(report.skipped, 1);
  EXPECT_EQ(report.processed, 1);
  EXPECT_EQ(report.accepted, 1);
  EXPECT_EQ(report.merged, 0);
  EXPECT_EQ(h.repo->learned_count(), 0u);
  EXPECT_EQ(h.repo->live_count(), 2u);
  EXPECT_EQ(h.gateway->ledger().size(), 1u);
}

TEST(RunGeneralization, ReportJsonRoundTrips) {
  auto h = make_harness({rule({"TASK: GENERALIZE"}, merge_reply(kLoginApp))});
  seed_login_pair(*h.repo);
  auto report = run_generalization(*h.repo, h.agents(), *h.engine.validator, h.engine.lookup(),
                                   h.engine.config);
  EXPECT_EQ(report.accepted, 1);
  EXPECT_EQ(report.merged, 2);
  Json j = report;
  EXPECT_EQ(Json(j.get<GeneralizationReport>()), j);
}

TEST(EmbedComponents, UsesCreatedAtOrder) {
  auto a = repo::make_component(kLoginMail, "", "");
  a.id = "x";
  a.created_at = 5;
  auto b = repo::make_component(kLoginPay, "", "");
  b.id = "y";
  b.created_at = 2;
  retrieval::NgramEmbedding e;
  auto items = embed_components({a, b}, e);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].id, "y");
  EXPECT_EQ(items[1].vector, e.embed(kLoginMail));
}

}  // namespace
}  // namespace hclgp::generalize
