#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "hclgp/lang/instantiate.hpp"
#include "hclgp/miniworld/validator.hpp"
#include "test_util.hpp"

namespace hclgp::miniworld {
namespace {

using hclgp::testing::data_path;
using hclgp::testing::read_file;

std::shared_ptr<const ScenarioPack> bundled_pack() {
  static auto pack =
      std::make_shared<const ScenarioPack>(ScenarioPack::load(default_scenario_path()));
  return pack;
}

Record args(std::vector<std::pair<std::string, Value>> fields) {
  return make_record(std::move(fields)).as_record();
}

WorldState base() { return bundled_pack()->initial_state("base"); }

WorldState must_apply(const WorldState& s, const std::string& app, const std::string& api,
                      const Record& a) {
  ApplyResult r = apply_api(s, app, api, a);
  EXPECT_TRUE(r.ok()) << app << "::" << api << ": " << r.error.value_or("");
  return r.state;
}

WorldState logged_in(const std::string& app, const std::string& password) {
  return must_apply(base(), app, "login",
                    args({{"username", Value("alex@mini.world")},
                          {"password", Value(password)}}));
}

// --- apply_api ------------------------------------------------------------

TEST(ApplyApi, LoginWithCorrectCredentialsAddsSession) {
  WorldState s0 = base();
  EXPECT_TRUE(s0.sessions.empty());
  ApplyResult r = apply_api(s0, "pay", "login",
                            args({{"username", Value("alex@mini.world")},
                                  {"password", Value("pay-4410")}}));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.state.sessions.at("pay"), "alex@mini.world");
  EXPECT_TRUE(s0.sessions.empty());
}

TEST(ApplyApi, WrongPasswordFails) {
  ApplyResult r = apply_api(base(), "pay", "login",
                            args({{"username", Value("alex@mini.world")},
                                  {"password", Value("nope")}}));
  EXPECT_EQ(r.error, "invalid credentials");
  EXPECT_EQ(r.state, base());
}

TEST(ApplyApi, ProtectedApisNeedASession) {
  for (const auto& doc : api_docs()) {
    if (is_public_app(doc.app) || doc.api == "login") continue;
    ApplyResult r = apply_api(base(), doc.app, doc.api, {});
    EXPECT_EQ(r.error, "not logged in") << doc.qualified_name();
  }
  EXPECT_TRUE(apply_api(base(), "supervisor", "profile", {}).ok());
}

TEST(ApplyApi, TransferExceedingBalanceLeavesStateUnchanged) {
  WorldState s = logged_in("pay", "pay-4410");
  ApplyResult r = apply_api(s, "pay", "transfer",
                            args({{"to", Value("sam@mini.world")},
                                  {"amount", Value(10000)},
                                  {"note", Value("x")}}));
  EXPECT_EQ(r.error, "insufficient funds");
  EXPECT_EQ(r.state, s);
}

TEST(ApplyApi, TransferMovesMoney) {
  WorldState s = logged_in("pay", "pay-4410");
  s = must_apply(s, "pay", "transfer",
                 args({{"to", Value("sam@mini.world")}, {"amount", Value(25)}, {"note", Value("n")}}));
  EXPECT_EQ(*s.store("pay")->at("acct-alex").field("balance"), Value(475));
  EXPECT_EQ(*s.store("pay")->at("acct-sam").field("balance"), Value(125));
  EXPECT_EQ(s.store("pay")->count("transaction-0001"), 1u);
  EXPECT_EQ(apply_api(s, "pay", "transfer",
                      args({{"to", Value("who@x")}, {"amount", Value(1)}}))
                .error.value()
                .rfind("unknown recipient", 0),
            0u);
  EXPECT_EQ(apply_api(s, "pay", "transfer",
                      args({{"to", Value("sam@mini.world")}, {"amount", Value(0)}}))
                .error,
            "amount must be positive");
}

TEST(ApplyApi, SendMailThenRecipientInboxContainsMessage) {
  WorldState s = logged_in("mail", "mail-7731");
  ApplyResult sent = apply_api(s, "mail", "send_email",
                               args({{"to", Value("alex@mini.world")},
                                     {"subject", Value("note to self")},
                                     {"body", Value("b")}}));
  ASSERT_TRUE(sent.ok());
  std::string id = sent.response.field("id")->as_string();
  EXPECT_EQ(id, "email-0001");
  ApplyResult inbox = apply_api(sent.state, "mail", "list_inbox", {});
  ASSERT_TRUE(inbox.ok());
  std::set<std::string> ids;
  for (const auto& m : inbox.response.as_list()) ids.insert(m.field("id")->as_string());
  // Oracle: the seeded inbox (msg-1, msg-2) plus the new message.
  EXPECT_EQ(ids, (std::set<std::string>{"email-0001", "msg-1", "msg-2"}));
}

TEST(ApplyApi, ArgumentsAreCheckedAgainstTheSchema) {
  WorldState s = logged_in("pay", "pay-4410");
  EXPECT_EQ(apply_api(s, "pay", "transfer", args({{"to", Value("sam@mini.world")}})).error,
            "missing argument 'amount'");
  EXPECT_EQ(apply_api(s, "pay", "transfer",
                      args({{"to", Value("sam@mini.world")}, {"amount", Value("5")}}))
                .error,
            "argument 'amount' must be number");
  EXPECT_EQ(apply_api(s, "pay", "balance", args({{"x", Value(1)}})).error,
            "unexpected argument 'x'");
  EXPECT_EQ(apply_api(s, "pay", "refund", {}).error, "unknown api pay::refund");
}

TEST(ApplyApi, MissingRecordsAreDomainErrors) {
  WorldState s = logged_in("music", "music-2287");
  EXPECT_EQ(apply_api(s, "music", "get_song", args({{"id", Value("song-zz")}})).error,
            "song 'song-zz' not found");
  // A record of another kind is not found either.
  EXPECT_EQ(apply_api(s, "music", "delete_playlist", args({{"id", Value("song-a1")}})).error,
            "playlist 'song-a1' not found");
}

TEST(ApplyApi, NeverMutatesItsInput) {
  WorldState s = logged_in("shop", "shop-6120");
  const WorldState before = s;
  apply_api(s, "shop", "add_to_cart",
            args({{"product_id", Value("prod-lamp")}, {"quantity", Value(2)}}));
  apply_api(s, "shop", "checkout", args({{"card_number", Value("bad")}}));
  EXPECT_EQ(s, before);
}

// --- api_docs -------------------------------------------------------------

TEST(ApiDocs, CountMatchesPerAppCatalog) {
  // Oracle: per-app api counts as listed in the app catalog.
  std::map<std::string, int> expected = {{"supervisor", 4}, {"mail", 5}, {"pay", 5},
                                         {"music", 7},      {"contacts", 6}, {"files", 5},
                                         {"shop", 6},       {"notes", 5}};
  int total = 0;
  for (const auto& [_, n] : expected) total += n;
  EXPECT_EQ(static_cast<int>(api_docs().size()), total);
  std::map<std::string, int> seen;
  for (const auto& doc : api_docs()) {
    ++seen[doc.app];
    EXPECT_FALSE(doc.description.empty()) << doc.qualified_name();
  }
  EXPECT_EQ(seen, expected);
  for (const auto& [app, n] : seen) {
    if (!is_public_app(app)) EXPECT_GE(n, 4) << app;
  }
  EXPECT_NO_THROW(descriptor().validate());
}

TEST(ApiDocs, TransferSchema) {
  const ApiDoc* doc = find_api_doc("pay", "transfer");
  ASSERT_NE(doc, nullptr);
  ASSERT_EQ(doc->params.size(), 3u);
  EXPECT_EQ(doc->params[0].name, "to");
  EXPECT_EQ(doc->params[1].name, "amount");
  EXPECT_EQ(doc->params[1].type, "number");
  EXPECT_FALSE(doc->params[2].required);
  EXPECT_EQ(find_api_doc("pay", "nope"), nullptr);
}

// --- reset / scenario pack -----------------------------------------------

TEST(Reset, SameSeedTwiceIsIdentical) {
  MiniWorld world(bundled_pack());
  const auto& task = bundled_pack()->domains.front().domain.tasks.front();
  EXPECT_EQ(world.reset(task), world.reset(task));
}

TEST(Reset, TasksOfOneDomainDifferOnlyInParameterizedRecords) {
  MiniWorld world(bundled_pack());
  const auto* sd = bundled_pack()->find("mail_contact");
  ASSERT_NE(sd, nullptr);
  WorldState a = world.reset(sd->domain.tasks[0]);
  WorldState b = world.reset(sd->domain.tasks[1]);
  // Oracle: diff the two states record by record.
  std::set<std::string> only_a, only_b;
  for (const auto& [app, store] : a.stores) {
    for (const auto& [id, rec] : store) {
      auto other = b.stores[app].find(id);
      if (other == b.stores[app].end() || other->second != rec) only_a.insert(app + "/" + id);
    }
  }
  for (const auto& [app, store] : b.stores) {
    for (const auto& [id, rec] : store) {
      auto other = a.stores[app].find(id);
      if (other == a.stores[app].end() || other->second != rec) only_b.insert(app + "/" + id);
    }
  }
  EXPECT_EQ(only_a, std::set<std::string>{"contacts/contact-quinn"});
  EXPECT_EQ(only_b, std::set<std::string>{"contacts/contact-avery"});
}

TEST(Reset, UnknownSeedIsAnError) {
  MiniWorld world(bundled_pack());
  TaskInstance t{"x", "i", "no-such-seed", {{"g", Value()}}};
  EXPECT_THROW(world.reset(t), Error);
}

TEST(ScenarioPack, ShapeRequirements) {
  const auto& pack = *bundled_pack();
  EXPECT_GE(pack.domains.size(), 6u);
  int challenge = 0;
  std::set<std::string> challenge_apps, other_apps;
  for (const auto& sd : pack.domains) {
    EXPECT_GE(sd.domain.tasks.size(), 3u) << sd.domain.id;
    if (sd.challenge) {
      ++challenge;
      EXPECT_EQ(sd.phase, "test");
    }
    for (const auto& app : sd.apps) {
      if (app == "supervisor") continue;
      (sd.challenge ? challenge_apps : other_apps).insert(app);
    }
  }
  EXPECT_EQ(challenge, 2);
  EXPECT_EQ(challenge_apps.size(), 2u);
  for (const auto& app : challenge_apps) EXPECT_EQ(other_apps.count(app), 0u) << app;
  EXPECT_EQ(pack.phase("train").size(), 4u);
  EXPECT_EQ(pack.phase("test").size(), 4u);
}

TEST(ScenarioPack, JsonRoundTrip) {
  const auto& pack = *bundled_pack();
  Json j = pack;
  EXPECT_EQ(j.get<ScenarioPack>(), pack);
}

TEST(ScenarioPack, GoalsReferenceOnlyAppStores) {
  std::set<std::string> apps;
  for (const auto& doc : api_docs()) apps.insert(doc.app);
  for (const auto& sd : bundled_pack()->domains) {
    for (const auto& t : sd.domain.tasks) {
      for (const auto& g : t.goal_tests) {
        EXPECT_EQ(apps.count(g.predicate.field("app")->as_string()), 1u) << t.id;
      }
    }
  }
}

// --- validate ---------------------------------------------------------------

lang::ComponentResolver no_components() { return nullptr; }

TEST(Validate, EveryReferencePolicySolvesEveryTask) {
  MiniWorld world(bundled_pack());
  for (const auto& sd : bundled_pack()->domains) {
    Policy policy = lang::make_policy(sd.reference_policy);
    for (const auto& binding : sd.reference_bindings) {
      const TaskInstance* task = sd.domain.find_task(binding.task_id);
      ASSERT_NE(task, nullptr);
      ValidationOutcome out =
          world.validate(lang::instantiate(policy, binding), *task, no_components());
      EXPECT_TRUE(out.passed) << task->id << ": " << out.error.value_or("")
                              << " failed=" << out.failed_tests.size();
      EXPECT_NO_THROW(out.validate());
    }
  }
}

TEST(Validate, ReferencePolicyDoesNotSolveSiblingTasks) {
  // Goal tests are parameter-specific: task 1's plan must fail task 2.
  MiniWorld world(bundled_pack());
  for (const auto& sd : bundled_pack()->domains) {
    Policy policy = lang::make_policy(sd.reference_policy);
    Plan plan = lang::instantiate(policy, sd.reference_bindings[0]);
    ValidationOutcome out = world.validate(plan, sd.domain.tasks[1], no_components());
    EXPECT_FALSE(out.passed) << sd.domain.id;
  }
}

TEST(Validate, EmptyPlanFailsEveryGoal) {
  MiniWorld world(bundled_pack());
  for (const auto& sd : bundled_pack()->domains) {
    const auto& task = sd.domain.tasks[0];
    ValidationOutcome out =
        world.validate(Plan{task.id, "fn p() { }"}, task, no_components());
    EXPECT_FALSE(out.passed);
    EXPECT_FALSE(out.error.has_value());
    // shop_order has an "absent" goal that an empty plan satisfies.
    std::vector<std::string> expected;
    for (const auto& g : task.goal_tests) {
      if (g.predicate.field("kind")->as_string() != "absent") expected.push_back(g.name);
    }
    EXPECT_EQ(out.failed_tests, expected) << sd.domain.id;
  }
}

TEST(Validate, RuntimeErrorPopulatesError) {
  MiniWorld world(bundled_pack());
  const auto& task = bundled_pack()->find("pay_friend")->domain.tasks[0];
  ValidationOutcome out = world.validate(
      Plan{task.id, "fn p() { pay::transfer(to: \"sam@mini.world\", amount: 25) }"}, task,
      no_components());
  EXPECT_FALSE(out.passed);
  ASSERT_TRUE(out.error.has_value());
  EXPECT_EQ(*out.error, "statement 0: pay::transfer: not logged in");
  ASSERT_EQ(out.trace.size(), 1u);
  EXPECT_EQ(out.trace[0].error, "not logged in");
}

TEST(Validate, BundledThreeCallPlanProducesThreeRecords) {
  MiniWorld world(bundled_pack());
  const auto& task = bundled_pack()->find("mail_send")->domain.tasks[0];
  Plan plan{task.id, read_file(data_path("docs/samples/login_mail.pol"))};
  ValidationOutcome out = world.validate(plan, task, no_components());
  ASSERT_EQ(out.trace.size(), 3u);
  // Replay oracle against the state machine.
  EXPECT_EQ(out.trace[0].response, base().store("supervisor")->at("profile"));
  EXPECT_EQ(out.trace[1].response, base().store("supervisor")->at("pw-mail"));
  EXPECT_EQ(out.trace[2].app + "::" + out.trace[2].api, "mail::login");
  EXPECT_FALSE(out.error.has_value());
  EXPECT_EQ(out.failed_tests, std::vector<std::string>{"email_sent"});
}

TEST(Validate, GeneralizedLoginComponentWorksForEveryApp) {
  MiniWorld world(bundled_pack());
  auto resolver = hclgp::testing::resolver_from(
      {{"login_to_app", read_file(data_path("docs/samples/login_to_app.pol"))}});
  const auto* sd = bundled_pack()->find("note_save");
  const auto& task = sd->domain.tasks[0];
  Plan plan{task.id, "fn p() {\n  login_to_app(\"notes\")\n  notes::create_note(title: \"Meeting notes\", body: \"Ship the beta on Friday.\")\n}"};
  ValidationOutcome out = world.validate(plan, task, resolver);
  EXPECT_TRUE(out.passed) << out.error.value_or("");
  EXPECT_EQ(out.trace.size(), 4u);
}

TEST(Validate, ReplayingTheTraceReproducesTheFinalState) {
  MiniWorld world(bundled_pack());
  for (const auto& sd : bundled_pack()->domains) {
    Policy policy = lang::make_policy(sd.reference_policy);
    const auto& task = sd.domain.tasks[0];
    Plan plan = lang::instantiate(policy, sd.reference_bindings[0]);
    WorldExecutor exec(world.reset(task));
    lang::ExecutionTrace trace = lang::execute(plan, exec, nullptr);
    ASSERT_TRUE(trace.completed());
    EXPECT_EQ(replay(world.reset(task), trace.records), exec.state()) << sd.domain.id;
  }
}

TEST(Validate, ConcurrentValidationsDoNotInteract) {
  MiniWorld world(bundled_pack());
  std::vector<std::pair<Plan, const TaskInstance*>> jobs;
  for (const auto& sd : bundled_pack()->domains) {
    Policy policy = lang::make_policy(sd.reference_policy);
    for (size_t i = 0; i < sd.reference_bindings.size(); ++i) {
      jobs.emplace_back(lang::instantiate(policy, sd.reference_bindings[i]), &sd.domain.tasks[i]);
    }
  }
  std::vector<ValidationOutcome> serial, parallel(jobs.size());
  for (const auto& [plan, task] : jobs) serial.push_back(world.validate(plan, *task, nullptr));
  std::vector<std::thread> threads;
  for (size_t i = 0; i < jobs.size(); ++i) {
    threads.emplace_back([&, i] {
      parallel[i] = world.validate(jobs[i].first, *jobs[i].second, nullptr);
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(serial, parallel);
}

TEST(Goals, PredicateForms) {
  WorldState s = base();
  Value exists = make_record({{"kind", Value("exists")},
                              {"app", Value("music")},
                              {"where", make_record({{"artist", Value("Nova Reed")}})}});
  EXPECT_TRUE(evaluate_goal(s, exists));
  Value count = make_record({{"kind", Value("count")},
                             {"app", Value("music")},
                             {"where", make_record({{"artist", Value("Echo Park")}})},
                             {"count", Value(4)}});
  EXPECT_TRUE(evaluate_goal(s, count));
  Value absent = make_record({{"kind", Value("absent")}, {"app", Value("nowhere")}});
  EXPECT_TRUE(evaluate_goal(s, absent));
  EXPECT_THROW(evaluate_goal(s, make_record({{"kind", Value("maybe")}, {"app", Value("x")}})),
               Error);
  EXPECT_THROW(evaluate_goal(s, make_record({{"kind", Value("count")}, {"app", Value("x")}})),
               Error);
}

TEST(Describe, ListsAppsAndScenarios) {
  std::string text = describe(*bundled_pack());
  EXPECT_NE(text.find("transfer(to: string, amount: number, note: string?)"), std::string::npos);
  EXPECT_NE(text.find("shop_order [test, challenge]"), std::string::npos);
}

}  // namespace
}  // namespace hclgp::miniworld
