// Command-line front end: seeding, suite runs, generalization, repository
// inspection and report rendering.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hclgp/agents/agents.hpp"
#include "hclgp/llm/backends.hpp"
#include "hclgp/llm/scripted.hpp"
#include "hclgp/metrics/metrics.hpp"
#include "hclgp/miniworld/validator.hpp"
#include "hclgp/orchestrator/orchestrator.hpp"
#include "hclgp/retrieval/embedding.hpp"

namespace fs = std::filesystem;
using namespace hclgp;

namespace {

struct Common {
  std::string scenarios = miniworld::default_scenario_path();
  std::string backend = "mock";
  std::string rules;
  std::string backend_config;
  std::string config;
  std::string templates = agents::default_template_dir();
  std::string embedder = "ngram";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenarios", c.scenarios, "Scenario pack (JSON)");
  cmd->add_option("--backend", c.backend, "mock or http")->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--rules", c.rules, "Scripted replies for the mock backend");
  cmd->add_option("--backend-config", c.backend_config, "Backend settings file (JSON)");
  cmd->add_option("--config", c.config, "Engine settings file (JSON)");
  cmd->add_option("--templates", c.templates, "Prompt template directory");
  cmd->add_option("--embedder", c.embedder, "ngram or http");
}

EngineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  auto c = Json::parse(in).get<EngineConfig>();
  c.validate();
  return c;
}

std::shared_ptr<llm::Gateway> make_gateway(const Common& c) {
  llm::BackendConfig bc;
  if (!c.backend_config.empty()) bc = llm::BackendConfig::load(c.backend_config);
  bc.kind = c.backend;
  if (!c.rules.empty()) bc.rules_path = c.rules;
  bc.apply_environment();
  return std::make_shared<llm::Gateway>(llm::make_backend(bc), std::make_shared<llm::CostLedger>(),
                                        bc.retry);
}

std::shared_ptr<retrieval::EmbeddingProvider> make_embedder(const Common& c) {
  return retrieval::make_embedding_provider(c.embedder);
}

std::shared_ptr<repo::Repository> open_store(const std::string& dir,
                                             std::shared_ptr<retrieval::EmbeddingProvider> e) {
  if (dir.empty()) return std::make_shared<repo::Repository>(e);
  return std::make_shared<repo::Repository>(repo::Repository::load(dir, e));
}

std::vector<Domain> select_domains(const miniworld::ScenarioPack& pack, const std::string& phase,
                                   const std::vector<std::string>& ids) {
  if (!ids.empty()) {
    std::vector<Domain> out;
    for (const auto& id : ids) {
      auto* d = pack.find(id);
      if (!d) throw Error("no scenario named '" + id + "' in the pack");
      out.push_back(d->domain);
    }
    return out;
  }
  if (phase == "all") return pack.all_domains();
  return pack.phase(phase);
}

void print_summary(const orchestrator::SuiteReport& r) {
  int solved = 0;
  for (const auto& d : r.results) solved += d.solved;
  std::cout << orchestrator::mode_name(r.mode) << ": " << solved << "/" << r.results.size()
            << " domains solved, " << r.total_iterations << " debugging iterations, "
            << r.generalizations.size() << " generalization passes\n";
}

bool all_solved(const orchestrator::SuiteReport& r) {
  for (const auto& d : r.results) {
    if (!d.solved) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HCL-GP policy learning over the miniworld environment"};
  app.require_subcommand(1);

  Common common;

  // seed
  std::string seed_out = "seed";
  auto* seed = app.add_subcommand("seed", "Learn a component store from the training scenarios");
  add_common(seed, common);
  seed->add_option("--out", seed_out, "Output directory (store/ and reports/)");

  // run
  std::string run_mode = "hclgp", run_out = "out", run_seed, run_phase = "test";
  std::vector<std::string> run_domains;
  auto* run = app.add_subcommand("run", "Run a scenario suite; exit 0 iff every domain is solved");
  add_common(run, common);
  run->add_option("--mode", run_mode, "gp or hclgp")->check(CLI::IsMember({"gp", "hclgp"}));
  run->add_option("--seed", run_seed, "Component store to start from (hclgp mode)");
  run->add_option("--phase", run_phase, "train, test or all")
      ->check(CLI::IsMember({"train", "test", "all"}));
  run->add_option("--domains", run_domains, "Explicit scenario ids")->delimiter(',');
  run->add_option("--out", run_out, "Report directory");

  // generalize
  std::string gen_store, gen_out;
  std::optional<double> gen_threshold;
  std::optional<int> gen_budget;
  auto* gen = app.add_subcommand("generalize", "Run one generalization pass over a store");
  add_common(gen, common);
  gen->add_option("--store", gen_store, "Store directory, updated in place")->required();
  gen->add_option("--threshold", gen_threshold, "Cluster similarity threshold");
  gen->add_option("--budget", gen_budget, "Retries per cluster");
  gen->add_option("--out", gen_out, "Write the pass report here (JSON)");

  // repo
  std::string repo_store, repo_id;
  int repo_scenarios = 0;
  auto* repo_cmd = app.add_subcommand("repo", "Inspect a component store");
  repo_cmd->require_subcommand(1);
  auto* repo_stats = repo_cmd->add_subcommand("stats", "Counts and usage statistics");
  auto* repo_list = repo_cmd->add_subcommand("list", "One line per component");
  auto* repo_show = repo_cmd->add_subcommand("show", "Full record of one component");
  for (auto* c : {repo_stats, repo_list, repo_show}) {
    c->add_option("--store", repo_store, "Store directory")->required();
  }
  repo_stats->add_option("--scenarios-count", repo_scenarios,
                         "Scenario count for per-scenario means (default: archived policies)");
  repo_show->add_option("id", repo_id, "Component id")->required();

  // miniworld
  auto* mw = app.add_subcommand("miniworld", "Scenario pack utilities");
  mw->require_subcommand(1);
  auto* mw_describe = mw->add_subcommand("describe", "List apps, apis and scenarios");
  add_common(mw_describe, common);

  // agents
  std::string dry_domain, dry_agent = "abstraction", dry_abstraction, dry_store;
  auto* ag = app.add_subcommand("agents", "Agent utilities");
  ag->require_subcommand(1);
  auto* dry = ag->add_subcommand("dry-run", "Print the exact prompt without calling a backend");
  add_common(dry, common);
  dry->add_option("--domain", dry_domain, "Scenario id")->required();
  dry->add_option("--agent", dry_agent, "abstraction or generate")
      ->check(CLI::IsMember({"abstraction", "generate"}));
  dry->add_option("--abstraction", dry_abstraction,
                  "Saved abstraction reply (needed for --agent generate)");
  dry->add_option("--store", dry_store, "Component store for the generate prompt");

  // report
  std::string report_in, report_out;
  auto* rep = app.add_subcommand("report", "Re-render reports from a saved suite.json");
  rep->add_option("--in", report_in, "suite.json written by run")->required();
  rep->add_option("--out", report_out, "Report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto build_engine = [&](std::shared_ptr<repo::Repository> store) {
      auto pack = std::make_shared<const miniworld::ScenarioPack>(
          miniworld::ScenarioPack::load(common.scenarios));
      auto engine = orchestrator::make_miniworld_engine(
          load_config(common.config), pack, make_gateway(common), std::move(store),
          agents::TemplateSet::load(common.templates));
      return std::make_pair(pack, engine);
    };

    if (*seed) {
      auto [pack, engine] = build_engine(std::make_shared<repo::Repository>(make_embedder(common)));
      auto result = orchestrator::seed_repository(engine, pack->phase("train"));
      auto snapshot = engine.repo->seed_snapshot();
      snapshot.save((fs::path(seed_out) / "store").string());
      metrics::emit_reports((fs::path(seed_out) / "reports").string(), result.suite);
      Json passes = result.consolidation;
      std::ofstream(fs::path(seed_out) / "consolidation.json", std::ios::binary) << passes.dump(2)
                                                                                << "\n";
      print_summary(result.suite);
      std::cout << "seed store: " << result.validated_components << " validated components in "
                << (fs::path(seed_out) / "store").string() << "\n";
      return all_solved(result.suite) ? 0 : 1;
    }

    if (*run) {
      auto mode = orchestrator::parse_mode(run_mode);
      auto embedder = make_embedder(common);
      auto store = mode == orchestrator::Mode::kHCLGP ? open_store(run_seed, embedder)
                                                      : std::make_shared<repo::Repository>(embedder);
      auto [pack, engine] = build_engine(store);
      auto domains = select_domains(*pack, run_phase, run_domains);
      auto report = orchestrator::run_suite(engine, domains, mode);
      metrics::emit_reports(run_out, report);
      if (mode == orchestrator::Mode::kHCLGP) engine.repo->save((fs::path(run_out) / "store").string());
      print_summary(report);
      return all_solved(report) ? 0 : 1;
    }

    if (*gen) {
      auto [pack, engine] = build_engine(open_store(gen_store, make_embedder(common)));
      if (gen_threshold) engine.config.cluster_threshold = *gen_threshold;
      if (gen_budget) engine.config.debug_budget = *gen_budget;
      engine.config.validate();
      auto report = generalize::run_generalization(*engine.repo, *engine.agents, *engine.validator,
                                                   engine.lookup(), engine.config);
      engine.repo->save(gen_store);
      Json j = report;
      if (!gen_out.empty()) std::ofstream(gen_out, std::ios::binary) << j.dump(2) << "\n";
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*repo_cmd) {
      auto store = repo::Repository::load(repo_store, retrieval::make_embedding_provider("ngram"));
      if (*repo_stats) {
        int n = repo_scenarios > 0 ? repo_scenarios
                                   : static_cast<int>(store.archive_entries().size());
        Json out{{"live", store.live_count()},
                 {"learned", store.learned_count()},
                 {"tombstoned", store.tombstoned().size()},
                 {"archived_policies", store.archive_entries().size()},
                 {"usage_records", store.usage().size()}};
        if (n > 0) {
          Json table = Json::object();
          for (const auto& [p, s] : store.stats(n)) table[std::string(repo::provenance_name(p))] = s;
          out["usage"] = table;
        }
        std::cout << out.dump(2) << "\n";
      } else if (*repo_list) {
        for (const auto& c : store.all()) {
          std::cout << c.id << "  " << repo::status_name(*store.status(c.id)) << "  "
                    << repo::provenance_name(c.provenance) << "  " << c.signature.to_string()
                    << "\n";
        }
      } else {
        auto c = store.get(repo_id);
        if (!c) throw Error("no component '" + repo_id + "' in " + repo_store);
        Json j = *c;
        j["status"] = std::string(repo::status_name(*store.status(repo_id)));
        std::cout << j.dump(2) << "\n";
      }
      return 0;
    }

    if (*mw) {
      std::cout << miniworld::describe(miniworld::ScenarioPack::load(common.scenarios));
      return 0;
    }

    if (*ag) {
      auto pack = miniworld::ScenarioPack::load(common.scenarios);
      auto* d = pack.find(dry_domain);
      if (!d) throw Error("no scenario named '" + dry_domain + "'");
      auto embedder = make_embedder(common);
      auto store = open_store(dry_store, embedder);
      // The gateway is never called; it only satisfies the constructor.
      llm::Gateway idle(std::make_shared<llm::ScriptedBackend>(std::vector<llm::ScriptedRule>{}),
                        std::make_shared<llm::CostLedger>());
      agents::Agents a(idle, agents::TemplateSet::load(common.templates), embedder,
                       miniworld::api_docs(), load_config(common.config).retrieval_k);
      if (dry_agent == "abstraction") {
        std::cout << a.abstraction_prompt(d->domain);
      } else {
        if (dry_abstraction.empty()) throw Error("--agent generate needs --abstraction <reply file>");
        std::ifstream in(dry_abstraction, std::ios::binary);
        if (!in) throw Error("cannot read " + dry_abstraction);
        std::stringstream ss;
        ss << in.rdbuf();
        auto abstraction = agents::Agents::parse_abstraction(ss.str(), d->domain);
        auto ctx = agents::component_context(*store, a.search_components(abstraction, *store));
        std::cout << a.generation_prompt(d->domain, abstraction, ctx, "");
      }
      return 0;
    }

    if (*rep) {
      auto suite = metrics::load_suite(report_in);
      for (const auto& f : metrics::emit_reports(report_out, suite)) std::cout << f << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
