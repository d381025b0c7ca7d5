/*
 * Copyright 2026 The cograg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cograg/cogpred.hpp"
#include "cograg/error.hpp"
#include "cograg/exam.hpp"
#include "cograg/kb.hpp"
#include "cograg/llm.hpp"
#include "cograg/pipeline.hpp"
#include "cograg/report.hpp"
#include "cograg/retrieval.hpp"

namespace {

using namespace cograg;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

struct BackendOptions {
  std::string mock;
  bool remote = false;
  int max_concurrent = 4;
};

std::unique_ptr<llm::ChatProvider> make_chat(const BackendOptions& o) {
  if (!o.mock.empty()) {
    return std::make_unique<llm::MockProvider>(llm::MockProvider::load_script(o.mock));
  }
  if (o.remote) return std::make_unique<llm::RemoteProvider>(llm::RemoteConfig::from_env());
  throw CLI::ValidationError("backend", "one of --mock <script> or --remote is required");
}

std::unique_ptr<llm::Embedder> make_embedder(const std::string& kind, std::size_t dim) {
  if (kind == "hash") return std::make_unique<llm::HashEmbedder>(dim);
  if (kind == "remote") {
    auto cfg = llm::RemoteEmbedderConfig::from_env();
    return std::make_unique<llm::RemoteEmbedder>(std::move(cfg));
  }
  throw CLI::ValidationError("--embedder", "expected hash or remote");
}

std::optional<eval::Mode> parse_mode(const std::string& s) {
  if (s.empty() || s == "all") return std::nullopt;
  if (s == "single") return eval::Mode::kSingle;
  if (s == "scenario") return eval::Mode::kScenario;
  throw CLI::ValidationError("--mode", "expected single, scenario or all");
}

void add_backend_options(CLI::App* cmd, BackendOptions& o) {
  auto* mock = cmd->add_option("--mock", o.mock, "Mock script (line-delimited records)");
  auto* remote = cmd->add_flag("--remote", o.remote, "Use the HTTP backend from COGRAG_LLM_* variables");
  mock->excludes(remote);
  cmd->add_option("--max-concurrent", o.max_concurrent, "Cap on in-flight model requests")
      ->check(CLI::PositiveNumber);
}

// ------------------------------------------------------------------ ingest

struct IngestOptions {
  std::string corpus;
  std::string out;
  std::optional<double> dedup;
  std::string embedder = "hash";
  std::size_t dim = 256;
};

int run_ingest(const IngestOptions& o) {
  auto kb = kb::ingest_file(o.corpus);
  auto embedder = make_embedder(o.embedder, o.dim);
  std::size_t before = kb.size();
  if (o.dedup) kb = kb::KnowledgeBase(kb::deduplicate(kb.entries(), *embedder, *o.dedup));
  kb::embed_corpus(kb, *embedder);
  kb::save_kb(kb, o.out);
  std::cout << "ingested " << before << " records, kept " << kb.size() << ", dim "
            << kb.embeddings().dim() << " -> " << o.out << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ retrieve

struct RetrieveOptions {
  std::string kb_path;
  std::string query;
  std::string tags;
  std::string method = "tag_dense";
  std::size_t top_k = retrieval::kDefaultTopK;
  std::string embedder = "hash";
};

int run_retrieve(const RetrieveOptions& o) {
  auto kb = kb::load_kb(o.kb_path);
  auto embedder = make_embedder(o.embedder, kb.embeddings().dim());
  retrieval::RankedList ranked;
  if (o.method == "tag_dense") {
    kb::TagSet tags = o.tags.empty() ? kb::TagSet::all() : kb::TagSet::parse_list(o.tags);
    ranked = retrieval::tag_constrained_search(kb, *embedder, o.query, tags, o.top_k);
  } else if (o.method == "dense") {
    ranked = retrieval::dense_search(kb, embedder->embed_one(o.query), std::nullopt, o.top_k);
  } else if (o.method == "bm25") {
    retrieval::Bm25Index bm25(kb);
    ranked = bm25.search(o.query, o.top_k);
  } else if (o.method == "hybrid") {
    retrieval::Bm25Index bm25(kb);
    ranked = retrieval::hybrid_search(kb, bm25, *embedder, o.query, o.top_k);
  } else {
    throw CLI::ValidationError("--method", "expected tag_dense, dense, bm25 or hybrid");
  }
  int rank = 0;
  for (const auto& hit : ranked.items) {
    const auto& e = kb.entry(hit.id);
    std::printf("%d\t%u\t%.6f\t%s\t%s\n", ++rank, hit.id, hit.score, e.tags.to_string().c_str(),
                e.question.c_str());
  }
  return kExitOk;
}

// ------------------------------------------------------------------ predict

struct PredictOptions {
  std::string exam;
  bool few_shot = false;
  bool direct_binary = false;
  std::string prompts;
  std::string mode;
  BackendOptions backend;
};

int run_predict(const PredictOptions& o) {
  auto items = eval::load_exam(o.exam, parse_mode(o.mode));
  if (items.empty()) throw Error(Errc::kData, "exam has no items");
  auto registry = o.prompts.empty() ? cogpred::PromptRegistry::builtin()
                                    : cogpred::PromptRegistry::from_file(o.prompts);
  auto chat = make_chat(o.backend);
  llm::GatedProvider gated(*chat, o.backend.max_concurrent, nullptr);
  std::vector<eval::ItemRecord> records;
  for (const auto& item : items) {
    llm::SessionProvider session(gated, item.id);
    auto pred = o.direct_binary
                    ? cogpred::predict_binary(item.stem, item.options, session, o.few_shot, registry)
                    : cogpred::predict_level(item.stem, item.options, session, o.few_shot, registry);
    eval::ItemRecord rec;
    rec.id = item.id;
    rec.gold = item.gold;
    rec.gold_level = item.level;
    rec.predicted_level = pred.level;
    rec.predicted_category = pred.category;
    rec.level_defaulted = pred.defaulted;
    std::printf("%s\t%s\t%s\t%s%s\n", item.id.c_str(),
                std::string(cogpred::level_code(item.level)).c_str(),
                pred.level ? std::string(cogpred::level_code(*pred.level)).c_str() : "-",
                std::string(cogpred::category_name(pred.category)).c_str(),
                pred.defaulted ? "\tdefaulted" : "");
    records.push_back(std::move(rec));
  }
  auto report = eval::compute_report(records);
  std::size_t five_way = 0;
  for (const auto& r : records) five_way += r.predicted_level == r.gold_level ? 1 : 0;
  if (!o.direct_binary) {
    std::printf("five-way accuracy: %s%%\n",
                eval::format_one_decimal(100.0 * five_way / records.size()).c_str());
  }
  std::printf("routing hit: overall %s%%, LOW %s%%, HIGH %s%%\n",
              report.routing_hit_overall ? eval::format_one_decimal(*report.routing_hit_overall).c_str() : "-",
              report.routing_hit_low ? eval::format_one_decimal(*report.routing_hit_low).c_str() : "-",
              report.routing_hit_high ? eval::format_one_decimal(*report.routing_hit_high).c_str() : "-");
  std::printf("defaulted predictions: %zu\n", report.defaulted_level_predictions);
  return kExitOk;
}

// ------------------------------------------------------------------ eval

struct EvalOptions {
  std::string kb_path;
  std::string exam;
  std::string method = "cograg_plus";
  int alpha = judge::kDefaultAlpha;
  int beta = judge::kDefaultBeta;
  std::size_t top_k = retrieval::kDefaultTopK;
  std::size_t budget = 1024;
  bool no_rr = false;
  bool no_cr = false;
  bool standard_cot = false;
  bool cog_injection = false;
  bool no_cog_injection = false;
  bool zero_shot = false;
  bool direct_binary = false;
  bool no_verifier = false;
  std::size_t workers = 4;
  std::string format = "table";
  std::string log;
  std::string prompts;
  std::string mode;
  std::string embedder = "hash";
  BackendOptions backend;
};

int run_eval(const EvalOptions& o) {
  auto method = eval::parse_method(o.method);
  if (!method) throw CLI::ValidationError("--method", "unknown method '" + o.method + "'");
  auto config = eval::RunConfig::for_method(*method);
  config.alpha = o.alpha;
  config.beta = o.beta;
  config.top_k = o.top_k;
  config.budget = o.budget;
  if (o.no_rr) config.rr_enabled = false;
  if (o.no_cr) config.cr_enabled = false;
  if (o.standard_cot) config.standard_cot = true;
  if (o.cog_injection) config.cog_injection = true;
  if (o.no_cog_injection) config.cog_injection = false;
  if (o.zero_shot) config.few_shot_level = false;
  if (o.direct_binary) config.direct_binary = true;
  if (o.no_verifier) config.verifier = false;
  config.workers = o.workers;

  auto items = eval::load_exam(o.exam, parse_mode(o.mode));
  if (items.empty()) throw Error(Errc::kData, "exam has no items");
  auto registry = o.prompts.empty() ? cogpred::PromptRegistry::builtin()
                                    : cogpred::PromptRegistry::from_file(o.prompts);

  std::optional<kb::KnowledgeBase> kb;
  std::optional<retrieval::Bm25Index> bm25;
  std::unique_ptr<llm::Embedder> embedder;
  eval::Resources res;
  res.prompts = &registry;
  if (*method != eval::Method::kBaseline) {
    if (o.kb_path.empty()) throw CLI::ValidationError("--kb", "required for retrieval methods");
    kb = kb::load_kb(o.kb_path);
    bm25.emplace(*kb);
    embedder = make_embedder(o.embedder, kb->embeddings().dim());
    res.kb = &*kb;
    res.bm25 = &*bm25;
    res.embedder = embedder.get();
  }

  auto chat = make_chat(o.backend);
  std::unique_ptr<llm::RunLog> log =
      o.log.empty() ? std::make_unique<llm::RunLog>() : std::make_unique<llm::RunLog>(o.log);
  llm::GatedProvider gated(*chat, o.backend.max_concurrent, log.get());
  auto records = eval::run_all(items, config, res, gated, log.get());

  std::size_t provider_failures = 0;
  for (const auto& r : records) {
    for (const auto& c : r.calls) provider_failures += c.failed ? 1 : 0;
  }
  auto report = eval::compute_report(records);
  std::cout << eval::emit_report(
      report, o.format == "machine" ? eval::ReportFormat::kMachine : eval::ReportFormat::kTable);
  if (provider_failures > 0) {
    std::cerr << provider_failures << " model call(s) failed; see the run log\n";
    return kExitProvider;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cognitive-aware retrieval and constrained reasoning for exam QA"};
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "Build a knowledge base file from JSONL records");
  cmd_ingest->add_option("--corpus", ingest.corpus, "Line-delimited QA records")->required();
  cmd_ingest->add_option("--out", ingest.out, "Output knowledge base file")->required();
  cmd_ingest->add_option("--dedup", ingest.dedup, "Cosine threshold for near-duplicate removal")
      ->check(CLI::Range(0.0, 1.0));
  cmd_ingest->add_option("--embedder", ingest.embedder, "hash or remote");
  cmd_ingest->add_option("--dim", ingest.dim, "Hash embedder dimension")->check(CLI::PositiveNumber);

  RetrieveOptions retrieve;
  auto* cmd_retrieve = app.add_subcommand("retrieve", "Query a knowledge base");
  cmd_retrieve->add_option("--kb", retrieve.kb_path)->required();
  cmd_retrieve->add_option("--query", retrieve.query)->required();
  cmd_retrieve->add_option("--tags", retrieve.tags, "Comma-separated tag codes, e.g. T1,T3");
  cmd_retrieve->add_option("--method", retrieve.method, "tag_dense, dense, bm25 or hybrid");
  cmd_retrieve->add_option("--topk", retrieve.top_k)->check(CLI::PositiveNumber);
  cmd_retrieve->add_option("--embedder", retrieve.embedder, "hash or remote");

  PredictOptions predict;
  auto* cmd_predict = app.add_subcommand("predict", "Predict cognitive levels for an exam");
  cmd_predict->add_option("--exam", predict.exam)->required();
  cmd_predict->add_flag("--few-shot", predict.few_shot, "Include level exemplars");
  cmd_predict->add_flag("--direct-binary", predict.direct_binary, "Predict LOW/HIGH directly");
  cmd_predict->add_option("--prompts", predict.prompts, "Prompt registry file");
  cmd_predict->add_option("--mode", predict.mode, "single, scenario or all");
  add_backend_options(cmd_predict, predict.backend);

  EvalOptions ev;
  auto* cmd_eval = app.add_subcommand("eval", "Run an exam and report accuracy");
  cmd_eval->add_option("--kb", ev.kb_path, "Knowledge base file");
  cmd_eval->add_option("--exam", ev.exam)->required();
  cmd_eval->add_option("--method", ev.method,
                       "baseline, bm25, dense, hybrid, cograg or cograg_plus");
  cmd_eval->add_option("--alpha", ev.alpha, "Relevance threshold")->check(CLI::Range(0, 100));
  cmd_eval->add_option("--beta", ev.beta, "Margin threshold")->check(CLI::Range(0, 100));
  cmd_eval->add_option("--topk", ev.top_k)->check(CLI::PositiveNumber);
  cmd_eval->add_option("--budget", ev.budget, "Evidence token budget")->check(CLI::PositiveNumber);
  cmd_eval->add_flag("--no-rr", ev.no_rr, "Disable reinforced retrieval");
  cmd_eval->add_flag("--no-cr", ev.no_cr, "Disable constrained reasoning");
  cmd_eval->add_flag("--standard-cot", ev.standard_cot, "Answer with free-form chain of thought");
  auto* inj = cmd_eval->add_flag("--cog-injection", ev.cog_injection, "Inject the predicted level");
  auto* no_inj = cmd_eval->add_flag("--no-cog-injection", ev.no_cog_injection);
  inj->excludes(no_inj);
  cmd_eval->add_flag("--zero-shot", ev.zero_shot, "Level prediction without exemplars");
  cmd_eval->add_flag("--direct-binary", ev.direct_binary, "Predict LOW/HIGH directly");
  cmd_eval->add_flag("--no-verifier", ev.no_verifier, "Skip the model consistency check");
  cmd_eval->add_option("--workers", ev.workers)->check(CLI::PositiveNumber);
  cmd_eval->add_option("--format", ev.format)->check(CLI::IsMember({"table", "machine"}));
  cmd_eval->add_option("--log", ev.log, "Run log output (line-delimited records)");
  cmd_eval->add_option("--prompts", ev.prompts, "Prompt registry file");
  cmd_eval->add_option("--mode", ev.mode, "single, scenario or all");
  cmd_eval->add_option("--embedder", ev.embedder, "hash or remote");
  add_backend_options(cmd_eval, ev.backend);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_ingest) return run_ingest(ingest);
    if (*cmd_retrieve) return run_retrieve(retrieve);
    if (*cmd_predict) return run_predict(predict);
    if (*cmd_eval) return run_eval(ev);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << errc_name(e.code()) << ": " << e.what() << '\n';
    if (e.code() == Errc::kProvider) return kExitProvider;
    if (e.code() == Errc::kParameter) return kExitUsage;
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
