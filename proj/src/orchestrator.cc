// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "textal/orchestrator.h"

#include <algorithm>
#include <chrono>
#include <set>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "textal/hash.h"
#include "textal/logging.h"
#include "textal/status_macros.h"

namespace textal {
namespace {

using nlohmann::json;
using SteadyClock = std::chrono::steady_clock;

constexpr uint64_t kEvalSplitSalt = 0x6576616c73706c74ULL;

double MillisSince(SteadyClock::time_point start) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - start)
      .count();
}

Money Times(Money m, size_t n) {
  return Money::FromUnits(m.units() * static_cast<int64_t>(n));
}

std::string GenerationKind(const StrategyRequirements& needs,
                           const DecodeParams& decode) {
  if (needs.sampled_generations) {
    return absl::StrCat("sampled:", decode.num_samples, ":",
                        decode.temperature);
  }
  return "greedy";
}

bool IsLlmLabeller(LabellerType t) {
  return t == LabellerType::kApiLlm || t == LabellerType::kLocalLlm;
}

IterationRecord RoundRecord(const Checkpoint& ck) {
  const RoundProgress& p = ck.progress;
  IterationRecord rec;
  rec.round = p.round;
  rec.iteration = ck.pool.iteration;
  rec.labeled_count = static_cast<int64_t>(ck.pool.labeled_ids.size());
  rec.selected = p.selected;
  rec.skipped = p.skipped;
  rec.skipped.insert(rec.skipped.end(), p.withheld.begin(), p.withheld.end());
  rec.strategy = p.strategy_used;
  rec.fallback = p.fallback;
  rec.skipped_train = p.skipped_train;
  rec.model_ref = ck.pool.model_ref;
  rec.ledger = ck.ledger.ToJson();
  return rec;
}

}  // namespace

StopDecision CheckStopping(const std::vector<StoppingCriterion>& criteria,
                           const StopInputs& in) {
  auto find = [&](StopKind kind) -> std::vector<const StoppingCriterion*> {
    std::vector<const StoppingCriterion*> out;
    for (const StoppingCriterion& c : criteria) {
      if (c.kind == kind) out.push_back(&c);
    }
    return out;
  };
  if (!find(StopKind::kBudget).empty() && in.ledger != nullptr &&
      in.ledger->budget()) {
    const CostLedger& l = *in.ledger;
    if (l.Exhausted() || l.projection_tripped() ||
        (in.next_round_cost && !l.Affords(*in.next_round_cost))) {
      return {true, "budget"};
    }
  }
  for (const StoppingCriterion* c : find(StopKind::kLabeledCount)) {
    if (static_cast<double>(in.labeled_count) >= c->threshold) {
      return {true, "labeled_count"};
    }
  }
  for (const StoppingCriterion* c : find(StopKind::kMetricThreshold)) {
    if (in.latest == nullptr) continue;
    auto it = in.latest->values.find(c->metric);
    if (it != in.latest->values.end() && it->second >= c->threshold) {
      return {true, "metric"};
    }
  }
  for (const StoppingCriterion* c : find(StopKind::kIterationLimit)) {
    if (static_cast<double>(in.iterations_done) >= c->threshold) {
      return {true, "iteration_limit"};
    }
  }
  if (in.unlabeled_count == 0) return {true, "exhausted"};
  return {};
}

absl::StatusOr<StrategyContext> ContextCache::Prepare(
    const Dataset& dataset, const PoolState& state,
    const StrategyRequirements& needs, const DecodeParams& decode,
    const std::map<std::string, double>& params, uint64_t seed,
    ModelGateway* model, ModelGateway* embedder) {
  StrategyContext ctx;
  ctx.params = params;
  ctx.seed = seed;
  for (const std::string& id : state.unlabeled_ids) {
    ctx.unlabeled.push_back({id, dataset.Get(id).input});
  }
  for (const std::string& id : state.labeled_ids) {
    ctx.labeled.push_back(
        {id, dataset.Get(id).input, state.annotations.at(id).text});
  }

  if (needs.embeddings) {
    if (embedder == nullptr) {
      return absl::FailedPreconditionError("no embedding backend configured");
    }
    const std::string tag = embedder->embedding_model();
    std::vector<std::string> ids = state.unlabeled_ids;
    ids.insert(ids.end(), state.labeled_ids.begin(), state.labeled_ids.end());
    std::vector<std::string> missing;
    std::vector<std::string> texts;
    for (const std::string& id : ids) {
      if (!embeddings_.count({tag, id})) {
        missing.push_back(id);
        texts.push_back(dataset.Get(id).input);
      }
    }
    if (!missing.empty()) {
      ASSIGN_OR_RETURN(std::vector<EmbeddingVector> vecs,
                       embedder->Embed(texts));
      for (size_t i = 0; i < missing.size(); ++i) {
        embeddings_[{tag, missing[i]}] = std::move(vecs[i].values);
      }
    }
    for (const std::string& id : ids) {
      ctx.embeddings[id] = embeddings_.at({tag, id});
    }
  }

  if (needs.generations || needs.sampled_generations) {
    if (model == nullptr) {
      return absl::FailedPreconditionError("no model backend configured");
    }
    const std::string kind = GenerationKind(needs, decode);
    std::vector<std::string> missing;
    std::vector<std::string> prompts;
    for (const std::string& id : state.unlabeled_ids) {
      if (!generations_.count({state.model_ref, kind, id})) {
        missing.push_back(id);
        prompts.push_back(dataset.Get(id).input);
      }
    }
    if (!missing.empty()) {
      ASSIGN_OR_RETURN(auto results,
                       model->GenerateBatch(state.model_ref, prompts, decode));
      for (size_t i = 0; i < missing.size(); ++i) {
        generations_[{state.model_ref, kind, missing[i]}] =
            std::move(results[i]);
      }
    }
    for (const std::string& id : state.unlabeled_ids) {
      ctx.generations[id] = generations_.at({state.model_ref, kind, id});
    }
  }
  return ctx;
}

absl::StatusOr<RunDeps> MakeRunDeps(const RunConfig& config) {
  RunDeps deps;
  ASSIGN_OR_RETURN(auto model_backend, MakeBackend(config.model_backend));
  deps.model = std::make_shared<ModelGateway>(
      model_backend, config.model_backend.max_concurrent,
      config.model_backend.retry);
  ASSIGN_OR_RETURN(auto embed_backend, MakeBackend(config.embedding_backend));
  deps.embedder = std::make_shared<ModelGateway>(
      embed_backend, config.embedding_backend.max_concurrent,
      config.embedding_backend.retry);
  if (config.labeller == LabellerType::kApiLlm) {
    ASSIGN_OR_RETURN(auto labeller_backend,
                     MakeBackend(config.labeller_backend));
    deps.labeller = std::make_shared<ModelGateway>(
        labeller_backend, config.labeller_backend.max_concurrent,
        config.labeller_backend.retry);
  } else if (config.labeller == LabellerType::kLocalLlm) {
    deps.labeller = deps.model;
  }
  switch (config.adapter) {
    case AdapterKind::kNoop:
      deps.adapter = std::make_shared<NoOpFineTuneAdapter>();
      break;
    case AdapterKind::kMock:
      deps.adapter = std::make_shared<MockFineTuneAdapter>();
      break;
    case AdapterKind::kCommand:
      deps.adapter = std::make_shared<CommandFineTuneAdapter>(
          config.train_command, config.train_timeout);
      break;
    case AdapterKind::kHttp:
      deps.adapter = std::make_shared<HttpFineTuneAdapter>(
          config.train_url, config.train_timeout);
      break;
  }
  deps.evaluator = std::make_shared<ModelEvaluator>(deps.model, config.metrics,
                                                    config.generation);
  if (config.labeller == LabellerType::kHuman) {
    deps.queue = std::make_shared<HumanTaskQueue>(config.lease);
  }
  return deps;
}

absl::StatusOr<RunData> LoadRunData(const RunConfig& config) {
  if (config.data_path.empty()) {
    return absl::InvalidArgumentError("data.path is required");
  }
  ASSIGN_OR_RETURN(std::vector<Instance> instances,
                   LoadDataset(config.data_path, config.schema));
  RunData data;
  if (!config.test_path.empty()) {
    DatasetSchema test_schema = config.schema;
    test_schema.id_prefix = "test-";
    ASSIGN_OR_RETURN(std::vector<Instance> test,
                     LoadDataset(config.test_path, test_schema));
    std::vector<std::string> ids;
    for (Instance& inst : test) {
      ids.push_back(inst.id);
      instances.push_back(std::move(inst));
    }
    data.test_ids = std::move(ids);
  }
  ASSIGN_OR_RETURN(data.dataset, Dataset::Create(std::move(instances)));
  return data;
}

json RunSnapshotToJson(const RunSnapshot& s) {
  json records = json::array();
  for (const IterationRecord& r : s.records) {
    records.push_back(IterationRecordToJson(r, /*include_timing=*/true));
  }
  return {{"status", s.status},
          {"stop_reason", s.stop_reason},
          {"error", s.error},
          {"round", s.round},
          {"phase", s.phase},
          {"iteration", s.iteration},
          {"labeled", s.labeled},
          {"unlabeled", s.unlabeled},
          {"test", s.test},
          {"model_ref", s.model_ref},
          {"ledger", s.ledger},
          {"records", records}};
}

Orchestrator::Orchestrator(RunConfig config, RunData data, RunDeps deps,
                           std::filesystem::path run_dir)
    : config_(std::move(config)),
      data_(std::move(data)),
      deps_(std::move(deps)),
      store_(std::move(run_dir)) {
  snapshot_.status = "created";
  if (deps_.queue) {
    deps_.queue->set_sink([this](const AnnotationTask& task) {
      AnnotationRecord r;
      r.id = task.instance_id;
      r.annotation = task.annotation;
      r.annotator = task.claimant;
      r.timestamp = task.annotated_at;
      r.iteration = task.created_iteration;
      r.status = task.status == TaskStatus::kDone ? "done" : "skipped";
      if (task.status == TaskStatus::kDone && config_.prices.per_label()) {
        r.cost = *config_.prices.per_label();
      }
      return store_.AppendAnnotation(r);
    });
  }
}

RunSnapshot Orchestrator::Snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

absl::Status Orchestrator::Save(const Checkpoint& ck) {
  RETURN_IF_ERROR(store_.SaveCheckpoint(ck));
  std::lock_guard lock(snapshot_mu_);
  snapshot_.status = ck.status;
  snapshot_.stop_reason = ck.stop_reason;
  snapshot_.error.clear();
  snapshot_.round = ck.progress.round;
  snapshot_.phase = std::string(PhaseName(ck.progress.phase));
  snapshot_.iteration = ck.pool.iteration;
  snapshot_.labeled = static_cast<int64_t>(ck.pool.labeled_ids.size());
  snapshot_.unlabeled = static_cast<int64_t>(ck.pool.unlabeled_ids.size());
  snapshot_.test = static_cast<int64_t>(ck.pool.test_ids.size());
  snapshot_.model_ref = ck.pool.model_ref;
  snapshot_.ledger = ck.ledger.ToJson();
  snapshot_.records = ck.records;
  return absl::OkStatus();
}

absl::StatusOr<RunResult> Orchestrator::Run() {
  RETURN_IF_ERROR(store_.Open());
  if (store_.HasCheckpoint()) {
    return absl::FailedPreconditionError(absl::StrCat(
        store_.dir().string(), " already holds a run; resume it instead"));
  }
  RETURN_IF_ERROR(store_.WriteConfig(config_.tree));
  Checkpoint ck;
  if (data_.test_ids) {
    ASSIGN_OR_RETURN(ck.pool,
                     InitSplitWithTestIds(data_.dataset, *data_.test_ids,
                                          config_.seed, config_.base_model));
  } else {
    ASSIGN_OR_RETURN(ck.pool, InitSplit(data_.dataset, config_.test_fraction,
                                        config_.seed, config_.base_model));
  }
  ck.ledger = CostLedger(config_.budget);
  RETURN_IF_ERROR(Save(ck));
  return Drive(std::move(ck));
}

absl::StatusOr<RunResult> Orchestrator::Resume() {
  RETURN_IF_ERROR(store_.Open());
  ASSIGN_OR_RETURN(Checkpoint ck, store_.LoadCheckpoint());
  RETURN_IF_ERROR(CheckPartition(ck.pool, data_.dataset));
  {
    std::lock_guard lock(snapshot_mu_);
    snapshot_.status = ck.status;
  }
  return Drive(std::move(ck));
}

absl::StatusOr<RunResult> Orchestrator::Drive(Checkpoint ck) {
  reference_pool_size_ = ck.pool.labeled_ids.size() + ck.pool.unlabeled_ids.size();
  auto crashed = [&](Phase phase) {
    return crash_hook_ && crash_hook_(ck.progress.round, phase);
  };
  auto fail = [&](absl::Status s) {
    std::lock_guard lock(snapshot_mu_);
    snapshot_.status = "failed";
    snapshot_.error = s.ToString();
    return s;
  };

  while (ck.status == "running") {
    const int round = ck.progress.round;
    if (ck.progress.phase == Phase::kNone) {
      bool stopped = false;
      if (absl::Status s = SelectPhase(ck, stopped); !s.ok()) return fail(s);
      if (stopped) break;
      if (crashed(Phase::kSelect)) {
        return absl::AbortedError(
            absl::StrCat("injected crash after select, round ", round));
      }
    }
    if (ck.progress.phase == Phase::kSelect) {
      if (absl::Status s = LabelPhase(ck); !s.ok()) return fail(s);
      if (ck.status != "running") break;
      if (crashed(Phase::kLabel)) {
        return absl::AbortedError(
            absl::StrCat("injected crash after label, round ", round));
      }
    }
    if (ck.progress.phase == Phase::kLabel) {
      if (absl::Status s = TrainPhase(ck); !s.ok()) return fail(s);
      if (crashed(Phase::kTrain)) {
        return absl::AbortedError(
            absl::StrCat("injected crash after train, round ", round));
      }
    }
    if (ck.progress.phase == Phase::kTrain) {
      if (absl::Status s = EvaluatePhase(ck); !s.ok()) return fail(s);
      if (crashed(Phase::kEvaluate)) {
        return absl::AbortedError(
            absl::StrCat("injected crash after evaluate, round ", round));
      }
    }
  }
  return RunResult{ck.records, ck.pool.model_ref, ck.stop_reason};
}

size_t Orchestrator::RoundSize(const Checkpoint& ck) const {
  const size_t unlabeled = ck.pool.unlabeled_ids.size();
  const size_t labeled = ck.pool.labeled_ids.size();
  const StoppingCriterion* target = config_.FindStop(StopKind::kLabeledCount);
  size_t n = 0;
  if (config_.mode == RunMode::kEd && target != nullptr) {
    n = static_cast<size_t>(target->threshold) > labeled
            ? static_cast<size_t>(target->threshold) - labeled
            : 0;
  } else {
    const BatchSizeSpec spec = config_.mode == RunMode::kAl && ck.progress.round > 0
                                   ? config_.query_size
                                   : config_.init_query_size;
    n = ResolveBatchSize(spec, reference_pool_size_, unlabeled).value_or(0);
  }
  if (target != nullptr) {
    const size_t room = static_cast<size_t>(target->threshold) > labeled
                            ? static_cast<size_t>(target->threshold) - labeled
                            : 0;
    n = std::min(n, room);
  }
  return std::min(n, unlabeled);
}

std::optional<Money> Orchestrator::NextRoundCost(const Checkpoint& ck,
                                                 size_t size) const {
  if (!config_.budget) return std::nullopt;
  if (config_.labeller == LabellerType::kHuman) {
    if (!config_.prices.per_label()) return std::nullopt;
    return Times(*config_.prices.per_label(), size);
  }
  if (!IsLlmLabeller(config_.labeller)) return std::nullopt;
  Money bound;
  for (const std::string& id : ck.pool.unlabeled_ids) {
    absl::StatusOr<std::string> prompt =
        RenderPrompt(config_.prompt_template, data_.dataset.Get(id).input);
    if (!prompt.ok()) continue;
    const Money b = TaskCostBound(EstimateInputTokens(*prompt),
                                  config_.labeller_decode.max_tokens,
                                  config_.prices, config_.batch);
    bound = std::max(bound, b);
  }
  return Times(ProjectTaskCost(ck.ledger, bound), size);
}

absl::Status Orchestrator::SelectPhase(Checkpoint& ck, bool& stopped) {
  const auto start = SteadyClock::now();
  const size_t size = RoundSize(ck);
  StopInputs in;
  in.labeled_count = static_cast<int64_t>(ck.pool.labeled_ids.size());
  in.unlabeled_count = static_cast<int64_t>(ck.pool.unlabeled_ids.size());
  in.iterations_done = config_.mode == RunMode::kAl ? ck.pool.iteration - 1
                                                    : ck.pool.iteration;
  in.ledger = &ck.ledger;
  if (!ck.records.empty() && ck.records.back().report) {
    in.latest = &*ck.records.back().report;
  }
  in.next_round_cost = NextRoundCost(ck, std::max<size_t>(size, 1));
  StopDecision decision = CheckStopping(config_.stopping, in);
  if (!decision.stop && size == 0) decision = {true, "exhausted"};
  if (decision.stop) {
    ck.status = "stopped";
    ck.stop_reason = decision.reason;
    stopped = true;
    LogInfo(absl::StrCat("run stopped: ", decision.reason));
    return Save(ck);
  }

  const StrategyInfo* info = StrategyRegistry::Global().Find(config_.strategy);
  if (info == nullptr) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown strategy ", config_.strategy));
  }
  bool fallback = false;
  if (config_.mode == RunMode::kAl && ck.progress.round == 0 &&
      (info->needs.generations || info->needs.sampled_generations)) {
    info = StrategyRegistry::Global().Find("random");
    fallback = true;
  }
  DecodeParams decode = config_.generation;
  decode.num_samples = 1;
  if (info->needs.sampled_generations) {
    decode.num_samples = static_cast<int>(
        config_.strategy_params.count(kParamBleuVarSamples)
            ? config_.strategy_params.at(kParamBleuVarSamples)
            : 5);
    decode.temperature =
        config_.strategy_params.count(kParamBleuVarTemperature)
            ? config_.strategy_params.at(kParamBleuVarTemperature)
            : 1.0;
  }
  const uint64_t seed =
      HashCombine(config_.seed, static_cast<uint64_t>(ck.progress.round));
  absl::StatusOr<StrategyContext> ctx = cache_.Prepare(
      data_.dataset, ck.pool, info->needs, decode, config_.strategy_params,
      seed, deps_.model.get(), deps_.embedder.get());
  if (!ctx.ok()) {
    return absl::Status(ctx.status().code(),
                        absl::StrCat("strategy ", info->name, ": ",
                                     ctx.status().message()));
  }
  absl::StatusOr<std::vector<std::string>> selected = info->select(*ctx, size);
  if (!selected.ok()) {
    return absl::Status(selected.status().code(),
                        absl::StrCat("strategy ", info->name, ": ",
                                     selected.status().message()));
  }
  RoundProgress& p = ck.progress;
  p.phase = Phase::kSelect;
  p.selected = std::move(*selected);
  p.strategy_used = info->name;
  p.fallback = fallback;
  p.wall_ms["select"] = MillisSince(start);
  return Save(ck);
}

absl::StatusOr<std::vector<LabelOutcome>> Orchestrator::AnnotateHuman(
    int round, const std::vector<LabelTask>& tasks, CostLedger& ledger) {
  std::vector<LabelOutcome> withheld;
  std::vector<LabelTask> affordable = tasks;
  if (ledger.budget() && config_.prices.per_label()) {
    const int64_t price = config_.prices.per_label()->units();
    const int64_t left = ledger.budget()->units() - ledger.spent().units();
    const size_t n = price == 0 ? tasks.size()
                                : static_cast<size_t>(std::max<int64_t>(
                                      left / price, 0));
    if (n < tasks.size()) {
      affordable.resize(n);
      ledger.set_projection_tripped();
      for (size_t i = n; i < tasks.size(); ++i) {
        LabelOutcome o;
        o.id = tasks[i].id;
        o.status = LabelStatus::kBudget;
        o.reason = "budget";
        withheld.push_back(std::move(o));
      }
    }
  }
  std::vector<HumanTaskQueue::NewTask> fresh;
  std::vector<std::string> task_ids;
  for (const LabelTask& t : affordable) {
    const std::string task_id = absl::StrCat(round, ":", t.id);
    task_ids.push_back(task_id);
    if (!deps_.queue->Get(task_id)) fresh.push_back({t.id, t.input});
  }
  RETURN_IF_ERROR(deps_.queue->Enqueue(fresh, round).status());
  {
    std::lock_guard lock(snapshot_mu_);
    snapshot_.status = "waiting_for_annotations";
  }
  while (!deps_.queue->WaitResolved(task_ids, std::chrono::milliseconds(200))) {
    if (stop_requested_) {
      return absl::CancelledError("run stopped while waiting for annotations");
    }
  }
  {
    std::lock_guard lock(snapshot_mu_);
    snapshot_.status = "running";
  }
  // The queue sink already logged each outcome; the caller replays them.
  return withheld;
}

absl::StatusOr<std::vector<LabelOutcome>> Orchestrator::Annotate(
    const Checkpoint& ck, const std::vector<LabelTask>& tasks,
    CostLedger& ledger) {
  switch (config_.labeller) {
    case LabellerType::kOracle:
      return OracleAnnotate(tasks, data_.dataset);
    case LabellerType::kNoisyOracle:
      return NoisyOracleAnnotate(tasks, data_.dataset, config_.noise,
                                 config_.seed);
    case LabellerType::kApiLlm:
    case LabellerType::kLocalLlm: {
      if (!deps_.labeller) {
        return absl::FailedPreconditionError("no labeller backend configured");
      }
      LlmAnnotatorOptions options;
      options.model = config_.labeller_model;
      options.prompt_template = config_.prompt_template;
      options.decode = config_.labeller_decode;
      options.prices = config_.prices;
      options.batch = config_.batch;
      options.max_concurrent = config_.labeller_backend.max_concurrent;
      return AnnotateBatchLlm(tasks, *deps_.labeller, options, ledger);
    }
    case LabellerType::kHuman:
      if (!deps_.queue) {
        return absl::FailedPreconditionError("no annotation queue configured");
      }
      return AnnotateHuman(ck.progress.round, tasks, ledger);
  }
  return absl::InternalError("unknown labeller");
}

absl::Status Orchestrator::LabelPhase(Checkpoint& ck) {
  const auto start = SteadyClock::now();
  const int round = ck.progress.round;
  CostLedger ledger = ck.ledger;

  // Outcomes already logged for this round (an interrupted label phase, or
  // human submissions) are reused rather than requested again.
  auto logged = [&]() -> absl::StatusOr<std::map<std::string, AnnotationRecord>> {
    ASSIGN_OR_RETURN(std::vector<AnnotationRecord> all, store_.ReadAnnotations());
    std::map<std::string, AnnotationRecord> out;
    for (AnnotationRecord& r : all) {
      if (r.iteration == round) out[r.id] = std::move(r);
    }
    return out;
  };
  ASSIGN_OR_RETURN(auto previous, logged());

  std::vector<LabelTask> pending;
  for (const std::string& id : ck.progress.selected) {
    if (!previous.count(id)) pending.push_back({id, data_.dataset.Get(id).input});
  }
  std::map<std::string, LabelOutcome> fresh;
  if (!pending.empty()) {
    // Replay costs of reused outcomes first so projections see them.
    for (const auto& [id, r] : previous) {
      if (IsLlmLabeller(config_.labeller) &&
          (r.usage.input_tokens > 0 || r.usage.output_tokens > 0)) {
        ledger.Charge(r.usage, config_.prices, config_.batch);
      } else if (r.cost.units() > 0) {
        ledger.ChargeFlat(r.cost);
      }
      if (r.status == "done") ledger.CountCompletedTask();
    }
    ASSIGN_OR_RETURN(std::vector<LabelOutcome> outcomes,
                     Annotate(ck, pending, ledger));
    const bool human = config_.labeller == LabellerType::kHuman;
    for (LabelOutcome& o : outcomes) {
      if (!human && o.status != LabelStatus::kBudget) {
        AnnotationRecord r;
        r.id = o.id;
        r.annotation = o.annotation;
        r.annotator = o.annotator;
        r.timestamp = FormatUtc(std::chrono::system_clock::now());
        r.usage = o.usage;
        r.cost = o.cost;
        r.iteration = round;
        r.status = std::string(LabelStatusName(o.status));
        r.reason = o.reason;
        RETURN_IF_ERROR(store_.AppendAnnotation(r));
      }
      fresh[o.id] = std::move(o);
    }
    if (human) {
      // Human outcomes arrive through the log; charge them now.
      ASSIGN_OR_RETURN(auto now_logged, logged());
      for (const auto& [id, r] : now_logged) {
        if (previous.count(id)) continue;
        if (r.cost.units() > 0) ledger.ChargeFlat(r.cost);
        if (r.status == "done") ledger.CountCompletedTask();
        previous[id] = r;
      }
    }
  } else {
    for (const auto& [id, r] : previous) {
      if (IsLlmLabeller(config_.labeller) &&
          (r.usage.input_tokens > 0 || r.usage.output_tokens > 0)) {
        ledger.Charge(r.usage, config_.prices, config_.batch);
      } else if (r.cost.units() > 0) {
        ledger.ChargeFlat(r.cost);
      }
      if (r.status == "done") ledger.CountCompletedTask();
    }
  }

  std::vector<AnnotatedId> batch;
  RoundProgress& p = ck.progress;
  p.moved.clear();
  p.skipped.clear();
  p.withheld.clear();
  for (const std::string& id : p.selected) {
    if (auto it = previous.find(id); it != previous.end()) {
      if (it->second.status == "done") {
        batch.push_back({id, it->second.annotation, it->second.annotator});
      } else {
        p.skipped.push_back(id);
      }
      continue;
    }
    const LabelOutcome& o = fresh.at(id);
    switch (o.status) {
      case LabelStatus::kDone:
        batch.push_back({id, o.annotation, o.annotator});
        break;
      case LabelStatus::kSkipped:
        p.skipped.push_back(id);
        break;
      case LabelStatus::kBudget:
        p.withheld.push_back(id);
        break;
    }
  }
  ASSIGN_OR_RETURN(MoveResult moved, MoveToLabeled(ck.pool, batch));
  p.moved = std::move(moved.moved);
  p.skipped.insert(p.skipped.end(), moved.skipped.begin(), moved.skipped.end());
  ck.ledger = ledger;
  p.phase = Phase::kLabel;
  p.wall_ms["label"] = MillisSince(start);
  if (p.moved.empty()) {
    ck.status = "stopped";
    ck.stop_reason = p.withheld.empty() ? "starved" : "budget";
    LogWarning(absl::StrCat("round ", round, " labeled nothing; stopping (",
                            ck.stop_reason, ")"));
    IterationRecord rec = RoundRecord(ck);
    rec.skipped_train = true;
    rec.skipped_eval = true;
    rec.wall_ms = p.wall_ms;
    ck.records.push_back(std::move(rec));
  }
  return Save(ck);
}

bool Orchestrator::InEvalSplit(const std::string& id) const {
  return UnitInterval(Mix64(HashWithSeed(id, config_.seed ^ kEvalSplitSalt))) <
         config_.eval_split_size;
}

std::vector<std::string> Orchestrator::EvalIds(const PoolState& pool) const {
  if (!pool.test_ids.empty()) return pool.test_ids;
  std::vector<std::string> ids;
  for (const std::string& id : pool.labeled_ids) {
    if (InEvalSplit(id)) ids.push_back(id);
  }
  return ids;
}

absl::Status Orchestrator::TrainPhase(Checkpoint& ck) {
  const auto start = SteadyClock::now();
  const bool held_out = ck.pool.test_ids.empty();
  FineTuneRequest request;
  request.model_ref = ck.pool.model_ref;
  request.hyperparameters = config_.hyperparameters;
  request.iteration = ck.pool.iteration;
  request.work_dir =
      store_.work_dir() / absl::StrCat("round_", ck.progress.round);
  for (const std::string& id : ck.pool.labeled_ids) {
    if (held_out && InEvalSplit(id)) continue;
    request.examples.push_back({id, data_.dataset.Get(id).input,
                                ck.pool.annotations.at(id).text});
  }
  RoundProgress& p = ck.progress;
  if (request.examples.empty()) {
    p.skipped_train = true;
  } else {
    ASSIGN_OR_RETURN(std::string model_ref, deps_.adapter->FineTune(request));
    ck.pool.model_ref = std::move(model_ref);
    p.skipped_train = false;
  }
  ++ck.pool.iteration;
  p.phase = Phase::kTrain;
  p.wall_ms["train"] = MillisSince(start);
  return Save(ck);
}

absl::Status Orchestrator::EvaluatePhase(Checkpoint& ck) {
  const auto start = SteadyClock::now();
  RoundProgress& p = ck.progress;
  IterationRecord rec = RoundRecord(ck);
  const std::vector<std::string> eval_ids = EvalIds(ck.pool);
  rec.eval_size = static_cast<int64_t>(eval_ids.size());
  if (deps_.evaluator->needs_eval_set() &&
      eval_ids.size() < static_cast<size_t>(config_.min_eval_size)) {
    rec.skipped_eval = true;
  } else {
    EvalRequest request;
    request.dataset = &data_.dataset;
    request.model_ref = ck.pool.model_ref;
    request.eval_ids = eval_ids;
    request.labeled_ids = ck.pool.labeled_ids;
    ASSIGN_OR_RETURN(MetricReport report, deps_.evaluator->Evaluate(request));
    rec.report = std::move(report);
  }
  p.wall_ms["evaluate"] = MillisSince(start);
  rec.wall_ms = p.wall_ms;
  ck.records.push_back(std::move(rec));
  ck.progress = RoundProgress{};
  ck.progress.round = ck.records.back().round + 1;
  return Save(ck);
}

}  // namespace textal
