#include "resmgm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>

#include <nlohmann/json.hpp>

#include "resmgm/partition.hpp"

namespace resmgm {

std::string_view to_string(Schedule schedule) {
  return schedule == Schedule::kDeterministic ? "deterministic" : "concurrent";
}

Schedule parse_schedule(std::string_view text) {
  if (text == "deterministic") return Schedule::kDeterministic;
  if (text == "concurrent") return Schedule::kConcurrent;
  throw std::invalid_argument("unknown schedule '" + std::string(text) + "'");
}

namespace {

using Graph = std::map<AgentId, std::set<AgentId>>;

void connect(Graph& g, AgentId a, AgentId b) {
  if (a == b) return;
  g[a].insert(b);
  g[b].insert(a);
}

/// Longest shortest path inside the connected component of every node.
std::map<AgentId, std::uint32_t> component_diameters(const Graph& g) {
  std::map<AgentId, std::uint32_t> eccentricity;
  for (const auto& [start, _] : g) {
    std::map<AgentId, std::uint32_t> dist{{start, 0}};
    std::queue<AgentId> frontier;
    frontier.push(start);
    std::uint32_t far = 0;
    while (!frontier.empty()) {
      const AgentId a = frontier.front();
      frontier.pop();
      far = std::max(far, dist[a]);
      for (AgentId b : g.at(a))
        if (dist.emplace(b, dist[a] + 1).second) frontier.push(b);
    }
    eccentricity[start] = far;
  }
  std::map<AgentId, std::uint32_t> out;
  for (const auto& [start, _] : g) {
    std::set<AgentId> seen{start};
    std::vector<AgentId> stack{start};
    std::uint32_t diameter = 0;
    while (!stack.empty()) {
      const AgentId a = stack.back();
      stack.pop_back();
      diameter = std::max(diameter, eccentricity[a]);
      for (AgentId b : g.at(a))
        if (seen.insert(b).second) stack.push_back(b);
    }
    out[start] = diameter;
  }
  return out;
}

}  // namespace

RunPlan plan_run(const Scenario& scenario, const HeuristicConfig& config) {
  config.validate();
  scenario.validate();
  const Topology& topo = scenario.topology;
  const int depth =
      config.partition_depth > 0 ? config.partition_depth : default_partition_depth(topo);
  const bool prune = config.partition_pruning && !scenario.new_agents.empty() && depth >= 1;

  Graph graph;
  std::map<AgentId, std::optional<std::vector<bool>>> allowed;
  std::set<AgentId> participants;
  RunPlan plan;

  for (const auto* a : scenario.all_agents()) graph[a->id];
  if (!prune) {
    for (const auto* a : scenario.all_agents()) {
      participants.insert(a->id);
      for (const auto* b : scenario.all_agents()) connect(graph, a->id, b->id);
    }
  } else {
    LocalView allocation(topo.resource_count());
    for (const auto& a : scenario.apriori)
      for (ResourceId r : a.initial) allocation[r] = Cell::owner(a.id);
    const PartitionTree tree = build_tree(topo, allocation, depth);

    std::vector<bool> region(topo.tile_count(), false);
    for (const auto& n : scenario.new_agents) {
      Negotiation neg = select_negotiation(tree, topo, n.constraint, n.id);
      for (TileId t = 0; t < topo.tile_count(); ++t) region[t] = region[t] || neg.region[t];
      for (AgentId p : neg.participants) {
        participants.insert(p);
        connect(graph, n.id, p);
      }
      allowed[n.id] = std::move(neg.region);
      participants.insert(n.id);
      for (const auto& m : scenario.new_agents) connect(graph, n.id, m.id);
    }

    std::map<AgentId, std::set<int>> resident_leaves;
    for (int leaf : tree.leaves()) {
      if (!region[tree.node(leaf).tiles.front()]) continue;
      for (AgentId a : tree.residents(leaf)) resident_leaves[a].insert(leaf);
    }
    for (const auto& [a, leaves] : resident_leaves) {
      std::vector<bool> mask(topo.tile_count(), false);
      for (int leaf : leaves)
        for (TileId t : tree.node(leaf).tiles) mask[t] = true;
      allowed[a] = std::move(mask);
      for (const auto& [b, other] : resident_leaves) {
        if (b <= a) continue;
        const bool shared = std::any_of(leaves.begin(), leaves.end(),
                                        [&](int leaf) { return other.contains(leaf); });
        if (shared) connect(graph, a, b);
      }
    }
    for (const auto& a : scenario.apriori)
      if (!participants.contains(a.id)) {
        plan.frozen[a.id] = a.initial;
        graph.erase(a.id);
      }
  }

  plan.max_distance = config.max_distance > 0
                          ? config.max_distance
                          : 4 * static_cast<std::uint32_t>(participants.size());
  const auto diameters = component_diameters(graph);
  for (AgentId id : participants) {
    AgentSetup setup;
    setup.spec = scenario.agent(id);
    setup.is_new = scenario.is_new(id);
    setup.neighbors = graph.at(id);
    for (AgentId n : setup.neighbors) {
      std::set<AgentId> mine = setup.neighbors;
      mine.insert(id);
      std::set<AgentId> theirs = graph.at(n);
      theirs.insert(n);
      if (mine == theirs) setup.take_partners.insert(n);
    }
    if (auto it = allowed.find(id); it != allowed.end()) setup.allowed_tiles = it->second;
    setup.max_distance = plan.max_distance;
    setup.termination_threshold = std::max(config.early_term_threshold, diameters.at(id) + 1);
    plan.setups.push_back(std::move(setup));
  }
  return plan;
}

namespace {

struct Envelope {
  AgentId from = 0;
  AgentId to = 0;
  Message message;
};

/// Message accounting and per-round bookkeeping shared by both schedules.
class Recorder {
 public:
  Recorder(const Scenario& scenario, const RunOptions& options, Metrics& metrics,
           std::vector<RoundRecord>& history)
      : scenario_(scenario), options_(options), metrics_(metrics), history_(history) {}

  void message(AgentId from, AgentId to, std::uint32_t round, const Message& msg) {
    const std::size_t bytes = encoded_size(msg);
    std::lock_guard lock(mutex_);
    ++metrics_.messages_total;
    metrics_.message_bytes_total += bytes;
    if (metrics_.sends.size() <= round) metrics_.sends.resize(round + 1);
    ++metrics_.sends[round][from];
    if (options_.trace) {
      nlohmann::json line = {{"round", round},
                             {"sender", from},
                             {"receiver", to},
                             {"kind", kind_of(msg) == MessageKind::kOk ? "ok" : "improve"},
                             {"bytes", bytes}};
      *options_.trace << line.dump() << '\n';
    }
  }

  void state_size(std::size_t bytes) {
    std::uint64_t seen = peak_.load();
    while (bytes > seen && !peak_.compare_exchange_weak(seen, bytes)) {
    }
  }

  void round(std::uint32_t index, Assignment committed) {
    RoundRecord rec;
    rec.round = index;
    rec.committed = std::move(committed);
    const AgentViews views = truth_views(scenario_.topology.resource_count(), rec.committed);
    rec.consistent = eval_system(views).value() == 0.0;
    rec.cost = allocation_cost(scenario_, rec.committed);
    if (options_.check_invariants && !history_.empty()) {
      if (rec.cost > history_.back().cost)
        throw InvariantViolation("global cost rose from " + history_.back().cost.to_string() +
                                 " to " + rec.cost.to_string() + " in round " +
                                 std::to_string(index));
      if (history_.front().consistent && !rec.consistent)
        throw InvariantViolation("double allocation committed in round " +
                                 std::to_string(index));
    }
    metrics_.per_round_cost.push_back(rec.cost);
    history_.push_back(rec);
    if (options_.on_round) options_.on_round(history_.back());
  }

  std::uint64_t peak() const { return peak_.load(); }

 private:
  const Scenario& scenario_;
  const RunOptions& options_;
  Metrics& metrics_;
  std::vector<RoundRecord>& history_;
  std::mutex mutex_;
  std::atomic<std::uint64_t> peak_{0};
};

struct Population {
  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<std::unique_ptr<EvalStats>> stats;
  std::map<AgentId, Agent*> by_id;
  Assignment frozen;

  Assignment snapshot() const {
    Assignment out = frozen;
    for (const auto& a : agents) out[a->id()] = a->committed();
    return out;
  }

  std::uint64_t evaluations() const {
    std::uint64_t n = 0;
    for (const auto& s : stats) n += s->leaf_evaluations;
    return n;
  }
};

Population populate(const Scenario& scenario, const RunOptions& options, RunPlan plan) {
  std::optional<Assignment> prior;
  if (options.use_prior) prior = options.prior ? *options.prior : scenario.initial_assignments();
  Population pop;
  pop.frozen = std::move(plan.frozen);
  for (auto& setup : plan.setups) {
    auto stats = std::make_unique<EvalStats>();
    ResourceSet initial = initial_claims(setup.spec, setup.is_new, prior, scenario.topology,
                                         options.config, options.seed, stats.get());
    auto agent = std::make_unique<Agent>(scenario.topology, std::move(setup), options.config,
                                         std::move(initial), stats.get());
    pop.by_id[agent->id()] = agent.get();
    pop.agents.push_back(std::move(agent));
    pop.stats.push_back(std::move(stats));
  }
  return pop;
}

void run_deterministic(Population& pop, Recorder& rec) {
  std::vector<Envelope> pending;
  auto post = [&](const Agent& from, Outbox out) {
    for (auto& [to, msg] : out) {
      rec.message(from.id(), to, from.round(), msg);
      pending.push_back(Envelope{from.id(), to, std::move(msg)});
    }
  };
  auto sample = [&] {
    for (const auto& a : pop.agents) rec.state_size(a->state_bytes());
  };
  auto alive = [&](bool connected_only) {
    return std::any_of(pop.agents.begin(), pop.agents.end(), [&](const auto& a) {
      return a->mode() != Mode::kTerminated && !(connected_only && a->neighbors().empty());
    });
  };

  for (const auto& a : pop.agents) post(*a, a->start());
  sample();
  std::uint32_t round = 0;
  while (alive(false)) {
    for (int phase = 0; phase < 2; ++phase) {
      std::vector<Envelope> batch = std::move(pending);
      pending.clear();
      std::stable_sort(batch.begin(), batch.end(), [](const Envelope& x, const Envelope& y) {
        return std::tie(x.to, x.from) < std::tie(y.to, y.from);
      });
      for (const Envelope& e : batch) {
        auto it = pop.by_id.find(e.to);
        if (it == pop.by_id.end())
          throw ProtocolError("message to unknown agent " + std::to_string(e.to));
        post(*it->second, it->second->receive(e.message));
      }
      if (phase == 0)
        for (const auto& a : pop.agents)
          if (a->neighbors().empty()) a->step_isolated();
      sample();
    }
    rec.round(++round, pop.snapshot());
    if (pending.empty() && alive(true)) {
      std::string stuck;
      for (const auto& a : pop.agents)
        if (a->mode() != Mode::kTerminated && !a->neighbors().empty())
          stuck += " " + std::to_string(a->id()) + "(" + to_string(a->mode()) + ", counter " +
                   std::to_string(a->counter()) + ")";
      throw ProtocolError("deadlock after round " + std::to_string(round) +
                          ": no messages in flight, waiting agents:" + stuck);
    }
  }
  if (!pending.empty()) throw ProtocolError("messages left after every agent terminated");
}

void run_concurrent(Population& pop, Recorder& rec, const RunOptions& options) {
  struct Mailbox {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<Envelope> queue;
  };
  std::map<AgentId, std::unique_ptr<Mailbox>> boxes;
  for (const auto& a : pop.agents) boxes[a->id()] = std::make_unique<Mailbox>();

  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::mutex commit_mutex;
  std::map<AgentId, std::vector<ResourceSet>> commits;
  for (const auto& a : pop.agents) commits[a->id()].push_back(a->committed());

  auto fail = [&](std::exception_ptr e) {
    {
      std::lock_guard lock(error_mutex);
      if (!error) error = e;
    }
    abort = true;
    for (auto& [id, box] : boxes) {
      std::lock_guard lock(box->mutex);
      box->ready.notify_all();
    }
  };
  auto post = [&](const Agent& from, Outbox out) {
    for (auto& [to, msg] : out) {
      rec.message(from.id(), to, from.round(), msg);
      auto it = boxes.find(to);
      if (it == boxes.end())
        throw ProtocolError("message to unknown agent " + std::to_string(to));
      std::lock_guard lock(it->second->mutex);
      it->second->queue.push_back(Envelope{from.id(), to, std::move(msg)});
      it->second->ready.notify_one();
    }
  };
  auto record = [&](const Agent& a) {
    std::lock_guard lock(commit_mutex);
    auto& rounds = commits[a.id()];
    while (rounds.size() <= a.round()) rounds.push_back(a.committed());
  };

  auto body = [&](Agent& a) {
    try {
      if (a.neighbors().empty()) {
        while (a.mode() != Mode::kTerminated && !abort) {
          a.step_isolated();
          record(a);
          rec.state_size(a.state_bytes());
        }
        return;
      }
      post(a, a.start());
      rec.state_size(a.state_bytes());
      Mailbox& box = *boxes.at(a.id());
      std::deque<Envelope> deferred;
      while (a.mode() != Mode::kTerminated) {
        const MessageKind expected =
            a.mode() == Mode::kWaitOk ? MessageKind::kOk : MessageKind::kImprove;
        std::optional<Envelope> next;
        auto hit = std::find_if(deferred.begin(), deferred.end(), [&](const Envelope& e) {
          return kind_of(e.message) == expected;
        });
        if (hit != deferred.end()) {
          next = std::move(*hit);
          deferred.erase(hit);
        }
        auto waited = std::chrono::steady_clock::now();
        while (!next) {
          std::unique_lock lock(box.mutex);
          box.ready.wait_for(lock, std::chrono::milliseconds(50),
                             [&] { return !box.queue.empty() || abort.load(); });
          if (abort) return;
          if (box.queue.empty()) {
            if (std::chrono::steady_clock::now() - waited > options.stall_timeout)
              throw ProtocolError("agent " + std::to_string(a.id()) + " stalled in mode " +
                                  to_string(a.mode()) + " at round " +
                                  std::to_string(a.round()));
            continue;
          }
          Envelope e = std::move(box.queue.front());
          box.queue.pop_front();
          waited = std::chrono::steady_clock::now();
          if (kind_of(e.message) == expected)
            next = std::move(e);
          else
            deferred.push_back(std::move(e));
        }
        post(a, a.receive(next->message));
        record(a);
        rec.state_size(a.state_bytes());
      }
      if (!deferred.empty())
        throw ProtocolError("agent " + std::to_string(a.id()) +
                            " terminated with undelivered messages");
    } catch (...) {
      fail(std::current_exception());
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(pop.agents.size());
  for (const auto& a : pop.agents) threads.emplace_back(body, std::ref(*a));
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  for (const auto& [id, box] : boxes)
    if (!box->queue.empty())
      throw ProtocolError("agent " + std::to_string(id) + " has undelivered messages");

  std::size_t rounds = 0;
  for (const auto& [id, list] : commits) rounds = std::max(rounds, list.size());
  for (std::size_t k = 1; k < rounds; ++k) {
    Assignment snapshot = pop.frozen;
    for (const auto& [id, list] : commits) snapshot[id] = list[std::min(k, list.size() - 1)];
    rec.round(static_cast<std::uint32_t>(k), std::move(snapshot));
  }
}

}  // namespace

RunResult run_to_termination(const Scenario& scenario, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  RunPlan plan = plan_run(scenario, options.config);
  RunResult result;
  Population pop = populate(scenario, options, std::move(plan));
  for (const auto& a : pop.agents) result.metrics.neighbor_counts[a->id()] = a->neighbors().size();

  Recorder rec(scenario, options, result.metrics, result.history);
  rec.round(0, pop.snapshot());
  if (options.schedule == Schedule::kDeterministic)
    run_deterministic(pop, rec);
  else
    run_concurrent(pop, rec, options);

  result.assignment = pop.snapshot();
  Metrics& m = result.metrics;
  for (const auto& a : pop.agents) m.rounds = std::max(m.rounds, a->round());
  m.constraint_evaluations = pop.evaluations();
  m.final_cost = result.history.back().cost;
  m.peak_agent_state_bytes = rec.peak();
  m.wall_time = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - started);
  return result;
}

World::World(Topology topology, std::vector<AgentSpec> apriori, RunOptions options)
    : topology_(std::move(topology)), apriori_(std::move(apriori)), options_(std::move(options)) {
  Scenario{topology_, apriori_, {}}.validate();
}

void World::buffer_request(AgentSpec request) {
  auto same = [&](const AgentSpec& a) { return a.id == request.id; };
  const bool installed_now =
      in_flight_ && !installed_.empty() &&
      std::find(installed_.back().begin(), installed_.back().end(), request.id) !=
          installed_.back().end();
  if (std::any_of(apriori_.begin(), apriori_.end(), same) ||
      std::any_of(buffer_.begin(), buffer_.end(), same) || installed_now)
    throw std::invalid_argument("duplicate agent id " + std::to_string(request.id));
  buffer_.push_back(std::move(request));
  if (!in_flight_) drain();
}

void World::drain() {
  while (!buffer_.empty()) {
    Scenario scenario{topology_, apriori_, std::move(buffer_)};
    buffer_.clear();
    std::vector<AgentId> ids;
    for (const auto& a : scenario.new_agents) ids.push_back(a.id);
    installed_.push_back(ids);

    RunOptions opts = options_;
    opts.seed = options_.seed + runs_.size();
    opts.prior.reset();
    opts.on_round = [this](const RoundRecord& rec) {
      if (on_round) on_round(*this, rec);
    };
    in_flight_ = true;
    RunResult result;
    try {
      result = run_to_termination(scenario, opts);
    } catch (...) {
      in_flight_ = false;
      throw;
    }
    in_flight_ = false;

    for (auto& a : apriori_) a.initial = result.assignment.at(a.id);
    for (auto& a : scenario.new_agents) {
      a.initial = result.assignment.at(a.id);
      apriori_.push_back(std::move(a));
    }
    runs_.push_back(std::move(result));
  }
}

}  // namespace resmgm
