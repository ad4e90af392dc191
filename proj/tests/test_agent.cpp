#include <doctest.h>

#include <deque>
#include <memory>

#include "resmgm/agent.hpp"
#include "support.hpp"

using namespace resmgm;

namespace {

AgentSetup setup_for(AgentId id, ConstraintExpr c, std::set<AgentId> neighbors,
                     std::uint32_t max_distance = 8) {
  AgentSetup s;
  s.spec.id = id;
  s.spec.constraint = std::move(c);
  s.is_new = true;
  s.neighbors = std::move(neighbors);
  s.max_distance = max_distance;
  return s;
}

OkMessage ok_from(AgentId sender, std::size_t resources, ResourceSet claims = {}) {
  OkMessage m;
  m.sender = sender;
  m.view = view_from_claims(resources, sender, claims);
  return m;
}

/// Delivers messages between `agents` in FIFO order until nothing is left;
/// records every mode each agent passes through.
void pump(std::map<AgentId, std::unique_ptr<Agent>>& agents,
          std::map<AgentId, std::vector<Mode>>& modes) {
  std::deque<std::pair<AgentId, Message>> queue;
  for (auto& [id, a] : agents) {
    modes[id].push_back(a->mode());
    for (auto& m : a->start()) queue.push_back(std::move(m));
  }
  while (!queue.empty()) {
    auto [to, msg] = std::move(queue.front());
    queue.pop_front();
    Agent& a = *agents.at(to);
    for (auto& m : a.receive(msg)) queue.push_back(std::move(m));
    CHECK(a.counter() <= a.neighbors().size());
    if (modes[to].back() != a.mode()) modes[to].push_back(a.mode());
  }
}

}  // namespace

TEST_CASE("smart initialisation keeps the prior holding") {
  const Topology t = resmgm::testing::regular_grid(1, 1, 6);
  AgentSpec a{1, pe_quantity(2, 2), {}, {3, 4}};
  const HeuristicConfig full = HeuristicConfig::full();
  CHECK(initial_claims(a, false, Assignment{{1, {3, 4}}}, t, full, 0) == ResourceSet{3, 4});
  AgentSpec fresh{2, pe_quantity(2, 2), {}, {}};
  CHECK(initial_claims(fresh, true, Assignment{{1, {3, 4}}}, t, full, 0).empty());
  CHECK_THROWS_AS(initial_claims(a, false, Assignment{{1, {9}}}, t, full, 0), std::invalid_argument);
}

TEST_CASE("random initialisation is seeded") {
  const Topology t = resmgm::testing::regular_grid(2, 2, 4);
  AgentSpec a{3, pe_quantity(2, 2), {}, {}};
  const HeuristicConfig plain = HeuristicConfig::plain_mgm();
  const ResourceSet first = initial_claims(a, true, std::nullopt, t, plain, 42);
  CHECK(first == initial_claims(a, true, std::nullopt, t, plain, 42));
  CHECK(first != initial_claims(a, true, std::nullopt, t, plain, 43));
}

TEST_CASE("ok? messages are counted until every neighbour has reported") {
  const Topology t = resmgm::testing::regular_grid(1, 1, 4);
  Agent a(t, setup_for(1, pe_quantity(1, 1), {2, 3}), HeuristicConfig::full(), {});
  CHECK(a.start().size() == 2);
  CHECK(a.handle_ok(ok_from(2, 4)).empty());
  CHECK(a.counter() == 1);
  CHECK(a.mode() == Mode::kWaitOk);
  const Outbox out = a.handle_ok(ok_from(3, 4));
  CHECK(out.size() == 2);
  CHECK(out[0].first == 2);
  CHECK(out[1].first == 3);
  CHECK(kind_of(out[0].second) == MessageKind::kImprove);
  CHECK(a.mode() == Mode::kWaitImprove);
  CHECK(a.counter() == 0);
}

TEST_CASE("protocol violations are rejected") {
  const Topology t = resmgm::testing::regular_grid(1, 1, 4);
  Agent a(t, setup_for(1, pe_quantity(1, 1), {2, 3}), HeuristicConfig::full(), {});
  a.start();
  CHECK_THROWS_AS(a.handle_ok(ok_from(7, 4)), ProtocolError);
  a.handle_ok(ok_from(2, 4));
  CHECK_THROWS_AS(a.handle_ok(ok_from(2, 4)), ProtocolError);
  ImproveMessage early;
  early.sender = 3;
  early.proposed_view = LocalView(4);
  CHECK_THROWS_AS(a.handle_improve(early), ProtocolError);
  CHECK_THROWS_AS(Agent(t, setup_for(1, pe_quantity(1, 1), {1}), HeuristicConfig::full(), {}),
                  std::invalid_argument);
}

TEST_CASE("a stale neighbour view is recorded as-is") {
  const Topology t = resmgm::testing::regular_grid(1, 1, 3);
  AgentSetup s = setup_for(1, pe_quantity(1, 1), {2});
  s.is_new = false;
  s.spec.initial = {0};
  Agent a(t, s, HeuristicConfig::full(), {0});
  a.start();
  const Outbox out = a.handle_ok(ok_from(2, 3, {0}));
  CHECK(a.committed() == ResourceSet{0});
  CHECK(a.view()[0].owned_by(1));
  CHECK(a.last_move().current.conflicts == 1);
  const auto& im = std::get<ImproveMessage>(out.at(0).second);
  CHECK(im.current_cost.is_infinite());
  CHECK(im.improvement.positive());
}

TEST_CASE("assignment conflicts are double claims only") {
  LocalView a(4);
  LocalView b(4);
  a[0] = Cell::owner(1);
  b[1] = Cell::owner(2);
  CHECK_FALSE(assignment_conflict(a, b, 1, 2));
  a[2] = Cell::owner(1);
  CHECK_FALSE(assignment_conflict(a, b, 1, 2));
  b[2] = Cell::owner(2);
  CHECK(assignment_conflict(a, b, 1, 2));
}

TEST_CASE("conflicting proposals: the larger improvement wins, ties go to the lower id") {
  const Topology t = resmgm::testing::regular_grid(4, 1, 1);
  const std::map<AgentId, ResourceSet> none;
  Proposal ours{7, {}, {2}, Improvement{0, 0, 3.0}};
  Proposal theirs{1, {}, {2}, Improvement{0, 0, 5.0}};
  CHECK(proposals_conflict(theirs, ours, none, t));
  CHECK(beats(theirs, ours));

  ours.improvement = Improvement{0, 0, 4.0};
  theirs.improvement = Improvement{0, 0, 4.0};
  CHECK(beats(theirs, ours));
  theirs.agent = 9;
  CHECK_FALSE(beats(theirs, ours));

  Proposal far{2, {}, {0}, Improvement{0, 0, 100.0}};
  Proposal mine{7, {}, {3}, Improvement{0, 0, 1.0}};
  CHECK(beats(far, mine));
  CHECK_FALSE(proposals_conflict(far, mine, none, t));
}

TEST_CASE("other conflict forms") {
  const Topology t = resmgm::testing::regular_grid(2, 1, 2);
  const std::map<AgentId, ResourceSet> held{{5, {3}}};
  CHECK(proposals_conflict({1, {}, {0}, {}}, {2, {0}, {}, {}}, held, t));
  CHECK(proposals_conflict({1, {}, {3}, {}}, {2, {}, {1, 3}, {}}, held, t));
  CHECK(proposals_conflict({1, {}, {0}, {}}, {2, {}, {1}, {}}, held, t));
  CHECK_FALSE(proposals_conflict({1, {}, {0}, {}}, {2, {}, {2}, {}}, held, t));
  CHECK_FALSE(proposals_conflict({1, {0}, {0}, {}}, {2, {1}, {1}, {}}, held, t));
}

TEST_CASE("of two agents wanting the only core, the lower id moves") {
  const Topology t = resmgm::testing::regular_grid(1, 1, 1);
  std::map<AgentId, std::unique_ptr<Agent>> agents;
  for (AgentId id : {1u, 7u})
    agents[id] = std::make_unique<Agent>(t, setup_for(id, pe_quantity(1, 1), {id == 1 ? 7u : 1u}, 4),
                                         HeuristicConfig::full(), ResourceSet{});
  std::map<AgentId, std::vector<Mode>> modes;
  pump(agents, modes);
  CHECK(agents[1]->committed() == ResourceSet{0});
  CHECK(agents[7]->committed().empty());
  for (auto& [id, trace] : modes) {
    REQUIRE(trace.size() >= 3);
    CHECK(trace.back() == Mode::kTerminated);
    for (std::size_t i = 0; i + 1 < trace.size(); ++i)
      CHECK(trace[i] == (i % 2 == 0 ? Mode::kWaitOk : Mode::kWaitImprove));
  }
}

TEST_CASE("a non-conflicting neighbour does not stop a move") {
  const Topology t = resmgm::testing::regular_grid(2, 1, 1);
  std::map<AgentId, std::unique_ptr<Agent>> agents;
  AgentSetup big = setup_for(1, all_of(pe_quantity(1, 1), pe_type(ResourceType::kRegular)), {7}, 4);
  agents[1] = std::make_unique<Agent>(t, big, HeuristicConfig::full(), ResourceSet{});
  AgentSetup small = setup_for(7, pe_quantity(1, 1), {1}, 4);
  agents[7] = std::make_unique<Agent>(t, small, HeuristicConfig::full(), ResourceSet{});
  std::map<AgentId, std::vector<Mode>> modes;
  pump(agents, modes);
  CHECK(agents[1]->committed().size() == 1);
  CHECK(agents[7]->committed().size() == 1);
  CHECK(agents[1]->committed() != agents[7]->committed());
}

TEST_CASE("agents terminate after max_distance rounds without early termination") {
  const Topology t = resmgm::testing::regular_grid(1, 1, 2);
  HeuristicConfig cfg = HeuristicConfig::full();
  cfg.early_termination = false;
  std::map<AgentId, std::unique_ptr<Agent>> agents;
  agents[1] = std::make_unique<Agent>(t, setup_for(1, pe_quantity(1, 1), {2}, 5), cfg, ResourceSet{});
  agents[2] = std::make_unique<Agent>(t, setup_for(2, pe_quantity(1, 1), {1}, 5), cfg, ResourceSet{});
  std::map<AgentId, std::vector<Mode>> modes;
  pump(agents, modes);
  CHECK(agents[1]->round() == 5);
  CHECK(agents[2]->round() == 5);
  CHECK(agents[1]->mode() == Mode::kTerminated);
}

TEST_CASE("an isolated agent steps on its own") {
  const Topology t = resmgm::testing::regular_grid(1, 1, 2);
  Agent a(t, setup_for(1, pe_quantity(1, 1), {}, 3), HeuristicConfig::full(), {});
  CHECK(a.start().empty());
  while (a.mode() != Mode::kTerminated) a.step_isolated();
  CHECK(a.committed() == ResourceSet{0});
  CHECK(a.round() <= 3);
}
