// Copyright 2026 The ggmc Authors. All Rights Reserved.
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

#include "ggmc/gossip.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace ggmc {

namespace {

std::string describe(BlockId id) { return "(" + std::to_string(id.i) + "," + std::to_string(id.j) + ")"; }

std::uint64_t payloadScalars(const GossipMessage& msg) {
  std::uint64_t n = 0;
  if (msg.payloadU) n += static_cast<std::uint64_t>(msg.payloadU->size());
  if (msg.payloadW) n += static_cast<std::uint64_t>(msg.payloadW->size());
  return n;
}

}  // namespace

SimStats& SimStats::operator+=(const SimStats& other) {
  messagesSent += other.messagesSent;
  bytesSent += other.bytesSent;
  rounds += other.rounds;
  executions += other.executions;
  requests += other.requests;
  responses += other.responses;
  pushes += other.pushes;
  for (const auto& [size, count] : other.batchesPerRound) batchesPerRound[size] += count;
  return *this;
}

SimStats operator-(SimStats a, const SimStats& b) {
  a.messagesSent -= b.messagesSent;
  a.bytesSent -= b.bytesSent;
  a.rounds -= b.rounds;
  a.executions -= b.executions;
  a.requests -= b.requests;
  a.responses -= b.responses;
  a.pushes -= b.pushes;
  for (const auto& [size, count] : b.batchesPerRound) {
    auto it = a.batchesPerRound.find(size);
    if (it != a.batchesPerRound.end() && (it->second -= count) == 0) a.batchesPerRound.erase(it);
  }
  return a;
}

GossipNetwork::GossipNetwork(const PartitionedData& data, FactorState initial)
    : grid_(data.grid()), rank_(initial.rank()), lockOwner_(grid_.blockCount(), -1) {
  if (!(initial.grid() == grid_)) throw InvalidArgument("initial factors and data use different grids");
  agents_.reserve(grid_.blockCount());
  for (std::size_t k = 0; k < grid_.blockCount(); ++k) {
    agents_.emplace_back(data.blocks()[k], std::move(initial.pairs()[k]));
  }
  for (Agent& a : agents_) {
    const BlockId id = a.id();
    for (BlockId nb : {BlockId{id.i - 1, id.j}, BlockId{id.i + 1, id.j}, BlockId{id.i, id.j - 1},
                       BlockId{id.i, id.j + 1}}) {
      if (grid_.contains(nb)) a.neighbourData_.emplace(nb, data.at(nb));
    }
  }
}

void GossipNetwork::beginRound(std::span<const Structure> batch) {
  std::fill(lockOwner_.begin(), lockOwner_.end(), -1);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    if (!batch[k].validFor(grid_)) throw ProtocolError("batch contains a structure outside the grid");
    for (BlockId id : batch[k].members()) {
      int& owner = lockOwner_[grid_.linearIndex(id)];
      if (owner != -1) throw ProtocolError("batch structures overlap at block " + describe(id));
      owner = static_cast<int>(k);
    }
  }
  batch_.assign(batch.begin(), batch.end());
  ++round_;
  ++stats_.rounds;
  ++stats_.batchesPerRound[batch.size()];
}

void GossipNetwork::requireLock(const Structure& s) const {
  for (BlockId id : s.members()) {
    const int owner = lockOwner_[grid_.linearIndex(id)];
    if (owner < 0 || !(batch_[static_cast<std::size_t>(owner)] == s)) {
      throw ProtocolError("structure does not hold block " + describe(id) + " in round " + std::to_string(round_));
    }
  }
}

void GossipNetwork::send(GossipMessage msg) {
  if (!grid_.contains(msg.from) || !grid_.contains(msg.to)) throw ProtocolError("message endpoint outside the grid");
  if (!(msg.from == msg.to) && !edgeAdjacent(msg.from, msg.to)) {
    throw ProtocolError("message from " + describe(msg.from) + " to non-adjacent " + describe(msg.to));
  }
  if (msg.round != round_) {
    throw ProtocolError("stale message stamped round " + std::to_string(msg.round) + " during round " +
                        std::to_string(round_));
  }
  ++stats_.messagesSent;
  stats_.bytesSent += 8 * payloadScalars(msg);
  switch (msg.kind) {
    case MessageKind::FactorRequest: ++stats_.requests; break;
    case MessageKind::FactorResponse: ++stats_.responses; break;
    case MessageKind::FactorPush: ++stats_.pushes; break;
  }
  mutableAgent(msg.to).inbox_.push_back(std::move(msg));
}

void GossipNetwork::dispatch(BlockId id) {
  Agent& self = mutableAgent(id);
  std::deque<GossipMessage> keep;
  while (!self.inbox_.empty()) {
    GossipMessage msg = std::move(self.inbox_.front());
    self.inbox_.pop_front();
    if (msg.round != round_) throw ProtocolError("agent " + describe(id) + " received a stale message");
    switch (msg.kind) {
      case MessageKind::FactorRequest:
        send({MessageKind::FactorResponse, id, msg.from, self.pair_.u, self.pair_.w, round_});
        break;
      case MessageKind::FactorPush: {
        if (!(msg.to == id)) throw ProtocolError("push delivered to the wrong agent");
        const int owner = lockOwner_[grid_.linearIndex(id)];
        if (owner < 0 || !(batch_[static_cast<std::size_t>(owner)].pivot() == msg.from)) {
          throw ProtocolError("push to " + describe(id) + " from " + describe(msg.from) +
                              ", which does not hold the block this round");
        }
        if (!msg.payloadU || !msg.payloadW || msg.payloadU->rows() != self.pair_.u.rows() ||
            msg.payloadU->cols() != self.pair_.u.cols() || msg.payloadW->rows() != self.pair_.w.rows() ||
            msg.payloadW->cols() != self.pair_.w.cols()) {
          throw ProtocolError("push payload shape does not match the receiver's factors");
        }
        self.pair_.u = std::move(*msg.payloadU);
        self.pair_.w = std::move(*msg.payloadW);
        break;
      }
      case MessageKind::FactorResponse:
        keep.push_back(std::move(msg));
        break;
    }
  }
  self.inbox_ = std::move(keep);
}

FactorState GossipNetwork::snapshot() const {
  FactorState state(grid_, rank_);
  for (std::size_t k = 0; k < agents_.size(); ++k) state.pairs()[k] = agents_[k].pair_;
  return state;
}

std::vector<Structure> selectNonOverlappingBatch(std::span<const Structure> structures, Rng& rng,
                                                 std::size_t maxBatch) {
  std::vector<Structure> pool(structures.begin(), structures.end());
  std::vector<Structure> batch;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (maxBatch != 0 && batch.size() >= maxBatch) break;
    std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
    std::swap(pool[k], pool[pick(rng)]);
    const Structure& candidate = pool[k];
    const bool clashes =
        std::any_of(batch.begin(), batch.end(), [&](const Structure& s) { return s.overlaps(candidate); });
    if (!clashes) batch.push_back(candidate);
  }
  return batch;
}

SimStats executeStructureGossip(GossipNetwork& net, const Structure& s, const TrainConfig& config,
                                const NormalizationTable& norm, std::size_t t) {
  net.requireLock(s);
  const SimStats before = net.stats_;
  const auto& mem = s.members();
  const BlockId pivotId = mem[0];
  const std::uint64_t round = net.round();

  for (std::size_t k = 1; k < 3; ++k) {
    net.send({MessageKind::FactorRequest, pivotId, mem[k], std::nullopt, std::nullopt, round});
  }
  net.dispatch(mem[1]);
  net.dispatch(mem[2]);

  Agent& pivot = net.mutableAgent(pivotId);
  std::array<FactorPair, 3> remote;
  std::array<bool, 3> received{true, false, false};
  while (!pivot.inbox_.empty()) {
    GossipMessage msg = std::move(pivot.inbox_.front());
    pivot.inbox_.pop_front();
    if (msg.kind != MessageKind::FactorResponse || msg.round != round) {
      throw ProtocolError("pivot " + describe(pivotId) + " expected a current-round FactorResponse");
    }
    const auto slot = static_cast<std::size_t>(std::find(mem.begin(), mem.end(), msg.from) - mem.begin());
    if (slot == 0 || slot >= 3 || received[slot] || !msg.payloadU || !msg.payloadW) {
      throw ProtocolError("unexpected FactorResponse from " + describe(msg.from));
    }
    remote[slot] = {std::move(*msg.payloadU), std::move(*msg.payloadW)};
    received[slot] = true;
  }
  if (!received[1] || !received[2]) throw ProtocolError("pivot " + describe(pivotId) + " is missing a response");

  StructureOperands ops;
  ops.data = {&pivot.data_, &pivot.neighbourData_.at(mem[1]), &pivot.neighbourData_.at(mem[2])};
  ops.factors = {&pivot.pair_, &remote[1], &remote[2]};
  const StructureGradient g = structureGradient(s, ops, config.rho, config.lambda, norm);
  const double gamma = stepSize(t, config.a, config.b);
  applyGradient(pivot.pair_, g.members[0], gamma);
  for (std::size_t k = 1; k < 3; ++k) {
    applyGradient(remote[k], g.members[k], gamma);
    net.send({MessageKind::FactorPush, pivotId, mem[k], std::move(remote[k].u), std::move(remote[k].w), round});
  }
  net.dispatch(mem[1]);
  net.dispatch(mem[2]);
  ++net.stats_.executions;
  return net.stats_ - before;
}

GossipReport runGossip(const PartitionedData& data, const TrainConfig& config, GossipSchedule schedule,
                       const GossipObserver& observer) {
  config.validate();
  const GridSpec& grid = data.grid();
  if (grid.p() != config.p || grid.q() != config.q) {
    throw InvalidArgument("data grid does not match the config grid");
  }

  Rng rng(config.seed);
  GossipNetwork net(data, initFactors(grid, config.rank, config.effectiveInitScale(), rng));
  const NormalizationTable norm = computeNormalization(grid);
  const std::vector<Structure> structures = enumerateStructures(grid);
  const std::size_t cap = schedule == GossipSchedule::Sequential ? 1 : 0;
  ConvergenceMonitor monitor(config.tol);
  GossipReport report;

  auto record = [&](std::size_t iteration) {
    const FactorState snap = net.snapshot();
    const double cost = trainingCost(snap, data, config.lambda);
    report.train.costTrace.push_back({iteration, cost});
    if (observer) observer(iteration, cost, snap, net.stats());
    return monitor.observe(iteration, cost);
  };

  record(0);
  std::size_t t = 0;
  while (t < config.maxIters) {
    std::vector<Structure> batch = selectNonOverlappingBatch(structures, rng, cap);
    if (batch.size() > config.maxIters - t) {
      batch.erase(batch.begin() + static_cast<std::ptrdiff_t>(config.maxIters - t), batch.end());
    }
    net.beginRound(batch);
    const std::size_t before = t;
    for (const Structure& s : batch) executeStructureGossip(net, s, config, norm, t++);
    if (t / config.evalEvery > before / config.evalEvery || t == config.maxIters) {
      if (record(t)) {
        report.train.converged = true;
        break;
      }
    }
  }

  const SimStats& st = net.stats();
  if (st.requests != st.responses || st.pushes != 2 * st.executions || st.messagesSent != 6 * st.executions) {
    throw ProtocolError("message accounting does not balance");
  }
  report.train.iterations = t;
  report.train.finalState = net.snapshot();
  report.stats = st;
  return report;
}

}  // namespace ggmc
