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

#ifndef GGMC_GOSSIP_HPP
#define GGMC_GOSSIP_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ggmc/grid.hpp"
#include "ggmc/objective.hpp"
#include "ggmc/trainer.hpp"

namespace ggmc {

enum class MessageKind { FactorRequest, FactorResponse, FactorPush };

struct GossipMessage {
  MessageKind kind = MessageKind::FactorRequest;
  BlockId from;
  BlockId to;
  std::optional<Matrix> payloadU;
  std::optional<Matrix> payloadW;
  std::uint64_t round = 0;
};

struct SimStats {
  std::uint64_t messagesSent = 0;
  std::uint64_t bytesSent = 0;  // 8 bytes per payload scalar
  std::uint64_t rounds = 0;
  std::uint64_t executions = 0;
  std::uint64_t requests = 0;
  std::uint64_t responses = 0;
  std::uint64_t pushes = 0;
  // batch size -> number of rounds that executed a batch of that size
  std::map<std::size_t, std::uint64_t> batchesPerRound;

  SimStats& operator+=(const SimStats& other);
  friend SimStats operator-(SimStats a, const SimStats& b);
};

class GossipNetwork;

// Owns one block: its observed entries and its factor pair. The pair is
// only ever written by the agent itself (its own update as a pivot) or by a
// FactorPush addressed to it.
class Agent {
 public:
  Agent(BlockData data, FactorPair pair) : data_(std::move(data)), pair_(std::move(pair)) {}

  BlockId id() const noexcept { return data_.id(); }
  const BlockData& data() const noexcept { return data_; }
  const FactorPair& factors() const noexcept { return pair_; }
  const std::deque<GossipMessage>& inbox() const noexcept { return inbox_; }

 private:
  friend class GossipNetwork;
  friend SimStats executeStructureGossip(GossipNetwork&, const Structure&, const TrainConfig&,
                                         const NormalizationTable&, std::size_t);

  BlockData data_;
  FactorPair pair_;
  std::deque<GossipMessage> inbox_;
  // Observed entries of edge neighbours, replicated once at setup so a pivot
  // can evaluate the reconstruction terms of the structures it drives.
  std::map<BlockId, BlockData> neighbourData_;
};

// Agents plus the message fabric between them. Single-threaded event loop:
// send() enqueues into the receiver's inbox, dispatch() lets an agent serve
// its inbox. Rounds are barriers; every message is stamped with its round.
class GossipNetwork {
 public:
  GossipNetwork(const PartitionedData& data, FactorState initial);

  const GridSpec& grid() const noexcept { return grid_; }
  Index rank() const noexcept { return rank_; }
  const Agent& agent(BlockId id) const { return agents_.at(grid_.linearIndex(id)); }
  const SimStats& stats() const noexcept { return stats_; }
  std::uint64_t round() const noexcept { return round_; }

  // Starts a round in which `batch` may execute. Throws ProtocolError if two
  // structures of the batch share a block.
  void beginRound(std::span<const Structure> batch);

  // Throws ProtocolError unless sender and receiver share an edge and the
  // message belongs to the current round.
  void send(GossipMessage msg);

  // Serves every queued FactorRequest and FactorPush at `id`; responses go
  // back through send(). FactorResponses stay queued for the pivot.
  void dispatch(BlockId id);

  // Passive observer: copies every agent's current factors.
  FactorState snapshot() const;

 private:
  friend SimStats executeStructureGossip(GossipNetwork&, const Structure&, const TrainConfig&,
                                         const NormalizationTable&, std::size_t);

  Agent& mutableAgent(BlockId id) { return agents_.at(grid_.linearIndex(id)); }
  void requireLock(const Structure& s) const;

  GridSpec grid_;
  Index rank_;
  std::vector<Agent> agents_;
  // Index into the current batch holding each block, or -1.
  std::vector<int> lockOwner_;
  std::vector<Structure> batch_;
  std::uint64_t round_ = 0;
  SimStats stats_;
};

// Greedy block-disjoint subset: scans a seeded random permutation of
// `structures` (drawn lazily, one uniform index per position) and keeps each
// structure that shares no block with those already kept. maxBatch == 0
// means no cap. With maxBatch == 1 the draw consumes the rng exactly like
// sampleStructure over the same enumeration.
std::vector<Structure> selectNonOverlappingBatch(std::span<const Structure> structures, Rng& rng,
                                                 std::size_t maxBatch = 0);

// Pull-compute-push exchange driven by the pivot's agent: 2 FactorRequests,
// 2 FactorResponses, local gradient step, 2 FactorPushes. Produces the same
// bits as updateThroughSGD with the same step index. Returns the stats delta.
SimStats executeStructureGossip(GossipNetwork& net, const Structure& s, const TrainConfig& config,
                                const NormalizationTable& norm, std::size_t t);

enum class GossipSchedule {
  Sequential,  // one structure per round
  Batched,     // maximal greedy disjoint batch per round
};

struct GossipReport {
  TrainReport train;
  SimStats stats;
};

using GossipObserver =
    std::function<void(std::size_t iteration, double cost, const FactorState& snapshot, const SimStats& stats)>;

// Decentralised counterpart of train(): same initialisation, step-size
// schedule and stopping rule; the cost is evaluated by a passive observer
// from snapshots whenever the execution count crosses a multiple of
// evalEvery. Sequential schedule reproduces train() bitwise.
GossipReport runGossip(const PartitionedData& data, const TrainConfig& config, GossipSchedule schedule,
                       const GossipObserver& observer = {});

}  // namespace ggmc

#endif  // GGMC_GOSSIP_HPP
