#include "chakra/generator.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <random>

#include <omp.h>

#include "chakra/error.h"

namespace chakra {

void check_spec(const GenSpec& s) {
  auto bad = [](const std::string& field, const std::string& msg) {
    throw Error(ErrorCode::INVALID_SPEC, field, msg);
  };
  if (s.layers == 0) bad("layers", "layers must be >= 1");
  if (s.tp == 0 || s.dp == 0 || s.pp == 0) bad("parallelism", "tp, dp and pp must be >= 1");
  if (s.microbatches == 0) bad("microbatches", "microbatches must be >= 1");
  if (s.layers % s.pp != 0) bad("layers", "layers must be divisible by pp");
  if (s.hidden_bytes == 0) bad("hidden_bytes", "hidden_bytes must be > 0");
}

RankCoord rank_coord(const GenSpec& spec, uint64_t rank) {
  const uint64_t per_stage = spec.dp * spec.tp;
  return {rank / per_stage, (rank % per_stage) / spec.tp, rank % spec.tp};
}

namespace {

uint64_t tp_group_id(const GenSpec& s, uint64_t stage, uint64_t dp_index) {
  return stage * s.dp + dp_index;
}

uint64_t dp_group_id(const GenSpec& s, uint64_t stage, uint64_t tp_index) {
  const uint64_t base = s.tp > 1 ? s.pp * s.dp : 0;
  return base + stage * s.tp + tp_index;
}

std::vector<ProcessGroup> transformer_groups(const GenSpec& s) {
  std::vector<ProcessGroup> groups;
  const uint64_t per_stage = s.dp * s.tp;
  if (s.tp > 1)
    for (uint64_t st = 0; st < s.pp; ++st)
      for (uint64_t d = 0; d < s.dp; ++d) {
        ProcessGroup g{tp_group_id(s, st, d), {}};
        for (uint64_t t = 0; t < s.tp; ++t) g.ranks.push_back(st * per_stage + d * s.tp + t);
        groups.push_back(std::move(g));
      }
  if (s.dp > 1)
    for (uint64_t st = 0; st < s.pp; ++st)
      for (uint64_t t = 0; t < s.tp; ++t) {
        ProcessGroup g{dp_group_id(s, st, t), {}};
        for (uint64_t d = 0; d < s.dp; ++d) g.ranks.push_back(st * per_stage + d * s.tp + t);
        groups.push_back(std::move(g));
      }
  return groups;
}

// Appends nodes with one output tensor each; data deps feed their outputs as
// inputs.
class Builder {
 public:
  Builder(ExecutionTrace& t, uint64_t payload, std::string device) : t_(t), payload_(payload), device_(std::move(device)) {}

  uint64_t add(std::string name, NodeType type, const std::vector<uint64_t>& deps,
               std::optional<uint64_t> duration, std::optional<CommAttrs> comm = std::nullopt) {
    TraceNode n;
    n.id = t_.nodes.size() + 1;
    n.name = std::move(name);
    n.type = type;
    n.data_deps = deps;
    sort_unique(n.data_deps);
    for (uint64_t d : n.data_deps) n.inputs.push_back(output_of(d));
    n.duration_micros = duration;
    n.outputs.push_back(new_tensor());
    if (comm) {
      comm->tensor_ids = n.inputs;
      set_comm_attrs(n, *comm);
    }
    t_.nodes.push_back(std::move(n));
    return t_.nodes.back().id;
  }

 private:
  uint64_t output_of(uint64_t node) const { return t_.nodes[node - 1].outputs.front(); }

  uint64_t new_tensor() {
    const uint64_t id = t_.tensors.size() + 1;
    StorageDesc s{id, payload_, device_};
    TensorDesc td;
    td.id = id;
    td.storage_id = id;
    if (payload_ % 2 == 0) {
      td.dtype = DType::fp16;
      td.shape = {static_cast<int64_t>(payload_ / 2)};
    } else {
      td.dtype = DType::int8;
      td.shape = {static_cast<int64_t>(payload_)};
    }
    td.stride = contiguous_stride(td.shape);
    td.size_bytes = payload_;
    t_.storages.push_back(std::move(s));
    t_.tensors.push_back(std::move(td));
    return id;
  }

  ExecutionTrace& t_;
  uint64_t payload_;
  std::string device_;
};

CommAttrs collective(CommType type, uint64_t group, uint64_t size, std::string tag) {
  CommAttrs c;
  c.comm_type = type;
  c.comm_group = group;
  c.comm_size_bytes = size;
  c.comm_tag = std::move(tag);
  return c;
}

CommAttrs p2p(uint64_t peer, uint64_t size, std::string tag) {
  CommAttrs c;
  c.comm_type = CommType::PointToPoint;
  c.comm_peer = peer;
  c.comm_size_bytes = size;
  c.comm_tag = std::move(tag);
  return c;
}

}  // namespace

ExecutionTrace generate_transformer_rank(const GenSpec& spec, uint64_t rank) {
  check_spec(spec);
  const uint64_t world = spec.tp * spec.dp * spec.pp;
  if (rank >= world) throw Error(ErrorCode::INVALID_SPEC, "rank", "rank outside the world");
  const RankCoord c = rank_coord(spec, rank);
  const uint64_t local_layers = spec.layers / spec.pp;
  const uint64_t stage_stride = spec.dp * spec.tp;
  const bool has_prev = c.stage > 0;
  const bool has_next = c.stage + 1 < spec.pp;
  const uint64_t tp_gid = tp_group_id(spec, c.stage, c.dp_index);
  const uint64_t S = spec.hidden_bytes;

  ExecutionTrace t;
  t.rank = rank;
  t.num_ranks = world;
  t.process_groups = transformer_groups(spec);
  Builder b(t, S, "gpu:" + std::to_string(rank));

  std::seed_seq seq{static_cast<uint32_t>(spec.seed), static_cast<uint32_t>(spec.seed >> 32),
                    static_cast<uint32_t>(rank)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<uint64_t> skew(0, spec.skew_us);
  auto dur = [&](uint64_t base) { return base + (spec.skew_us ? skew(rng) : 0); };

  std::vector<uint64_t> prev;
  auto comp = [&](const std::string& name, uint64_t base) {
    uint64_t id = b.add(name, NodeType::COMP, prev, dur(base));
    prev = {id};
    return id;
  };
  auto tp_comm = [&](const std::string& tag) {
    if (spec.tp == 1) return;
    if (spec.sequence_parallel) {
      uint64_t ag = b.add("allgather_" + tag, NodeType::COMM_COLL, prev, std::nullopt,
                          collective(CommType::AllGather, tp_gid, S, tag + "_ag"));
      prev = {ag};
      uint64_t rs = b.add("reducescatter_" + tag, NodeType::COMM_COLL, prev, std::nullopt,
                          collective(CommType::ReduceScatter, tp_gid, S, tag + "_rs"));
      prev = {rs};
    } else {
      uint64_t ar = b.add("allreduce_" + tag, NodeType::COMM_COLL, prev, std::nullopt,
                          collective(CommType::AllReduce, tp_gid, S, tag));
      prev = {ar};
    }
  };
  auto recvs = [&](uint64_t peer, const std::string& dir) {
    std::vector<uint64_t> got;
    for (uint64_t mb = 0; mb < spec.microbatches; ++mb) {
      std::string tag = dir + "_mb" + std::to_string(mb);
      got.push_back(b.add("recv_" + tag, NodeType::COMM_RECV, {}, std::nullopt, p2p(peer, S, tag)));
    }
    return got;
  };
  auto sends = [&](uint64_t peer, const std::string& dir) {
    std::vector<uint64_t> sent;
    for (uint64_t mb = 0; mb < spec.microbatches; ++mb) {
      std::string tag = dir + "_mb" + std::to_string(mb);
      sent.push_back(b.add("send_" + tag, NodeType::COMM_SEND, prev, std::nullopt, p2p(peer, S, tag)));
    }
    return sent;
  };

  if (has_prev) prev = recvs(rank - stage_stride, "fwd");
  for (uint64_t l = 0; l < local_layers; ++l) {
    const std::string sfx = "_l" + std::to_string(l) + "_fwd";
    comp("GEMM_qkv" + sfx, spec.gemm_us);
    comp("ATTN" + sfx, spec.attn_us);
    comp("GEMM_proj" + sfx, spec.gemm_us);
    tp_comm("tp_attn" + sfx);
    comp("GEMM_ffn1" + sfx, spec.gemm_us);
    comp("GELU" + sfx, spec.elem_us);
    comp("GEMM_ffn2" + sfx, spec.gemm_us);
    tp_comm("tp_mlp" + sfx);
  }
  std::vector<uint64_t> tail = prev;
  if (has_next) {
    sends(rank + stage_stride, "fwd");
    std::vector<uint64_t> got = recvs(rank + stage_stride, "bwd");
    prev = tail;
    prev.insert(prev.end(), got.begin(), got.end());
  }

  std::vector<uint64_t> layer_end;  // last node of each processed backward layer
  for (uint64_t i = 0; i < local_layers; ++i) {
    const uint64_t l = local_layers - 1 - i;
    const std::string sfx = "_l" + std::to_string(l) + "_bwd";
    comp("GEMM_ffn2" + sfx, spec.gemm_us);
    comp("GELU" + sfx, spec.elem_us);
    comp("GEMM_ffn1" + sfx, spec.gemm_us);
    tp_comm("tp_mlp" + sfx);
    comp("GEMM_proj" + sfx, spec.gemm_us);
    comp("ATTN" + sfx, spec.attn_us);
    comp("GEMM_qkv" + sfx, spec.gemm_us);
    tp_comm("tp_attn" + sfx);
    layer_end.push_back(prev.front());
  }
  std::vector<uint64_t> opt_deps = prev;
  if (has_prev) {
    std::vector<uint64_t> sent = sends(rank - stage_stride, "bwd");
    opt_deps.insert(opt_deps.end(), sent.begin(), sent.end());
  }
  if (spec.dp > 1) {
    const uint64_t dp_gid = dp_group_id(spec, c.stage, c.tp_index);
    const uint64_t nb = spec.grad_buckets;
    for (uint64_t j = 0; j < nb; ++j) {
      uint64_t covered = ((j + 1) * local_layers + nb - 1) / nb;  // ceil
      uint64_t after = layer_end[covered - 1];
      std::string tag = "dp_bucket" + std::to_string(j);
      opt_deps.push_back(b.add("allreduce_" + tag, NodeType::COMM_COLL, {after}, std::nullopt,
                               collective(CommType::AllReduce, dp_gid, S, tag)));
    }
  }
  prev = opt_deps;
  comp("optimizer_elementwise", spec.elem_us);
  return t;
}

std::vector<ExecutionTrace> generate_transformer(const GenSpec& spec) {
  check_spec(spec);
  const uint64_t world = spec.tp * spec.dp * spec.pp;
  std::vector<ExecutionTrace> out(world);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
  for (int64_t r = 0; r < static_cast<int64_t>(world); ++r) {
    try {
      out[r] = generate_transformer_rank(spec, static_cast<uint64_t>(r));
    } catch (...) {
#pragma omp critical(chakra_gen_err)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

CountTable expected_counts(const GenSpec& spec, uint64_t rank) {
  check_spec(spec);
  const RankCoord c = rank_coord(spec, rank);
  const uint64_t L = spec.layers / spec.pp;
  const uint64_t tp_on = spec.tp > 1 ? 1 : 0;
  const uint64_t dp_on = spec.dp > 1 ? 1 : 0;
  const uint64_t boundaries = (c.stage > 0 ? 1 : 0) + (c.stage + 1 < spec.pp ? 1 : 0);

  CountTable e = op_counts(ExecutionTrace{});
  const uint64_t tp_colls = 4 * L * tp_on;
  e.by_comm_type[CommType::AllReduce] = (spec.sequence_parallel ? 0 : tp_colls) + spec.grad_buckets * dp_on;
  e.by_comm_type[CommType::AllGather] = spec.sequence_parallel ? tp_colls : 0;
  e.by_comm_type[CommType::ReduceScatter] = spec.sequence_parallel ? tp_colls : 0;
  e.by_comm_type[CommType::PointToPoint] = 2 * spec.microbatches * boundaries;
  e.by_node_type[NodeType::COMP] = 12 * L + 1;
  e.by_node_type[NodeType::COMM_COLL] = (spec.sequence_parallel ? 2 : 1) * tp_colls + spec.grad_buckets * dp_on;
  e.by_node_type[NodeType::COMM_SEND] = spec.microbatches * boundaries;
  e.by_node_type[NodeType::COMM_RECV] = spec.microbatches * boundaries;
  e.by_name_class["GeMM"] = 8 * L;
  e.by_name_class["Attn"] = 2 * L;
  e.by_name_class["ElemWise"] = 2 * L + 1;
  return e;
}

std::vector<ExecutionTrace> generate_micro(const MicroSpec& spec) {
  auto node = [&](uint64_t id, std::string name, std::vector<uint64_t> deps) {
    TraceNode n;
    n.id = id;
    n.name = std::move(name);
    n.data_deps = std::move(deps);
    n.duration_micros = spec.duration_us;
    return n;
  };
  ExecutionTrace t;
  switch (spec.kind) {
    case MicroKind::chain:
      if (spec.n == 0) throw Error(ErrorCode::INVALID_SPEC, "n", "chain needs n >= 1");
      for (uint64_t i = 1; i <= spec.n; ++i)
        t.nodes.push_back(node(i, "chain_" + std::to_string(i), i > 1 ? std::vector<uint64_t>{i - 1}
                                                                       : std::vector<uint64_t>{}));
      return {t};
    case MicroKind::diamond:
      t.nodes.push_back(node(1, "diamond_top", {}));
      t.nodes.push_back(node(2, "diamond_left", {1}));
      t.nodes.push_back(node(3, "diamond_right", {1}));
      t.nodes.push_back(node(4, "diamond_bottom", {2, 3}));
      return {t};
    case MicroKind::fanout:
      if (spec.k == 0) throw Error(ErrorCode::INVALID_SPEC, "k", "fanout needs k >= 1");
      t.nodes.push_back(node(1, "fanout_root", {}));
      for (uint64_t i = 0; i < spec.k; ++i)
        t.nodes.push_back(node(i + 2, "fanout_leaf_" + std::to_string(i), {1}));
      return {t};
    case MicroKind::comm_pair: {
      if (spec.size_bytes == 0) throw Error(ErrorCode::INVALID_SPEC, "size_bytes", "payload must be > 0");
      std::vector<ExecutionTrace> out(2);
      for (uint64_t r = 0; r < 2; ++r) {
        out[r].rank = r;
        out[r].num_ranks = 2;
        out[r].process_groups = {{0, {0, 1}}};
        TraceNode n;
        n.id = 1;
        n.name = "allreduce";
        n.type = NodeType::COMM_COLL;
        set_comm_attrs(n, collective(CommType::AllReduce, 0, spec.size_bytes, "pair"));
        out[r].nodes.push_back(std::move(n));
      }
      return out;
    }
  }
  throw Error(ErrorCode::INVALID_SPEC, "kind", "unknown micro kind");
}

ExecutionTrace generate_random_dag(const RandomDagSpec& spec) {
  if (spec.n == 0) throw Error(ErrorCode::INVALID_SPEC, "n", "random DAG needs n >= 1");
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(spec.edge_prob) || !in_unit(spec.comm_fraction) || !in_unit(spec.ctrl_fraction))
    throw Error(ErrorCode::INVALID_SPEC, "edge_prob", "probabilities must lie in [0, 1]");
  if (spec.n > (uint64_t{1} << 31)) throw Error(ErrorCode::INVALID_SPEC, "n", "too many nodes");

  // Independent streams so e.g. ctrl_fraction does not move the edge set.
  auto stream = [&](uint32_t k) {
    std::seed_seq seq{static_cast<uint32_t>(spec.seed), static_cast<uint32_t>(spec.seed >> 32), k};
    return std::mt19937_64(seq);
  };
  std::mt19937_64 edge_rng = stream(1), kind_rng = stream(2), dur_rng = stream(3), type_rng = stream(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<uint64_t> dur(1, 100);

  ExecutionTrace t;
  t.nodes.resize(spec.n);
  for (uint64_t i = 0; i < spec.n; ++i) {
    TraceNode& n = t.nodes[i];
    n.id = i + 1;
    if (spec.comm_fraction > 0 && unit(type_rng) < spec.comm_fraction) {
      n.type = NodeType::COMM_COLL;
      n.name = "allreduce_" + std::to_string(i + 1);
      set_comm_attrs(n, collective(CommType::AllReduce, 0, 1024, "r" + std::to_string(i + 1)));
    } else {
      n.name = "op_" + std::to_string(i + 1);
    }
    n.duration_micros = dur(dur_rng);
  }
  if (spec.comm_fraction > 0) t.process_groups = {{0, {0}}};

  // Geometric skipping over the pairs (w, v), w < v, column by column.
  const double p = spec.edge_prob;
  if (p > 0) {
    const double log_q = std::log1p(-p);
    int64_t v = 1, w = -1;
    const auto n = static_cast<int64_t>(spec.n);
    while (v < n) {
      double r = unit(edge_rng);
      int64_t skip = p >= 1.0 ? 0 : static_cast<int64_t>(std::floor(std::log1p(-r) / log_q));
      w += 1 + skip;
      while (w >= v && v < n) {
        w -= v;
        ++v;
      }
      if (v < n) {
        TraceNode& child = t.nodes[static_cast<size_t>(v)];
        const uint64_t parent = static_cast<uint64_t>(w) + 1;
        if (spec.ctrl_fraction > 0 && unit(kind_rng) < spec.ctrl_fraction)
          child.ctrl_deps.push_back(parent);
        else
          child.data_deps.push_back(parent);
      }
    }
  }

  if (spec.timed) {
    std::vector<uint64_t> end(spec.n, 0);
    for (uint64_t i = 0; i < spec.n; ++i) {
      TraceNode& n = t.nodes[i];
      uint64_t s = 0;
      for (const auto* deps : {&n.ctrl_deps, &n.data_deps})
        for (uint64_t d : *deps) s = std::max(s, end[d - 1]);
      n.start_time_micros = s;
      end[i] = s + *n.duration_micros;
    }
  }
  return t;
}

}  // namespace chakra
