#include "ppv/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace ppv {

std::vector<std::vector<std::uint32_t>> bottom_sccs(const std::vector<std::vector<std::uint32_t>>& succ) {
  // Iterative Tarjan.
  const std::uint32_t n = static_cast<std::uint32_t>(succ.size());
  constexpr std::uint32_t kUnvisited = UINT32_MAX;
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::uint32_t> stack;
  std::vector<std::vector<std::uint32_t>> sccs;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;
  std::uint32_t counter = 0;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, i] = call.back();
      if (i < succ[v].size()) {
        std::uint32_t w = succ[v][i++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::uint32_t> scc;
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = static_cast<std::uint32_t>(sccs.size());
          scc.push_back(w);
        } while (w != done);
        sccs.push_back(std::move(scc));
      }
    }
  }

  std::vector<std::vector<std::uint32_t>> out;
  for (std::uint32_t c = 0; c < sccs.size(); ++c) {
    bool closed = std::all_of(sccs[c].begin(), sccs[c].end(), [&](std::uint32_t v) {
      return std::all_of(succ[v].begin(), succ[v].end(), [&](std::uint32_t w) { return comp[w] == c; });
    });
    if (closed) {
      std::sort(sccs[c].begin(), sccs[c].end());
      out.push_back(sccs[c]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ReachGraph explore(const Protocol& p, const Configuration& c0, std::size_t cap) {
  if (c0.size() < 2) throw InputTooSmall("configurations need at least two agents");
  ReachGraph g;
  std::unordered_map<Configuration, std::uint32_t, ConfigurationHash> seen;
  auto visit = [&](const Configuration& c) {
    auto [it, fresh] = seen.try_emplace(c, static_cast<std::uint32_t>(g.nodes.size()));
    if (fresh) {
      if (g.nodes.size() >= cap) throw CapExceeded(cap);
      g.nodes.push_back(c);
      g.succ.emplace_back();
    }
    return it->second;
  };
  visit(c0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    std::vector<std::uint32_t> out;
    for (TransitionId t : p.nonsilent()) {
      const auto& tr = p.transition(t);
      if (!g.nodes[i].covers(tr.pre())) continue;
      out.push_back(visit(step(g.nodes[i], tr)));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    g.succ[i] = std::move(out);
  }
  g.bottom = bottom_sccs(g.succ);
  return g;
}

const char* to_string(InputClassification::Kind k) {
  switch (k) {
    case InputClassification::Kind::Stabilizes: return "stabilizes";
    case InputClassification::Kind::NonConsensus: return "non_consensus";
    case InputClassification::Kind::Split: return "split";
  }
  return "?";
}

InputClassification classify_graph(const Protocol& p, const ReachGraph& g) {
  InputClassification cls;
  cls.nodes = g.nodes.size();
  cls.silent = std::all_of(g.bottom.begin(), g.bottom.end(),
                           [&](const auto& scc) { return scc.size() == 1 && g.succ[scc[0]].empty(); });
  std::optional<bool> value;
  bool split = false;
  for (const auto& scc : g.bottom) {
    for (auto v : scc) {
      auto out = consensus_output(p, g.nodes[v]);
      if (!out) {
        cls.kind = InputClassification::Kind::NonConsensus;
        return cls;
      }
      if (value && *value != *out) split = true;
      value = *out;
    }
  }
  if (split) {
    cls.kind = InputClassification::Kind::Split;
    return cls;
  }
  cls.kind = InputClassification::Kind::Stabilizes;
  cls.value = value.value_or(false);
  return cls;
}

InputClassification classify_input(const Protocol& p, const InputAssignment& x, std::size_t cap) {
  return classify_graph(p, explore(p, initialize(p, x), cap));
}

std::vector<InputAssignment> all_inputs(std::size_t num_symbols, std::size_t max_agents) {
  std::vector<InputAssignment> out;
  if (num_symbols == 0) return out;
  for (std::size_t n = 2; n <= max_agents; ++n) {
    // Compositions of n into num_symbols parts, lexicographically descending
    // from (n, 0, ..., 0).
    std::vector<std::uint64_t> c(num_symbols, 0);
    c[0] = n;
    for (;;) {
      out.push_back({c});
      // Next composition: move one unit from the last nonzero non-final slot rightwards.
      std::size_t last = num_symbols - 1;
      std::uint64_t tail = c[last];
      c[last] = 0;
      std::size_t j = last;
      while (j > 0 && c[j - 1] == 0) --j;
      if (j == 0) break;
      --c[j - 1];
      c[j] = tail + 1;
    }
  }
  return out;
}

bool OracleReport::silent() const {
  return std::all_of(table.begin(), table.end(), [](const OracleEntry& e) { return e.cls.silent; });
}

OracleReport oracle_well_specified(const Protocol& p, std::size_t max_agents, std::size_t cap, std::size_t jobs) {
  if (max_agents < 2) throw std::invalid_argument("max_agents must be at least 2");
  OracleReport rep;
  auto inputs = all_inputs(p.num_symbols(), max_agents);
  rep.table.resize(inputs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < inputs.size();) {
      try {
        rep.table[i] = {inputs[i], classify_input(p, inputs[i], cap)};
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = inputs.size();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, inputs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  for (const auto& e : rep.table)
    if (e.cls.kind != InputClassification::Kind::Stabilizes) {
      rep.broken = e.input;
      break;
    }
  return rep;
}

}  // namespace ppv
