#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "wikivoc/catgraph.hpp"
#include "wikivoc/common.hpp"

namespace {

using namespace wikivoc::graph;

struct BigGraph {
  CategoryGraph g;
  std::vector<std::string> seeds;
};

BigGraph make_graph(std::size_t n) {
  wikivoc::Rng rng(13);
  GraphBuilder b;
  std::vector<std::string> cats(n);
  for (std::size_t i = 0; i < n; ++i) {
    cats[i] = "c" + std::to_string(i);
    b.add_category(cats[i]);
  }
  for (std::size_t i = 1; i < n; ++i)
    b.add_category_edge(cats[i], cats[rng.below(i)]);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    std::size_t u = rng.below(n), v = rng.below(n);
    if (u != v) b.add_category_edge(cats[u], cats[v]);
  }
  LoadSummary sum;
  BigGraph bg;
  bg.g = b.finish(sum);
  bg.seeds = {cats[0]};
  return bg;
}

void BM_bfs_subtree(benchmark::State& state) {
  BigGraph bg = make_graph(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Subtree st = bfs_subtree(bg.g, bg.seeds);
    benchmark::DoNotOptimize(st.member_count);
  }
}
BENCHMARK(BM_bfs_subtree)->Arg(10000)->Arg(100000);

void BM_prune_reachability(benchmark::State& state) {
  BigGraph bg = make_graph(static_cast<std::size_t>(state.range(0)));
  Subtree st = bfs_subtree(bg.g, bg.seeds);
  wikivoc::Rng rng(29);
  std::vector<CatId> removed;
  for (CatId c : st.members_sorted())
    if (c != st.seeds[0] && rng.chance(0.05)) removed.push_back(c);
  for (auto _ : state) {
    Subtree out = prune_unreachable(st, bg.g, removed, PruneMode::reachability,
                                    StageTag::rule);
    benchmark::DoNotOptimize(out.member_count);
  }
}
BENCHMARK(BM_prune_reachability)->Arg(10000)->Arg(100000);

}  // namespace
