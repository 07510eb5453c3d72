#include <benchmark/benchmark.h>

#include <string>

#include "wikivoc/common.hpp"
#include "wikivoc/ingest.hpp"

namespace {

using namespace wikivoc::ingest;

std::string synth_dump(std::size_t tuples) {
  wikivoc::Rng rng(7);
  std::string sql;
  std::size_t emitted = 0;
  while (emitted < tuples) {
    std::size_t batch = std::min<std::size_t>(tuples - emitted, 50);
    sql += "INSERT INTO `category` VALUES ";
    for (std::size_t t = 0; t < batch; ++t) {
      if (t) sql.push_back(',');
      sql += "(" + std::to_string(rng.below(1000000)) + ",'Category_title_" +
             std::to_string(rng.below(100000)) + "',3,1,0)";
    }
    sql += ";\n";
    emitted += batch;
  }
  return sql;
}

void BM_sql_parse(benchmark::State& state) {
  std::string sql = synth_dump(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    SqlDumpParser parser(ByteSource::from_string(sql),
                         TableSchema{Table::category, 5});
    RawRecord rec;
    std::uint64_t count = 0;
    while (parser.next(rec)) ++count;
    benchmark::DoNotOptimize(count);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(sql.size()));
}
BENCHMARK(BM_sql_parse)->Arg(10000)->Arg(100000);

}  // namespace
