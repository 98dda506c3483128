#include <memory>

#include <benchmark/benchmark.h>

#include "aeattack/autoencoder.hpp"
#include "aeattack/channel.hpp"
#include "aeattack/classical.hpp"
#include "aeattack/evaluation.hpp"

using namespace aeattack;

namespace {

std::shared_ptr<const autoencoder::TrainedAutoencoder> briefly_trained(autoencoder::ArchName name) {
  autoencoder::TrainConfig cfg;
  cfg.epochs = 50;
  cfg.seed = 1;
  const auto arch = name == autoencoder::ArchName::MLP ? autoencoder::build_mlp(4, 7)
                                                       : autoencoder::build_cnn(4, 7);
  return std::make_shared<const autoencoder::TrainedAutoencoder>(autoencoder::train(arch, cfg));
}

void BM_Decode(benchmark::State& state) {
  const auto model = briefly_trained(static_cast<autoencoder::ArchName>(state.range(0)));
  Rng rng(2);
  const Tensor y = add(autoencoder::encode(*model, 5), channel::awgn(14, 0.3, rng));
  for (auto _ : state) benchmark::DoNotOptimize(autoencoder::decode(*model, y).message);
}
BENCHMARK(BM_Decode)
    ->Arg(static_cast<int>(autoencoder::ArchName::MLP))
    ->Arg(static_cast<int>(autoencoder::ArchName::CNN));

void BM_MldDecode(benchmark::State& state) {
  Rng rng(3);
  const Tensor y = add(classical::ModulatedCodebook::instance().signals[9], channel::awgn(14, 0.5, rng));
  for (auto _ : state) benchmark::DoNotOptimize(classical::mld_decode(y));
}
BENCHMARK(BM_MldDecode);

void BM_RunTrial(benchmark::State& state) {
  evaluation::Scenario sc;
  sc.id = "bench";
  if (state.range(0) == 0) {
    sc.system = std::make_shared<evaluation::ClassicalLink>();
  } else {
    sc.system = std::make_shared<evaluation::AutoencoderLink>(
        briefly_trained(autoencoder::ArchName::MLP), "mlp");
  }
  sc.channel = channel::ChannelConfig::make(5.0, 4, 7);
  sc.attack = evaluation::AttackKind::Jamming;
  sc.psr_db = -6.0;
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(evaluation::run_trial(sc, t++));
}
BENCHMARK(BM_RunTrial)->Arg(0)->Arg(1);

void BM_TrainSteps(benchmark::State& state) {
  const auto arch = state.range(0) == 0 ? autoencoder::build_mlp(4, 7) : autoencoder::build_cnn(4, 7);
  autoencoder::TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 4;
  for (auto _ : state) benchmark::DoNotOptimize(autoencoder::train(arch, cfg).final_loss);
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_TrainSteps)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
