#include "ecgaf/features.hpp"
#include "ecgaf/nn/densenet.hpp"
#include "ecgaf/nn/ops.hpp"
#include "ecgaf/pipeline.hpp"
#include "ecgaf/qrs.hpp"
#include "ecgaf/signal.hpp"
#include "ecgaf/spectrogram.hpp"
#include "ecgaf/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ecgaf;

namespace {

std::vector<double> ecg(double seconds) {
    synth::SynthOptions opt;
    opt.duration_s = seconds;
    opt.noise_sd = 0.03;
    opt.baseline_wander = true;
    opt.seed = 1;
    return synth::synth_ecg(opt).record.samples;
}

nn::Tensor random_tensor(nn::Shape s) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    nn::Tensor t(s);
    for (double& v : t.values()) {
        v = d(rng);
    }
    return t;
}

void BM_RemoveBaseline(benchmark::State& state) {
    const auto x = ecg(static_cast<double>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(signal::remove_baseline(x, 300.0));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_RemoveBaseline)->Arg(30)->Arg(60);

void BM_PanTompkins(benchmark::State& state) {
    const auto x = signal::remove_baseline(ecg(static_cast<double>(state.range(0))), 300.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qrs::detect_pan_tompkins(x, 300.0));
    }
}
BENCHMARK(BM_PanTompkins)->Arg(30)->Arg(60);

void BM_FilteredDerivative(benchmark::State& state) {
    const auto x = signal::remove_baseline(ecg(static_cast<double>(state.range(0))), 300.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qrs::detect_filtered_derivative(x, 300.0));
    }
}
BENCHMARK(BM_FilteredDerivative)->Arg(30)->Arg(60);

void BM_Stft(benchmark::State& state) {
    const auto x = ecg(static_cast<double>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(spectrogram::stft_magnitude(x, 300.0));
    }
}
BENCHMARK(BM_Stft)->Arg(30)->Arg(60);

void BM_FeatureVector(benchmark::State& state) {
    EcgRecord r;
    r.id = "bench";
    r.samples = ecg(30);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pipeline::record_features(r));
    }
}
BENCHMARK(BM_FeatureVector);

void BM_Conv2d(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const nn::Tensor x = random_tensor({1, c, 20, 375});
    const nn::Tensor w = random_tensor({6, c, 3, 3});
    const nn::Tensor b(nn::Shape{1, 6, 1, 1});
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::conv2d(x, w, b, 1, 1));
    }
}
BENCHMARK(BM_Conv2d)->Arg(12)->Arg(48);

void BM_DenseNetInfer(benchmark::State& state) {
    const auto kind = state.range(0) == 0 ? nn::ModelKind::Main : nn::ModelKind::Secondary;
    const nn::DenseNet model = nn::build_model(kind, 1);
    const nn::Tensor x = random_tensor({1, 1, 20, model.config().input_cols});
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.infer(x));
    }
}
BENCHMARK(BM_DenseNetInfer)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DenseNetTrainStep(benchmark::State& state) {
    nn::DenseNet model = nn::build_model(nn::ModelKind::Main, 1);
    const nn::Tensor x = random_tensor({4, 1, 20, 375});
    const std::vector<std::size_t> labels{0, 1, 2, 3};
    for (auto _ : state) {
        model.zero_grad();
        const auto loss = nn::softmax_cross_entropy(model.forward(x, nn::Mode::Train), labels);
        benchmark::DoNotOptimize(model.backward(loss.grad_logits));
    }
}
BENCHMARK(BM_DenseNetTrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
