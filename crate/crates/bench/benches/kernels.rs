use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use wavad_bench::{scored_frames, signal, train_pool, waveform_for};
use wavad_core::autograd::{conv1d_backward, conv1d_forward, conv1d_forward_traced, Activation, ConvLayer, FeatureMap};
use wavad_core::evaluator::{auc, auc_pairwise_oracle};
use wavad_core::model::{frame_label_alignment, BackwardSpec};
use wavad_core::trainer::{TrainSchedule, Trainer};
use wavad_core::{NetworkConfig, VadNetwork};

fn conv(c: &mut Criterion) {
    let mut group = c.benchmark_group("conv1d");
    for (cin, cout, k, stride) in [(1, 30, 30, 1), (30, 30, 80, 1), (30, 30, 153, 80)] {
        let mut layer = ConvLayer::new(cin, cout, k, stride, Activation::leaky()).unwrap();
        layer.kernel = signal(layer.kernel.len(), 1).iter().map(|w| w * 0.05).collect();
        let n = 4000;
        let x = FeatureMap::from_values(cin, n, signal(cin * n, 2)).unwrap();
        let id = format!("{cin}x{cout}k{k}s{stride}");
        group.bench_with_input(BenchmarkId::new("forward", &id), &x, |b, x| {
            b.iter(|| conv1d_forward(&layer, black_box(x)).unwrap())
        });
        let trace = conv1d_forward_traced(&layer, &x).unwrap();
        let upstream = signal(trace.output.values().len(), 4);
        group.bench_with_input(BenchmarkId::new("backward", &id), &x, |b, x| {
            b.iter(|| conv1d_backward(&layer, black_box(x), &trace, &upstream).unwrap())
        });
    }
    group.finish();
}

fn network(c: &mut Criterion) {
    let mut group = c.benchmark_group("network");
    group.sample_size(10);
    let net = VadNetwork::new(NetworkConfig::toy(), 1).unwrap();
    let x = waveform_for(&net);
    group.bench_function("toy_forward_1s", |b| b.iter(|| net.forward(black_box(&x)).unwrap()));

    let counts = net.output_frames(x.len()).unwrap();
    let hop = net.config().fs as usize / 100;
    let full: Vec<u8> = (0..x.len() / hop).map(|i| (i % 4 != 0) as u8).collect();
    let vad = frame_label_alignment(counts.vad, &full).unwrap();
    let noise_full: Vec<usize> = full.iter().map(|_| 1).collect();
    let noise = frame_label_alignment(counts.noise.unwrap(), &noise_full).unwrap();
    group.bench_function("toy_forward_backward_1s", |b| {
        b.iter(|| {
            let trace = net.forward(black_box(&x)).unwrap();
            net.backward(&trace, &vad, &noise, BackwardSpec::joint(0.1)).unwrap()
        })
    });

    let pool = train_pool(120);
    let schedule = TrainSchedule {
        forwards_per_backward: 1,
        files_per_forward: 2,
        ..TrainSchedule::default()
    };
    let mut trainer = Trainer::new(net.clone(), schedule, 1).unwrap();
    let batches = trainer.draw_batches(&pool, &wavad_core::corpus::conditions(&pool), 0).unwrap();
    group.bench_function("toy_optimizer_step", |b| b.iter(|| trainer.apply_step(&batches, None).unwrap()));
    group.finish();
}

fn roc_auc(c: &mut Criterion) {
    let mut group = c.benchmark_group("auc");
    for n in [1_000, 100_000] {
        let (s, l) = scored_frames(n);
        group.bench_with_input(BenchmarkId::new("sweep", n), &n, |b, _| b.iter(|| auc(black_box(&s), &l).unwrap()));
    }
    let (s, l) = scored_frames(2_000);
    group.bench_function("pairwise_2000", |b| b.iter(|| auc_pairwise_oracle(black_box(&s), &l).unwrap()));
    group.finish();
}

criterion_group!(benches, conv, network, roc_auc);
criterion_main!(benches);
