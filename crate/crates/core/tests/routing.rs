mod common;

use common::*;
use rand::Rng;
use wavad_core::model::{BackwardSpec, NetworkGrads};
use wavad_core::trainer::{TrainSchedule, Trainer};
use wavad_core::{NetworkConfig, Snr, Utterance, VadNetwork};

const GRID: [f64; 6] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0];
const ROUTING_TOL: f64 = 1e-10;

fn grads(net: &VadNetwork, p: &Probe, spec: BackwardSpec) -> NetworkGrads {
    let trace = net.forward(&p.waveform).unwrap();
    net.backward(&trace, &p.vad, &p.noise, spec).unwrap().0
}

/// Largest deviation of `joint` from `g_y - alpha * g_z`, scaled by the terms' magnitude.
fn routing_error(joint: &[f64], gy: &[f64], gz: &[f64], alpha: f64) -> f64 {
    joint
        .iter()
        .zip(gy)
        .zip(gz)
        .map(|((j, y), z)| (j - (y - alpha * z)).abs() / (1.0 + y.abs() + alpha * z.abs()))
        .fold(0.0, f64::max)
}

#[test]
fn shared_gradients_are_vad_minus_alpha_noise() {
    for seed in 1..=5 {
        let net = VadNetwork::new(NetworkConfig::gradcheck(), seed).unwrap();
        let p = probe(&net, seed + 50, 31);
        let gy = grads(&net, &p, BackwardSpec::vad_only()).shared();
        let gz: Vec<f64> = grads(&net, &p, BackwardSpec::noise_only(1.0)).shared().iter().map(|v| -v).collect();
        for alpha in GRID {
            let joint = grads(&net, &p, BackwardSpec::joint(alpha));
            assert!(routing_error(&joint.shared(), &gy, &gz, alpha) <= ROUTING_TOL, "alpha {alpha}");
        }
    }
}

#[test]
fn heads_see_only_their_own_loss() {
    let net = VadNetwork::new(NetworkConfig::gradcheck(), 9).unwrap();
    let p = probe(&net, 10, 17);
    let vad_only = grads(&net, &p, BackwardSpec::vad_only());
    let noise_only = grads(&net, &p, BackwardSpec::noise_only(1.0));
    let mut shuffled = probe(&net, 10, 17);
    let classes = net.config().noise_classes();
    shuffled.noise.iter_mut().for_each(|n| *n = (*n + 1) % classes);
    for alpha in GRID {
        let joint = grads(&net, &p, BackwardSpec::joint(alpha));
        assert_eq!(joint.db, vad_only.db);
        assert_eq!(joint.dn, noise_only.dn);
        let trace = net.forward(&shuffled.waveform).unwrap();
        let (other, _) = net.backward(&trace, &shuffled.vad, &shuffled.noise, BackwardSpec::joint(alpha)).unwrap();
        assert_eq!(other.db, vad_only.db);
    }
    let zero = grads(&net, &p, BackwardSpec::joint(0.0));
    assert_eq!(zero.eb, vad_only.eb);
    assert_eq!(zero.fb, vad_only.fb);
}

#[test]
fn alpha_zero_equals_no_discriminator() {
    let with = VadNetwork::new(NetworkConfig::gradcheck(), 4).unwrap();
    let mut cfg = NetworkConfig::gradcheck();
    cfg.with_discriminator = false;
    let without = VadNetwork::new(cfg, 4).unwrap();
    let p = probe(&with, 8, 12);
    let a = grads(&with, &p, BackwardSpec::joint(0.0));
    let b = grads(&without, &p, BackwardSpec::joint(0.0));
    assert_eq!((a.eb, a.fb, a.db), (b.eb, b.fb, b.db));
    assert!(b.dn.is_empty());
}

#[test]
fn trainer_step_uses_the_routed_gradient_unchanged() {
    let net = VadNetwork::new(NetworkConfig::gradcheck(), 21).unwrap();
    let mut r = rng(5);
    let n = net.min_input_len() + 60;
    let n = n - n % 4;
    let samples: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let labels: Vec<u8> = (0..n / 4).map(|_| r.gen_range(0..2)).collect();
    let batch = Utterance::new(samples.clone(), 400, labels, 2, Snr::Db(5.0)).unwrap();
    let counts = net.output_frames(n).unwrap();
    let p = Probe {
        waveform: samples,
        vad: wavad_core::model::frame_label_alignment(counts.vad, &batch.vad_labels).unwrap(),
        noise: vec![2; counts.noise.unwrap()],
    };
    let gy = grads(&net, &p, BackwardSpec::vad_only()).shared();
    let gz: Vec<f64> = grads(&net, &p, BackwardSpec::noise_only(1.0)).shared().iter().map(|v| -v).collect();
    for alpha in GRID {
        let schedule = TrainSchedule {
            alpha,
            forwards_per_backward: 1,
            files_per_forward: 1,
            ..TrainSchedule::default()
        };
        let trainer = Trainer::new(net.clone(), schedule, 21).unwrap();
        let step = trainer.step_gradients(std::slice::from_ref(&batch)).unwrap();
        assert!(routing_error(&step.grads.shared(), &gy, &gz, alpha) <= ROUTING_TOL, "alpha {alpha}");
    }
}
