#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavad_core::model::{frame_label_alignment, BackwardSpec, FrameCounts};
use wavad_core::VadNetwork;

pub const FD_STEP: f64 = 1e-6;
pub const REL_TOL: f64 = 1e-4;
/// Gradients smaller than this are compared absolutely.
pub const ABS_FLOOR: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(ABS_FLOOR)
}

/// Central difference of `f` w.r.t. `x[i]`, restoring `x` afterwards.
pub fn central_diff(x: &mut [f64], i: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let orig = x[i];
    x[i] = orig + FD_STEP;
    let plus = f(x);
    x[i] = orig - FD_STEP;
    let minus = f(x);
    x[i] = orig;
    (plus - minus) / (2.0 * FD_STEP)
}

/// A waveform with `extra` samples beyond the network minimum, plus labels
/// on the 10 ms grid already aligned to each head.
pub struct Probe {
    pub waveform: Vec<f64>,
    pub vad: Vec<u8>,
    pub noise: Vec<usize>,
}

pub fn probe(net: &VadNetwork, seed: u64, extra: usize) -> Probe {
    let mut r = rng(seed);
    let n = net.min_input_len() + extra;
    let waveform: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let hop = net.config().fs as usize / 100;
    let frames = n / hop;
    let vad_full: Vec<u8> = (0..frames).map(|_| r.gen_range(0..2)).collect();
    let classes = net.config().noise_classes();
    let noise_full: Vec<usize> = (0..frames).map(|_| r.gen_range(0..classes)).collect();
    let FrameCounts { vad, noise } = net.output_frames(n).unwrap();
    Probe {
        waveform,
        vad: frame_label_alignment(vad, &vad_full).unwrap(),
        noise: noise.map(|m| frame_label_alignment(m, &noise_full).unwrap()).unwrap_or_default(),
    }
}

/// Flattened copy of every parameter, in `layers()` order.
pub fn flat_params(net: &VadNetwork) -> Vec<f64> {
    net.layers().flat_map(|l| l.kernel.iter().chain(&l.bias).copied()).collect()
}

pub fn set_params(net: &mut VadNetwork, values: &[f64]) {
    let mut it = values.iter();
    for layer in net.layers_mut() {
        for p in layer.kernel.iter_mut().chain(layer.bias.iter_mut()) {
            *p = *it.next().unwrap();
        }
    }
}

/// Which layer (by name) each flattened parameter belongs to.
pub fn param_owners(net: &VadNetwork) -> Vec<String> {
    net.layer_names()
        .into_iter()
        .zip(net.layers())
        .flat_map(|(name, l)| std::iter::repeat(name).take(l.kernel.len() + l.bias.len()))
        .collect()
}

pub fn loss_at(net: &VadNetwork, params: &[f64], p: &Probe, spec: BackwardSpec) -> f64 {
    let mut copy = net.clone();
    set_params(&mut copy, params);
    copy.loss(&p.waveform, &p.vad, &p.noise, spec).unwrap()
}

/// Analytic gradient flattened like [`flat_params`].
pub fn analytic(net: &VadNetwork, p: &Probe, spec: BackwardSpec) -> Vec<f64> {
    let trace = net.forward(&p.waveform).unwrap();
    let (grads, _) = net.backward(&trace, &p.vad, &p.noise, spec).unwrap();
    grads
        .blocks()
        .into_iter()
        .flat_map(|g| g.kernel.iter().chain(&g.bias).copied().collect::<Vec<_>>())
        .collect()
}
