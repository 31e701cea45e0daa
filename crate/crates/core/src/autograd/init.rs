use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::autograd::ConvLayer;

/// He normal init: kernel ~ N(0, 2 / fan_in), biases zero.
pub fn init_he<R: Rng + ?Sized>(layer: &mut ConvLayer, rng: &mut R) {
    let var = 2.0 / layer.fan_in() as f64;
    fill_normal(layer, var, rng);
}

/// Xavier normal init: kernel ~ N(0, 2 / (fan_in + fan_out)), biases zero.
pub fn init_xavier<R: Rng + ?Sized>(layer: &mut ConvLayer, rng: &mut R) {
    let var = 2.0 / (layer.fan_in() + layer.fan_out()) as f64;
    fill_normal(layer, var, rng);
}

pub fn init_he_seeded(layer: &mut ConvLayer, seed: u64) {
    init_he(layer, &mut ChaCha8Rng::seed_from_u64(seed));
}

pub fn init_xavier_seeded(layer: &mut ConvLayer, seed: u64) {
    init_xavier(layer, &mut ChaCha8Rng::seed_from_u64(seed));
}

fn fill_normal<R: Rng + ?Sized>(layer: &mut ConvLayer, variance: f64, rng: &mut R) {
    let dist = Normal::new(0.0, variance.sqrt()).expect("finite positive std");
    for w in layer.kernel.iter_mut() {
        *w = dist.sample(rng);
    }
    layer.bias.iter_mut().for_each(|b| *b = 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autograd::Activation;

    fn sample_variance(v: &[f64]) -> f64 {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    }

    #[test]
    fn he_variance() {
        // fan_in = 100, 1000 outputs -> 1e5 draws
        let mut layer = ConvLayer::new(10, 1000, 10, 1, Activation::leaky()).unwrap();
        init_he_seeded(&mut layer, 11);
        assert_eq!(layer.kernel.len(), 100_000);
        let var = sample_variance(&layer.kernel);
        assert!((var - 0.02).abs() < 0.02 * 0.05, "variance {var}");
    }

    #[test]
    fn xavier_variance() {
        let mut layer = ConvLayer::new(10, 1000, 10, 1, Activation::Sigmoid).unwrap();
        init_xavier_seeded(&mut layer, 5);
        let var = sample_variance(&layer.kernel);
        let expected = 2.0 / (100.0 + 10_000.0);
        assert!((var - expected).abs() < expected * 0.05);
    }

    #[test]
    fn seeded_init_is_deterministic_and_zeroes_bias() {
        let mut a = ConvLayer::new(3, 4, 5, 1, Activation::leaky()).unwrap();
        a.bias = vec![9.0; 4];
        let mut b = a.clone();
        init_he_seeded(&mut a, 42);
        init_he_seeded(&mut b, 42);
        assert_eq!(a.kernel, b.kernel);
        assert!(a.bias.iter().all(|&x| x == 0.0));
        let mut c = a.clone();
        init_he_seeded(&mut c, 43);
        assert_ne!(a.kernel, c.kernel);
    }
}
