use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autograd::{
    conv1d_backward, conv1d_forward_traced, cross_entropy, init_he, init_xavier,
    sigmoid, Activation, ConvLayer, ConvTrace, FeatureMap, GradientReversal, ParamGrads,
};
use crate::error::{Result, VadError};
use crate::model::decision::{NON_SPEECH_CHANNEL, SPEECH_CHANNEL};
use crate::model::NetworkConfig;

/// Encoder, framing, decoder and (optionally) discriminator convolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct VadNetwork {
    config: NetworkConfig,
    eb: Vec<ConvLayer>,
    fb: ConvLayer,
    db: Vec<ConvLayer>,
    dn: Vec<ConvLayer>,
}

/// Every intermediate of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: FeatureMap,
    eb: Vec<ConvTrace>,
    fb: ConvTrace,
    db: Vec<ConvTrace>,
    dn: Vec<ConvTrace>,
}

impl ForwardTrace {
    /// Two-channel `(non_speech, speech)` decoder outputs per frame.
    pub fn vad_scores(&self) -> &FeatureMap {
        &self.db.last().expect("decoder has a head").output
    }

    /// `(N + 1)`-class noise-type posteriors per frame, if the discriminator exists.
    pub fn noise_posteriors(&self) -> Option<&FeatureMap> {
        self.dn.last().map(|t| &t.output)
    }

    /// Framing-block features shared by the decoder and the discriminator.
    pub fn features(&self) -> &FeatureMap {
        &self.fb.output
    }

    pub fn vad_frames(&self) -> usize {
        self.vad_scores().length()
    }

    pub fn noise_frames(&self) -> Option<usize> {
        self.noise_posteriors().map(FeatureMap::length)
    }
}

/// Output frame counts of the two heads for a given input length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameCounts {
    pub vad: usize,
    pub noise: Option<usize>,
}

/// Parameter gradients of every layer, ordered like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrads {
    pub eb: Vec<ParamGrads>,
    pub fb: ParamGrads,
    pub db: Vec<ParamGrads>,
    pub dn: Vec<ParamGrads>,
}

impl NetworkGrads {
    pub fn zeros_like(net: &VadNetwork) -> Self {
        NetworkGrads {
            eb: net.eb.iter().map(ParamGrads::zeros_like).collect(),
            fb: ParamGrads::zeros_like(&net.fb),
            db: net.db.iter().map(ParamGrads::zeros_like).collect(),
            dn: net.dn.iter().map(ParamGrads::zeros_like).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &NetworkGrads, scale: f64) {
        let pairs = self.blocks_mut().into_iter().zip(other.blocks());
        for (mine, theirs) in pairs {
            mine.add_scaled(theirs, scale);
        }
    }

    /// Encoder + framing gradients, the part shared by both losses.
    pub fn shared(&self) -> Vec<f64> {
        self.eb.iter().chain(std::iter::once(&self.fb)).flat_map(|g| g.iter()).collect()
    }

    pub fn blocks(&self) -> Vec<&ParamGrads> {
        self.eb.iter().chain(std::iter::once(&self.fb)).chain(&self.db).chain(&self.dn).collect()
    }

    fn blocks_mut(&mut self) -> Vec<&mut ParamGrads> {
        self.eb
            .iter_mut()
            .chain(std::iter::once(&mut self.fb))
            .chain(self.db.iter_mut())
            .chain(self.dn.iter_mut())
            .collect()
    }
}

/// Mean per-frame loss values from a backward pass.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Losses {
    pub vad: Option<f64>,
    pub noise: Option<f64>,
}

/// Which losses drive a backward pass and how they are scaled.
///
/// A weight of zero skips that loss. `alpha` scales the reversed gradient
/// the noise loss sends into the encoder and framing blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackwardSpec {
    pub vad_weight: f64,
    pub noise_weight: f64,
    pub alpha: f64,
}

impl BackwardSpec {
    pub fn joint(alpha: f64) -> Self {
        BackwardSpec {
            vad_weight: 1.0,
            noise_weight: 1.0,
            alpha,
        }
    }

    pub fn vad_only() -> Self {
        BackwardSpec {
            vad_weight: 1.0,
            noise_weight: 0.0,
            alpha: 0.0,
        }
    }

    pub fn noise_only(alpha: f64) -> Self {
        BackwardSpec {
            vad_weight: 0.0,
            noise_weight: 1.0,
            alpha,
        }
    }
}

/// Mean speech/non-speech loss for two-channel logits, with its gradient
/// w.r.t. the logits. The loss is the binary cross-entropy of the speech
/// channel's two-way softmax probability, evaluated on the logit margin
/// `m = z_speech - z_non_speech` so that it stays finite and keeps a
/// nonzero gradient when the softmax saturates.
pub fn vad_loss(logits: &FeatureMap, labels: &[u8]) -> Result<(f64, Vec<f64>)> {
    if logits.channels() != 2 {
        return Err(VadError::Config("VAD logits must have 2 channels".into()));
    }
    let frames = logits.length();
    if frames == 0 || labels.len() != frames {
        return Err(VadError::Alignment(format!("{frames} logit frames vs {} labels", labels.len())));
    }
    let softplus = |x: f64| x.max(0.0) + (-x.abs()).exp().ln_1p();
    let mut value = 0.0;
    let mut grad = vec![0.0; 2 * frames];
    for (t, &label) in labels.iter().enumerate() {
        let margin = logits.value(SPEECH_CHANNEL, t) - logits.value(NON_SPEECH_CHANNEL, t);
        let target = f64::from(label);
        value += if label == 1 { softplus(-margin) } else { softplus(margin) };
        let d = (sigmoid(margin) - target) / frames as f64;
        grad[SPEECH_CHANNEL * frames + t] = d;
        grad[NON_SPEECH_CHANNEL * frames + t] = -d;
    }
    Ok((value / frames as f64, grad))
}

impl VadNetwork {
    /// Builds the network and initializes it from `seed`.
    ///
    /// Leaky-ReLU layers get He init, the two heads Xavier init. The
    /// discriminator draws from its own RNG stream so that its presence
    /// never changes the other layers' initial weights.
    pub fn new(config: NetworkConfig, seed: u64) -> Result<Self> {
        let mut net = Self::zeroed(config)?;
        net.reinitialize(seed);
        Ok(net)
    }

    /// Builds the network with all parameters zero.
    pub fn zeroed(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let leaky = Activation::LeakyRelu {
            slope: config.leaky_slope,
        };
        let mut eb = Vec::with_capacity(4);
        let mut in_ch = 1;
        for (&k, &ch) in config.eb_kernels.iter().zip(&config.eb_channels) {
            eb.push(ConvLayer::new(in_ch, ch, k, 1, leaky)?);
            in_ch = ch;
        }
        let fb = ConvLayer::new(in_ch, config.fb_channels, config.fb_frame_len, config.fb_stride, leaky)?;

        let present: Vec<usize> = config.db_kernels.iter().copied().filter(|&k| k > 0).collect();
        let mut db = Vec::with_capacity(3);
        if present.is_empty() {
            // Decoder removed entirely: a pointwise readout adds no context.
            db.push(ConvLayer::new(config.fb_channels, 2, 1, 1, Activation::Identity)?);
        } else {
            let mut in_ch = config.fb_channels;
            for (i, &k) in present.iter().enumerate() {
                let head = i + 1 == present.len();
                let (out, act) = if head { (2, Activation::Identity) } else { (config.db_channels, leaky) };
                db.push(ConvLayer::new(in_ch, out, k, 1, act)?);
                in_ch = out;
            }
        }

        let mut dn = Vec::with_capacity(3);
        if config.with_discriminator {
            let mut in_ch = config.fb_channels;
            for (i, &k) in config.dn_kernels.iter().enumerate() {
                let head = i == 2;
                let (out, act) = if head {
                    (config.noise_classes(), Activation::SoftmaxOverChannels)
                } else {
                    (config.dn_channels, leaky)
                };
                dn.push(ConvLayer::new(in_ch, out, k, 1, act)?);
                in_ch = out;
            }
        }
        Ok(VadNetwork { config, eb, fb, db, dn })
    }

    pub fn reinitialize(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in self.eb.iter_mut().chain(std::iter::once(&mut self.fb)) {
            init_he(layer, &mut rng);
        }
        let n_db = self.db.len();
        for (i, layer) in self.db.iter_mut().enumerate() {
            if i + 1 == n_db {
                init_xavier(layer, &mut rng);
            } else {
                init_he(layer, &mut rng);
            }
        }
        let mut dn_rng = ChaCha8Rng::seed_from_u64(seed);
        dn_rng.set_stream(1);
        let n_dn = self.dn.len();
        for (i, layer) in self.dn.iter_mut().enumerate() {
            if i + 1 == n_dn {
                init_xavier(layer, &mut dn_rng);
            } else {
                init_he(layer, &mut dn_rng);
            }
        }
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// Sets the reversal scale used by [`backward_multitask`](Self::backward_multitask) callers.
    pub fn set_alpha(&mut self, alpha: f64) -> Result<()> {
        GradientReversal::new(alpha)?;
        self.config.alpha = alpha;
        Ok(())
    }

    pub fn encoder(&self) -> &[ConvLayer] {
        &self.eb
    }

    pub fn framing(&self) -> &ConvLayer {
        &self.fb
    }

    pub fn decoder(&self) -> &[ConvLayer] {
        &self.db
    }

    pub fn discriminator(&self) -> &[ConvLayer] {
        &self.dn
    }

    pub fn layers(&self) -> impl Iterator<Item = &ConvLayer> {
        self.eb.iter().chain(std::iter::once(&self.fb)).chain(&self.db).chain(&self.dn)
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut ConvLayer> {
        self.eb
            .iter_mut()
            .chain(std::iter::once(&mut self.fb))
            .chain(self.db.iter_mut())
            .chain(self.dn.iter_mut())
    }

    /// Stable names for every layer, matching [`layers`](Self::layers).
    pub fn layer_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.eb.len()).map(|i| format!("eb.{i}")).collect();
        names.push("fb".into());
        names.extend((0..self.db.len()).map(|i| format!("db.{i}")));
        names.extend((0..self.dn.len()).map(|i| format!("dn.{i}")));
        names
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().map(|l| l.kernel.len() + l.bias.len()).sum()
    }

    /// Frame counts after composing every layer's shrinkage.
    pub fn output_frames(&self, samples: usize) -> Result<FrameCounts> {
        let min = self.min_input_len();
        if samples < min {
            return Err(VadError::InsufficientContext {
                needed: min,
                got: samples,
                unit: "samples",
            });
        }
        let mut n = samples;
        for layer in &self.eb {
            n = layer.output_len(n)?;
        }
        let frames = self.fb.output_len(n)?;
        let mut vad = frames;
        for layer in &self.db {
            vad = layer.output_len(vad)?;
        }
        let noise = if self.dn.is_empty() {
            None
        } else {
            let mut m = frames;
            for layer in &self.dn {
                m = layer.output_len(m)?;
            }
            Some(m)
        };
        Ok(FrameCounts { vad, noise })
    }

    /// Shortest waveform that yields at least one frame from every head.
    pub fn min_input_len(&self) -> usize {
        let head_need = |layers: &[ConvLayer]| 1 + layers.iter().map(|l| l.kernel_size() - 1).sum::<usize>();
        let frames = head_need(&self.db).max(if self.dn.is_empty() { 1 } else { head_need(&self.dn) });
        let fb_in = (frames - 1) * self.fb.stride() + self.fb.kernel_size();
        fb_in + self.eb.iter().map(|l| l.kernel_size() - 1).sum::<usize>()
    }

    fn check_waveform(&self, waveform: &[f64]) -> Result<FeatureMap> {
        let min = self.min_input_len();
        if waveform.len() < min {
            return Err(VadError::InsufficientContext {
                needed: min,
                got: waveform.len(),
                unit: "samples",
            });
        }
        if waveform.iter().any(|v| !v.is_finite()) {
            return Err(VadError::Data("waveform contains non-finite samples".into()));
        }
        FeatureMap::from_signal(waveform)
    }

    /// Full forward pass through both heads, keeping everything needed for backward.
    pub fn forward(&self, waveform: &[f64]) -> Result<ForwardTrace> {
        let input = self.check_waveform(waveform)?;
        let mut eb: Vec<ConvTrace> = Vec::with_capacity(self.eb.len());
        for layer in &self.eb {
            let trace = conv1d_forward_traced(layer, eb.last().map_or(&input, |t| &t.output))?;
            eb.push(trace);
        }
        let fb = conv1d_forward_traced(&self.fb, &eb.last().expect("4 encoder layers").output)?;
        let db = Self::run_stack(&self.db, &fb.output)?;
        let dn = Self::run_stack(&self.dn, &fb.output)?;
        Ok(ForwardTrace { input, eb, fb, db, dn })
    }

    /// Inference-only pass: the two-channel VAD outputs, discriminator skipped.
    pub fn infer(&self, waveform: &[f64]) -> Result<FeatureMap> {
        let mut x = self.check_waveform(waveform)?;
        for layer in self.eb.iter().chain(std::iter::once(&self.fb)).chain(&self.db) {
            x = conv1d_forward_traced(layer, &x)?.output;
        }
        Ok(x)
    }

    fn run_stack(layers: &[ConvLayer], input: &FeatureMap) -> Result<Vec<ConvTrace>> {
        let mut traces: Vec<ConvTrace> = Vec::with_capacity(layers.len());
        for layer in layers {
            let trace = conv1d_forward_traced(layer, traces.last().map_or(input, |t| &t.output))?;
            traces.push(trace);
        }
        Ok(traces)
    }

    /// Backpropagates a stack, returning parameter grads and the input adjoint.
    fn backprop_stack(
        layers: &[ConvLayer],
        traces: &[ConvTrace],
        input: &FeatureMap,
        output_grad: Vec<f64>,
    ) -> Result<(Vec<ParamGrads>, Vec<f64>)> {
        let mut grads = vec![None; layers.len()];
        let mut upstream = output_grad;
        for i in (0..layers.len()).rev() {
            let layer_input = if i == 0 { input } else { &traces[i - 1].output };
            let g = conv1d_backward(&layers[i], layer_input, &traces[i], &upstream)?;
            grads[i] = Some(ParamGrads {
                kernel: g.kernel_grad,
                bias: g.bias_grad,
            });
            upstream = g.input_grad;
        }
        Ok((grads.into_iter().map(|g| g.expect("filled")).collect(), upstream))
    }

    /// Joint backward pass: the decoder sees only the VAD loss, the
    /// discriminator only the noise loss, and encoder/framing gradients are
    /// `∂L_y/∂θ − α·∂L_z/∂θ`.
    pub fn backward_multitask(
        &self,
        trace: &ForwardTrace,
        vad_labels: &[u8],
        noise_labels: &[usize],
        alpha: f64,
    ) -> Result<(NetworkGrads, Losses)> {
        self.backward(trace, vad_labels, noise_labels, BackwardSpec::joint(alpha))
    }

    /// Backward pass with explicit loss weights. Labels must already be
    /// aligned to each head's frame count.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        vad_labels: &[u8],
        noise_labels: &[usize],
        spec: BackwardSpec,
    ) -> Result<(NetworkGrads, Losses)> {
        let reversal = GradientReversal::new(spec.alpha)?;
        let mut grads = NetworkGrads::zeros_like(self);
        let mut losses = Losses::default();
        let feature_len = trace.fb.output.values().len();
        let mut feature_grad = vec![0.0; feature_len];

        if spec.vad_weight != 0.0 {
            let logits = trace.vad_scores();
            if vad_labels.len() != logits.length() {
                return Err(VadError::Alignment(format!(
                    "{} VAD labels for {} decoder frames",
                    vad_labels.len(),
                    logits.length()
                )));
            }
            let (value, mut g) = vad_loss(logits, vad_labels)?;
            g.iter_mut().for_each(|v| *v *= spec.vad_weight);
            losses.vad = Some(value);
            let (db_grads, into_features) = Self::backprop_stack(&self.db, &trace.db, &trace.fb.output, g)?;
            grads.db = db_grads;
            feature_grad = into_features;
        }

        if spec.noise_weight != 0.0 && !self.dn.is_empty() {
            let posteriors = trace.noise_posteriors().expect("discriminator present");
            if noise_labels.len() != posteriors.length() {
                return Err(VadError::Alignment(format!(
                    "{} noise labels for {} discriminator frames",
                    noise_labels.len(),
                    posteriors.length()
                )));
            }
            let ce = cross_entropy(posteriors.values(), posteriors.channels(), noise_labels)?;
            losses.noise = Some(ce.value);
            let g: Vec<f64> = ce.grad.iter().map(|v| v * spec.noise_weight).collect();
            let (dn_grads, into_features) = Self::backprop_stack(&self.dn, &trace.dn, &trace.fb.output, g)?;
            grads.dn = dn_grads;
            if reversal.alpha() != 0.0 {
                for (f, r) in feature_grad.iter_mut().zip(reversal.backward(&into_features)) {
                    *f += r;
                }
            }
        }

        // Framing and encoder see the merged feature gradient.
        let fb_input = &trace.eb.last().expect("encoder").output;
        let fb = conv1d_backward(&self.fb, fb_input, &trace.fb, &feature_grad)?;
        grads.fb = ParamGrads {
            kernel: fb.kernel_grad,
            bias: fb.bias_grad,
        };
        let (eb_grads, _) = Self::backprop_stack(&self.eb, &trace.eb, &trace.input, fb.input_grad)?;
        grads.eb = eb_grads;
        Ok((grads, losses))
    }

    /// Adds `grads` into every layer's gradient accumulators.
    pub fn accumulate(&mut self, grads: &NetworkGrads) {
        let blocks = grads.blocks();
        for (layer, g) in self.layers_mut().zip(blocks) {
            layer.accumulate(g);
        }
    }

    pub fn zero_grad(&mut self) {
        self.layers_mut().for_each(ConvLayer::zero_grad);
    }

    /// `(parameter, accumulated gradient)` pairs in a fixed order.
    pub fn param_slots(&mut self) -> Vec<(&mut [f64], &[f64])> {
        self.layers_mut().flat_map(|l| l.param_slots()).collect()
    }

    /// Loss values only, without gradients. Used by finite-difference checks.
    pub fn loss(&self, waveform: &[f64], vad_labels: &[u8], noise_labels: &[usize], spec: BackwardSpec) -> Result<f64> {
        let trace = self.forward(waveform)?;
        let mut total = 0.0;
        if spec.vad_weight != 0.0 {
            total += spec.vad_weight * vad_loss(trace.vad_scores(), vad_labels)?.0;
        }
        if spec.noise_weight != 0.0 {
            if let Some(p) = trace.noise_posteriors() {
                total += spec.noise_weight * cross_entropy(p.values(), p.channels(), noise_labels)?.value;
            }
        }
        Ok(total)
    }
}
