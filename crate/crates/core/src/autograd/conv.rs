use crate::autograd::{Activation, FeatureMap};
use crate::error::{Result, VadError};

/// Valid (unpadded) 1-D convolution layer in cross-correlation orientation.
///
/// `kernel` is laid out `[out_channels][in_channels][kernel_size]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    in_channels: usize,
    out_channels: usize,
    kernel_size: usize,
    stride: usize,
    activation: Activation,
    pub kernel: Vec<f64>,
    pub bias: Vec<f64>,
    pub kernel_grad: Vec<f64>,
    pub bias_grad: Vec<f64>,
}

/// Values kept from a forward pass so the backward pass needs no recomputation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvTrace {
    pub pre_activation: Vec<f64>,
    pub output: FeatureMap,
}

/// Adjoints produced by [`conv1d_backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub input_grad: Vec<f64>,
    pub kernel_grad: Vec<f64>,
    pub bias_grad: Vec<f64>,
}

/// Parameter gradients of one layer, detached from the input adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub kernel: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(layer: &ConvLayer) -> Self {
        ParamGrads {
            kernel: vec![0.0; layer.kernel.len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }

    pub fn add_scaled(&mut self, other: &ParamGrads, scale: f64) {
        for (a, b) in self.kernel.iter_mut().zip(&other.kernel) {
            *a += scale * b;
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += scale * b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.kernel.iter().chain(&self.bias).copied()
    }
}

impl ConvLayer {
    /// Creates a layer with all parameters zero.
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        stride: usize,
        activation: Activation,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 {
            return Err(VadError::config("convolution channels must be positive"));
        }
        if kernel_size == 0 {
            return Err(VadError::config("kernel size must be at least 1"));
        }
        if stride == 0 {
            return Err(VadError::config("stride must be at least 1"));
        }
        let n = out_channels * in_channels * kernel_size;
        Ok(ConvLayer {
            in_channels,
            out_channels,
            kernel_size,
            stride,
            activation,
            kernel: vec![0.0; n],
            bias: vec![0.0; out_channels],
            kernel_grad: vec![0.0; n],
            bias_grad: vec![0.0; out_channels],
        })
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn fan_in(&self) -> usize {
        self.in_channels * self.kernel_size
    }

    pub fn fan_out(&self) -> usize {
        self.out_channels * self.kernel_size
    }

    pub fn weight(&self, out: usize, inp: usize, j: usize) -> f64 {
        self.kernel[(out * self.in_channels + inp) * self.kernel_size + j]
    }

    /// `floor((n - k) / stride) + 1`, or an error when `n < k`.
    pub fn output_len(&self, input_len: usize) -> Result<usize> {
        if input_len < self.kernel_size {
            return Err(VadError::InsufficientContext {
                needed: self.kernel_size,
                got: input_len,
                unit: "time steps",
            });
        }
        Ok((input_len - self.kernel_size) / self.stride + 1)
    }

    pub fn zero_grad(&mut self) {
        self.kernel_grad.iter_mut().for_each(|g| *g = 0.0);
        self.bias_grad.iter_mut().for_each(|g| *g = 0.0);
    }

    /// Adds parameter gradients into the layer's accumulators.
    pub fn accumulate(&mut self, grads: &ParamGrads) {
        for (a, b) in self.kernel_grad.iter_mut().zip(&grads.kernel) {
            *a += b;
        }
        for (a, b) in self.bias_grad.iter_mut().zip(&grads.bias) {
            *a += b;
        }
    }

    /// Mutable parameter tensors paired with their accumulated gradients.
    pub fn param_slots(&mut self) -> [(&mut [f64], &[f64]); 2] {
        [
            (&mut self.kernel[..], &self.kernel_grad[..]),
            (&mut self.bias[..], &self.bias_grad[..]),
        ]
    }

    fn check_input(&self, input: &FeatureMap) -> Result<usize> {
        if input.channels() != self.in_channels {
            return Err(VadError::config(format!(
                "layer expects {} input channels, got {}",
                self.in_channels,
                input.channels()
            )));
        }
        self.output_len(input.length())
    }
}

/// Forward pass returning only the activated output.
pub fn conv1d_forward(layer: &ConvLayer, input: &FeatureMap) -> Result<FeatureMap> {
    Ok(conv1d_forward_traced(layer, input)?.output)
}

/// Forward pass keeping the pre-activation for [`conv1d_backward`].
pub fn conv1d_forward_traced(layer: &ConvLayer, input: &FeatureMap) -> Result<ConvTrace> {
    let out_len = layer.check_input(input)?;
    let k = layer.kernel_size;
    let stride = layer.stride;
    let mut pre = vec![0.0; layer.out_channels * out_len];
    for o in 0..layer.out_channels {
        let acc = &mut pre[o * out_len..(o + 1) * out_len];
        acc.iter_mut().for_each(|v| *v = layer.bias[o]);
        for i in 0..layer.in_channels {
            let x = input.row(i);
            let w = &layer.kernel[(o * layer.in_channels + i) * k..(o * layer.in_channels + i + 1) * k];
            for (j, &wj) in w.iter().enumerate() {
                if stride == 1 {
                    for (a, &xv) in acc.iter_mut().zip(&x[j..j + out_len]) {
                        *a += wj * xv;
                    }
                } else {
                    for (t, a) in acc.iter_mut().enumerate() {
                        *a += wj * x[t * stride + j];
                    }
                }
            }
        }
    }
    let out = layer.activation.apply(&pre, layer.out_channels, out_len);
    Ok(ConvTrace {
        pre_activation: pre,
        output: FeatureMap::from_values(layer.out_channels, out_len, out)?,
    })
}

/// Exact adjoint of [`conv1d_forward_traced`], activation derivative included.
pub fn conv1d_backward(
    layer: &ConvLayer,
    input: &FeatureMap,
    trace: &ConvTrace,
    output_grad: &[f64],
) -> Result<ConvGrads> {
    let out_len = layer.check_input(input)?;
    let expected = layer.out_channels * out_len;
    if output_grad.len() != expected || trace.pre_activation.len() != expected {
        return Err(VadError::config(format!(
            "output gradient has {} elements, expected {}x{}",
            output_grad.len(),
            layer.out_channels,
            out_len
        )));
    }
    let grad_pre = layer.activation.backward(
        &trace.pre_activation,
        trace.output.values(),
        output_grad,
        layer.out_channels,
        out_len,
    );

    let k = layer.kernel_size;
    let stride = layer.stride;
    let n = input.length();
    let mut input_grad = vec![0.0; layer.in_channels * n];
    let mut kernel_grad = vec![0.0; layer.kernel.len()];
    let mut bias_grad = vec![0.0; layer.out_channels];

    for o in 0..layer.out_channels {
        let g = &grad_pre[o * out_len..(o + 1) * out_len];
        bias_grad[o] = g.iter().sum();
        for i in 0..layer.in_channels {
            let x = input.row(i);
            let base = (o * layer.in_channels + i) * k;
            let gx = &mut input_grad[i * n..(i + 1) * n];
            for j in 0..k {
                let w = layer.kernel[base + j];
                if stride == 1 {
                    kernel_grad[base + j] = g.iter().zip(&x[j..j + out_len]).map(|(a, b)| a * b).sum();
                    for (d, &gv) in gx[j..j + out_len].iter_mut().zip(g) {
                        *d += w * gv;
                    }
                } else {
                    let mut s = 0.0;
                    for (t, &gv) in g.iter().enumerate() {
                        s += gv * x[t * stride + j];
                        gx[t * stride + j] += w * gv;
                    }
                    kernel_grad[base + j] = s;
                }
            }
        }
    }
    Ok(ConvGrads {
        input_grad,
        kernel_grad,
        bias_grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_layer(kernel: Vec<f64>, bias: f64) -> ConvLayer {
        let mut layer = ConvLayer::new(1, 1, kernel.len(), 1, Activation::Identity).unwrap();
        layer.kernel = kernel;
        layer.bias = vec![bias];
        layer
    }

    #[test]
    fn hand_evaluated_convolution() {
        let layer = identity_layer(vec![1.0, 0.0], 0.0);
        let x = FeatureMap::from_signal(&[1.0, 2.0, 3.0]).unwrap();
        let y = conv1d_forward(&layer, &x).unwrap();
        assert_eq!(y.values(), &[1.0, 2.0]);
    }

    #[test]
    fn zero_kernel_outputs_bias() {
        let layer = identity_layer(vec![0.0; 4], 5.0);
        let x = FeatureMap::from_signal(&[0.3, -1.0, 2.0, 7.0, 1.0, 0.5]).unwrap();
        let y = conv1d_forward(&layer, &x).unwrap();
        assert!(y.values().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn output_length_shrinks_by_kernel() {
        let layer = ConvLayer::new(1, 1, 55, 1, Activation::Identity).unwrap();
        let x = FeatureMap::zeros(1, 1000);
        assert_eq!(conv1d_forward(&layer, &x).unwrap().length(), 946);
    }

    #[test]
    fn strided_output_length() {
        let layer = ConvLayer::new(1, 1, 160, 80, Activation::Identity).unwrap();
        assert_eq!(layer.output_len(800).unwrap(), 9);
        assert_eq!(layer.output_len(879).unwrap(), 9);
        assert_eq!(layer.output_len(880).unwrap(), 10);
    }

    #[test]
    fn kernel_grad_sums_shifted_inputs() {
        let layer = identity_layer(vec![1.0, 0.0], 0.0);
        let x = FeatureMap::from_signal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let trace = conv1d_forward_traced(&layer, &x).unwrap();
        let g = conv1d_backward(&layer, &x, &trace, &[1.0; 3]).unwrap();
        assert_eq!(g.kernel_grad, vec![1.0 + 2.0 + 3.0, 2.0 + 3.0 + 4.0]);
        assert_eq!(g.bias_grad, vec![3.0]);
        assert_eq!(g.input_grad, vec![1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut layer = ConvLayer::new(2, 3, 3, 1, Activation::leaky()).unwrap();
        layer.kernel.iter_mut().enumerate().for_each(|(i, w)| *w = (i as f64 * 0.37).sin());
        let x = FeatureMap::from_values(2, 6, (0..12).map(|v| v as f64 * 0.1 - 0.4).collect()).unwrap();
        let trace = conv1d_forward_traced(&layer, &x).unwrap();
        let g = conv1d_backward(&layer, &x, &trace, &vec![0.0; 12]).unwrap();
        assert!(g.input_grad.iter().chain(&g.kernel_grad).chain(&g.bias_grad).all(|&v| v == 0.0));
    }

    #[test]
    fn errors_on_bad_inputs() {
        let layer = ConvLayer::new(2, 1, 5, 1, Activation::Identity).unwrap();
        assert!(matches!(
            conv1d_forward(&layer, &FeatureMap::zeros(1, 10)),
            Err(VadError::Config(_))
        ));
        assert!(matches!(
            conv1d_forward(&layer, &FeatureMap::zeros(2, 4)),
            Err(VadError::InsufficientContext { needed: 5, got: 4, .. })
        ));
        assert!(ConvLayer::new(1, 1, 0, 1, Activation::Identity).is_err());
        assert!(ConvLayer::new(1, 1, 1, 0, Activation::Identity).is_err());
        let x = FeatureMap::zeros(2, 8);
        let trace = conv1d_forward_traced(&layer, &x).unwrap();
        assert!(conv1d_backward(&layer, &x, &trace, &[0.0; 3]).is_err());
    }

    #[test]
    fn output_length_exhaustive() {
        for k in 1..=60 {
            for stride in [1usize, 2, 3, 80] {
                let layer = ConvLayer::new(1, 1, k, stride, Activation::Identity).unwrap();
                for n in k..=200 {
                    let y = conv1d_forward(&layer, &FeatureMap::zeros(1, n)).unwrap();
                    assert_eq!(y.length(), (n - k) / stride + 1);
                    if stride == 1 {
                        assert_eq!(y.length(), n - k + 1);
                    }
                }
            }
        }
    }
}
