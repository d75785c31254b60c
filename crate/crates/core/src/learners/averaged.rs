use super::ModelParams;

/// Running elementwise sum of parameter snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedParams {
    sum: ModelParams,
    snapshots: u64,
}

impl AveragedParams {
    /// Empty accumulator shaped like `shape`.
    pub fn new(shape: &ModelParams) -> Self {
        let zero = |v: &Option<Vec<f64>>| v.as_ref().map(|v| vec![0.0; v.len()]);
        AveragedParams {
            sum: ModelParams {
                variant: shape.variant,
                w: vec![0.0; shape.dim()],
                b: 0.0,
                alpha: zero(&shape.alpha),
                beta: zero(&shape.beta),
            },
            snapshots: 0,
        }
    }

    pub(crate) fn from_parts(sum: ModelParams, snapshots: u64) -> Self {
        AveragedParams { sum, snapshots }
    }

    pub fn snapshots(&self) -> u64 {
        self.snapshots
    }

    pub fn sum(&self) -> &ModelParams {
        &self.sum
    }

    pub fn accumulate(&mut self, p: &ModelParams) {
        fn add(acc: &mut [f64], v: &[f64]) {
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
        }
        add(&mut self.sum.w, &p.w);
        self.sum.b += p.b;
        if let (Some(acc), Some(v)) = (&mut self.sum.alpha, &p.alpha) {
            add(acc, v);
        }
        if let (Some(acc), Some(v)) = (&mut self.sum.beta, &p.beta) {
            add(acc, v);
        }
        self.snapshots += 1;
    }

    /// Arithmetic mean of the snapshots, or `None` before the first one.
    pub fn mean(&self) -> Option<ModelParams> {
        if self.snapshots == 0 {
            return None;
        }
        let n = self.snapshots as f64;
        let div = |v: &[f64]| v.iter().map(|x| x / n).collect::<Vec<_>>();
        Some(ModelParams {
            variant: self.sum.variant,
            w: div(&self.sum.w),
            b: self.sum.b / n,
            alpha: self.sum.alpha.as_deref().map(div),
            beta: self.sum.beta.as_deref().map(div),
        })
    }
}
