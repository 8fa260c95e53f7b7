//! Linear soft-margin SVM trained by stochastic subgradient descent on the
//! L2-regularized hinge loss, with a sigmoid fitted to held-out margins for
//! class probabilities.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_training_set, LearnError, ProbEstimate};
use crate::dataset::Label;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    /// Share of each class held out to fit the probability sigmoid.
    pub calibration_fraction: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { lambda: 1e-3, epochs: 200, calibration_fraction: 0.2 }
    }
}

/// `p(trustworthy | margin m) = 1 / (1 + exp(a * m + b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigmoid {
    pub a: f64,
    pub b: f64,
}

impl Sigmoid {
    pub fn probability(&self, margin: f64) -> f64 {
        let z = self.a * margin + self.b;
        if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub params: SvmParams,
    pub seed: u64,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub calibration: Sigmoid,
}

impl LinearModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        margin(&self.weights, self.bias, x)
    }

    pub fn proba(&self, x: &[f64]) -> ProbEstimate {
        ProbEstimate::new(self.calibration.probability(self.margin(x)))
    }
}

fn margin(w: &[f64], b: f64, x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b
}

fn sign(label: Label) -> f64 {
    match label {
        Label::Trustworthy => 1.0,
        Label::Untrustworthy => -1.0,
    }
}

/// Subgradient descent with step `1 / (lambda * t)`. The bias is treated as
/// the weight of a constant feature. After each step the iterate is
/// projected onto the ball of radius `1 / sqrt(lambda)`, which contains the
/// optimum.
fn fit_hyperplane<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[Label],
    members: &[usize],
    width: usize,
    params: &SvmParams,
    rng_seed: u64,
) -> (Vec<f64>, f64) {
    let lambda = params.lambda;
    let radius_sq = 1.0 / lambda;
    let mut w = vec![0.0; width];
    let mut b = 0.0;
    let mut order = members.to_vec();
    let mut rng = seed::rng(rng_seed, 0x5F4D);
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = rows[i].as_ref();
            let y = sign(labels[i]);
            let violated = y * margin(&w, b, x) < 1.0;
            let decay = 1.0 - eta * lambda;
            for wj in w.iter_mut() {
                *wj *= decay;
            }
            b *= decay;
            if violated {
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += eta * y * xj;
                }
                b += eta * y;
            }
            let norm_sq = w.iter().map(|v| v * v).sum::<f64>() + b * b;
            if norm_sq > radius_sq {
                let shrink = (radius_sq / norm_sq).sqrt();
                for wj in w.iter_mut() {
                    *wj *= shrink;
                }
                b *= shrink;
            }
        }
    }
    (w, b)
}

pub fn train_svm<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[Label],
    params: &SvmParams,
    rng_seed: u64,
) -> Result<LinearModel, LearnError> {
    if params.lambda.is_nan()
        || params.lambda <= 0.0
        || params.epochs == 0
        || !(0.0..1.0).contains(&params.calibration_fraction)
    {
        return Err(LearnError::InvalidParams(format!("{params:?}")));
    }
    let width = check_training_set(rows, labels)?;

    // Stratified hold-out: the same share of each class, keeping at least
    // one row of every class on the fitting side.
    let mut rng = seed::rng(rng_seed, 0xCA1B);
    let mut fit_members = Vec::new();
    let mut held_out = Vec::new();
    for class in [Label::Untrustworthy, Label::Trustworthy] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let n_hold = ((members.len() as f64 * params.calibration_fraction).round() as usize).min(members.len() - 1);
        held_out.extend_from_slice(&members[..n_hold]);
        fit_members.extend_from_slice(&members[n_hold..]);
    }
    fit_members.sort_unstable();
    held_out.sort_unstable();
    let calibration_rows = if held_out.is_empty() { &fit_members } else { &held_out };

    let (w, b) = fit_hyperplane(rows, labels, &fit_members, width, params, seed::mix(rng_seed, 1));
    let margins: Vec<f64> = calibration_rows.iter().map(|&i| margin(&w, b, rows[i].as_ref())).collect();
    let targets: Vec<Label> = calibration_rows.iter().map(|&i| labels[i]).collect();
    let calibration = fit_sigmoid(&margins, &targets);

    let all: Vec<usize> = (0..labels.len()).collect();
    let (weights, bias) = fit_hyperplane(rows, labels, &all, width, params, seed::mix(rng_seed, 2));
    Ok(LinearModel { params: params.clone(), seed: rng_seed, weights, bias, calibration })
}

/// Maximum-likelihood sigmoid fit of labels on margins: Newton's method with
/// backtracking line search on regularized targets
/// `(n+ + 1) / (n+ + 2)` and `1 / (n- + 2)`.
pub fn fit_sigmoid(margins: &[f64], labels: &[Label]) -> Sigmoid {
    let n_pos = labels.iter().filter(|l| **l == Label::Trustworthy).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = labels.iter().map(|l| if *l == Label::Trustworthy { hi } else { lo }).collect();

    let objective = |a: f64, b: f64| -> f64 {
        margins
            .iter()
            .zip(&targets)
            .map(|(&m, &t)| {
                let z = m * a + b;
                if z >= 0.0 {
                    t * z + (1.0 + (-z).exp()).ln()
                } else {
                    (t - 1.0) * z + (1.0 + z.exp()).ln()
                }
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut value = objective(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
        for (&m, &t) in margins.iter().zip(&targets) {
            let z = m * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += m * m * d2;
            h22 += d2;
            h21 += m * d2;
            let d1 = t - p;
            g1 += m * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let slope = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let candidate = objective(na, nb);
            if candidate < value + 1e-4 * step * slope {
                a = na;
                b = nb;
                value = candidate;
                break;
            }
            step /= 2.0;
        }
        if step < 1e-10 {
            break;
        }
    }
    Sigmoid { a, b }
}
