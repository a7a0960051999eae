use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataio::{Dataset, FeatureColumn, Response};
use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionModelParams {
    pub n: usize,
    /// Number of categories; must be even.
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
}

fn category_labels(k: usize) -> Vec<String> {
    (1..=k).map(|c| format!("c{c}")).collect()
}

/// `y = α·(𝕀[x1 > 0]·𝕀[x2 ∈ first half] + 𝕀[x1 ≤ 0]·𝕀[x2 ∈ second half]) + ε`
/// with `x1 ~ N(0, 1)`, `x2` uniform over `c1..cK` and `ε ~ N(0, 1)`.
pub fn gen_interaction_model(p: &InteractionModelParams) -> Result<Dataset> {
    if p.k < 2 || p.k % 2 != 0 {
        return invalid(format!("category count must be even and at least 2, got {}", p.k));
    }
    if !(p.alpha.is_finite() && p.alpha >= 0.0) {
        return invalid("alpha must be finite and non-negative");
    }
    let mut rng = rng_from_seed(p.seed);
    let half = (p.k / 2) as u32;
    let (mut x1, mut x2, mut y) = (Vec::with_capacity(p.n), Vec::with_capacity(p.n), Vec::with_capacity(p.n));
    for _ in 0..p.n {
        let a: f64 = rng.sample(StandardNormal);
        let c = rng.random_range(0..p.k as u32);
        let eps: f64 = rng.sample(StandardNormal);
        let signal = if a > 0.0 { c < half } else { c >= half };
        x1.push(a);
        x2.push(c);
        y.push(p.alpha * signal as u8 as f64 + eps);
    }
    Dataset::new(
        vec![
            FeatureColumn::numeric("x1", x1)?,
            FeatureColumn::categorical("x2", x2, category_labels(p.k))?,
        ],
        Response::regression("y", y),
    )
}

/// `y = x1 + ε` with `x1, ε ~ N(0, 1)`, plus a categorical `x2` uniform over
/// `K` categories and independent of everything else.
pub fn gen_uninformative(n: usize, k: usize, seed: u64) -> Result<Dataset> {
    if n < 2 || k < 2 {
        return invalid("gen_uninformative needs n >= 2 and K >= 2");
    }
    let mut rng = rng_from_seed(seed);
    let (mut x1, mut x2, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let a: f64 = rng.sample(StandardNormal);
        let c = rng.random_range(0..k as u32);
        let eps: f64 = rng.sample(StandardNormal);
        x1.push(a);
        x2.push(c);
        y.push(a + eps);
    }
    Dataset::new(
        vec![
            FeatureColumn::numeric("x1", x1)?,
            FeatureColumn::categorical("x2", x2, category_labels(k))?,
        ],
        Response::regression("y", y),
    )
}
