use serde::{Deserialize, Serialize};

use super::CltError;

/// Powers within this distance of an integer are taken as that integer, so
/// `floor(n^a)` is stable under round-off.
const SNAP: f64 = 1e-9;

fn floor_power(n: usize, e: f64) -> usize {
    let v = (n as f64).powf(e);
    let r = v.round();
    if (v - r).abs() < SNAP {
        r as usize
    } else {
        v.floor() as usize
    }
}

/// Alternating long blocks `p = floor(n^a)` and gaps `q = floor(n^b)` over
/// `[0, n)`, with `k = floor(n / (p + q))` pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinSchedule {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub p: usize,
    pub q: usize,
    pub k: usize,
}

impl BernsteinSchedule {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self, CltError> {
        if !(0.0 < b && b < a && a < 0.5) {
            return Err(CltError::Schedule(format!(
                "need 0 < b < a < 1/2, got a = {a}, b = {b}"
            )));
        }
        let p = floor_power(n, a);
        let q = floor_power(n, b);
        if p == 0 || q == 0 {
            return Err(CltError::Schedule(format!("n = {n} too small: p = {p}, q = {q}")));
        }
        let k = n / (p + q);
        if k < 2 {
            return Err(CltError::Schedule(format!("n = {n} too small: k = {k} < 2")));
        }
        Ok(Self { n, a, b, p, q, k })
    }

    /// `k (p + q) / n`
    pub fn covered_fraction(&self) -> f64 {
        (self.k * (self.p + self.q)) as f64 / self.n as f64
    }

    /// `k p / n`, the share of `[0, n)` inside long blocks. Unlike
    /// [`covered_fraction`](Self::covered_fraction), which jitters with the
    /// remainder `n - k (p + q) < p + q`, it increases along decades of `n`.
    pub fn long_block_fraction(&self) -> f64 {
        (self.k * self.p) as f64 / self.n as f64
    }

    /// `(p + q) / p`, which tends to 1.
    pub fn block_ratio(&self) -> f64 {
        (self.p + self.q) as f64 / self.p as f64
    }

    /// First time of long block `r` (1-based).
    pub fn block_start(&self, r: usize) -> usize {
        (self.p + self.q) * (r - 1)
    }
}
