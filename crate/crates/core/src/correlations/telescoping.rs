use serde::{Deserialize, Serialize};

use super::CorrelationError;
use crate::dynamics::DynamicsError;
use crate::ensemble::{run_batches, BATCHES};
use crate::stats::{batch_mean_se, complex_batch_se};
use crate::Complex64;

/// Multiple-correlation diagnostics of block variables `w_1..w_k`, all from
/// the same samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelescopingReport {
    pub k: usize,
    pub samples: usize,
    /// `<w_r>`.
    pub means: Vec<Complex64>,
    /// `<w_1 ... w_k> - <w_1> ... <w_k>`.
    pub direct: Complex64,
    pub direct_se: f64,
    /// `|<w_1 . W_r o F^{p+q}> - <w_1><W_r>|` with `W_r = w_1 ... w_{r-1}`,
    /// for `r = 2..=k` (entry `r - 2`). `W_r o F^{p+q} = w_2 ... w_r`.
    pub gaps: Vec<f64>,
    pub gap_errors: Vec<f64>,
    pub gap_sum: f64,
    pub gap_sum_se: f64,
    /// `sum_{r<k} <w_1>...<w_{r-1}> [<w_r...w_k> - <w_r><w_{r+1}...w_k>]`.
    pub telescoped: Complex64,
    /// `|direct - telescoped|`; zero up to round-off since both are built
    /// from the same sample means.
    pub identity_residual: f64,
}

#[derive(Clone, Debug)]
struct Sums {
    n: f64,
    single: Vec<Complex64>,
    /// `w_1 ... w_r`
    prefix: Vec<Complex64>,
    /// `w_2 ... w_r`, entry 0 unused
    shifted: Vec<Complex64>,
    /// `w_r ... w_k`
    suffix: Vec<Complex64>,
}

impl Sums {
    fn new(k: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); k];
        Self {
            n: 0.0,
            single: z.clone(),
            prefix: z.clone(),
            shifted: z.clone(),
            suffix: z,
        }
    }

    fn push(&mut self, w: &[Complex64]) {
        let k = w.len();
        self.n += 1.0;
        let mut pre = Complex64::new(1.0, 0.0);
        let mut shifted = Complex64::new(1.0, 0.0);
        for r in 0..k {
            self.single[r] += w[r];
            pre *= w[r];
            self.prefix[r] += pre;
            if r > 0 {
                shifted *= w[r];
                self.shifted[r] += shifted;
            }
        }
        let mut suf = Complex64::new(1.0, 0.0);
        for r in (0..k).rev() {
            suf *= w[r];
            self.suffix[r] += suf;
        }
    }

    fn add(&mut self, o: &Self) {
        self.n += o.n;
        for (a, b) in [
            (&mut self.single, &o.single),
            (&mut self.prefix, &o.prefix),
            (&mut self.shifted, &o.shifted),
            (&mut self.suffix, &o.suffix),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn mean(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().map(|x| x / self.n).collect()
    }

    /// `(direct, complex gaps, telescoped)`.
    fn estimates(&self) -> (Complex64, Vec<Complex64>, Complex64) {
        let k = self.single.len();
        let m = self.mean(&self.single);
        let pre = self.mean(&self.prefix);
        let sh = self.mean(&self.shifted);
        let suf = self.mean(&self.suffix);
        let direct = pre[k - 1] - m.iter().product::<Complex64>();
        let gaps = (1..k).map(|r| pre[r] - m[0] * sh[r]).collect();
        let mut telescoped = Complex64::new(0.0, 0.0);
        let mut lead = Complex64::new(1.0, 0.0);
        for r in 0..k - 1 {
            telescoped += lead * (suf[r] - m[r] * suf[r + 1]);
            lead *= m[r];
        }
        (direct, gaps, telescoped)
    }
}

/// Accumulates block variables `w_1..w_k` over `budget` samples;
/// `blocks(i)` returns the block values of sample `i`.
pub fn telescoping_gap<F>(budget: usize, blocks: F) -> Result<TelescopingReport, CorrelationError>
where
    F: Fn(u64) -> Result<Vec<Complex64>, DynamicsError> + Sync,
{
    let mut reports = telescoping_gaps(budget, 1, |i| blocks(i).map(|w| vec![w]))?;
    Ok(reports.remove(0))
}

/// [`telescoping_gap`] for several families of block variables sharing each
/// sample, e.g. one per value of `t`. `blocks(i)` returns one vector per
/// channel.
pub fn telescoping_gaps<F>(
    budget: usize,
    channels: usize,
    blocks: F,
) -> Result<Vec<TelescopingReport>, CorrelationError>
where
    F: Fn(u64) -> Result<Vec<Vec<Complex64>>, DynamicsError> + Sync,
{
    if budget < 2 * BATCHES {
        return Err(CorrelationError::Budget(format!(
            "budget {budget} below {}",
            2 * BATCHES
        )));
    }
    let batches = run_batches(budget, BATCHES, |_, range| {
        let mut sums: Vec<Sums> = Vec::new();
        for i in range {
            let ws = blocks(i as u64)?;
            if ws.len() != channels {
                return Err(CorrelationError::Invalid(format!(
                    "expected {channels} channels, got {}",
                    ws.len()
                )));
            }
            if sums.is_empty() {
                sums = ws.iter().map(|w| Sums::new(w.len())).collect();
            }
            for (s, w) in sums.iter_mut().zip(&ws) {
                if w.len() < 2 {
                    return Err(CorrelationError::Invalid(format!(
                        "need at least two blocks, got {}",
                        w.len()
                    )));
                }
                if s.single.len() != w.len() {
                    return Err(CorrelationError::Invalid(
                        "block count changed between samples".into(),
                    ));
                }
                s.push(w);
            }
        }
        Ok(sums)
    })?;
    Ok((0..channels)
        .map(|c| report(budget, batches.iter().map(|b| &b[c]).collect()))
        .collect())
}

fn report(budget: usize, batches: Vec<&Sums>) -> TelescopingReport {
    let k = batches[0].single.len();
    let mut total = Sums::new(k);
    for b in &batches {
        total.add(b);
    }
    let (direct, gaps, telescoped) = total.estimates();
    let per_batch: Vec<_> = batches.iter().map(|b| b.estimates()).collect();
    let direct_se = complex_batch_se(&per_batch.iter().map(|e| e.0).collect::<Vec<_>>());
    let gap_errors = (0..k - 1)
        .map(|r| complex_batch_se(&per_batch.iter().map(|e| e.1[r]).collect::<Vec<_>>()))
        .collect();
    let sums_per_batch: Vec<f64> = per_batch
        .iter()
        .map(|e| e.1.iter().map(|g| g.norm()).sum())
        .collect();
    let gaps: Vec<f64> = gaps.iter().map(|g| g.norm()).collect();
    TelescopingReport {
        k,
        samples: budget,
        means: total.mean(&total.single),
        direct,
        direct_se,
        gap_sum: gaps.iter().sum(),
        gap_sum_se: batch_mean_se(&sums_per_batch).1,
        gaps,
        gap_errors,
        identity_residual: (direct - telescoped).norm(),
        telescoped,
    }
}
