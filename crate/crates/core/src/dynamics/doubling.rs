use rand::RngCore;
use serde_json::json;

use super::interval::{Branch, BranchFormula, IntervalMap};
use super::{DynamicalSystem, DynamicsError, FirstCoordinate, SystemDescriptor};

const TWO_POW_NEG_64: f64 = 1.0 / 18_446_744_073_709_551_616.0;
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// A point of `[0, 1)` stored as its binary digits.
///
/// The doubling map shifts the expansion by one digit, so orbits are exact:
/// `F^j x` is read off the digits starting at position `j`. A finite digit
/// string is a dyadic rational whose orbit eventually reaches 0, exactly as
/// the real map does. Random points carry enough digits for the requested
/// horizon plus one 64-bit window.
///
/// `flipped` marks that the stored digits are the complement of the true
/// digits, which is how the tent map acts on expansions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryExpansion {
    words: Vec<u64>,
    offset: usize,
    flipped: bool,
}

impl BinaryExpansion {
    /// Exact binary expansion of a double in `[0, 1)`.
    pub fn from_f64(x: f64) -> Result<Self, DynamicsError> {
        if !(0.0..1.0).contains(&x) {
            return Err(DynamicsError::Domain(format!("{x} not in [0, 1)")));
        }
        let mut words = Vec::new();
        let mut rest = x;
        // A double has at most 1074 fractional binary digits.
        while rest != 0.0 && words.len() < 17 {
            let scaled = rest * 18_446_744_073_709_551_616.0;
            let w = scaled.floor();
            words.push(w as u64);
            rest = scaled - w;
        }
        if words.is_empty() {
            words.push(0);
        }
        Ok(Self { words, offset: 0, flipped: false })
    }

    /// First `bits` binary digits of `num / den`.
    pub fn from_rational(num: u64, den: u64, bits: usize) -> Result<Self, DynamicsError> {
        if den == 0 || num >= den {
            return Err(DynamicsError::Domain(format!("{num}/{den} not in [0, 1)")));
        }
        let n_words = bits.div_ceil(64).max(1);
        let mut words = vec![0u64; n_words];
        let (mut r, d) = (num as u128, den as u128);
        for i in 0..n_words * 64 {
            r *= 2;
            if r >= d {
                r -= d;
                words[i / 64] |= 1 << (63 - i % 64);
            }
        }
        Ok(Self { words, offset: 0, flipped: false })
    }

    /// Lebesgue-random point with at least `bits` random digits.
    pub fn random(rng: &mut dyn RngCore, bits: usize) -> Self {
        let n_words = bits / 64 + 2;
        let words = (0..n_words).map(|_| rng.next_u64()).collect();
        Self { words, offset: 0, flipped: false }
    }

    #[inline]
    fn word(&self, i: usize) -> u64 {
        self.words.get(i).copied().unwrap_or(0)
    }

    /// The 64 digits following the current position, as an integer.
    #[inline]
    pub fn window(&self) -> u64 {
        let (w, s) = (self.offset / 64, self.offset % 64);
        let raw = if s == 0 {
            self.word(w)
        } else {
            (self.word(w) << s) | (self.word(w + 1) >> (64 - s))
        };
        if self.flipped {
            !raw
        } else {
            raw
        }
    }

    /// The current leading digit.
    #[inline]
    pub fn leading_digit(&self) -> bool {
        self.window() >> 63 == 1
    }

    /// Current value, correct to the nearest double (absolute error below
    /// `2^-64` for tiny values).
    #[inline]
    pub fn value(&self) -> f64 {
        let v = self.window() as f64 * TWO_POW_NEG_64;
        if v >= 1.0 {
            BELOW_ONE
        } else {
            v
        }
    }

    #[inline]
    pub fn shift(&mut self, digits: usize) {
        self.offset += digits;
    }

    /// `x -> min(2x, 2 - 2x)`: shift, complementing the tail when the digit
    /// shifted out was 1.
    #[inline]
    pub fn tent_step(&mut self) {
        let d = self.leading_digit();
        self.offset += 1;
        self.flipped ^= d;
    }

    /// Number of digits still stored beyond the current position.
    pub fn remaining_digits(&self) -> usize {
        (self.words.len() * 64).saturating_sub(self.offset)
    }
}

impl FirstCoordinate for BinaryExpansion {
    #[inline]
    fn first_coordinate(&self) -> f64 {
        self.value()
    }
}

/// `x -> 2x mod 1`, optionally iterated `power` times per step.
#[derive(Clone, Debug)]
pub struct DoublingMap {
    power: u32,
    branches: Vec<Branch>,
}

impl DoublingMap {
    pub fn new(power: u32) -> Result<Self, DynamicsError> {
        if power == 0 {
            return Err(DynamicsError::InvalidSystem("iterate power must be >= 1".into()));
        }
        let branches = vec![
            Branch::new(0.0, 0.5, BranchFormula::Affine { slope: 2.0, intercept: 0.0 })?,
            Branch::new(0.5, 1.0, BranchFormula::Affine { slope: 2.0, intercept: -1.0 })?,
        ];
        Ok(Self { power, branches })
    }

    pub fn power(&self) -> u32 {
        self.power
    }
}

impl DynamicalSystem for DoublingMap {
    type Point = BinaryExpansion;

    fn descriptor(&self) -> SystemDescriptor {
        SystemDescriptor {
            family: "doubling".into(),
            parameters: json!({ "power": self.power }),
        }
    }

    fn validate_point(&self, _x: &BinaryExpansion) -> Result<(), DynamicsError> {
        Ok(())
    }

    #[inline]
    fn advance(&self, x: &mut BinaryExpansion) -> Result<(), DynamicsError> {
        x.shift(self.power as usize);
        Ok(())
    }

    fn sample_invariant(
        &self,
        rng: &mut dyn RngCore,
        horizon: usize,
    ) -> Result<BinaryExpansion, DynamicsError> {
        Ok(BinaryExpansion::random(rng, horizon * self.power as usize + 64))
    }
}

impl IntervalMap for DoublingMap {
    fn name(&self) -> String {
        if self.power == 1 {
            "doubling".into()
        } else {
            format!("doubling^{}", self.power)
        }
    }

    fn base_branches(&self) -> &[Branch] {
        &self.branches
    }

    fn power(&self) -> u32 {
        self.power
    }

    fn base_expansion(&self) -> f64 {
        2.0
    }
}

/// `x -> min(2x, 2 - 2x)`, optionally iterated `power` times per step.
#[derive(Clone, Debug)]
pub struct TentMap {
    power: u32,
    branches: Vec<Branch>,
}

impl TentMap {
    pub fn new(power: u32) -> Result<Self, DynamicsError> {
        if power == 0 {
            return Err(DynamicsError::InvalidSystem("iterate power must be >= 1".into()));
        }
        let branches = vec![
            Branch::new(0.0, 0.5, BranchFormula::Affine { slope: 2.0, intercept: 0.0 })?,
            Branch::new(0.5, 1.0, BranchFormula::Affine { slope: -2.0, intercept: 2.0 })?,
        ];
        Ok(Self { power, branches })
    }
}

impl DynamicalSystem for TentMap {
    type Point = BinaryExpansion;

    fn descriptor(&self) -> SystemDescriptor {
        SystemDescriptor {
            family: "tent".into(),
            parameters: json!({ "power": self.power }),
        }
    }

    fn validate_point(&self, _x: &BinaryExpansion) -> Result<(), DynamicsError> {
        Ok(())
    }

    #[inline]
    fn advance(&self, x: &mut BinaryExpansion) -> Result<(), DynamicsError> {
        for _ in 0..self.power {
            x.tent_step();
        }
        Ok(())
    }

    fn sample_invariant(
        &self,
        rng: &mut dyn RngCore,
        horizon: usize,
    ) -> Result<BinaryExpansion, DynamicsError> {
        Ok(BinaryExpansion::random(rng, horizon * self.power as usize + 64))
    }
}

impl IntervalMap for TentMap {
    fn name(&self) -> String {
        if self.power == 1 {
            "tent".into()
        } else {
            format!("tent^{}", self.power)
        }
    }

    fn base_branches(&self) -> &[Branch] {
        &self.branches
    }

    fn power(&self) -> u32 {
        self.power
    }

    fn base_expansion(&self) -> f64 {
        2.0
    }
}
