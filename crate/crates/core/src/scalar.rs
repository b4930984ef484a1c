//! Scalar types usable for suspiciousness scores.
//!
//! Scores are built only from ratios of non-negative integers and products
//! of such ratios, so any ordered field works: `f32`/`f64` for everyday use,
//! [`Ratio<u64>`] when exact comparisons matter.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

pub trait ScoreScalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// `num / den`; `den` is never zero.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn to_f64(self) -> f64;
}

impl ScoreScalar for f64 {
    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl ScoreScalar for f32 {
    fn from_ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl ScoreScalar for Ratio<u64> {
    fn from_ratio(num: u64, den: u64) -> Self {
        Ratio::new(num, den)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl ScoreScalar for Ratio<u128> {
    fn from_ratio(num: u64, den: u64) -> Self {
        Ratio::new(num as u128, den as u128)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}
