//! Small-scale fading power gains, normalized to unit mean.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FadingKind {
    /// Rician with K-factor `k` (LoS to scattered power ratio).
    /// `f64::INFINITY` is the pure line-of-sight limit.
    Rician {
        k: f64,
    },
    Rayleigh,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingDraw {
    pub gain: f64,
    pub kind: FadingKind,
}

pub fn sample_fading<R: Rng + ?Sized>(kind: FadingKind, rng: &mut R) -> Result<FadingDraw> {
    let gain = match kind {
        FadingKind::Rician { k } if k < 0.0 || k.is_nan() => return Err(Error::NegativeKFactor(k)),
        FadingKind::Rician { k } if k.is_infinite() => 1.0,
        FadingKind::Rician { k } => {
            let los = (k / (k + 1.0)).sqrt();
            let sigma = (0.5 / (k + 1.0)).sqrt();
            let re = los + sigma * rng.sample::<f64, _>(StandardNormal);
            let im = sigma * rng.sample::<f64, _>(StandardNormal);
            re * re + im * im
        }
        FadingKind::Rayleigh => {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            0.5 * (re * re + im * im)
        }
    };
    Ok(FadingDraw { gain, kind })
}
