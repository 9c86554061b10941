//! Seeded sampling of group elements through the forward map, so every
//! sample is valid by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geodesic::{geodesic_point, GeodesicParams};
use crate::lorentz::{rotation, GroupElement};

/// Closed-open ranges for `(β, φ, t)` and an optional right rotation `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub beta: (f64, f64),
    pub phi: (f64, f64),
    pub t: (f64, f64),
    pub omega: Option<(f64, f64)>,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox {
            beta: (-3.0, 3.0),
            phi: (0.0, std::f64::consts::TAU),
            t: (0.0, 5.0),
            omega: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub params: GeodesicParams,
    pub omega: Option<f64>,
    #[serde(skip)]
    pub element: GroupElement,
}

/// ChaCha8 stream; the same seed yields the same samples on every platform.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on `[lo, hi)`; returns `lo` for an empty range.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.gen::<f64>()
    }

    pub fn params(&mut self, b: &SampleBox) -> GeodesicParams {
        let beta = self.uniform(b.beta.0, b.beta.1);
        let phi = self.uniform(b.phi.0, b.phi.1);
        let t = self.uniform(b.t.0, b.t.1);
        GeodesicParams::new(beta, phi, t).expect("finite box")
    }

    pub fn sample(&mut self, b: &SampleBox) -> Sample {
        let params = self.params(b);
        let omega = b.omega.map(|(lo, hi)| self.uniform(lo, hi));
        let mut element = geodesic_point(&params);
        if let Some(w) = omega {
            element = element * rotation(w);
        }
        Sample { params, omega, element }
    }

    pub fn samples(&mut self, b: &SampleBox, count: usize) -> Vec<Sample> {
        (0..count).map(|_| self.sample(b)).collect()
    }
}
