//! Seeded generators for the three simulation datasets.
//!
//! Every generator is a pure function of its [`SynthSpec`] and
//! [`SynthGeometry`]; class counts are exact and rows come in class blocks.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitCircle, UnitSphere};

use crate::numerics::Matrix;
use crate::pipeline::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SynthDataset {
    WineChocolate,
    AppleTart,
    SwissRoll,
}

impl SynthDataset {
    pub fn name(self) -> &'static str {
        match self {
            Self::WineChocolate => "wine_chocolate",
            Self::AppleTart => "apple_tart",
            Self::SwissRoll => "swiss_roll",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "wine_chocolate" => Some(Self::WineChocolate),
            "apple_tart" => Some(Self::AppleTart),
            "swiss_roll" => Some(Self::SwissRoll),
            _ => None,
        }
    }

    pub fn classes(self) -> usize {
        match self {
            Self::WineChocolate => 2,
            Self::AppleTart | Self::SwissRoll => 4,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::AppleTart => 2,
            Self::WineChocolate | Self::SwissRoll => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthSpec {
    pub dataset: SynthDataset,
    pub n_per_class: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

pub const DEFAULT_NOISE_SD: f64 = 0.1;

impl SynthSpec {
    pub fn new(dataset: SynthDataset, n_per_class: usize, seed: u64) -> Self {
        Self { dataset, n_per_class, noise_sd: DEFAULT_NOISE_SD, seed }
    }
}

/// Geometric constants of the generators.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthGeometry {
    /// Sphere radii for classes 0 and 1.
    pub wine_radii: [f64; 2],
    /// Radial bands `[lo, hi)` of the four annuli.
    pub tart_bands: [(f64, f64); 4],
    /// Range of the roll parameter `t`, split into four equal bands.
    pub roll_t: (f64, f64),
    pub roll_height: f64,
}

impl Default for SynthGeometry {
    fn default() -> Self {
        Self {
            wine_radii: [1.0, 3.0],
            tart_bands: [(0.0, 1.0), (1.5, 2.5), (3.0, 4.0), (4.5, 5.5)],
            roll_t: (1.5 * PI, 4.5 * PI),
            roll_height: 10.0,
        }
    }
}

pub fn generate(spec: &SynthSpec) -> Dataset {
    generate_with(spec, &SynthGeometry::default())
}

pub fn generate_with(spec: &SynthSpec, geom: &SynthGeometry) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd.max(0.0)).expect("finite noise sd");
    let k = spec.dataset.classes();
    let p = spec.dataset.dim();
    let n = k * spec.n_per_class;
    let mut x = Matrix::zeros(n, p);
    let mut y = Vec::with_capacity(n);
    for c in 0..k {
        for t in 0..spec.n_per_class {
            let i = c * spec.n_per_class + t;
            let row: Vec<f64> = match spec.dataset {
                SynthDataset::WineChocolate => {
                    let u: [f64; 3] = UnitSphere.sample(&mut rng);
                    let r = geom.wine_radii[c];
                    u.iter().map(|v| r * v + noise.sample(&mut rng)).collect()
                }
                SynthDataset::AppleTart => {
                    let (lo, hi) = geom.tart_bands[c];
                    // uniform over the annulus area
                    let r = libm::sqrt(rng.random_range(lo * lo..hi * hi)) + noise.sample(&mut rng);
                    let u: [f64; 2] = UnitCircle.sample(&mut rng);
                    alloc::vec![r * u[0], r * u[1]]
                }
                SynthDataset::SwissRoll => {
                    let (t0, t1) = geom.roll_t;
                    let w = (t1 - t0) / k as f64;
                    let tt = rng.random_range(t0 + c as f64 * w..t0 + (c + 1) as f64 * w);
                    let h = rng.random_range(0.0..geom.roll_height);
                    alloc::vec![
                        tt * libm::cos(tt) + noise.sample(&mut rng),
                        h + noise.sample(&mut rng),
                        tt * libm::sin(tt) + noise.sample(&mut rng),
                    ]
                }
            };
            for (j, v) in row.into_iter().enumerate() {
                x[(i, j)] = v;
            }
            y.push(c as i64);
        }
    }
    let names = (0..p).map(|j| format!("f{j}")).collect();
    Dataset::with_metadata(x, y, None, Some(names)).expect("generated data is well formed")
}
