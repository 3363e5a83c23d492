//! Run configuration: TOML file with flat key/value pairs, overridden by CLI
//! flags. Every run is reproducible from (config, seed).
//!
//! Schema (all keys optional; defaults shown):
//!
//! ```toml
//! seed = 42            # RNG seed for randomized perturbation models
//! threads = 0          # worker threads (0 = library default)
//! n = 2                # submanifold dimension
//! k = 2                # codimension
//! model = "equatorial" # model name for expand/volume/energy
//! order = 4            # expansion order
//! eps_min = 1e-3       # ε window for volume fits
//! eps_max = 1e-2
//! samples = 40         # ε samples per fit
//! resolution = 32      # surface grid size per direction
//! tolerance = 1e-9     # obstruction/parity tolerance
//! torus_a = 1.0        # tube radius (torus models)
//! torus_c = 2.0        # center radius (torus models)
//! amplitude = 0.05     # perturbation amplitude (graph model)
//! phi2 = 0.0           # even profile perturbation (perturbed model)
//! psi3 = 0.0           # odd profile perturbation (perturbed model)
//! omega = [0.0]        # radial conformal-factor jet (eikonal)
//! ```

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub n: usize,
    pub k: usize,
    pub model: String,
    pub order: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub samples: usize,
    pub resolution: usize,
    pub tolerance: f64,
    pub torus_a: f64,
    pub torus_c: f64,
    pub amplitude: f64,
    pub phi2: f64,
    pub psi3: f64,
    pub omega: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            threads: 0,
            n: 2,
            k: 2,
            model: "equatorial".into(),
            order: 4,
            eps_min: 1e-3,
            eps_max: 1e-2,
            samples: 40,
            resolution: 32,
            tolerance: 1e-9,
            torus_a: 1.0,
            torus_c: 2.0,
            amplitude: 0.05,
            phi2: 0.0,
            psi3: 0.0,
            omega: vec![0.0],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("bad config file: {e}"))
    }

    #[allow(dead_code)] // exercised by the round-trip tests
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// Invariants: positive tolerances, ordered ε window, sane sizes.
    pub fn validate(&self) -> Result<(), String> {
        if self.tolerance <= 0.0 {
            return Err("tolerance must be positive".into());
        }
        if self.seed > i64::MAX as u64 {
            // TOML integers are signed 64-bit; larger seeds cannot round-trip
            return Err("seed must fit in a TOML integer (<= 2^63 - 1)".into());
        }
        if !(self.eps_min > 0.0 && self.eps_min < self.eps_max) {
            return Err("need 0 < eps_min < eps_max".into());
        }
        if self.samples < 8 {
            return Err("need at least 8 eps samples".into());
        }
        if self.n < 1 || self.k < 1 {
            return Err("n and k must be at least 1".into());
        }
        if self.resolution < 8 || self.resolution % 2 != 0 {
            return Err("resolution must be an even number >= 8".into());
        }
        Ok(())
    }
}
