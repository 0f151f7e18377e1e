//! Seeded synthesis of test systems.
//!
//! Every firm holds one unit of exogenous assets. Liabilities are a common
//! level plus independent `N(0, 0.5²)` noise, clipped at zero. Both ownership
//! matrices are the same λ-convex combination of a ring matrix (firm `i+1`
//! holds firm `i`'s claim, firm 1 holds firm `n`'s) and a complete matrix
//! (claims spread evenly over the other `n−1` firms), scaled to the requested
//! integration level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::linalg::{SquareMatrix, Vector};
use crate::model::{FinancialSystem, ModelError, SystemDocument};

/// Standard deviation of the liability noise.
pub const DEBT_NOISE_SD: f64 = 0.5;

/// Identifies the uniform-to-normal transform recorded in generated metadata.
pub const NORMAL_TRANSFORM: &str = "chacha8/rand_distr-0.5-standard-normal-ziggurat";

/// How negative liabilities are handled, recorded in generated metadata.
pub const DEBT_CLIPPING: &str = "d_i = max(0, d_base + eps_i)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Inputs of one simulated system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n: usize,
    pub d_base: f64,
    pub nu_d: f64,
    pub nu_s: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |msg: String| Err(GeneratorError::InvalidParams(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.d_base >= 0.0 && self.d_base.is_finite()) {
            return bad(format!("d_base must be a finite nonnegative number, got {}", self.d_base));
        }
        for (name, nu) in [("nu_d", self.nu_d), ("nu_s", self.nu_s)] {
            if !(0.0..1.0).contains(&nu) {
                return bad(format!("{name} must lie in [0, 1), got {nu}"));
            }
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        Ok(())
    }
}

/// Deterministic random stream: ChaCha8 keyed by a 64-bit seed.
///
/// Parallel tasks use [`SimRng::for_task`], which keys the generator with the
/// master seed and selects stream `task`, so every task sees the same numbers
/// regardless of scheduling.
#[derive(Debug, Clone)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn for_task(master_seed: u64, task: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(task);
        SimRng(rng)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.random()
    }
}

/// Ring ownership: `M[i+1][i] = ν` and `M[0][n−1] = ν`.
pub fn ring_matrix(n: usize, nu: f64) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        m[((i + 1) % n, i)] = nu;
    }
    m
}

/// Complete ownership: every off-diagonal entry `ν/(n−1)`.
pub fn complete_matrix(n: usize, nu: f64) -> SquareMatrix {
    let w = nu / (n as f64 - 1.0);
    SquareMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { w })
}

/// `λ·ring + (1−λ)·complete`, entrywise.
pub fn convex_combination(
    ring: &SquareMatrix,
    complete: &SquareMatrix,
    lambda: f64,
) -> Result<SquareMatrix, GeneratorError> {
    if ring.dim() != complete.dim() {
        return Err(ModelError::DimensionMismatch {
            field: "complete",
            expected: ring.dim(),
            found: complete.dim(),
        }
        .into());
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(GeneratorError::InvalidParams(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let n = ring.dim();
    Ok(SquareMatrix::from_fn(n, |i, j| {
        lambda * ring[(i, j)] + (1.0 - lambda) * complete[(i, j)]
    }))
}

fn ownership(n: usize, nu: f64, lambda: f64) -> Result<SquareMatrix, GeneratorError> {
    let mut m = convex_combination(&ring_matrix(n, nu), &complete_matrix(n, nu), lambda)?;
    for i in 0..n {
        m[(i, i)] = 0.0;
    }
    Ok(m)
}

/// One simulated system; draws `n` normals from `rng`.
pub fn simulate_system(params: &SystemParams, rng: &mut SimRng) -> Result<FinancialSystem, GeneratorError> {
    params.validate()?;
    let n = params.n;
    let a = Vector::filled(n, 1.0);
    let d = Vector::from_fn(n, |_| (params.d_base + DEBT_NOISE_SD * rng.standard_normal()).max(0.0));
    let md = ownership(n, params.nu_d, params.lambda)?;
    let ms = ownership(n, params.nu_s, params.lambda)?;
    Ok(FinancialSystem::new(a, d, md, ms)?)
}

/// The system for `params`, using `params.seed` as the stream seed.
pub fn generate(params: &SystemParams) -> Result<FinancialSystem, GeneratorError> {
    simulate_system(params, &mut SimRng::new(params.seed))
}

/// Generator metadata stored under the `meta` key of a system document.
pub fn metadata(params: &SystemParams) -> serde_json::Value {
    json!({
        "generator": "netclear",
        "params": params,
        "seed": params.seed,
        "normal_transform": NORMAL_TRANSFORM,
        "debt_noise_sd": DEBT_NOISE_SD,
        "debt_clipping": DEBT_CLIPPING,
    })
}

/// A generated system with its metadata attached.
pub fn generate_document(params: &SystemParams) -> Result<SystemDocument, GeneratorError> {
    let mut doc = generate(params)?.to_document();
    doc.meta = Some(metadata(params));
    Ok(doc)
}
