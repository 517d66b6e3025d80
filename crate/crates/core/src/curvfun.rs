//! Curvature functions on the positive cone.
//!
//! The admissible family is
//!
//! ```text
//! F_a(κ) = n · (H/n)^(1 - n a) · K^a,   H = Σ κ_i,  K = Π κ_i,  0 < a ≤ 1/n
//! ```
//!
//! Every member is symmetric, monotone, concave, 1-homogeneous, vanishes on
//! the boundary of the cone and is normalized by `F(1, …, 1) = n`. The choice
//! `a = 1/n` is the Gauss curvature function `n K^(1/n)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported hypersurface dimension.
pub const MAX_DIM: usize = 16;

/// A point of the positive cone Γ₊ ⊂ Rⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalCurvatures(Vec<f64>);

impl PrincipalCurvatures {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() < 2 || kappa.len() > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "dimension {} outside 2..={MAX_DIM}",
                kappa.len()
            )));
        }
        if let Some(k) = kappa.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(Error::Domain(format!("curvature {k} not in the positive cone")));
        }
        Ok(Self(kappa))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Value and principal-direction derivatives of `F` at an axisymmetric
/// curvature vector `(κ_merid, κ_par, …, κ_par)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiValue {
    pub f: f64,
    /// ∂F/∂κ in the meridian direction.
    pub d_merid: f64,
    /// ∂F/∂κ in any one of the `n - 1` parallel directions.
    pub d_par: f64,
}

/// The curvature function `F_a` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureFunction {
    n: usize,
    a: f64,
}

impl CurvatureFunction {
    pub fn new(n: usize, a: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidParameter(format!("n = {n} outside 2..={MAX_DIM}")));
        }
        // a = 1/n is admissible; allow for the rounding of a literal like 0.333...
        let a_max = 1.0 / n as f64;
        if !(a > 0.0 && a <= a_max * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "exponent a = {a} outside (0, 1/n = {a_max}]"
            )));
        }
        Ok(Self { n, a: a.min(a_max) })
    }

    /// `n K^(1/n)`.
    pub fn gauss(n: usize) -> Result<Self> {
        Self::new(n, 1.0 / n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Exponent of the mean-curvature factor, `1 - n a`.
    fn mean_exponent(&self) -> f64 {
        (1.0 - self.n as f64 * self.a).max(0.0)
    }

    fn check_dim(&self, kappa: &PrincipalCurvatures) -> Result<()> {
        if kappa.dim() != self.n {
            return Err(Error::InvalidParameter(format!(
                "curvature vector has {} entries, function expects {}",
                kappa.dim(),
                self.n
            )));
        }
        Ok(())
    }

    /// `F(κ)`. The entries are sorted before the reductions so the result is
    /// bitwise invariant under permutations of `κ`.
    pub fn eval(&self, kappa: &PrincipalCurvatures) -> Result<f64> {
        self.check_dim(kappa)?;
        let mut buf = [0.0; MAX_DIM];
        let sorted = &mut buf[..self.n];
        sorted.copy_from_slice(kappa.as_slice());
        sorted.sort_unstable_by(f64::total_cmp);
        let h: f64 = sorted.iter().sum();
        let ln_k: f64 = sorted.iter().map(|k| k.ln()).sum();
        Ok(self.value_from_invariants(h, ln_k))
    }

    /// `F` from the mean curvature `H` and `ln K`; evaluated in log space so
    /// products of many small curvatures do not underflow.
    fn value_from_invariants(&self, h: f64, ln_k: f64) -> f64 {
        let n = self.n as f64;
        n * (self.mean_exponent() * (h / n).ln() + self.a * ln_k).exp()
    }

    /// Gradient `Fⁱ = ∂F/∂κ_i = F · ((1 - n a)/H + a/κ_i)`.
    pub fn gradient(&self, kappa: &PrincipalCurvatures) -> Result<Vec<f64>> {
        let f = self.eval(kappa)?;
        let mut buf = [0.0; MAX_DIM];
        let sorted = &mut buf[..self.n];
        sorted.copy_from_slice(kappa.as_slice());
        sorted.sort_unstable_by(f64::total_cmp);
        let h: f64 = sorted.iter().sum();
        let c = self.mean_exponent() / h;
        Ok(kappa.as_slice().iter().map(|k| f * (c + self.a / k)).collect())
    }

    /// Fast path for the flow: `F` and its derivatives at
    /// `(κ_merid, κ_par × (n - 1))`.
    pub fn eval_axisymmetric(&self, k_merid: f64, k_par: f64) -> Result<AxiValue> {
        if !(k_merid > 0.0 && k_par > 0.0) || !k_merid.is_finite() || !k_par.is_finite() {
            return Err(Error::Domain(format!(
                "axisymmetric curvatures ({k_merid}, {k_par}) not in the positive cone"
            )));
        }
        let m = (self.n - 1) as f64;
        let h = k_merid + m * k_par;
        let ln_k = k_merid.ln() + m * k_par.ln();
        let f = self.value_from_invariants(h, ln_k);
        let c = self.mean_exponent() / h;
        Ok(AxiValue {
            f,
            d_merid: f * (c + self.a / k_merid),
            d_par: f * (c + self.a / k_par),
        })
    }

    /// `min_i Fⁱκ_i / F`, the quantity whose infimum over Γ₊ is ε₀.
    pub fn structure_ratio(&self, kappa: &PrincipalCurvatures) -> Result<f64> {
        let f = self.eval(kappa)?;
        let grad = self.gradient(kappa)?;
        Ok(grad
            .iter()
            .zip(kappa.as_slice())
            .map(|(g, k)| g * k / f)
            .fold(f64::INFINITY, f64::min))
    }

    /// Closed-form ε₀ of the family, used for config validation.
    pub fn exact_structure_constants(&self) -> StructureConstants {
        StructureConstants::from_epsilon0(self.a)
    }
}

/// ε₀ and the exponent threshold `p₀ = 1/(1 - ε₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureConstants {
    pub epsilon0: f64,
    pub p0: f64,
}

impl StructureConstants {
    /// `p₀ = 1/(1 - ε₀)`, correctly rounded for the common cases: the
    /// rounding error of `1 - ε₀` is recovered exactly and folded back in
    /// with one Newton step, so `ε₀ = fl(1/3)` gives exactly `3/2`.
    pub fn from_epsilon0(epsilon0: f64) -> Self {
        let d = 1.0 - epsilon0;
        // 1 - ε₀ = d + c exactly (both subtractions are exact for ε₀ ≤ 1/2)
        let c = (1.0 - d) - epsilon0;
        let r = 1.0 / d;
        let residual = (-r).mul_add(d, 1.0) - r * c;
        Self { epsilon0, p0: r.mul_add(residual, r) }
    }
}

/// Sampling control for [`epsilon0_estimate`].
///
/// Samples live on the slice `{Σ κ_i = n}` of the cone: a regular interior
/// lattice with `interior_divisions` steps per axis, plus one copy of the
/// `(n-1)`-dimensional lattice for each boundary level `k`, with the first
/// entry pinned to `10^-k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexRefinement {
    pub interior_divisions: usize,
    pub boundary_levels: u32,
}

impl Default for SimplexRefinement {
    fn default() -> Self {
        Self { interior_divisions: 8, boundary_levels: 8 }
    }
}

/// Calls `f` with every composition of `total` into `parts` non-negative
/// integers.
fn for_each_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(rest: usize, slot: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == buf.len() {
            buf[slot] = rest;
            f(buf);
            return;
        }
        for c in 0..=rest {
            buf[slot] = c;
            rec(rest - c, slot + 1, buf, f);
        }
    }
    let mut buf = vec![0; parts];
    rec(total, 0, &mut buf, f);
}

/// Estimates `ε₀ = inf_{Γ₊} min_i Fⁱκ_i / F` by sampling; the estimate is an
/// upper bound on the infimum and decreases as `boundary_levels` grows.
pub fn epsilon0_estimate(
    spec: &CurvatureFunction,
    refinement: SimplexRefinement,
) -> Result<StructureConstants> {
    let n = spec.n();
    let nf = n as f64;
    let m = refinement.interior_divisions;
    let mut best = f64::INFINITY;
    let mut err = None;
    let mut consider = |kappa: Vec<f64>| {
        match PrincipalCurvatures::new(kappa).and_then(|k| spec.structure_ratio(&k)) {
            Ok(r) => best = best.min(r),
            Err(e) => err = Some(e),
        }
    };

    let denom = (m + n) as f64;
    for_each_composition(m, n, &mut |c| {
        consider(c.iter().map(|&ci| nf * (ci + 1) as f64 / denom).collect());
    });

    let denom = (m + n - 1) as f64;
    for level in 1..=refinement.boundary_levels {
        let eps = 10f64.powi(-(level as i32));
        let rest = nf - eps;
        for_each_composition(m, n - 1, &mut |c| {
            let mut kappa = Vec::with_capacity(n);
            kappa.push(eps);
            kappa.extend(c.iter().map(|&ci| rest * (ci + 1) as f64 / denom));
            consider(kappa);
        });
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(StructureConstants::from_epsilon0(best))
}

/// Outcome of a sampled concavity check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    pub concave: bool,
    /// Largest second difference `F(κ+hw) - 2F(κ) + F(κ-hw)` seen.
    pub worst_second_difference: f64,
    /// Direction attaining the largest second difference.
    pub worst_direction: Vec<f64>,
}

/// Probe step of the second differences.
pub const CONCAVITY_STEP: f64 = 1e-3;
/// Allowed positive second difference, relative to `F(κ) h²`.
pub const CONCAVITY_TOLERANCE: f64 = 1e-8;

/// Checks concavity of `F` at `kappa` along `num_directions` pseudo-random
/// unit directions (fixed seed, so the probe set is reproducible).
pub fn concavity_check(
    spec: &CurvatureFunction,
    kappa: &PrincipalCurvatures,
    num_directions: usize,
) -> Result<ConcavityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0c0);
    let dirs: Vec<Vec<f64>> = (0..num_directions)
        .map(|_| {
            let w: Vec<f64> = (0..spec.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            w.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    concavity_check_directions(spec, kappa, &dirs)
}

/// Same as [`concavity_check`] with explicit probe directions.
pub fn concavity_check_directions(
    spec: &CurvatureFunction,
    kappa: &PrincipalCurvatures,
    directions: &[Vec<f64>],
) -> Result<ConcavityReport> {
    if directions.iter().any(|w| w.len() != spec.n()) {
        return Err(Error::InvalidParameter("probe direction has wrong dimension".into()));
    }
    second_difference_check(|k| spec.eval(k), kappa, directions)
}

fn second_difference_check(
    eval: impl Fn(&PrincipalCurvatures) -> Result<f64>,
    kappa: &PrincipalCurvatures,
    directions: &[Vec<f64>],
) -> Result<ConcavityReport> {
    let h = CONCAVITY_STEP;
    let f0 = eval(kappa)?;
    let tol = CONCAVITY_TOLERANCE * f0.abs() * h * h;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_direction = Vec::new();
    for w in directions {
        let probe = |sign: f64| {
            let shifted: Vec<f64> =
                kappa.as_slice().iter().zip(w).map(|(k, wi)| k + sign * h * wi).collect();
            PrincipalCurvatures::new(shifted)
                .map_err(|_| Error::Domain("concavity probe left the positive cone".into()))
        };
        let sd = eval(&probe(1.0)?)? - 2.0 * f0 + eval(&probe(-1.0)?)?;
        if sd > worst {
            worst = sd;
            worst_direction = w.clone();
        }
    }
    Ok(ConcavityReport { concave: worst <= tol, worst_second_difference: worst, worst_direction })
}
