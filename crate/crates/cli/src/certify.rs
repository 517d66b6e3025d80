//! `certify <n> <a>`: the algebraic checks on one member of the curvature
//! family, as a plain-text report.

use std::fmt::Write as _;

use hyperflow_core::curvfun::{
    concavity_check, epsilon0_estimate, CurvatureFunction, PrincipalCurvatures, SimplexRefinement,
};
use hyperflow_core::Result;
use rand::{Rng, SeedableRng};

const EULER_SAMPLES: usize = 10_000;
const CONCAVITY_POINTS: usize = 64;
const CONCAVITY_DIRECTIONS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub n: usize,
    pub a: f64,
    pub normalization: f64,
    pub euler_max_rel: f64,
    pub epsilon0_estimate: f64,
    pub epsilon0_exact: f64,
    pub p0: f64,
    pub worst_second_difference: f64,
    pub concave: bool,
    pub monotone: bool,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        let n = self.n as f64;
        (self.normalization - n).abs() <= 1e-12 * n
            && self.euler_max_rel <= 1e-12
            && self.epsilon0_estimate >= self.epsilon0_exact * (1.0 - 1e-12)
            && self.epsilon0_estimate <= 1.0 / n + 1e-12
            && self.concave
            && self.monotone
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        writeln!(s, "curvature function F_a, n = {}, a = {}", self.n, self.a).unwrap();
        writeln!(s, "F(1,...,1)            = {:.17e}", self.normalization).unwrap();
        writeln!(s, "euler max rel. dev.   = {:.3e} over {EULER_SAMPLES} samples", self.euler_max_rel).unwrap();
        writeln!(s, "gradient positive     = {}", self.monotone).unwrap();
        writeln!(s, "epsilon0 estimate     = {:.17e}", self.epsilon0_estimate).unwrap();
        writeln!(s, "epsilon0 exact        = {:.17e}", self.epsilon0_exact).unwrap();
        writeln!(s, "p0 = 1/(1-epsilon0)   = {:.17e}", self.p0).unwrap();
        writeln!(
            s,
            "concavity             = {} (worst second difference {:.3e}, {CONCAVITY_POINTS}x{CONCAVITY_DIRECTIONS} probes)",
            self.concave, self.worst_second_difference
        )
        .unwrap();
        writeln!(s, "{}", verdict(self.passed())).unwrap();
        s
    }
}

fn random_kappa(rng: &mut impl Rng, n: usize) -> PrincipalCurvatures {
    PrincipalCurvatures::new((0..n).map(|_| 10f64.powf(rng.gen_range(-2.0..2.0))).collect())
        .expect("positive entries")
}

pub fn certify(n: usize, a: f64) -> Result<Certificate> {
    let f = CurvatureFunction::new(n, a)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xce27);
    let mut euler: f64 = 0.0;
    let mut monotone = true;
    for _ in 0..EULER_SAMPLES {
        let k = random_kappa(&mut rng, n);
        let val = f.eval(&k)?;
        let grad = f.gradient(&k)?;
        monotone &= grad.iter().all(|g| *g > 0.0);
        let sum: f64 = grad.iter().zip(k.as_slice()).map(|(g, k)| g * k).sum();
        euler = euler.max((sum - val).abs() / val);
    }
    let mut worst = f64::NEG_INFINITY;
    let mut concave = true;
    for _ in 0..CONCAVITY_POINTS {
        let k = PrincipalCurvatures::new((0..n).map(|_| rng.gen_range(0.2..3.0)).collect())?;
        let rep = concavity_check(&f, &k, CONCAVITY_DIRECTIONS)?;
        concave &= rep.concave;
        worst = worst.max(rep.worst_second_difference);
    }
    let est = epsilon0_estimate(&f, SimplexRefinement::default())?;
    let exact = f.exact_structure_constants();
    Ok(Certificate {
        n,
        a: f.a(),
        normalization: f.eval(&PrincipalCurvatures::new(vec![1.0; n])?)?,
        euler_max_rel: euler,
        epsilon0_estimate: est.epsilon0,
        epsilon0_exact: exact.epsilon0,
        p0: exact.p0,
        worst_second_difference: worst,
        concave,
        monotone,
    })
}
