//! Spectral law of Gaussian matrix ensembles.
//!
//! For an S x T complex Gaussian matrix G with unit-variance entries
//! (S >= T), the T x T Gram matrix W = G^H G has the unordered-eigenvalue
//! marginal density
//!
//! ```text
//! f(x) = (1/T) sum_[i=0..T-1] i!/(i+S-T)! [L_i^(S-T)(x)]^2 x^(S-T) e^-x
//! ```
//!
//! on x >= 0, where L_i^a is the generalized Laguerre polynomial. Every
//! ensemble average the bound computations need (capacity integrands, SNR
//! shrinkage) reduces to integrals against this density.

use rand::Rng;

use crate::error::Error;
use crate::linalg::{hermitian_eigenvalues, sample_complex_gaussian};
use crate::quad::Quadrature;

/// Dimension pair of a Gram spectrum: `s >= t >= 1`. `t` is the number of
/// eigenvalues, `s` the long side of the underlying matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigSpec {
    s: usize,
    t: usize,
}

impl EigSpec {
    pub fn new(s: usize, t: usize) -> Result<Self, Error> {
        if t < 1 || s < t {
            return Err(Error::InvalidConfig(format!(
                "eigenvalue spec needs s >= t >= 1, got s={s}, t={t}"
            )));
        }
        Ok(Self { s, t })
    }

    /// Spec for an `n x m` channel matrix: the Gram spectrum has
    /// `min(n, m)` eigenvalues either way it is formed.
    pub fn for_channel(n: usize, m: usize) -> Self {
        Self { s: n.max(m), t: n.min(m) }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }
}

/// ln(n!).
fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Generalized Laguerre polynomial L_i^alpha(x) by the three-term
/// recurrence, which is numerically stable for the small orders used here.
pub fn laguerre(i: usize, alpha: usize, x: f64) -> f64 {
    let a = alpha as f64;
    if i == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..i {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Unordered-eigenvalue density at `x`. Zero for negative `x`.
pub fn eig_density(spec: &EigSpec, x: f64) -> f64 {
    if x < 0.0 || !x.is_finite() {
        return 0.0;
    }
    let (s, t) = (spec.s, spec.t);
    let alpha = s - t;
    let envelope = x.powi(alpha as i32) * (-x).exp();
    if envelope == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..t {
        let weight = (ln_factorial(i) - ln_factorial(i + alpha)).exp();
        let l = laguerre(i, alpha, x);
        sum += weight * l * l;
    }
    sum * envelope / t as f64
}

/// Draws `draws` independent Gram matrices and returns all `draws * t`
/// eigenvalues; each one is marginally distributed per [`eig_density`].
pub fn sample_unordered_eigenvalues<R: Rng + ?Sized>(
    spec: &EigSpec,
    draws: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(draws * spec.t);
    for _ in 0..draws {
        let g = sample_complex_gaussian(spec.s, spec.t, rng);
        let w = g.adjoint() * &g;
        let values = hermitian_eigenvalues(&w).expect("Gram matrix is Hermitian by construction");
        out.extend(values.iter().map(|&v| v.max(0.0)));
    }
    out
}

/// Tabulated CDF of [`eig_density`] on a uniform grid, evaluated by linear
/// interpolation. Grid resolution keeps the interpolation error orders of
/// magnitude below the Kolmogorov-Smirnov tolerances used in tests.
pub struct CdfTable {
    step: f64,
    cum: Vec<f64>,
}

impl CdfTable {
    pub fn build(spec: &EigSpec) -> Self {
        // Beyond s + 40 the density is below e^-40 of its bulk; the omitted
        // tail mass is negligible against any statistical tolerance.
        let upper = spec.s as f64 + 40.0;
        let panels = 8192usize;
        let step = upper / panels as f64;
        let mut cum = Vec::with_capacity(panels + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        let mut f_lo = eig_density(spec, 0.0);
        for p in 0..panels {
            let lo = p as f64 * step;
            let hi = lo + step;
            let f_mid = eig_density(spec, lo + 0.5 * step);
            let f_hi = eig_density(spec, hi);
            acc += step / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
            cum.push(acc);
            f_lo = f_hi;
        }
        Self { step, cum }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let pos = x / self.step;
        let idx = pos.floor() as usize;
        if idx + 1 >= self.cum.len() {
            return 1.0;
        }
        let frac = pos - idx as f64;
        (self.cum[idx] + frac * (self.cum[idx + 1] - self.cum[idx])).min(1.0)
    }
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical law of
/// `samples` and the model CDF for `spec`.
pub fn ks_distance(spec: &EigSpec, samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "KS distance needs at least one sample");
    let table = CdfTable::build(spec);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = table.eval(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// E[x / (x + sigma2)] under the spectral law: the mean proportion of a
/// received component's power that survives linear MMSE estimation.
pub fn expected_snr_shrinkage(spec: &EigSpec, sigma2: f64) -> Result<f64, Error> {
    assert!(sigma2 > 0.0, "sigma2 must be positive, got {sigma2}");
    let quad = Quadrature::default();
    quad.integrate_semi_infinite(|x| x / (x + sigma2) * eig_density(spec, x), 0.0)
}
