//! The star-shaped set S_Ω = {x : |x| ≤ ρ(x)}, ρ = |Ω|^{1/n}, its strata
//! and the integral identities tied to it.

use std::f64::consts::{E, LN_2};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::kernel::AngularKernel;
use crate::quad::gauss_legendre;
use crate::sphere::{norm, SphereCells};

/// Default stratum cap; cells beyond it are reported as residual mass.
pub const STRATUM_CAP: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct Stratum {
    pub m: usize,
    /// |S_m|.
    pub measure: f64,
    /// Surface measure of Θ_m.
    pub sphere_measure: f64,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct StarSet {
    kernel: Arc<AngularKernel>,
    rho: Vec<f64>,
    stratum: Vec<Option<usize>>,
    strata: Vec<Stratum>,
    measure: f64,
    residual_mass: f64,
}

/// Stratum index: 0 when ρ ≤ 1, else the m with 2^{m-1} < ρ ≤ 2^m.
pub fn stratum_of(rho: f64) -> usize {
    if rho <= 1.0 {
        return 0;
    }
    let mut m = rho.log2().ceil().max(1.0) as i32;
    while 2f64.powi(m) < rho {
        m += 1;
    }
    while m > 1 && 2f64.powi(m - 1) >= rho {
        m -= 1;
    }
    m as usize
}

/// Sums and bounds behind the star-set integral identities.
#[derive(Debug, Clone, Serialize)]
pub struct SetIntegrals {
    /// |S| from the set's cells.
    pub measure: f64,
    /// (1/n) ∫|Ω| from the kernel.
    pub measure_from_kernel: f64,
    /// ∫_S sgn Ω dy, polar form (1/n)∫ sgnΩ ρ^n.
    pub sgn_integral: [f64; 2],
    /// (1/n) ∫Ω from the kernel.
    pub sgn_from_kernel: [f64; 2],
    /// ∫_S log⁺|y| dy.
    pub logp_integral: f64,
    /// (1/n²) ‖Ω‖_{L log L}.
    pub logp_bound: f64,
    /// ∫_S |log|y|| dy.
    pub log_integral: f64,
    /// (1/n²)(‖Ω‖_{L log L} + |S^{n-1}|/e).
    pub log_bound: f64,
    /// (1/n²)(‖Ω‖_{L log L} + 1), reported for comparison only.
    pub log_bound_unit: f64,
    /// Σ (m+1)|S_m|.
    pub weighted_strata_sum: f64,
    pub llogl_norm: f64,
    /// Smallest c with Σ(m+1)|S_m| ≤ c ‖Ω‖_{L log L} for this kernel.
    pub c_n_min: f64,
    /// Dimension constant (1/n)·max(3, 1/(n log 2)) that bounds every kernel.
    pub c_n_dimension: f64,
    pub residual_mass: f64,
}

impl StarSet {
    pub fn new(kernel: Arc<AngularKernel>) -> Self {
        Self::with_cap(kernel, STRATUM_CAP)
    }

    pub fn with_cap(kernel: Arc<AngularKernel>, cap: usize) -> Self {
        let n = kernel.dim() as f64;
        let cells = kernel.cells();
        let rho: Vec<f64> = (0..cells.len()).map(|i| kernel.cell_rho(i)).collect();
        let mut stratum = Vec::with_capacity(rho.len());
        let mut strata: Vec<Stratum> = Vec::new();
        let mut residual_mass = 0.0;
        let mut measure = 0.0;
        for (i, &r) in rho.iter().enumerate() {
            let mass = r.powf(n) * cells.measure(i) / n;
            measure += mass;
            let m = stratum_of(r);
            if m > cap {
                stratum.push(None);
                residual_mass += mass;
                continue;
            }
            stratum.push(Some(m));
            let pos = match strata.binary_search_by_key(&m, |s| s.m) {
                Ok(p) => p,
                Err(p) => {
                    strata.insert(p, Stratum { m, measure: 0.0, sphere_measure: 0.0, cells: vec![] });
                    p
                }
            };
            let s = &mut strata[pos];
            s.measure += mass;
            s.sphere_measure += cells.measure(i);
            s.cells.push(i);
        }
        StarSet { kernel, rho, stratum, strata, measure, residual_mass }
    }

    pub fn kernel(&self) -> &Arc<AngularKernel> {
        &self.kernel
    }
    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }
    pub fn cells(&self) -> &SphereCells {
        self.kernel.cells()
    }
    pub fn cell_rho(&self, i: usize) -> f64 {
        self.rho[i]
    }
    pub fn rho_values(&self) -> &[f64] {
        &self.rho
    }
    pub fn rho_max(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }
    pub fn stratum_index(&self, cell: usize) -> Option<usize> {
        self.stratum[cell]
    }
    /// |S|.
    pub fn measure(&self) -> f64 {
        self.measure
    }
    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }
    pub fn stratum(&self, m: usize) -> Option<&Stratum> {
        self.strata.iter().find(|s| s.m == m)
    }
    pub fn residual_mass(&self) -> f64 {
        self.residual_mass
    }

    /// ρ in the direction of y.
    pub fn rho(&self, y: &[f64]) -> Result<f64> {
        Ok(self.rho[self.cells().locate(y)?])
    }

    /// |y|/ρ(y): the least t with y ∈ tS (∞ when ρ(y) = 0).
    pub fn gauge(&self, y: &[f64]) -> Result<f64> {
        let r = norm(y);
        if r == 0.0 {
            return Ok(0.0);
        }
        let rho = self.rho(y)?;
        Ok(if rho == 0.0 { f64::INFINITY } else { r / rho })
    }

    /// y ∈ tS \ B̄(0, ε), with the closed convention |y| ≤ tρ(y).
    /// The origin belongs to every tS.
    pub fn membership(&self, y: &[f64], t: f64, eps: f64) -> Result<bool> {
        if !(t > 0.0) {
            return domain(format!("dilation must be positive, got {t}"));
        }
        let r = norm(y);
        if r == 0.0 {
            return Ok(eps == 0.0);
        }
        Ok(r > eps && r <= t * self.rho(y)?)
    }

    /// Numeric and closed-form sides of
    /// ∫_0^∞ t^{-n} χ_{tS∖B(0,ε)}(y) dt/t = (1/n) χ_{|y|>ε} |Ω(y)| / |y|^n.
    /// The numeric side locates the threshold from `membership` alone.
    pub fn dilation_identity(&self, y: &[f64], eps: f64) -> Result<(f64, f64)> {
        let r = norm(y);
        if r == 0.0 {
            return domain("dilation identity needs y ≠ 0");
        }
        let n = self.dim() as f64;
        let cell = self.cells().locate(y)?;
        let omega = self.kernel.cell_value(cell).norm();
        let closed = if r > eps { omega / (n * r.powf(n)) } else { 0.0 };
        let member = |t: f64| self.membership(y, t, eps);
        let mut hi = 1.0;
        let mut steps = 0;
        while !member(hi)? {
            hi *= 2.0;
            steps += 1;
            if steps > 400 {
                return Ok((0.0, closed));
            }
        }
        let mut lo = hi * 0.5;
        while member(lo)? {
            lo *= 0.5;
            if lo < 1e-300 {
                return domain("membership does not vanish for small t");
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if member(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let start = hi;
        let rule = gauss_legendre(10);
        let octaves = 40;
        let mut numeric = 0.0;
        for k in 0..octaves {
            let a = start * 2f64.powi(k);
            for (t, w) in rule.mapped(a, 2.0 * a) {
                if member(t)? {
                    numeric += w * t.powf(-n - 1.0);
                }
            }
        }
        numeric += (start * 2f64.powi(octaves)).powf(-n) / n;
        Ok((numeric, closed))
    }

    /// The record of set integrals and their bounds.
    pub fn set_integrals(&self) -> Result<SetIntegrals> {
        let n = self.dim() as f64;
        let cells = self.cells();
        let mut sgn = Complex64::new(0.0, 0.0);
        let mut logp = 0.0;
        let mut logi = 0.0;
        for (i, &rho) in self.rho.iter().enumerate() {
            let w = cells.measure(i);
            let v = self.kernel.cell_value(i);
            let a = rho.powf(n);
            if a > 0.0 {
                sgn += v / v.norm() * a * w / n;
            }
            if rho > 1.0 {
                let p = a * rho.ln() / n - (a - 1.0) / (n * n);
                logp += w * p;
                logi += w * (p + 1.0 / (n * n));
            } else if rho > 0.0 {
                logi += w * (-a * rho.ln() / n + a / (n * n));
            }
        }
        let llogl = self.kernel.llogl_norm()?;
        let l1 = self.kernel.l1_norm()?;
        let canc = self.kernel.cancellation()? / n;
        let weighted: f64 = self.strata.iter().map(|s| (s.m as f64 + 1.0) * s.measure).sum();
        let sphere = cells.total_measure();
        Ok(SetIntegrals {
            measure: self.measure,
            measure_from_kernel: l1 / n,
            sgn_integral: [sgn.re, sgn.im],
            sgn_from_kernel: [canc.re, canc.im],
            logp_integral: logp,
            logp_bound: llogl / (n * n),
            log_integral: logi,
            log_bound: (llogl + sphere / E) / (n * n),
            log_bound_unit: (llogl + 1.0) / (n * n),
            weighted_strata_sum: weighted,
            llogl_norm: llogl,
            c_n_min: if llogl > 0.0 { weighted / llogl } else { 0.0 },
            c_n_dimension: dimension_constant(self.dim()),
            residual_mass: self.residual_mass,
        })
    }

    /// Uniform samples from S (or from S_m when `stratum` is given).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, stratum: Option<usize>) -> Vec<Vec<f64>> {
        let n = self.dim() as f64;
        let cells = self.cells();
        let eligible: Vec<usize> = (0..self.rho.len())
            .filter(|&i| self.rho[i] > 0.0 && stratum.is_none_or(|m| self.stratum[i] == Some(m)))
            .collect();
        if eligible.is_empty() {
            return Vec::new();
        }
        let mut cumulative = Vec::with_capacity(eligible.len());
        let mut acc = 0.0;
        for &i in &eligible {
            acc += self.rho[i].powf(n) * cells.measure(i);
            cumulative.push(acc);
        }
        (0..count)
            .map(|_| {
                let u = rng.gen::<f64>() * acc;
                let k = cumulative.partition_point(|c| *c <= u).min(eligible.len() - 1);
                let i = eligible[k];
                let dir = cells.sample_direction(i, rng);
                let r = self.rho[i] * rng.gen::<f64>().powf(1.0 / n);
                dir.into_iter().map(|d| d * r).collect()
            })
            .collect()
    }

    /// Boundary polyline of S (n = 2), two vertices per cell.
    pub fn outline(&self) -> Vec<[f64; 2]> {
        if self.dim() != 2 {
            return Vec::new();
        }
        let cells = self.cells();
        let mut out = Vec::with_capacity(2 * self.rho.len() + 1);
        for (i, &r) in self.rho.iter().enumerate() {
            let (a, b) = cells.arc(i);
            out.push([r * a.cos(), r * a.sin()]);
            out.push([r * b.cos(), r * b.sin()]);
        }
        if let Some(first) = out.first().copied() {
            out.push(first);
        }
        out
    }
}

/// (1/n)·max(3, 1/(n log 2)): the constant for which
/// Σ(m+1)|S_m| ≤ c ‖Ω‖_{L log L} follows cell by cell.
pub fn dimension_constant(n: usize) -> f64 {
    let n = n as f64;
    (1.0 / n) * 3f64.max(1.0 / (n * LN_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{CatalogueKernel, Resolution};
    use std::f64::consts::PI;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn star(k: AngularKernel) -> StarSet {
        StarSet::new(Arc::new(k))
    }

    #[test]
    fn stratum_boundaries() {
        assert_eq!(stratum_of(0.0), 0);
        assert_eq!(stratum_of(1.0), 0);
        assert_eq!(stratum_of(1.0 + 1e-15), 1);
        assert_eq!(stratum_of(2.0), 1);
        assert_eq!(stratum_of(2.0000001), 2);
        assert_eq!(stratum_of(E.sqrt()), 1);
        assert_eq!(stratum_of(1024.0), 10);
    }

    #[test]
    fn membership_examples() {
        let s = star(AngularKernel::constant(2, c(1.0)).unwrap());
        assert!(s.membership(&[0.5, 0.0], 1.0, 0.0).unwrap());
        assert!(!s.membership(&[2.0, 0.0], 1.0, 0.0).unwrap());
        assert!(s.membership(&[2.0, 0.0], 2.0, 0.0).unwrap());
        assert!(s.membership(&[0.0, 0.0], 1.0, 0.0).unwrap());
        assert!(s.membership(&[1.0, 0.0], 0.0, 0.0).is_err());
        let s = star(AngularKernel::constant(2, c(16.0)).unwrap());
        assert!(s.membership(&[1.0, 0.0], 0.25, 0.0).unwrap());
        assert!(!s.membership(&[1.0, 0.0], 0.2499, 0.0).unwrap());
    }

    #[test]
    fn dilation_identity_examples() {
        let s = star(AngularKernel::constant(2, c(16.0)).unwrap());
        let (num, closed) = s.dilation_identity(&[1.0, 0.0], 0.5).unwrap();
        assert!((closed - 8.0).abs() < 1e-14);
        assert!((num - 8.0).abs() < 1e-10);
        assert_eq!(s.dilation_identity(&[0.3, 0.0], 0.5).unwrap(), (0.0, 0.0));
        let z = star(AngularKernel::from_arcs("z", &[(0.0, 1.0, c(1.0))]).unwrap());
        assert_eq!(z.dilation_identity(&[-1.0, 0.0], 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn set_integral_examples() {
        let one = star(AngularKernel::constant(2, c(1.0)).unwrap()).set_integrals().unwrap();
        assert!((one.measure - PI).abs() < 1e-14);
        assert!((one.sgn_integral[0] - PI).abs() < 1e-14);
        assert_eq!(one.logp_integral, 0.0);
        let cos = CatalogueKernel::Cos { frequency: 1 }.build(2, Resolution::circle(1024)).unwrap();
        let r = star(cos).set_integrals().unwrap();
        assert!((r.measure - 2.0).abs() < 1e-10);
        assert!(r.sgn_integral[0].abs() < 1e-12);
        let e = star(AngularKernel::constant(2, c(E)).unwrap());
        let r = e.set_integrals().unwrap();
        assert!((r.measure - PI * E).abs() < 1e-12);
        assert!((r.weighted_strata_sum - 2.0 * PI * E).abs() < 1e-12);
        assert_eq!(e.strata().len(), 1);
        assert_eq!(e.strata()[0].m, 1);
    }

    #[test]
    fn log_bound_is_sharp_at_inverse_e() {
        let s = star(AngularKernel::constant(2, c(1.0 / E)).unwrap());
        let r = s.set_integrals().unwrap();
        assert!((r.log_integral - r.log_bound).abs() < 1e-12);
        assert!(r.log_integral > r.log_bound_unit);
    }

    #[test]
    fn strata_partition_measure() {
        let k = CatalogueKernel::SinPower { alpha: 0.5 }.build(2, Resolution::default()).unwrap();
        let s = star(k);
        let total: f64 = s.strata().iter().map(|x| x.measure).sum();
        assert!((total - s.measure()).abs() < 1e-10 * s.measure());
        assert!(s.strata().len() >= 2);
    }

    #[test]
    fn three_dimensional_measure() {
        let k = AngularKernel::constant(3, c(1.0)).unwrap();
        let s = star(k);
        assert!((s.measure() - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn samples_lie_in_the_set() {
        use rand::SeedableRng;
        let k = CatalogueKernel::SplitArcs.build(2, Resolution::default()).unwrap();
        let s = star(k);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for y in s.sample(&mut rng, 500, None) {
            assert!(s.gauge(&y).unwrap() <= 1.0 + 1e-12);
        }
    }
}
