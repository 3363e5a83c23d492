//! Functions on the fiber sphere S^{k-1}, stored spectrally by harmonic degree.
//!
//! A [`FiberFunction`] is a finite sum of real spherical harmonics; the degree-j
//! block is an eigenspace of the fiber Laplacian with eigenvalue `-j(j+k-2)`.
//! Products are formed pointwise on an exact quadrature grid and re-projected,
//! so the parity/degree structure of products (degree ≤ p+q, parity of p+q) is
//! reproduced to quadrature accuracy rather than assumed.
//!
//! Basis families:
//! * `Sign` (k=1): the two-point fiber S⁰, with the even/odd characters.
//! * `Fourier` (k=2): `1, cos jθ, sin jθ` normalized on the circle.
//! * `Harmonic` (k≥3): hyperspherical harmonics built recursively as
//!   `sin^l θ · C^{(l + (k-2)/2)}_{j-l}(cos θ) · Y_{l,μ}(ξ)` over an inner
//!   S^{k-2} basis.
//! * `Zonal` (k≥3): rotationally symmetric functions, Gegenbauer in cos θ.
//! * `Constant`: degree-0 only, any k.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::gauss_jacobi_sym;

/// Re-exported here because the fiber quadrature owns the sphere measure.
pub use crate::special::sphere_area;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error("fiber functions live on different bases (k/kind/cap mismatch)")]
    KindMismatch,
    #[error("product degree {requested} exceeds the configured cap {cap}")]
    DegreeOverflow { requested: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    Constant,
    Sign,
    Fourier,
    Harmonic,
    Zonal,
}

/// Default degree cap: generous for the low codimensions the full pipelines
/// use, conservative for k ≥ 4 where basis dimensions grow quickly.
pub fn default_cap(k: usize) -> usize {
    if k <= 3 {
        16
    } else {
        6
    }
}

/// Shared, cached basis context: quadrature nodes on S^{k-1} and the values of
/// every basis element at the nodes.
#[derive(Debug)]
pub struct FiberBasis {
    k: usize,
    kind: BasisKind,
    cap: usize,
    /// Quadrature nodes as unit vectors in ℝ^k.
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// `table[j][m][node]`: orthonormal basis values.
    table: Vec<Vec<Vec<f64>>>,
    /// Normalization constants matching `table`, for off-grid evaluation.
    norms: Vec<Vec<f64>>,
    area: f64,
}

static CACHE: Lazy<Mutex<HashMap<(usize, BasisKind, usize), Arc<FiberBasis>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

impl FiberBasis {
    /// Fetches (building and caching if needed) the basis for `(k, kind, cap)`.
    pub fn get(k: usize, kind: BasisKind, cap: usize) -> Arc<FiberBasis> {
        let cap = match kind {
            BasisKind::Constant => 0,
            BasisKind::Sign => cap.min(1),
            _ => cap,
        };
        let key = (k, kind, cap);
        let mut cache = CACHE.lock().unwrap();
        if let Some(b) = cache.get(&key) {
            return b.clone();
        }
        let built = Arc::new(Self::build(k, kind, cap));
        cache.insert(key, built.clone());
        built
    }

    /// The full harmonic basis appropriate for the codimension.
    pub fn full(k: usize, cap: usize) -> Arc<FiberBasis> {
        let kind = match k {
            1 => BasisKind::Sign,
            2 => BasisKind::Fourier,
            _ => BasisKind::Harmonic,
        };
        Self::get(k, kind, cap)
    }

    pub fn full_default(k: usize) -> Arc<FiberBasis> {
        Self::full(k, default_cap(k))
    }

    fn build(k: usize, kind: BasisKind, cap: usize) -> FiberBasis {
        assert!(k >= 1, "codimension must be at least 1");
        match kind {
            BasisKind::Constant => Self::build_constant(k),
            BasisKind::Sign => {
                assert_eq!(k, 1, "Sign basis is the k=1 fiber");
                Self::build_sign()
            }
            BasisKind::Fourier => {
                assert_eq!(k, 2, "Fourier basis is the k=2 fiber");
                Self::build_full(2, cap)
            }
            BasisKind::Harmonic => {
                assert!(k >= 3, "Harmonic basis needs k >= 3");
                Self::build_full(k, cap)
            }
            BasisKind::Zonal => {
                assert!(k >= 3, "Zonal basis needs k >= 3 (use Fourier for k=2)");
                Self::build_zonal(k, cap)
            }
        }
    }

    fn build_constant(k: usize) -> FiberBasis {
        let area = sphere_area(k);
        let mut pole = vec![0.0; k];
        pole[k - 1] = 1.0;
        FiberBasis {
            k,
            kind: BasisKind::Constant,
            cap: 0,
            nodes: vec![pole],
            weights: vec![area],
            table: vec![vec![vec![1.0 / area.sqrt()]]],
            norms: vec![vec![1.0 / area.sqrt()]],
            area,
        }
    }

    fn build_sign() -> FiberBasis {
        let r = 0.5f64.sqrt();
        FiberBasis {
            k: 1,
            kind: BasisKind::Sign,
            cap: 1,
            nodes: vec![vec![1.0], vec![-1.0]],
            weights: vec![1.0, 1.0],
            table: vec![vec![vec![r, r]], vec![vec![r, -r]]],
            norms: vec![vec![r], vec![r]],
            area: 2.0,
        }
    }

    fn build_zonal(k: usize, cap: usize) -> FiberBasis {
        let exact_deg = 2 * cap + 2;
        let n_nodes = exact_deg / 2 + 2;
        let rule = gauss_jacobi_sym(n_nodes, k as i32 - 3);
        let inner_area = sphere_area(k - 1);
        let nodes: Vec<Vec<f64>> = rule
            .nodes
            .iter()
            .map(|&x| {
                let s = (1.0 - x * x).max(0.0).sqrt();
                let mut p = vec![0.0; k];
                p[0] = s;
                p[k - 1] = x;
                p
            })
            .collect();
        let weights: Vec<f64> = rule.weights.iter().map(|&w| w * inner_area).collect();
        let area: f64 = weights.iter().sum();

        let lambda = (k as f64 - 2.0) / 2.0;
        let mut table = Vec::with_capacity(cap + 1);
        let mut norms = Vec::with_capacity(cap + 1);
        for j in 0..=cap {
            let raw: Vec<f64> = rule
                .nodes
                .iter()
                .map(|&x| gegenbauer(j, lambda, x))
                .collect();
            let nrm2: f64 = raw
                .iter()
                .zip(&weights)
                .map(|(&v, &w)| w * v * v)
                .sum();
            let inv = 1.0 / nrm2.sqrt();
            table.push(vec![raw.iter().map(|&v| v * inv).collect()]);
            norms.push(vec![inv]);
        }
        FiberBasis {
            k,
            kind: BasisKind::Zonal,
            cap,
            nodes,
            weights,
            table,
            norms,
            area,
        }
    }

    fn build_full(k: usize, cap: usize) -> FiberBasis {
        let exact_deg = 2 * cap + 2;
        let (nodes, weights) = sphere_rule(k, exact_deg);
        let area: f64 = weights.iter().sum();
        let mut table: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cap + 1);
        let mut norms: Vec<Vec<f64>> = Vec::with_capacity(cap + 1);
        for j in 0..=cap {
            let dim = harmonic_dim(k, j);
            table.push(vec![Vec::with_capacity(nodes.len()); dim]);
            norms.push(vec![0.0; dim]);
        }
        let mut scratch = vec![Vec::new(); cap + 1];
        for node in &nodes {
            eval_full_raw(k, cap, node, &mut scratch);
            for (j, row) in scratch.iter().enumerate() {
                for (m, &v) in row.iter().enumerate() {
                    table[j][m].push(v);
                }
            }
        }
        for j in 0..=cap {
            for m in 0..table[j].len() {
                let nrm2: f64 = table[j][m]
                    .iter()
                    .zip(&weights)
                    .map(|(&v, &w)| w * v * v)
                    .sum();
                let inv = 1.0 / nrm2.sqrt();
                norms[j][m] = inv;
                for v in table[j][m].iter_mut() {
                    *v *= inv;
                }
            }
        }
        let kind = if k == 2 {
            BasisKind::Fourier
        } else {
            BasisKind::Harmonic
        };
        FiberBasis {
            k,
            kind,
            cap,
            nodes,
            weights,
            table,
            norms,
            area,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Dimension of the representable degree-j block.
    pub fn dim(&self, j: usize) -> usize {
        self.table.get(j).map_or(0, |row| row.len())
    }

    /// Values of the orthonormal basis element `(j, m)` at the quadrature nodes.
    pub fn basis_values(&self, j: usize, m: usize) -> &[f64] {
        &self.table[j][m]
    }

    /// Evaluates basis element `(j, m)` at an arbitrary unit vector.
    pub fn basis_at(&self, j: usize, m: usize, dir: &[f64]) -> f64 {
        assert_eq!(dir.len(), self.k);
        match self.kind {
            BasisKind::Constant => self.norms[0][0],
            BasisKind::Sign => {
                let v = if j == 0 { 1.0 } else { dir[0] };
                v * self.norms[j][m]
            }
            BasisKind::Zonal => {
                let lambda = (self.k as f64 - 2.0) / 2.0;
                gegenbauer(j, lambda, dir[self.k - 1]) * self.norms[j][m]
            }
            BasisKind::Fourier | BasisKind::Harmonic => {
                let mut scratch = vec![Vec::new(); j + 1];
                eval_full_raw(self.k, j, dir, &mut scratch);
                scratch[j][m] * self.norms[j][m]
            }
        }
    }

    /// The Gram matrix of all basis elements up to `max_deg` under quadrature.
    /// Exposed for the orthonormality diagnostics.
    pub fn gram_max_defect(&self, max_deg: usize) -> f64 {
        let mut flat: Vec<&[f64]> = Vec::new();
        for j in 0..=max_deg.min(self.cap) {
            for m in 0..self.dim(j) {
                flat.push(self.basis_values(j, m));
            }
        }
        let mut worst = 0.0f64;
        for (i, vi) in flat.iter().enumerate() {
            for (l, vl) in flat.iter().enumerate().skip(i) {
                let g: f64 = vi
                    .iter()
                    .zip(vl.iter())
                    .zip(&self.weights)
                    .map(|((&a, &b), &w)| w * a * b)
                    .sum();
                let target = if i == l { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// dim ℋ_j(S^{k-1}); zero for j ≥ 2 on S⁰.
pub fn harmonic_dim(k: usize, j: usize) -> usize {
    match k {
        1 => {
            if j <= 1 {
                1
            } else {
                0
            }
        }
        2 => {
            if j == 0 {
                1
            } else {
                2
            }
        }
        _ => (0..=j).map(|l| harmonic_dim(k - 1, l)).sum(),
    }
}

/// Product quadrature on S^{k-1}, exact for polynomials of degree ≤ `deg`.
fn sphere_rule(k: usize, deg: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    match k {
        1 => (vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]),
        2 => {
            let m = deg + 2;
            let step = 2.0 * std::f64::consts::PI / m as f64;
            let nodes = (0..m)
                .map(|i| {
                    let th = step * i as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect();
            (nodes, vec![step; m])
        }
        _ => {
            let n = deg / 2 + 2;
            let rule = gauss_jacobi_sym(n, k as i32 - 3);
            let (inner_nodes, inner_weights) = sphere_rule(k - 1, deg);
            let mut nodes = Vec::with_capacity(n * inner_nodes.len());
            let mut weights = Vec::with_capacity(n * inner_nodes.len());
            for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
                let s = (1.0 - x * x).max(0.0).sqrt();
                for (xi, &wi) in inner_nodes.iter().zip(&inner_weights) {
                    let mut p: Vec<f64> = xi.iter().map(|&c| c * s).collect();
                    p.push(x);
                    nodes.push(p);
                    weights.push(wx * wi);
                }
            }
            (nodes, weights)
        }
    }
}

/// Gegenbauer C_m^{(λ)}(x) by the standard recurrence (λ > 0).
fn gegenbauer(m: usize, lambda: f64, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mut pm1 = 1.0;
    let mut p = 2.0 * lambda * x;
    for i in 2..=m {
        let ifl = i as f64;
        let next = (2.0 * x * (ifl + lambda - 1.0) * p - (ifl + 2.0 * lambda - 2.0) * pm1) / ifl;
        pm1 = p;
        p = next;
    }
    p
}

/// Un-normalized stacked harmonics up to degree `cap` at `dir`, written into
/// `out[j][m]`. Enumeration for k ≥ 3: m ↔ (l, μ) with l = 0..=j ascending and
/// μ running over the inner S^{k-2} basis of degree l.
fn eval_full_raw(k: usize, cap: usize, dir: &[f64], out: &mut [Vec<f64>]) {
    match k {
        1 => {
            for (j, row) in out.iter_mut().enumerate().take(cap + 1) {
                row.clear();
                if j == 0 {
                    row.push(1.0);
                } else if j == 1 {
                    row.push(dir[0]);
                }
            }
        }
        2 => {
            let th = dir[1].atan2(dir[0]);
            for (j, row) in out.iter_mut().enumerate().take(cap + 1) {
                row.clear();
                if j == 0 {
                    row.push(1.0);
                } else {
                    let a = j as f64 * th;
                    row.push(a.cos());
                    row.push(a.sin());
                }
            }
        }
        _ => {
            let x = dir[k - 1].clamp(-1.0, 1.0);
            let s = (1.0 - x * x).max(0.0).sqrt();
            let xi: Vec<f64> = if s > 1e-14 {
                dir[..k - 1].iter().map(|&c| c / s).collect()
            } else {
                let mut e = vec![0.0; k - 1];
                e[0] = 1.0;
                e
            };
            let mut inner = vec![Vec::new(); cap + 1];
            eval_full_raw(k - 1, cap, &xi, &mut inner);
            let mut s_pow = vec![1.0; cap + 1];
            for l in 1..=cap {
                s_pow[l] = s_pow[l - 1] * s;
            }
            for j in 0..=cap {
                out[j].clear();
                for (l, inner_row) in inner.iter().enumerate().take(j + 1) {
                    let lambda = l as f64 + (k as f64 - 2.0) / 2.0;
                    let radial = s_pow[l] * gegenbauer(j - l, lambda, x);
                    for &y in inner_row {
                        out[j].push(radial * y);
                    }
                }
            }
        }
    }
}

/// A function on S^{k-1} stored by harmonic degree in an orthonormal basis.
#[derive(Debug, Clone)]
pub struct FiberFunction {
    basis: Arc<FiberBasis>,
    /// `coeffs[j][m]`; truncated at the highest degree used.
    coeffs: Vec<Vec<f64>>,
}

impl FiberFunction {
    pub fn zero(basis: &Arc<FiberBasis>) -> Self {
        FiberFunction {
            basis: basis.clone(),
            coeffs: vec![vec![0.0; basis.dim(0)]],
        }
    }

    pub fn constant(basis: &Arc<FiberBasis>, value: f64) -> Self {
        let mut f = Self::zero(basis);
        f.coeffs[0][0] = value * basis.area().sqrt();
        f
    }

    /// The coordinate restriction `c_a = ω_a`, a degree-1 harmonic.
    pub fn coordinate(basis: &Arc<FiberBasis>, a: usize) -> Self {
        assert!(a < basis.k(), "coordinate index out of range");
        match basis.kind() {
            BasisKind::Constant => panic!("constant basis cannot represent coordinates"),
            BasisKind::Zonal => assert_eq!(
                a,
                basis.k() - 1,
                "zonal basis only represents the polar-axis coordinate"
            ),
            _ => {}
        }
        Self::project_fn(basis, |p| p[a], 1)
    }

    /// Projects a pointwise function onto degrees ≤ `max_degree`.
    pub fn project_fn<F: Fn(&[f64]) -> f64>(
        basis: &Arc<FiberBasis>,
        f: F,
        max_degree: usize,
    ) -> Self {
        assert!(max_degree <= basis.cap());
        let values: Vec<f64> = basis.nodes().iter().map(|p| f(p)).collect();
        Self::project_values(basis, &values, max_degree)
    }

    fn project_values(basis: &Arc<FiberBasis>, values: &[f64], max_degree: usize) -> Self {
        let mut coeffs = Vec::with_capacity(max_degree + 1);
        for j in 0..=max_degree {
            let mut row = Vec::with_capacity(basis.dim(j));
            for m in 0..basis.dim(j) {
                let bv = basis.basis_values(j, m);
                let c: f64 = values
                    .iter()
                    .zip(bv)
                    .zip(basis.weights())
                    .map(|((&v, &b), &w)| w * v * b)
                    .sum();
                row.push(c);
            }
            coeffs.push(row);
        }
        FiberFunction {
            basis: basis.clone(),
            coeffs,
        }
    }

    pub fn from_coeffs(basis: &Arc<FiberBasis>, coeffs: Vec<Vec<f64>>) -> Self {
        for (j, row) in coeffs.iter().enumerate() {
            assert_eq!(row.len(), basis.dim(j), "degree-{j} block has wrong size");
        }
        FiberFunction {
            basis: basis.clone(),
            coeffs,
        }
    }

    pub fn basis(&self) -> &Arc<FiberBasis> {
        &self.basis
    }

    pub fn k(&self) -> usize {
        self.basis.k()
    }

    pub fn kind(&self) -> BasisKind {
        self.basis.kind()
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// Highest degree with a coefficient above `tol` in norm.
    pub fn max_degree(&self, tol: f64) -> usize {
        (0..self.coeffs.len())
            .rev()
            .find(|&j| self.degree_norm(j) > tol)
            .unwrap_or(0)
    }

    /// Number of stored degree blocks minus one.
    pub fn stored_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// L² norm of the degree-j component (coefficient norm; Parseval).
    pub fn degree_norm(&self, j: usize) -> f64 {
        self.coeffs
            .get(j)
            .map_or(0.0, |row| row.iter().map(|c| c * c).sum::<f64>().sqrt())
    }

    /// The degree-j projection π_j(f) as a function.
    pub fn project(&self, j: usize) -> Self {
        let mut coeffs: Vec<Vec<f64>> = (0..=j.min(self.coeffs.len() - 1))
            .map(|d| vec![0.0; self.coeffs[d].len()])
            .collect();
        if j < self.coeffs.len() {
            coeffs[j] = self.coeffs[j].clone();
        }
        FiberFunction {
            basis: self.basis.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        FiberFunction {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| c * s).collect())
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert!(self.same_basis(rhs), "basis mismatch in add");
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for j in 0..len {
            let dim = self.basis.dim(j);
            let mut row = vec![0.0; dim];
            for (m, rm) in row.iter_mut().enumerate() {
                *rm = self.coeff(j, m) + rhs.coeff(j, m);
            }
            coeffs.push(row);
        }
        FiberFunction {
            basis: self.basis.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-1.0))
    }

    pub fn coeff(&self, j: usize, m: usize) -> f64 {
        self.coeffs
            .get(j)
            .and_then(|row| row.get(m))
            .copied()
            .unwrap_or(0.0)
    }

    fn same_basis(&self, rhs: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &rhs.basis)
            || (self.basis.k() == rhs.basis.k()
                && self.basis.kind() == rhs.basis.kind()
                && self.basis.cap() == rhs.basis.cap())
    }

    /// Pointwise product, re-projected onto harmonics of degree ≤ J_f + J_g.
    ///
    /// A `Constant`-basis factor acts as a scalar on any partner of the same k.
    pub fn multiply(&self, rhs: &Self) -> Result<Self, FiberError> {
        if self.kind() == BasisKind::Constant {
            return Ok(rhs.scale(self.fiber_average()));
        }
        if rhs.kind() == BasisKind::Constant {
            return Ok(self.scale(rhs.fiber_average()));
        }
        if !self.same_basis(rhs) {
            return Err(FiberError::KindMismatch);
        }
        let tol = 1e-13 * self.l2_norm().max(rhs.l2_norm()).max(1.0);
        let jf = self.max_degree(tol);
        let jg = rhs.max_degree(tol);
        // On S⁰ every function has degree ≤ 1, so products always fit.
        let target = if self.k() == 1 {
            (jf + jg).min(1)
        } else {
            jf + jg
        };
        if target > self.basis.cap() {
            return Err(FiberError::DegreeOverflow {
                requested: target,
                cap: self.basis.cap(),
            });
        }
        let vf = self.node_values();
        let vg = rhs.node_values();
        let prod: Vec<f64> = vf.iter().zip(&vg).map(|(a, b)| a * b).collect();
        Ok(Self::project_values(&self.basis, &prod, target))
    }

    /// Values at the quadrature nodes.
    pub fn node_values(&self) -> Vec<f64> {
        let n = self.basis.nodes().len();
        let mut vals = vec![0.0; n];
        for (j, row) in self.coeffs.iter().enumerate() {
            for (m, &c) in row.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (v, &b) in vals.iter_mut().zip(self.basis.basis_values(j, m)) {
                    *v += c * b;
                }
            }
        }
        vals
    }

    /// Evaluation at an arbitrary unit direction.
    pub fn eval(&self, dir: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (j, row) in self.coeffs.iter().enumerate() {
            for (m, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    acc += c * self.basis.basis_at(j, m, dir);
                }
            }
        }
        acc
    }

    /// Spectral fiber Laplacian: degree-j block scaled by `-j(j+k-2)`.
    pub fn laplacian(&self) -> Self {
        let k = self.k() as f64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let ev = -(j as f64) * (j as f64 + k - 2.0);
                row.iter().map(|c| c * ev).collect()
            })
            .collect();
        FiberFunction {
            basis: self.basis.clone(),
            coeffs,
        }
    }

    /// ⟨df, dg⟩ on the fiber via ½(Δ(fg) − f Δg − g Δf).
    pub fn grad_inner(&self, rhs: &Self) -> Result<Self, FiberError> {
        let fg = self.multiply(rhs)?;
        let t1 = fg.laplacian();
        let t2 = self.multiply(&rhs.laplacian())?;
        let t3 = rhs.multiply(&self.laplacian())?;
        Ok(t1.sub(&t2).sub(&t3).scale(0.5))
    }

    /// Mean value over the fiber: π₀ coefficient over √area.
    pub fn fiber_average(&self) -> f64 {
        self.coeff(0, 0) / self.basis.area().sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|row| row.iter())
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Quadrature integral of f over the fiber.
    pub fn integral(&self) -> f64 {
        self.fiber_average() * self.basis.area()
    }

    /// Serializable view (basis metadata + raw coefficients).
    pub fn to_dto(&self) -> FiberFunctionDto {
        FiberFunctionDto {
            k: self.k(),
            kind: self.kind(),
            coeffs: self.coeffs.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberFunctionDto {
    pub k: usize,
    pub kind: BasisKind,
    pub coeffs: Vec<Vec<f64>>,
}

/// Report from [`parity_degree_check`].
#[derive(Debug, Clone)]
pub struct ParityReport {
    pub ok: bool,
    pub worst_violation: f64,
    /// (series index, offending degree, component norm) for each violation.
    pub violations: Vec<(usize, usize, f64)>,
}

/// Checks that entry j of `series` lies in the parity class 𝒴_j: components
/// only in degrees ≤ j with degree ≡ j (mod 2), each violation measured in the
/// coefficient (= quadrature L²) norm against `tol`.
pub fn parity_degree_check(series: &[FiberFunction], tol: f64) -> ParityReport {
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for (idx, f) in series.iter().enumerate() {
        for d in 0..=f.stored_degree() {
            let norm = f.degree_norm(d);
            let bad_parity = (idx as i64 - d as i64) % 2 != 0;
            let bad_degree = d > idx;
            if (bad_parity || bad_degree) && norm > tol {
                violations.push((idx, d, norm));
            }
            if bad_parity || bad_degree {
                worst = worst.max(norm);
            }
        }
    }
    ParityReport {
        ok: violations.is_empty(),
        worst_violation: worst,
        violations,
    }
}
