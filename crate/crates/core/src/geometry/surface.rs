//! Parametrized surface grids: catalog models, file I/O, differentiation,
//! and pointwise extrinsic invariants.
//!
//! Grids are structured (u, v) samplings of an embedding X: doubly periodic
//! (tori, Fourier differentiation) or spherical (Gauss–Legendre polar nodes,
//! analytic derivatives from the catalog). Invariants are frame-free where
//! possible; full Fermi point data (with a pointwise orthonormal normal frame)
//! is built on demand for the spectral pipeline.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Ambient, FermiPointData, GeometryError, MetricJet};
use crate::fiber::FiberBasis;
use crate::quad::gauss_legendre;

/// Analytic first and second derivatives of the embedding at every grid point.
#[derive(Debug, Clone)]
pub struct SurfaceJets {
    pub du: Vec<DVector<f64>>,
    pub dv: Vec<DVector<f64>>,
    pub duu: Vec<DVector<f64>>,
    pub duv: Vec<DVector<f64>>,
    pub dvv: Vec<DVector<f64>>,
}

/// A structured parametrization grid of a surface Σ² in a model ambient.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub name: String,
    pub nu: usize,
    pub nv: usize,
    pub periodic_u: bool,
    pub periodic_v: bool,
    pub ambient: Ambient,
    /// Codimension k; the ambient manifold has dimension 2 + k.
    pub codim: usize,
    /// Embedding positions, row-major (`iu * nv + iv`), in ℝ^{2+k} for a flat
    /// ambient or ℝ^{3+k} for the unit sphere.
    pub pos: Vec<DVector<f64>>,
    pub jets: Option<SurfaceJets>,
    /// Integration weights and parameter Jacobians per grid line, so that
    /// `Σ f(p) · w_u j_u · w_v j_v · √det h₀` integrates f over Σ.
    pub u_weights: Vec<f64>,
    pub v_weights: Vec<f64>,
    pub u_jacobian: Vec<f64>,
    pub v_jacobian: Vec<f64>,
}

/// Frame-free pointwise invariants plus the normal-frame components needed to
/// build a [`MetricJet`].
#[derive(Debug, Clone)]
pub struct PointInvariants {
    pub h0: DMatrix<f64>,
    /// |𝔥|².
    pub mean_sq: f64,
    /// |𝔏|².
    pub l_sq: f64,
    /// |𝔏̊|² = |𝔏|² - |𝔥|²/2.
    pub l_tracefree_sq: f64,
    /// Intrinsic scalar curvature via the Gauss equation.
    pub r_h: f64,
    /// tr_{h₀} P|_{TΣ} of the ambient Schouten tensor.
    pub tr_p: f64,
    pub area_weight: f64,
    /// Orthonormal normal frame (k ambient vectors).
    pub frame: Vec<DVector<f64>>,
    /// 𝔏ᵃ_ij components in that frame.
    pub l_frame: Vec<DMatrix<f64>>,
}

impl SurfaceGrid {
    pub fn idx(&self, iu: usize, iv: usize) -> usize {
        iu * self.nv + iv
    }

    /// Ambient manifold dimension 2 + k.
    pub fn ambient_dim(&self) -> usize {
        2 + self.codim
    }

    fn embed_dim(&self) -> usize {
        match self.ambient {
            Ambient::Flat => 2 + self.codim,
            Ambient::RoundSphere => 3 + self.codim,
        }
    }

    /// Derivative grids: analytic jets if present, else Fourier differentiation
    /// along periodic directions and 4th-order finite differences (uniform
    /// parameter over [0, 2π]) along non-periodic ones.
    fn derivatives(&self) -> Result<SurfaceJets, GeometryError> {
        if let Some(jets) = &self.jets {
            return Ok(jets.clone());
        }
        let d_u = if self.periodic_u {
            spectral_diff_matrix(self.nu)
        } else {
            fd4_diff_matrix(self.nu, 2.0 * std::f64::consts::PI / (self.nu - 1) as f64)
        };
        let d_v = if self.periodic_v {
            spectral_diff_matrix(self.nv)
        } else {
            fd4_diff_matrix(self.nv, 2.0 * std::f64::consts::PI / (self.nv - 1) as f64)
        };
        let dim = self.embed_dim();
        let mut comp = vec![DMatrix::zeros(self.nu, self.nv); dim];
        for iu in 0..self.nu {
            for iv in 0..self.nv {
                let p = &self.pos[self.idx(iu, iv)];
                for c in 0..dim {
                    comp[c][(iu, iv)] = p[c];
                }
            }
        }
        let apply_u = |m: &DMatrix<f64>| &d_u * m;
        let apply_v = |m: &DMatrix<f64>| m * d_v.transpose();
        let du_c: Vec<_> = comp.iter().map(apply_u).collect();
        let dv_c: Vec<_> = comp.iter().map(apply_v).collect();
        let duu_c: Vec<_> = du_c.iter().map(apply_u).collect();
        let duv_c: Vec<_> = du_c.iter().map(apply_v).collect();
        let dvv_c: Vec<_> = dv_c.iter().map(apply_v).collect();
        let collect = |mats: &[DMatrix<f64>]| -> Vec<DVector<f64>> {
            (0..self.nu * self.nv)
                .map(|id| {
                    let (iu, iv) = (id / self.nv, id % self.nv);
                    DVector::from_iterator(dim, mats.iter().map(|m| m[(iu, iv)]))
                })
                .collect()
        };
        Ok(SurfaceJets {
            du: collect(&du_c),
            dv: collect(&dv_c),
            duu: collect(&duu_c),
            duv: collect(&duv_c),
            dvv: collect(&dvv_c),
        })
    }

    /// Per-point extrinsic invariants.
    pub fn invariants(&self) -> Result<Vec<PointInvariants>, GeometryError> {
        let jets = self.derivatives()?;
        let k = self.codim;
        let results: Vec<Result<PointInvariants, GeometryError>> = (0..self.pos.len())
            .into_par_iter()
            .map(|id| {
                let iu = id / self.nv;
                let iv = id % self.nv;
                let x = &self.pos[id];
                let xu = &jets.du[id];
                let xv = &jets.dv[id];
                let mut h0 = DMatrix::zeros(2, 2);
                h0[(0, 0)] = xu.dot(xu);
                h0[(0, 1)] = xu.dot(xv);
                h0[(1, 0)] = h0[(0, 1)];
                h0[(1, 1)] = xv.dot(xv);
                let det = h0[(0, 0)] * h0[(1, 1)] - h0[(0, 1)] * h0[(0, 1)];
                if det < 1e-12 {
                    return Err(GeometryError::DegenerateMetric { det, index: id });
                }
                // Span to remove: tangents, plus the sphere radial direction.
                let mut killed: Vec<DVector<f64>> = Vec::with_capacity(3);
                if self.ambient == Ambient::RoundSphere {
                    killed.push(x.normalize());
                }
                killed.push(xu.clone());
                killed.push(xv.clone());
                let killed = orthonormalize(&killed);
                let frame = normal_frame(&killed, self.embed_dim(), k, id);
                let project = |v: &DVector<f64>| -> DVector<f64> {
                    let mut w = v.clone();
                    for b in &killed {
                        let c = w.dot(b);
                        w -= b * c;
                    }
                    w
                };
                let l_uu = project(&jets.duu[id]);
                let l_uv = project(&jets.duv[id]);
                let l_vv = project(&jets.dvv[id]);
                let hinv = h0.clone().try_inverse().unwrap();
                // mean curvature vector h^{ij} L_ij
                let hvec = &l_uu * hinv[(0, 0)] + &l_uv * (2.0 * hinv[(0, 1)]) + &l_vv * hinv[(1, 1)];
                let mean_sq = hvec.dot(&hvec);
                // |L|² = h^{ik}h^{jl} <L_ij, L_kl>
                let lmat = [[&l_uu, &l_uv], [&l_uv, &l_vv]];
                let mut l_sq = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        for p in 0..2 {
                            for q in 0..2 {
                                l_sq += hinv[(i, p)] * hinv[(j, q)] * lmat[i][j].dot(lmat[p][q]);
                            }
                        }
                    }
                }
                let l_tracefree_sq = l_sq - 0.5 * mean_sq;
                let k_amb = match self.ambient {
                    Ambient::Flat => 0.0,
                    Ambient::RoundSphere => 1.0,
                };
                let r_h = 2.0 * k_amb + mean_sq - l_sq;
                let d = (2 + k) as f64;
                let tr_p = match self.ambient {
                    Ambient::Flat => 0.0,
                    // P = g/2 on the unit sphere, any dimension.
                    Ambient::RoundSphere => {
                        let _ = d;
                        1.0
                    }
                };
                let area_weight = self.u_weights[iu]
                    * self.u_jacobian[iu]
                    * self.v_weights[iv]
                    * self.v_jacobian[iv]
                    * det.sqrt();
                let l_frame: Vec<DMatrix<f64>> = frame
                    .iter()
                    .map(|na| {
                        let mut m = DMatrix::zeros(2, 2);
                        m[(0, 0)] = l_uu.dot(na);
                        m[(0, 1)] = l_uv.dot(na);
                        m[(1, 0)] = m[(0, 1)];
                        m[(1, 1)] = l_vv.dot(na);
                        m
                    })
                    .collect();
                Ok(PointInvariants {
                    h0,
                    mean_sq,
                    l_sq,
                    l_tracefree_sq,
                    r_h,
                    tr_p,
                    area_weight,
                    frame,
                    l_frame,
                })
            })
            .collect();
        results.into_iter().collect()
    }

    /// Full Fermi point data (jets, γ₁, 2γ₂ - γ₁²) for the spectral pipeline.
    pub fn fermi_data(
        &self,
        basis: &Arc<FiberBasis>,
    ) -> Result<Vec<FermiPointData>, GeometryError> {
        assert_eq!(basis.k(), self.codim);
        let inv = self.invariants()?;
        Ok(inv
            .into_iter()
            .map(|p| {
                let jet = match self.ambient {
                    Ambient::Flat => {
                        MetricJet::flat(2, self.codim, p.h0.clone(), p.l_frame.clone())
                    }
                    Ambient::RoundSphere => {
                        MetricJet::round_sphere(2, self.codim, p.h0.clone(), p.l_frame.clone())
                    }
                };
                FermiPointData::from_jet(jet, basis, p.r_h, p.area_weight)
            })
            .collect())
    }

    /// Total area from the stored quadrature weights.
    pub fn area(&self) -> Result<f64, GeometryError> {
        Ok(self.invariants()?.iter().map(|p| p.area_weight).sum())
    }

    /// Intrinsic Gauss curvature (Brioschi formula) on doubly periodic grids,
    /// from spectral derivatives of the first fundamental form alone.
    pub fn intrinsic_gauss_curvature(&self) -> Result<Vec<f64>, GeometryError> {
        if !(self.periodic_u && self.periodic_v) {
            return Err(GeometryError::BadSurfaceFile(
                "intrinsic curvature needs a doubly periodic grid".into(),
            ));
        }
        let jets = self.derivatives()?;
        let mut e = DMatrix::zeros(self.nu, self.nv);
        let mut f = DMatrix::zeros(self.nu, self.nv);
        let mut g = DMatrix::zeros(self.nu, self.nv);
        for iu in 0..self.nu {
            for iv in 0..self.nv {
                let id = self.idx(iu, iv);
                e[(iu, iv)] = jets.du[id].dot(&jets.du[id]);
                f[(iu, iv)] = jets.du[id].dot(&jets.dv[id]);
                g[(iu, iv)] = jets.dv[id].dot(&jets.dv[id]);
            }
        }
        let d_u = spectral_diff_matrix(self.nu);
        let d_v = spectral_diff_matrix(self.nv);
        let du = |m: &DMatrix<f64>| &d_u * m;
        let dv = |m: &DMatrix<f64>| m * d_v.transpose();
        let (e_u, e_v) = (du(&e), dv(&e));
        let (f_u, f_v) = (du(&f), dv(&f));
        let (g_u, g_v) = (du(&g), dv(&g));
        let e_vv = dv(&e_v);
        let f_uv = dv(&f_u);
        let g_uu = du(&g_u);
        let mut out = vec![0.0; self.nu * self.nv];
        for iu in 0..self.nu {
            for iv in 0..self.nv {
                let id = self.idx(iu, iv);
                let (ee, ff, gg) = (e[(iu, iv)], f[(iu, iv)], g[(iu, iv)]);
                let m1 = DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        -0.5 * e_vv[(iu, iv)] + f_uv[(iu, iv)] - 0.5 * g_uu[(iu, iv)],
                        0.5 * e_u[(iu, iv)],
                        f_u[(iu, iv)] - 0.5 * e_v[(iu, iv)],
                        f_v[(iu, iv)] - 0.5 * g_u[(iu, iv)],
                        ee,
                        ff,
                        0.5 * g_v[(iu, iv)],
                        ff,
                        gg,
                    ],
                );
                let m2 = DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        0.0,
                        0.5 * e_v[(iu, iv)],
                        0.5 * g_u[(iu, iv)],
                        0.5 * e_v[(iu, iv)],
                        ee,
                        ff,
                        0.5 * g_u[(iu, iv)],
                        ff,
                        gg,
                    ],
                );
                let den = (ee * gg - ff * ff).powi(2);
                out[id] = (m1.determinant() - m2.determinant()) / den;
            }
        }
        Ok(out)
    }

    /// Stereographic image in flat ℝ^{d} of a doubly periodic grid on the unit
    /// sphere S^{d} ⊂ ℝ^{d+1}, projecting from the pole (0,…,0,1).
    pub fn stereographic_image(&self) -> Result<SurfaceGrid, GeometryError> {
        if self.ambient != Ambient::RoundSphere {
            return Err(GeometryError::BadSurfaceFile(
                "stereographic projection needs a sphere-ambient grid".into(),
            ));
        }
        if !(self.periodic_u && self.periodic_v) {
            return Err(GeometryError::BadSurfaceFile(
                "stereographic image needs a doubly periodic grid".into(),
            ));
        }
        let d = self.embed_dim();
        let pos = self
            .pos
            .iter()
            .map(|x| {
                let denom = 1.0 - x[d - 1];
                if denom.abs() < 1e-9 {
                    return Err(GeometryError::BadSurfaceFile(
                        "surface passes through the projection pole".into(),
                    ));
                }
                Ok(DVector::from_iterator(d - 1, (0..d - 1).map(|c| x[c] / denom)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SurfaceGrid {
            name: format!("{}|stereographic", self.name),
            nu: self.nu,
            nv: self.nv,
            periodic_u: true,
            periodic_v: true,
            ambient: Ambient::Flat,
            codim: self.codim,
            pos,
            jets: None,
            u_weights: self.u_weights.clone(),
            v_weights: self.v_weights.clone(),
            u_jacobian: self.u_jacobian.clone(),
            v_jacobian: self.v_jacobian.clone(),
        })
    }

    /// Serializes the grid in the structured text format (see [`parse`]).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# syren surface v1").unwrap();
        writeln!(s, "nu {}", self.nu).unwrap();
        writeln!(s, "nv {}", self.nv).unwrap();
        writeln!(s, "periodic_u {}", self.periodic_u).unwrap();
        writeln!(s, "periodic_v {}", self.periodic_v).unwrap();
        let amb = match self.ambient {
            Ambient::Flat => "flat",
            Ambient::RoundSphere => "sphere",
        };
        writeln!(s, "ambient {} {}", amb, self.ambient_dim()).unwrap();
        for iu in 0..self.nu {
            for iv in 0..self.nv {
                let p = &self.pos[self.idx(iu, iv)];
                let coords: Vec<String> = p.iter().map(|c| format!("{c:.17e}")).collect();
                writeln!(s, "point {} {} {}", iu, iv, coords.join(" ")).unwrap();
            }
        }
        s
    }

    /// Parses the structured text format. Doubly periodic grids only (other
    /// topologies come from the analytic catalog).
    pub fn parse(text: &str) -> Result<SurfaceGrid, GeometryError> {
        let bad = |m: &str| GeometryError::BadSurfaceFile(m.to_string());
        let mut nu = None;
        let mut nv = None;
        let mut periodic_u = true;
        let mut periodic_v = true;
        let mut ambient = None;
        let mut codim = None;
        let mut points: Vec<(usize, usize, Vec<f64>)> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok[0] {
                "nu" => nu = Some(tok[1].parse().map_err(|_| bad("bad nu"))?),
                "nv" => nv = Some(tok[1].parse().map_err(|_| bad("bad nv"))?),
                "periodic_u" => periodic_u = tok[1] == "true",
                "periodic_v" => periodic_v = tok[1] == "true",
                "ambient" => {
                    let dim: usize = tok[2].parse().map_err(|_| bad("bad ambient dim"))?;
                    if dim < 3 {
                        return Err(bad("ambient dimension must be at least 3"));
                    }
                    ambient = Some(match tok[1] {
                        "flat" => Ambient::Flat,
                        "sphere" => Ambient::RoundSphere,
                        other => return Err(bad(&format!("unknown ambient `{other}`"))),
                    });
                    codim = Some(dim - 2);
                }
                "point" => {
                    let iu: usize = tok[1].parse().map_err(|_| bad("bad point index"))?;
                    let iv: usize = tok[2].parse().map_err(|_| bad("bad point index"))?;
                    let coords = tok[3..]
                        .iter()
                        .map(|c| c.parse().map_err(|_| bad("bad coordinate")))
                        .collect::<Result<Vec<f64>, _>>()?;
                    points.push((iu, iv, coords));
                }
                other => return Err(bad(&format!("unknown directive `{other}`"))),
            }
        }
        let nu = nu.ok_or_else(|| bad("missing nu"))?;
        let nv = nv.ok_or_else(|| bad("missing nv"))?;
        let ambient = ambient.ok_or_else(|| bad("missing ambient"))?;
        let codim = codim.unwrap();
        let embed = match ambient {
            Ambient::Flat => 2 + codim,
            Ambient::RoundSphere => 3 + codim,
        };
        if points.len() != nu * nv {
            return Err(bad(&format!(
                "expected {} points, found {}",
                nu * nv,
                points.len()
            )));
        }
        let mut pos = vec![DVector::zeros(embed); nu * nv];
        for (iu, iv, coords) in points {
            if iu >= nu || iv >= nv || coords.len() != embed {
                return Err(bad("point record out of range"));
            }
            pos[iu * nv + iv] = DVector::from_vec(coords);
        }
        // periodic lines sample [0, 2π) uniformly; non-periodic ones sample
        // [0, 2π] inclusive (trapezoid weights). Invariants and integrals do
        // not depend on this affine convention.
        let line_weights = |n: usize, periodic: bool| -> Vec<f64> {
            let tau = 2.0 * std::f64::consts::PI;
            if periodic {
                vec![tau / n as f64; n]
            } else {
                let h = tau / (n - 1) as f64;
                (0..n)
                    .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
                    .collect()
            }
        };
        Ok(SurfaceGrid {
            name: "file".into(),
            nu,
            nv,
            periodic_u,
            periodic_v,
            ambient,
            codim,
            pos,
            jets: None,
            u_weights: line_weights(nu, periodic_u),
            v_weights: line_weights(nv, periodic_v),
            u_jacobian: vec![1.0; nu],
            v_jacobian: vec![1.0; nv],
        })
    }

    /// CSV of per-point invariants (one row per grid point).
    pub fn invariants_csv(&self) -> Result<String, GeometryError> {
        let inv = self.invariants()?;
        let mut s = String::from("iu,iv,area_weight,mean_sq,l_sq,l_tracefree_sq,r_h,tr_p\n");
        for (id, p) in inv.iter().enumerate() {
            writeln!(
                s,
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                id / self.nv,
                id % self.nv,
                p.area_weight,
                p.mean_sq,
                p.l_sq,
                p.l_tracefree_sq,
                p.r_h,
                p.tr_p
            )
            .unwrap();
        }
        Ok(s)
    }
}

/// Gram–Schmidt with degeneracy guard.
fn orthonormalize(vs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for b in &out {
            let c = w.dot(b);
            w -= b * c;
        }
        let n = w.norm();
        assert!(n > 1e-12, "degenerate tangent span");
        out.push(w / n);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `killed`, deterministic
/// per point (seeded from the coordinate axes).
fn normal_frame(killed: &[DVector<f64>], dim: usize, k: usize, _id: usize) -> Vec<DVector<f64>> {
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(k);
    for axis in 0..dim {
        if frame.len() == k {
            break;
        }
        let mut w = DVector::zeros(dim);
        w[axis] = 1.0;
        for b in killed.iter().chain(frame.iter()) {
            let c = w.dot(b);
            w -= b * c;
        }
        let n = w.norm();
        if n > 1e-6 {
            frame.push(w / n);
        }
    }
    assert_eq!(frame.len(), k, "failed to build a normal frame");
    frame
}

/// 4th-order finite-difference differentiation matrix on a uniform open grid
/// with spacing `h`, one-sided stencils at the edges.
pub fn fd4_diff_matrix(n: usize, h: f64) -> DMatrix<f64> {
    assert!(n >= 6, "need at least 6 samples for 4th-order stencils");
    let mut d = DMatrix::zeros(n, n);
    let c = 1.0 / (12.0 * h);
    for i in 2..n - 2 {
        d[(i, i - 2)] = c;
        d[(i, i - 1)] = -8.0 * c;
        d[(i, i + 1)] = 8.0 * c;
        d[(i, i + 2)] = -c;
    }
    // one-sided 5-point stencils, 4th order
    let edge0 = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let edge1 = [-3.0, -10.0, 18.0, -6.0, 1.0];
    for (j, &w) in edge0.iter().enumerate() {
        d[(0, j)] = w * c;
        d[(n - 1, n - 1 - j)] = -w * c;
    }
    for (j, &w) in edge1.iter().enumerate() {
        d[(1, j)] = w * c;
        d[(n - 2, n - 1 - j)] = -w * c;
    }
    d
}

/// Fourier spectral differentiation matrix on a uniform periodic grid over
/// [0, 2π) with an even number of points.
pub fn spectral_diff_matrix(n: usize) -> DMatrix<f64> {
    assert!(n >= 4 && n % 2 == 0, "periodic grids must have even size >= 4");
    let mut d = DMatrix::zeros(n, n);
    let h = std::f64::consts::PI / n as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let diff = i as i64 - j as i64;
                let sign = if diff % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = 0.5 * sign / (h * diff as f64).tan();
            }
        }
    }
    d
}

// ---------------------------------------------------------------------------
// catalog surfaces
// ---------------------------------------------------------------------------

/// Equatorial S² ⊂ S^{2+k}, latitude–longitude grid with Gauss–Legendre polar
/// nodes (so surface integrals of smooth densities are spectrally exact).
pub fn equatorial_sphere(k: usize, n_theta: usize, n_phi: usize) -> SurfaceGrid {
    assert!(k >= 1);
    let dim = 3 + k;
    let rule = gauss_legendre(n_theta);
    let thetas: Vec<f64> = rule.nodes.iter().map(|&x| x.acos()).collect();
    let u_jacobian: Vec<f64> = thetas.iter().map(|&th| 1.0 / th.sin()).collect();
    let phis: Vec<f64> = (0..n_phi)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / n_phi as f64)
        .collect();
    let mut pos = Vec::with_capacity(n_theta * n_phi);
    let mut du = Vec::new();
    let mut dv = Vec::new();
    let mut duu = Vec::new();
    let mut duv = Vec::new();
    let mut dvv = Vec::new();
    for &th in &thetas {
        for &ph in &phis {
            let (st, ct) = (th.sin(), th.cos());
            let (sp, cp) = (ph.sin(), ph.cos());
            let mk = |coords: [f64; 3]| {
                let mut v = DVector::zeros(dim);
                v[0] = coords[0];
                v[1] = coords[1];
                v[2] = coords[2];
                v
            };
            pos.push(mk([st * cp, st * sp, ct]));
            du.push(mk([ct * cp, ct * sp, -st]));
            dv.push(mk([-st * sp, st * cp, 0.0]));
            duu.push(mk([-st * cp, -st * sp, -ct]));
            duv.push(mk([-ct * sp, ct * cp, 0.0]));
            dvv.push(mk([-st * cp, -st * sp, 0.0]));
        }
    }
    SurfaceGrid {
        name: format!("equatorial_sphere(k={k})"),
        nu: n_theta,
        nv: n_phi,
        periodic_u: false,
        periodic_v: true,
        ambient: Ambient::RoundSphere,
        codim: k,
        pos,
        jets: Some(SurfaceJets { du, dv, duu, duv, dvv }),
        u_weights: rule.weights,
        v_weights: vec![2.0 * std::f64::consts::PI / n_phi as f64; n_phi],
        u_jacobian,
        v_jacobian: vec![1.0; n_phi],
    }
}

/// The Clifford torus in S³ (codimension 1 in the sphere).
pub fn clifford_torus(m: usize) -> SurfaceGrid {
    let r = 0.5f64.sqrt();
    let grid_param: Vec<f64> = (0..m)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / m as f64)
        .collect();
    let mut pos = Vec::with_capacity(m * m);
    let mut du = Vec::new();
    let mut dv = Vec::new();
    let mut duu = Vec::new();
    let mut duv = Vec::new();
    let mut dvv = Vec::new();
    for &u in &grid_param {
        for &v in &grid_param {
            let (su, cu) = (u.sin(), u.cos());
            let (sv, cv) = (v.sin(), v.cos());
            pos.push(DVector::from_vec(vec![r * cu, r * su, r * cv, r * sv]));
            du.push(DVector::from_vec(vec![-r * su, r * cu, 0.0, 0.0]));
            dv.push(DVector::from_vec(vec![0.0, 0.0, -r * sv, r * cv]));
            duu.push(DVector::from_vec(vec![-r * cu, -r * su, 0.0, 0.0]));
            duv.push(DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0]));
            dvv.push(DVector::from_vec(vec![0.0, 0.0, -r * cv, -r * sv]));
        }
    }
    SurfaceGrid {
        name: "clifford_torus".into(),
        nu: m,
        nv: m,
        periodic_u: true,
        periodic_v: true,
        ambient: Ambient::RoundSphere,
        codim: 1,
        pos,
        jets: Some(SurfaceJets { du, dv, duu, duv, dvv }),
        u_weights: vec![2.0 * std::f64::consts::PI / m as f64; m],
        v_weights: vec![2.0 * std::f64::consts::PI / m as f64; m],
        u_jacobian: vec![1.0; m],
        v_jacobian: vec![1.0; m],
    }
}

/// Torus of revolution in flat ℝ³: tube radius `a` around a circle of radius `c`.
pub fn torus_of_revolution(a: f64, c: f64, m: usize) -> SurfaceGrid {
    assert!(c > a && a > 0.0, "need c > a > 0 for an embedded torus");
    let grid_param: Vec<f64> = (0..m)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / m as f64)
        .collect();
    let mut pos = Vec::with_capacity(m * m);
    let mut du = Vec::new();
    let mut dv = Vec::new();
    let mut duu = Vec::new();
    let mut duv = Vec::new();
    let mut dvv = Vec::new();
    for &u in &grid_param {
        for &v in &grid_param {
            let (su, cu) = (u.sin(), u.cos());
            let (sv, cv) = (v.sin(), v.cos());
            let w = c + a * cv;
            pos.push(DVector::from_vec(vec![w * cu, w * su, a * sv]));
            du.push(DVector::from_vec(vec![-w * su, w * cu, 0.0]));
            dv.push(DVector::from_vec(vec![-a * sv * cu, -a * sv * su, a * cv]));
            duu.push(DVector::from_vec(vec![-w * cu, -w * su, 0.0]));
            duv.push(DVector::from_vec(vec![a * sv * su, -a * sv * cu, 0.0]));
            dvv.push(DVector::from_vec(vec![-a * cv * cu, -a * cv * su, -a * sv]));
        }
    }
    SurfaceGrid {
        name: format!("torus_of_revolution({a},{c})"),
        nu: m,
        nv: m,
        periodic_u: true,
        periodic_v: true,
        ambient: Ambient::Flat,
        codim: 1,
        pos,
        jets: Some(SurfaceJets { du, dv, duu, duv, dvv }),
        u_weights: vec![2.0 * std::f64::consts::PI / m as f64; m],
        v_weights: vec![2.0 * std::f64::consts::PI / m as f64; m],
        u_jacobian: vec![1.0; m],
        v_jacobian: vec![1.0; m],
    }
}

/// Random low-frequency trigonometric field on the torus, with closed-form
/// derivatives.
#[derive(Debug, Clone)]
struct TrigField {
    /// (p, q, cos amplitude, sin amplitude)
    terms: Vec<(f64, f64, f64, f64)>,
}

impl TrigField {
    fn random<R: Rng>(rng: &mut R, amplitude: f64) -> Self {
        let modes = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (1.0, -2.0)];
        let terms = modes
            .iter()
            .map(|&(p, q)| {
                (
                    p,
                    q,
                    amplitude * rng.gen_range(-1.0..1.0),
                    amplitude * rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        TrigField { terms }
    }

    fn eval(&self, u: f64, v: f64, du: u32, dv: u32) -> f64 {
        self.terms
            .iter()
            .map(|&(p, q, ac, as_)| {
                let phase = p * u + q * v;
                let fac = p.powi(du as i32) * q.powi(dv as i32);
                // each derivative rotates (cos, sin) by π/2
                let rot = (du + dv) % 4;
                let (c, s) = match rot {
                    0 => (phase.cos(), phase.sin()),
                    1 => (-phase.sin(), phase.cos()),
                    2 => (-phase.cos(), -phase.sin()),
                    _ => (phase.sin(), -phase.cos()),
                };
                fac * (ac * c + as_ * s)
            })
            .sum()
    }
}

/// Torus of revolution with seeded random graph perturbations in the normal
/// coordinates of flat ℝ^{2+k}: a height perturbation of the z-coordinate and
/// independent fields along the k-1 extra flat directions.
pub fn graph_perturbation(k: usize, a: f64, c: f64, amplitude: f64, seed: u64, m: usize) -> SurfaceGrid {
    assert!(k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<TrigField> = (0..k).map(|_| TrigField::random(&mut rng, amplitude)).collect();
    let base = torus_of_revolution(a, c, m);
    let dim = 2 + k;
    let lift = |w: &DVector<f64>, u: f64, v: f64, du: u32, dv: u32, with_base: bool| {
        let mut out = DVector::zeros(dim);
        for cidx in 0..3 {
            out[cidx] = w[cidx];
        }
        // field 0 perturbs the z coordinate, fields 1.. fill the extra axes
        if with_base || true {
            out[2] += fields[0].eval(u, v, du, dv);
            for (mth, field) in fields.iter().enumerate().skip(1) {
                out[2 + mth] += field.eval(u, v, du, dv);
            }
        }
        out
    };
    let grid_param: Vec<f64> = (0..m)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / m as f64)
        .collect();
    let jets = base.jets.as_ref().unwrap();
    let mut pos = Vec::with_capacity(m * m);
    let mut du_v = Vec::new();
    let mut dv_v = Vec::new();
    let mut duu_v = Vec::new();
    let mut duv_v = Vec::new();
    let mut dvv_v = Vec::new();
    for (iu, &u) in grid_param.iter().enumerate() {
        for (iv, &v) in grid_param.iter().enumerate() {
            let id = iu * m + iv;
            pos.push(lift(&base.pos[id], u, v, 0, 0, true));
            du_v.push(lift(&jets.du[id], u, v, 1, 0, false));
            dv_v.push(lift(&jets.dv[id], u, v, 0, 1, false));
            duu_v.push(lift(&jets.duu[id], u, v, 2, 0, false));
            duv_v.push(lift(&jets.duv[id], u, v, 1, 1, false));
            dvv_v.push(lift(&jets.dvv[id], u, v, 0, 2, false));
        }
    }
    SurfaceGrid {
        name: format!("graph_perturbation(k={k},seed={seed})"),
        nu: m,
        nv: m,
        periodic_u: true,
        periodic_v: true,
        ambient: Ambient::Flat,
        codim: k,
        pos,
        jets: Some(SurfaceJets {
            du: du_v,
            dv: dv_v,
            duu: duu_v,
            duv: duv_v,
            dvv: dvv_v,
        }),
        u_weights: base.u_weights,
        v_weights: base.v_weights,
        u_jacobian: base.u_jacobian,
        v_jacobian: base.v_jacobian,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn spectral_derivative_exact_for_trig() {
        let n = 16;
        let d = spectral_diff_matrix(n);
        let f: Vec<f64> = (0..n)
            .map(|i| (3.0 * 2.0 * PI * i as f64 / n as f64).sin())
            .collect();
        let df = &d * DVector::from_vec(f);
        for i in 0..n {
            let x = 2.0 * PI * i as f64 / n as f64;
            assert_relative_eq!(df[i], 3.0 * (3.0 * x).cos(), epsilon = 1e-10);
        }
    }

    #[test]
    fn equatorial_sphere_invariants() {
        // S² ⊂ S⁴: totally geodesic, R_h = 2, trP = 1, area 4π
        let g = equatorial_sphere(2, 16, 32);
        let inv = g.invariants().unwrap();
        let area: f64 = inv.iter().map(|p| p.area_weight).sum();
        assert_relative_eq!(area, 4.0 * PI, max_relative = 1e-12);
        for p in &inv {
            assert!(p.mean_sq.abs() < 1e-20);
            assert!(p.l_tracefree_sq.abs() < 1e-20);
            assert_relative_eq!(p.r_h, 2.0, max_relative = 1e-10);
            assert_relative_eq!(p.tr_p, 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn clifford_torus_invariants() {
        let g = clifford_torus(16);
        let inv = g.invariants().unwrap();
        let area: f64 = inv.iter().map(|p| p.area_weight).sum();
        assert_relative_eq!(area, 2.0 * PI * PI, max_relative = 1e-12);
        for p in &inv {
            assert!(p.mean_sq.abs() < 1e-18);
            assert_relative_eq!(p.l_tracefree_sq, 2.0, max_relative = 1e-10);
            assert!(p.r_h.abs() < 1e-10);
        }
    }

    #[test]
    fn torus_of_revolution_matches_closed_form() {
        // principal curvatures: κ₁ = cos v / (c + a cos v), κ₂ = 1/a
        let (a, c) = (1.0, 2.0);
        let m = 16;
        let g = torus_of_revolution(a, c, m);
        let inv = g.invariants().unwrap();
        for iu in 0..m {
            for iv in 0..m {
                let v = 2.0 * PI * iv as f64 / m as f64;
                let k1 = v.cos() / (c + a * v.cos());
                let k2 = 1.0 / a;
                let p = &inv[iu * m + iv];
                assert_relative_eq!(p.mean_sq, (k1 + k2).powi(2), max_relative = 1e-9);
                assert_relative_eq!(p.l_sq, k1 * k1 + k2 * k2, max_relative = 1e-9);
                assert_relative_eq!(p.r_h, 2.0 * k1 * k2, epsilon = 1e-9);
            }
        }
        let area: f64 = inv.iter().map(|p| p.area_weight).sum();
        assert_relative_eq!(area, 4.0 * PI * PI * a * c, max_relative = 1e-12);
    }

    #[test]
    fn spectral_route_matches_analytic_jets() {
        // strip the analytic jets off the Clifford torus and recompute
        let g = clifford_torus(32);
        let mut spectral = g.clone();
        spectral.jets = None;
        let a = g.invariants().unwrap();
        let b = spectral.invariants().unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_relative_eq!(pa.l_tracefree_sq, pb.l_tracefree_sq, epsilon = 1e-8);
            assert_relative_eq!(pa.r_h, pb.r_h, epsilon = 1e-8);
        }
    }

    #[test]
    fn gauss_equation_vs_intrinsic_curvature() {
        let g = torus_of_revolution(1.0, 2.0, 32);
        let inv = g.invariants().unwrap();
        let intrinsic = g.intrinsic_gauss_curvature().unwrap();
        for (p, &ki) in inv.iter().zip(&intrinsic) {
            assert_relative_eq!(p.r_h, 2.0 * ki, epsilon = 1e-7);
        }
    }

    #[test]
    fn fd4_matrix_exact_for_quartics() {
        let n = 12;
        let h = 0.3;
        let d = fd4_diff_matrix(n, h);
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(4)).collect();
        let df = &d * DVector::from_vec(f);
        for i in 0..n {
            let x = i as f64 * h;
            assert_relative_eq!(df[i], 4.0 * x.powi(3), epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn open_strip_finite_differences() {
        // half torus, non-periodic in u: FD derivatives must reproduce the
        // closed-form curvatures away from the edges.
        let (a, c) = (1.0, 2.0);
        let (nu, nv) = (49usize, 32usize);
        let tau = 2.0 * PI;
        let mut pos = Vec::with_capacity(nu * nv);
        for iu in 0..nu {
            // the u line sits on [0, 2π] inclusive per the file convention;
            // the actual azimuth spans only half the torus
            let u = PI * iu as f64 / (nu - 1) as f64;
            for iv in 0..nv {
                let v = tau * iv as f64 / nv as f64;
                let w = c + a * v.cos();
                pos.push(DVector::from_vec(vec![
                    w * u.cos(),
                    w * u.sin(),
                    a * v.sin(),
                ]));
            }
        }
        let h = tau / (nu - 1) as f64;
        let u_weights: Vec<f64> = (0..nu)
            .map(|i| if i == 0 || i == nu - 1 { h / 2.0 } else { h })
            .collect();
        let grid = SurfaceGrid {
            name: "half_torus_strip".into(),
            nu,
            nv,
            periodic_u: false,
            periodic_v: true,
            ambient: Ambient::Flat,
            codim: 1,
            pos,
            jets: None,
            u_weights,
            v_weights: vec![tau / nv as f64; nv],
            u_jacobian: vec![1.0; nu],
            v_jacobian: vec![1.0; nv],
        };
        let inv = grid.invariants().unwrap();
        for iu in 4..nu - 4 {
            for iv in 0..nv {
                let v = tau * iv as f64 / nv as f64;
                let k1 = v.cos() / (c + a * v.cos());
                let k2 = 1.0 / a;
                let p = &inv[iu * nv + iv];
                assert_relative_eq!(p.mean_sq, (k1 + k2).powi(2), epsilon = 1e-3);
                assert_relative_eq!(p.r_h, 2.0 * k1 * k2, epsilon = 1e-3);
            }
        }
        // area of the half torus: 2π²ac
        let area: f64 = inv.iter().map(|p| p.area_weight).sum();
        assert_relative_eq!(area, 2.0 * PI * PI * a * c, max_relative = 1e-4);
    }

    #[test]
    fn file_roundtrip() {
        let g = torus_of_revolution(1.0, 2.5, 8);
        let text = g.to_text();
        let parsed = SurfaceGrid::parse(&text).unwrap();
        assert_eq!(parsed.nu, 8);
        assert_eq!(parsed.codim, 1);
        let a = g.invariants().unwrap();
        let b = parsed.invariants().unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_relative_eq!(pa.r_h, pb.r_h, epsilon = 1e-7);
        }
    }

    #[test]
    fn degenerate_grid_rejected() {
        // a "surface" collapsed to a circle
        let m = 8;
        let mut g = torus_of_revolution(1.0, 2.0, m);
        for p in g.pos.iter_mut() {
            p[2] = 0.0;
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            p[0] /= r;
            p[1] /= r;
        }
        g.jets = None;
        match g.invariants() {
            Err(GeometryError::DegenerateMetric { .. }) => {}
            other => panic!("expected degenerate metric, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn graph_perturbation_smoke() {
        let g = graph_perturbation(2, 1.0, 2.0, 0.01, 7, 16);
        let inv = g.invariants().unwrap();
        assert_eq!(inv.len(), 256);
        // a small perturbation moves the curvature only slightly (the trig
        // modes carry derivative factors up to 4, hence the slack)
        let base = torus_of_revolution(1.0, 2.0, 16);
        let base_inv = base.invariants().unwrap();
        for (p, b) in inv.iter().zip(&base_inv) {
            assert!((p.r_h - b.r_h).abs() < 0.5, "{} vs {}", p.r_h, b.r_h);
        }
        // frames are orthonormal and normal to the tangents
        for p in &inv {
            for (i, na) in p.frame.iter().enumerate() {
                assert_relative_eq!(na.norm(), 1.0, epsilon = 1e-10);
                for nb in p.frame.iter().skip(i + 1) {
                    assert!(na.dot(nb).abs() < 1e-10);
                }
            }
        }
    }
}
