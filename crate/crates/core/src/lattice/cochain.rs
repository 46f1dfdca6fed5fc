use rayon::prelude::*;

use super::lie::{trace_inner, zero2, Mat2};
use super::{component_index, components, Lattice, DIRS};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnerProduct {
    #[default]
    L2,
    /// ⟨(1+Δᵖ)x, (1+Δᵖ)y⟩ with Δ the positive lattice Laplacian.
    Sobolev { p: u32 },
}

/// Degree-k su(2)-valued cochain, stored as `values[v * C(3,k) + comp]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieCochain {
    degree: usize,
    n: usize,
    values: Vec<Mat2>,
}

impl LieCochain {
    pub fn zeros(lat: &Lattice, degree: usize) -> Result<Self> {
        if degree > 3 {
            return Err(Error::domain(format!("cochain degree {degree} exceeds 3")));
        }
        Ok(LieCochain { degree, n: lat.n(), values: vec![zero2(); lat.num_cells(degree)] })
    }

    pub fn from_values(lat: &Lattice, degree: usize, values: Vec<Mat2>) -> Result<Self> {
        let mut c = Self::zeros(lat, degree)?;
        crate::error::check_len(c.values.len(), values.len())?;
        c.values = values;
        Ok(c)
    }

    /// Cochain with value `f(vertex, component)` everywhere.
    pub fn from_fn(lat: &Lattice, degree: usize, mut f: impl FnMut(usize, usize) -> Mat2) -> Result<Self> {
        let mut c = Self::zeros(lat, degree)?;
        let nc = components(degree);
        for v in 0..lat.num_vertices() {
            for comp in 0..nc {
                c.values[v * nc + comp] = f(v, comp);
            }
        }
        Ok(c)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[Mat2] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Mat2] {
        &mut self.values
    }

    pub fn get(&self, v: usize, comp: usize) -> &Mat2 {
        &self.values[v * components(self.degree) + comp]
    }

    pub fn get_mut(&mut self, v: usize, comp: usize) -> &mut Mat2 {
        let nc = components(self.degree);
        &mut self.values[v * nc + comp]
    }

    fn check_compatible(&self, lat: &Lattice) -> Result<()> {
        if self.n != lat.n() {
            return Err(Error::DimensionMismatch { expected: lat.n(), got: self.n });
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &LieCochain) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::domain(format!("degree mismatch: {} vs {}", self.degree, other.degree)));
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(())
    }

    pub fn scale(&self, s: C64) -> LieCochain {
        LieCochain { values: self.values.iter().map(|m| m * s).collect(), ..self.clone() }
    }

    pub fn scale_real(&self, s: f64) -> LieCochain {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &LieCochain) -> Result<LieCochain> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(LieCochain { values, ..self.clone() })
    }

    pub fn sub(&self, other: &LieCochain) -> Result<LieCochain> {
        self.add(&other.scale_real(-1.0))
    }

    /// self += s · other
    pub fn axpy(&mut self, s: f64, other: &LieCochain) -> Result<()> {
        self.check_same_shape(other)?;
        let s = C64::new(s, 0.0);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * s;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flat_map(|m| m.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Central difference along `axis`: (f(v+e) − f(v−e)) / 2h.
    fn partial(&self, lat: &Lattice, axis: usize, v: usize, comp: usize) -> Mat2 {
        let f = self.get(lat.shift(v, axis, 1), comp) - self.get(lat.shift(v, axis, -1), comp);
        f * C64::new(0.5 / lat.spacing(), 0.0)
    }

    pub fn coboundary(&self, lat: &Lattice) -> Result<LieCochain> {
        self.check_compatible(lat)?;
        if self.degree >= 3 {
            return Err(Error::domain("coboundary of a degree-3 cochain"));
        }
        let k = self.degree + 1;
        LieCochain::from_fn(lat, k, |v, comp| {
            let set = DIRS[k][comp];
            let mut acc = zero2();
            for (idx, &axis) in set.iter().enumerate() {
                let rest: Vec<usize> = set.iter().copied().filter(|&d| d != axis).collect();
                let term = self.partial(lat, axis, v, component_index(k - 1, &rest));
                if idx % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        })
    }

    /// Pointwise exterior product with matrix-product coefficients.
    pub fn wedge(&self, other: &LieCochain, lat: &Lattice) -> Result<LieCochain> {
        self.check_compatible(lat)?;
        other.check_compatible(lat)?;
        let (p, q) = (self.degree, other.degree);
        if p + q > 3 {
            return Err(Error::domain(format!("wedge of degrees {p} and {q} exceeds 3")));
        }
        let k = p + q;
        // (comp_left, comp_right, sign) for every target component.
        let plan: Vec<Vec<(usize, usize, f64)>> = DIRS[k]
            .iter()
            .map(|set| {
                DIRS[p]
                    .iter()
                    .enumerate()
                    .filter(|(_, i)| i.iter().all(|d| set.contains(d)))
                    .map(|(ci, i)| {
                        let j: Vec<usize> = set.iter().copied().filter(|d| !i.contains(d)).collect();
                        (ci, component_index(q, &j), shuffle_sign(i, &j))
                    })
                    .collect()
            })
            .collect();
        let nc = components(k);
        let values: Vec<Mat2> = (0..lat.num_vertices() * nc)
            .into_par_iter()
            .map(|idx| {
                let (v, comp) = (idx / nc, idx % nc);
                let mut acc = zero2();
                for &(ci, cj, s) in &plan[comp] {
                    acc += self.get(v, ci) * other.get(v, cj) * C64::new(s, 0.0);
                }
                acc
            })
            .collect();
        LieCochain::from_values(lat, k, values)
    }

    /// Σ_cells Tr(value) · cell volume.
    pub fn trace_integrate(&self, lat: &Lattice) -> Result<C64> {
        self.check_compatible(lat)?;
        if self.degree != 3 {
            return Err(Error::domain(format!("trace integration needs degree 3, got {}", self.degree)));
        }
        let s: C64 = self.values.iter().map(|m| m.trace()).sum();
        Ok(s * lat.cell_volume())
    }

    /// Positive lattice Laplacian applied componentwise.
    pub fn laplacian(&self, lat: &Lattice) -> Result<LieCochain> {
        self.check_compatible(lat)?;
        let h2 = lat.spacing() * lat.spacing();
        let nc = components(self.degree);
        let values = (0..self.values.len())
            .map(|idx| {
                let (v, comp) = (idx / nc, idx % nc);
                let mut acc = self.get(v, comp) * C64::new(6.0, 0.0);
                for axis in 0..3 {
                    acc -= self.get(lat.shift(v, axis, 1), comp);
                    acc -= self.get(lat.shift(v, axis, -1), comp);
                }
                acc / C64::new(h2, 0.0)
            })
            .collect();
        LieCochain::from_values(lat, self.degree, values)
    }

    /// (1 + Δᵖ) applied componentwise.
    pub fn sobolev_lift(&self, lat: &Lattice, p: u32) -> Result<LieCochain> {
        let mut power = self.clone();
        for _ in 0..p {
            power = power.laplacian(lat)?;
        }
        self.add(&power)
    }

    /// Σ_v h³ Σ_S Tr(x_S* y_S), after the Sobolev lift when requested.
    pub fn inner_product(&self, other: &LieCochain, lat: &Lattice, ip: InnerProduct) -> Result<C64> {
        self.check_same_shape(other)?;
        self.check_compatible(lat)?;
        match ip {
            InnerProduct::L2 => Ok(l2(self, other, lat)),
            InnerProduct::Sobolev { p } => {
                Ok(l2(&self.sobolev_lift(lat, p)?, &other.sobolev_lift(lat, p)?, lat))
            }
        }
    }
}

fn l2(x: &LieCochain, y: &LieCochain, lat: &Lattice) -> C64 {
    let s: C64 = x.values.iter().zip(&y.values).map(|(a, b)| trace_inner(a, b)).sum();
    s * lat.cell_volume()
}

/// Sign of the permutation that sorts the concatenation I ++ J.
fn shuffle_sign(i: &[usize], j: &[usize]) -> f64 {
    let inversions = i.iter().map(|a| j.iter().filter(|b| *b < a).count()).sum::<usize>();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
