//! Periodic cubic 3-lattice carrying su(2)-valued discrete forms.
//!
//! Cochains are collocated: a degree-k value lives at a vertex together with
//! an increasing set of k axis directions. This indexing is in bijection with
//! the k-cells of the cubical complex (vertex = lowest corner).

mod chern_simons;
mod cochain;
mod covariant;
mod lie;
mod modes;

pub use chern_simons::{
    chern_simons_coefficients, connection, cs_direct, field_strength, gauge_direction, pair_modes_with_f,
};
pub use cochain::{InnerProduct, LieCochain};
pub use covariant::{covariant_derivative_matrix, spectral_invariant, star_covariant_derivative};
pub use lie::{identity2, pauli, su2_exp, trace_inner, zero2, LieBasis, Mat2};
pub use modes::{build_mode_basis, max_modes, ModeBasis, SeedFamily};

use crate::{Error, Result};

/// Increasing direction sets of each degree, in storage order.
pub(crate) const DIRS: [&[&[usize]]; 4] = [
    &[&[]],
    &[&[0], &[1], &[2]],
    &[&[0, 1], &[0, 2], &[1, 2]],
    &[&[0, 1, 2]],
];

pub(crate) fn components(degree: usize) -> usize {
    DIRS[degree].len()
}

pub(crate) fn component_index(degree: usize, set: &[usize]) -> usize {
    DIRS[degree].iter().position(|s| *s == set).expect("valid direction set")
}

/// A signed reference to a lower-dimensional cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signed {
    pub index: usize,
    pub sign: i8,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    n: usize,
    spacing: f64,
    edge_boundary: Vec<[Signed; 2]>,
    face_boundary: Vec<[Signed; 4]>,
    cell_boundary: Vec<[Signed; 6]>,
}

pub fn build_lattice(n: usize, spacing: f64) -> Result<Lattice> {
    if n < 2 {
        return Err(Error::config(format!("lattice size n = {n} must be at least 2")));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::config(format!("lattice spacing {spacing} must be positive")));
    }
    let mut lat = Lattice {
        n,
        spacing,
        edge_boundary: Vec::new(),
        face_boundary: Vec::new(),
        cell_boundary: Vec::new(),
    };
    lat.build_incidence();
    Ok(lat)
}

impl Lattice {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn num_vertices(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn num_cells(&self, degree: usize) -> usize {
        self.num_vertices() * components(degree)
    }

    pub fn num_edges(&self) -> usize {
        self.num_cells(1)
    }

    pub fn num_faces(&self) -> usize {
        self.num_cells(2)
    }

    pub fn num_volumes(&self) -> usize {
        self.num_cells(3)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    pub fn total_volume(&self) -> f64 {
        self.cell_volume() * self.num_vertices() as f64
    }

    pub fn vertex(&self, c: [usize; 3]) -> usize {
        c[0] + self.n * (c[1] + self.n * c[2])
    }

    pub fn coords(&self, v: usize) -> [usize; 3] {
        [v % self.n, (v / self.n) % self.n, v / (self.n * self.n)]
    }

    /// Neighbour of `v` one step along `axis` (step = ±1), wrapping around.
    pub fn shift(&self, v: usize, axis: usize, step: isize) -> usize {
        let mut c = self.coords(v);
        let n = self.n as isize;
        c[axis] = ((c[axis] as isize + step).rem_euclid(n)) as usize;
        self.vertex(c)
    }

    /// Cell index of the degree-k cell at vertex `v` with direction set number `comp`.
    pub fn cell(&self, degree: usize, v: usize, comp: usize) -> usize {
        v * components(degree) + comp
    }

    pub fn edge_boundary(&self, e: usize) -> &[Signed; 2] {
        &self.edge_boundary[e]
    }

    pub fn face_boundary(&self, f: usize) -> &[Signed; 4] {
        &self.face_boundary[f]
    }

    pub fn cell_boundary(&self, c: usize) -> &[Signed; 6] {
        &self.cell_boundary[c]
    }

    // Boundary of the cell spanned by `set` at v: for each idx, the two faces
    // normal to set[idx] with sign (−1)^idx at the far side and −(−1)^idx at v.
    fn boundary_of(&self, v: usize, set: &[usize]) -> Vec<Signed> {
        let k = set.len();
        let mut out = Vec::with_capacity(2 * k);
        for idx in 0..k {
            let rest: Vec<usize> = set.iter().copied().filter(|&d| d != set[idx]).collect();
            let comp = component_index(k - 1, &rest);
            let sign: i8 = if idx % 2 == 0 { 1 } else { -1 };
            let far = self.shift(v, set[idx], 1);
            out.push(Signed { index: self.cell(k - 1, far, comp), sign });
            out.push(Signed { index: self.cell(k - 1, v, comp), sign: -sign });
        }
        out
    }

    fn build_incidence(&mut self) {
        let nv = self.num_vertices();
        let mut eb = Vec::with_capacity(3 * nv);
        let mut fb = Vec::with_capacity(3 * nv);
        let mut cb = Vec::with_capacity(nv);
        for v in 0..nv {
            for set in DIRS[1] {
                let b = self.boundary_of(v, set);
                eb.push([b[0], b[1]]);
            }
            for set in DIRS[2] {
                let b = self.boundary_of(v, set);
                fb.push([b[0], b[1], b[2], b[3]]);
            }
            let b = self.boundary_of(v, DIRS[3][0]);
            cb.push([b[0], b[1], b[2], b[3], b[4], b[5]]);
        }
        self.edge_boundary = eb;
        self.face_boundary = fb;
        self.cell_boundary = cb;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn cell_counts() {
        let l = build_lattice(2, 1.0).unwrap();
        assert_eq!((l.num_vertices(), l.num_edges(), l.num_faces(), l.num_volumes()), (8, 24, 24, 8));
        let l = build_lattice(3, 0.5).unwrap();
        assert_eq!((l.num_vertices(), l.num_edges(), l.num_faces(), l.num_volumes()), (27, 81, 81, 27));
    }

    #[test]
    fn rejects_degenerate_torus() {
        assert!(matches!(build_lattice(1, 1.0), Err(Error::Config(_))));
        assert!(matches!(build_lattice(3, 0.0), Err(Error::Config(_))));
    }

    fn compose(outer: &[Signed], inner: impl Fn(usize) -> Vec<Signed>) -> BTreeMap<usize, i32> {
        let mut acc = BTreeMap::new();
        for s in outer {
            for t in inner(s.index) {
                *acc.entry(t.index).or_insert(0) += (s.sign * t.sign) as i32;
            }
        }
        acc.retain(|_, c| *c != 0);
        acc
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        for n in [2, 3, 4] {
            let l = build_lattice(n, 1.0).unwrap();
            for f in 0..l.num_faces() {
                assert!(compose(l.face_boundary(f), |e| l.edge_boundary(e).to_vec()).is_empty());
            }
            for c in 0..l.num_volumes() {
                assert!(compose(l.cell_boundary(c), |f| l.face_boundary(f).to_vec()).is_empty());
            }
        }
    }

    #[test]
    fn incidence_in_range() {
        let l = build_lattice(3, 1.0).unwrap();
        assert!(l.edge_boundary.iter().flatten().all(|s| s.index < l.num_vertices()));
        assert!(l.face_boundary.iter().flatten().all(|s| s.index < l.num_edges()));
        assert!(l.cell_boundary.iter().flatten().all(|s| s.index < l.num_faces()));
    }
}
