use nalgebra::DMatrix;

use super::cochain::{InnerProduct, LieCochain};
use super::lie::{zero2, LieBasis};
use super::Lattice;
use crate::{Error, Result, C64};

/// Which plane-wave seeds feed Gram–Schmidt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedFamily {
    /// τ_a·trig(2πk·v/n)·dx^μ over all a, μ.
    #[default]
    PlaneWave,
    /// Only seeds with the given Lie index and direction.
    SingleComponent { a: usize, mu: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trig {
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug)]
struct Seed {
    k: [i64; 3],
    a: usize,
    mu: usize,
    trig: Trig,
}

/// Orthonormal one-form modes ξ₁..ξ_N.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    lattice: Lattice,
    modes: Vec<LieCochain>,
    inner: InnerProduct,
    family: SeedFamily,
    gram: DMatrix<f64>,
}

fn centered(c: i64, n: i64) -> i64 {
    let r = c.rem_euclid(n);
    if r > n / 2 {
        r - n
    } else {
        r
    }
}

/// Canonical wavevectors (one of each ±k pair) sorted by (|k|², k).
fn wavevectors(n: usize) -> Vec<([i64; 3], bool)> {
    let n = n as i64;
    let reps: Vec<i64> = (0..n).map(|c| centered(c, n)).collect();
    let mut out = Vec::new();
    for &x in &reps {
        for &y in &reps {
            for &z in &reps {
                let k = [x, y, z];
                let neg = k.map(|c| centered(-c, n));
                if k == neg {
                    out.push((k, true));
                } else if k > neg {
                    out.push((k, false));
                }
            }
        }
    }
    out.sort_by_key(|(k, _)| (k.iter().map(|c| c * c).sum::<i64>(), *k));
    out
}

fn seeds(n: usize, family: SeedFamily) -> Vec<Seed> {
    let mut out = Vec::new();
    for (k, self_conjugate) in wavevectors(n) {
        for a in 0..3 {
            for mu in 0..3 {
                if let SeedFamily::SingleComponent { a: fa, mu: fm } = family {
                    if (a, mu) != (fa, fm) {
                        continue;
                    }
                }
                out.push(Seed { k, a, mu, trig: Trig::Cos });
                if !self_conjugate {
                    out.push(Seed { k, a, mu, trig: Trig::Sin });
                }
            }
        }
    }
    out
}

fn seed_cochain(lat: &Lattice, basis: &LieBasis, s: &Seed) -> Result<LieCochain> {
    let n = lat.n() as f64;
    LieCochain::from_fn(lat, 1, |v, comp| {
        if comp != s.mu {
            return zero2();
        }
        let c = lat.coords(v);
        let phase = 2.0 * std::f64::consts::PI * (0..3).map(|d| s.k[d] as f64 * c[d] as f64).sum::<f64>() / n;
        let t = match s.trig {
            Trig::Cos => phase.cos(),
            Trig::Sin => phase.sin(),
        };
        basis.tau[s.a] * C64::new(t, 0.0)
    })
}

/// Number of seeds available, i.e. the largest admissible N.
pub fn max_modes(lat: &Lattice, family: SeedFamily) -> usize {
    match family {
        SeedFamily::PlaneWave => 9 * lat.num_vertices(),
        SeedFamily::SingleComponent { .. } => lat.num_vertices(),
    }
}

pub fn build_mode_basis(lat: &Lattice, count: usize, inner: InnerProduct) -> Result<ModeBasis> {
    ModeBasis::build(lat, count, inner, SeedFamily::PlaneWave)
}

impl ModeBasis {
    pub fn build(lat: &Lattice, count: usize, inner: InnerProduct, family: SeedFamily) -> Result<ModeBasis> {
        if let SeedFamily::SingleComponent { a, mu } = family {
            if a > 2 || mu > 2 {
                return Err(Error::config(format!("seed family component ({a}, {mu}) out of range")));
            }
        }
        let cap = max_modes(lat, family);
        if count == 0 || count > cap {
            return Err(Error::OutOfRange { index: count, bound: cap });
        }
        let lie = LieBasis::default();
        let all = seeds(lat.n(), family);
        let ip = |x: &LieCochain, y: &LieCochain| x.inner_product(y, lat, inner).map(|z| z.re);
        let mut modes: Vec<LieCochain> = Vec::with_capacity(count);
        for s in all.iter().take(count) {
            let seed = seed_cochain(lat, &lie, s)?;
            let seed_norm = ip(&seed, &seed)?.sqrt();
            let mut w = seed;
            for _pass in 0..2 {
                for m in &modes {
                    let c = ip(m, &w)?;
                    w.axpy(-c, m)?;
                }
            }
            let norm = ip(&w, &w)?.sqrt();
            if !(norm > 1e-10 * seed_norm) {
                return Err(Error::Internal(format!("Gram-Schmidt breakdown at mode {}", modes.len())));
            }
            modes.push(w.scale_real(1.0 / norm));
        }
        let gram = gram_matrix(lat, &modes, inner)?;
        Ok(ModeBasis { lattice: lat.clone(), modes, inner, family, gram })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[LieCochain] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &LieCochain {
        &self.modes[i]
    }

    pub fn inner_product_kind(&self) -> InnerProduct {
        self.inner
    }

    pub fn family(&self) -> SeedFamily {
        self.family
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// max |G − 𝟙|.
    pub fn gram_residual(&self) -> f64 {
        let n = self.len();
        (&self.gram - DMatrix::<f64>::identity(n, n)).abs().max()
    }

    /// Real τ_a coefficient of mode i at vertex v, direction μ.
    pub fn coefficient(&self, i: usize, v: usize, mu: usize, a: usize) -> f64 {
        let tau = LieBasis::default().tau[a];
        super::lie::trace_inner(&tau, self.modes[i].get(v, mu)).re
    }

    /// Σᵢ xᵢ ξᵢ.
    pub fn combine(&self, x: &[f64]) -> Result<LieCochain> {
        crate::error::check_len(self.len(), x.len())?;
        let mut acc = LieCochain::zeros(&self.lattice, 1)?;
        for (xi, m) in x.iter().zip(&self.modes) {
            if *xi != 0.0 {
                acc.axpy(*xi, m)?;
            }
        }
        Ok(acc)
    }
}

fn gram_matrix(lat: &Lattice, modes: &[LieCochain], inner: InnerProduct) -> Result<DMatrix<f64>> {
    let lifted: Vec<LieCochain> = match inner {
        InnerProduct::L2 => modes.to_vec(),
        InnerProduct::Sobolev { p } => modes.iter().map(|m| m.sobolev_lift(lat, p)).collect::<Result<_>>()?,
    };
    let n = modes.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = lifted[i].inner_product(&lifted[j], lat, InnerProduct::L2)?.re;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::super::build_lattice;
    use super::*;

    #[test]
    fn seed_count_matches_real_dimension() {
        for n in [2, 3, 4] {
            let lat = build_lattice(n, 1.0).unwrap();
            assert_eq!(seeds(n, SeedFamily::PlaneWave).len(), max_modes(&lat, SeedFamily::PlaneWave));
        }
    }

    #[test]
    fn first_modes_are_constants_then_lowest_wavevector() {
        let w = wavevectors(3);
        assert_eq!(w[0], ([0, 0, 0], true));
        assert_eq!(w[1].0, [0, 0, 1]);
        let s = seeds(3, SeedFamily::PlaneWave);
        assert_eq!((s[0].a, s[0].mu), (0, 0));
        assert_eq!((s[1].a, s[1].mu), (0, 1));
        assert_eq!((s[3].a, s[3].mu), (1, 0));
        assert_eq!(s[9].trig, Trig::Cos);
        assert_eq!(s[10].trig, Trig::Sin);
    }

    #[test]
    fn small_basis_is_orthonormal() {
        let lat = build_lattice(2, 1.0).unwrap();
        let b = build_mode_basis(&lat, 3, InnerProduct::L2).unwrap();
        assert!(b.gram_residual() < 1e-12);
    }

    #[test]
    fn full_basis_orthonormal_for_both_products() {
        let lat = build_lattice(3, 0.5).unwrap();
        for ip in [InnerProduct::L2, InnerProduct::Sobolev { p: 1 }] {
            let b = build_mode_basis(&lat, 9 * 27, ip).unwrap();
            assert!(b.gram_residual() < 1e-12, "{ip:?}: {}", b.gram_residual());
        }
    }

    #[test]
    fn deterministic() {
        let lat = build_lattice(3, 1.0).unwrap();
        let a = build_mode_basis(&lat, 20, InnerProduct::L2).unwrap();
        let b = build_mode_basis(&lat, 20, InnerProduct::L2).unwrap();
        assert!(a.modes().iter().zip(b.modes()).all(|(x, y)| x == y));
    }

    #[test]
    fn sobolev_modes_differ_from_l2_modes() {
        // Δ annihilates the constant modes, so the difference shows from index 9 on.
        let n = 3;
        let lat = build_lattice(n, 1.0).unwrap();
        let a = build_mode_basis(&lat, 12, InnerProduct::L2).unwrap();
        let b = build_mode_basis(&lat, 12, InnerProduct::Sobolev { p: 1 }).unwrap();
        let lambda = 4.0 * (std::f64::consts::PI / n as f64).sin().powi(2);
        for i in 0..12 {
            for j in 0..12 {
                let c = a.mode(i).inner_product(b.mode(j), &lat, InnerProduct::L2).unwrap().re;
                let scale = if i < 9 { 1.0 } else { 1.0 / (1.0 + lambda) };
                let expect = if i == j { scale } else { 0.0 };
                assert!((c - expect).abs() < 1e-12, "{i} {j} {c}");
            }
        }
        assert!(a.mode(10).sub(b.mode(10)).unwrap().max_abs() > 0.1);
    }

    #[test]
    fn rejects_too_many_modes() {
        let lat = build_lattice(2, 1.0).unwrap();
        assert!(build_mode_basis(&lat, 73, InnerProduct::L2).is_err());
        assert!(build_mode_basis(&lat, 0, InnerProduct::L2).is_err());
    }
}
