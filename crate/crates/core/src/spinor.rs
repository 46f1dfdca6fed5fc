//! Spinor bundles S₁⊕S₂ in a fixed trivialization, the embedding of gauge
//! modes into spinor-valued one-forms and the single-particle real structure.

use nalgebra::{DMatrix, Vector2, Vector4};
use rand::Rng;

use crate::lattice::{su2_exp, InnerProduct, Lattice, LieCochain, Mat2, ModeBasis};
use crate::{Error, Result, C64};

const FRAME_TOL: f64 = 1e-10;

fn upper(x: &Vector4<C64>) -> Vector2<C64> {
    Vector2::new(x[0], x[1])
}

fn lower(x: &Vector4<C64>) -> Vector2<C64> {
    Vector2::new(x[2], x[3])
}

fn join(a: Vector2<C64>, b: Vector2<C64>) -> Vector4<C64> {
    Vector4::new(a[0], a[1], b[0], b[1])
}

/// ε∘conj on one ℂ² factor, ε = iσ₂.
fn eps_conj(x: &Vector2<C64>) -> Vector2<C64> {
    Vector2::new(x[1].conj(), -x[0].conj())
}

fn quaternionic(x: &Vector4<C64>) -> Vector4<C64> {
    join(eps_conj(&upper(x)), eps_conj(&lower(x)))
}

fn act(g: &Mat2, x: &Vector4<C64>) -> Vector4<C64> {
    join(g * upper(x), g * lower(x))
}

/// Section of S₁⊕S₂: one ℂ²⊕ℂ² value per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    values: Vec<Vector4<C64>>,
}

impl SpinorField {
    pub fn new(values: Vec<Vector4<C64>>) -> Self {
        SpinorField { values }
    }

    pub fn values(&self) -> &[Vector4<C64>] {
        &self.values
    }

    /// Diagonal su(2)/SU(2) action, the same g at every vertex.
    pub fn act(&self, g: &Mat2) -> SpinorField {
        SpinorField { values: self.values.iter().map(|x| act(g, x)).collect() }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
    }
}

/// Spinor-valued one-form: value `values[v * 3 + μ]` attached to the edge at v along μ.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorOneForm {
    values: Vec<Vector4<C64>>,
}

impl SpinorOneForm {
    pub fn zeros(lat: &Lattice) -> Self {
        SpinorOneForm { values: vec![Vector4::zeros(); lat.num_edges()] }
    }

    pub fn from_values(lat: &Lattice, values: Vec<Vector4<C64>>) -> Result<Self> {
        crate::error::check_len(lat.num_edges(), values.len())?;
        Ok(SpinorOneForm { values })
    }

    pub fn values(&self) -> &[Vector4<C64>] {
        &self.values
    }

    pub fn get(&self, v: usize, mu: usize) -> &Vector4<C64> {
        &self.values[v * 3 + mu]
    }

    pub fn scale(&self, s: C64) -> Self {
        SpinorOneForm { values: self.values.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        crate::error::check_len(self.values.len(), other.values.len())?;
        Ok(SpinorOneForm { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() })
    }

    /// self += s · other
    pub fn axpy(&mut self, s: C64, other: &Self) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * s;
        }
    }

    pub fn act(&self, g: &Mat2) -> SpinorOneForm {
        SpinorOneForm { values: self.values.iter().map(|x| act(g, x)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flat_map(|x| x.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn laplacian(&self, lat: &Lattice) -> SpinorOneForm {
        let h2 = lat.spacing() * lat.spacing();
        let values = (0..self.values.len())
            .map(|idx| {
                let (v, mu) = (idx / 3, idx % 3);
                let mut acc = self.get(v, mu) * C64::new(6.0, 0.0);
                for axis in 0..3 {
                    acc -= self.get(lat.shift(v, axis, 1), mu);
                    acc -= self.get(lat.shift(v, axis, -1), mu);
                }
                acc / C64::new(h2, 0.0)
            })
            .collect();
        SpinorOneForm { values }
    }

    fn sobolev_lift(&self, lat: &Lattice, p: u32) -> SpinorOneForm {
        let mut power = self.clone();
        for _ in 0..p {
            power = power.laplacian(lat);
        }
        SpinorOneForm { values: self.values.iter().zip(&power.values).map(|(a, b)| a + b).collect() }
    }

    /// Σ_edges h³ ⟨x, y⟩_ℂ⁴, optionally after the (1+Δᵖ) lift.
    pub fn inner_product(&self, other: &Self, lat: &Lattice, ip: InnerProduct) -> Result<C64> {
        crate::error::check_len(self.values.len(), other.values.len())?;
        crate::error::check_len(lat.num_edges(), self.values.len())?;
        let l2 = |x: &SpinorOneForm, y: &SpinorOneForm| {
            x.values.iter().zip(&y.values).map(|(a, b)| a.dotc(b)).sum::<C64>() * lat.cell_volume()
        };
        Ok(match ip {
            InnerProduct::L2 => l2(self, other),
            InnerProduct::Sobolev { p } => l2(&self.sobolev_lift(lat, p), &other.sobolev_lift(lat, p)),
        })
    }
}

/// Things on which the real structure C = ε∘conj acts factorwise.
pub trait ChargeConjugation: Sized {
    fn charge_conjugate(&self) -> Self;
}

impl ChargeConjugation for SpinorField {
    fn charge_conjugate(&self) -> Self {
        SpinorField { values: self.values.iter().map(quaternionic).collect() }
    }
}

impl ChargeConjugation for SpinorOneForm {
    fn charge_conjugate(&self) -> Self {
        SpinorOneForm { values: self.values.iter().map(quaternionic).collect() }
    }
}

pub fn charge_conjugation_single<T: ChargeConjugation>(x: &T) -> T {
    x.charge_conjugate()
}

/// Pointwise orthonormal pair (ψ₁, ψ₂), stored as the unitary with columns ψ₁, ψ₂.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceFrame {
    frames: Vec<Mat2>,
}

impl ReferenceFrame {
    pub fn new(frames: Vec<Mat2>) -> Result<Self> {
        for (v, u) in frames.iter().enumerate() {
            let defect = (u.adjoint() * u - Mat2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if defect > FRAME_TOL {
                return Err(Error::domain(format!("frame at vertex {v} is not orthonormal (defect {defect:.3e})")));
            }
        }
        Ok(ReferenceFrame { frames })
    }

    pub fn from_fields(psi1: &[Vector2<C64>], psi2: &[Vector2<C64>]) -> Result<Self> {
        crate::error::check_len(psi1.len(), psi2.len())?;
        Self::new(psi1.iter().zip(psi2).map(|(a, b)| Mat2::new(a[0], b[0], a[1], b[1])).collect())
    }

    pub fn standard(lat: &Lattice) -> Self {
        ReferenceFrame { frames: vec![Mat2::identity(); lat.num_vertices()] }
    }

    /// Independent random U(2) frame at every vertex.
    pub fn random(lat: &Lattice, rng: &mut impl Rng) -> Self {
        let frames = (0..lat.num_vertices())
            .map(|_| {
                let theta = [0; 3].map(|_| rng.gen_range(-3.0..3.0));
                let phase = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                su2_exp(theta) * phase
            })
            .collect();
        ReferenceFrame { frames }
    }

    /// Frame N(v)·(ψ₁, ψ₂).
    pub fn transformed(&self, n: impl Fn(usize) -> Mat2) -> Result<Self> {
        Self::new(self.frames.iter().enumerate().map(|(v, u)| n(v) * u).collect())
    }

    pub fn at(&self, v: usize) -> &Mat2 {
        &self.frames[v]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// (ω_μψ₁, ω_μψ₂) at every edge, using the frame at the base vertex.
pub fn embed_mode(omega: &LieCochain, frame: &ReferenceFrame, lat: &Lattice) -> Result<SpinorOneForm> {
    if omega.degree() != 1 {
        return Err(Error::domain("only one-forms can be embedded"));
    }
    crate::error::check_len(lat.num_vertices(), frame.len())?;
    let values = (0..lat.num_edges())
        .map(|idx| {
            let (v, mu) = (idx / 3, idx % 3);
            let m = omega.get(v, mu) * frame.at(v);
            Vector4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
        })
        .collect();
    SpinorOneForm::from_values(lat, values)
}

pub fn embed_basis(basis: &ModeBasis, frame: &ReferenceFrame) -> Result<Vec<SpinorOneForm>> {
    basis.modes().iter().map(|m| embed_mode(m, frame, basis.lattice())).collect()
}

/// Largest M for `extend_basis`: complex dimension of spinor one-forms.
pub fn spinor_dimension(lat: &Lattice) -> usize {
    12 * lat.num_vertices()
}

fn plane_wave_seeds(lat: &Lattice) -> Vec<([i64; 3], usize, usize)> {
    let n = lat.n() as i64;
    let reps: Vec<i64> = (0..n).map(|c| if c > n / 2 { c - n } else { c }).collect();
    let mut ks = Vec::new();
    for &x in &reps {
        for &y in &reps {
            for &z in &reps {
                ks.push([x, y, z]);
            }
        }
    }
    ks.sort_by_key(|k| (k.iter().map(|c| c * c).sum::<i64>(), *k));
    let mut out = Vec::new();
    for k in ks {
        for mu in 0..3 {
            for slot in 0..4 {
                out.push((k, mu, slot));
            }
        }
    }
    out
}

fn plane_wave(lat: &Lattice, k: [i64; 3], mu: usize, slot: usize) -> SpinorOneForm {
    let n = lat.n() as f64;
    let mut s = SpinorOneForm::zeros(lat);
    for v in 0..lat.num_vertices() {
        let c = lat.coords(v);
        let phase = std::f64::consts::TAU * (0..3).map(|d| k[d] as f64 * c[d] as f64).sum::<f64>() / n;
        s.values[v * 3 + mu][slot] = C64::from_polar(1.0, phase);
    }
    s
}

/// Completes orthonormal embedded modes to M orthonormal spinor one-forms.
///
/// Candidates, in order: the C-images of the given modes, then complex plane
/// waves e^{2πik·v/n}·e_s·dx^μ sorted by (|k|², k, μ, s). Candidates that are
/// numerically dependent on the current span are skipped.
pub fn extend_basis(
    embedded: &[SpinorOneForm],
    target: usize,
    lat: &Lattice,
    ip: InnerProduct,
) -> Result<Vec<SpinorOneForm>> {
    let dim = spinor_dimension(lat);
    if target > dim {
        return Err(Error::OutOfRange { index: target, bound: dim });
    }
    if target < embedded.len() {
        return Err(Error::domain(format!("target {target} is below the {} embedded modes", embedded.len())));
    }
    for (i, a) in embedded.iter().enumerate() {
        for (j, b) in embedded.iter().enumerate().skip(i) {
            let expect = if i == j { 1.0 } else { 0.0 };
            if (a.inner_product(b, lat, ip)? - C64::new(expect, 0.0)).norm() > FRAME_TOL {
                return Err(Error::domain("embedded modes are not orthonormal"));
            }
        }
    }
    let mut out: Vec<SpinorOneForm> = embedded.to_vec();
    let conjugates = embedded.iter().map(|e| e.charge_conjugate());
    let waves = plane_wave_seeds(lat).into_iter().map(|(k, mu, s)| plane_wave(lat, k, mu, s));
    for cand in conjugates.chain(waves) {
        if out.len() >= target {
            break;
        }
        let cand_norm = cand.inner_product(&cand, lat, ip)?.re.sqrt();
        let mut w = cand;
        for _pass in 0..2 {
            for b in &out {
                let c = b.inner_product(&w, lat, ip)?;
                w.axpy(-c, b);
            }
        }
        let norm = w.inner_product(&w, lat, ip)?.re.sqrt();
        if norm > 1e-8 * cand_norm {
            out.push(w.scale(C64::new(1.0 / norm, 0.0)));
        }
    }
    if out.len() < target {
        return Err(Error::Internal(format!("basis completion stalled at {} of {target}", out.len())));
    }
    Ok(out)
}

/// How the single-particle conjugation was obtained on the mode span.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugationModel {
    /// Lₗⱼ = ⟨ψₗ, Cψⱼ⟩; the span is closed under C.
    Geometric,
    /// Span not closed under C; standard symplectic pairing of consecutive modes.
    Symplectic,
}

/// C₁(z) = L·conj(z) on mode coefficients, with L·conj(L) = −𝟙.
#[derive(Clone, Debug)]
pub struct ModeConjugation {
    pub matrix: DMatrix<C64>,
    pub model: ConjugationModel,
    /// max_j ‖Cψⱼ − Σₗ Lₗⱼψₗ‖ for the geometric candidate.
    pub closure_defect: f64,
}

impl ModeConjugation {
    pub fn symplectic(m: usize) -> Result<Self> {
        if m % 2 != 0 {
            return Err(Error::domain(format!("no antiunitary C with C² = −1 on odd dimension {m}")));
        }
        let mut l = DMatrix::zeros(m, m);
        for p in 0..m / 2 {
            l[(2 * p, 2 * p + 1)] = C64::new(1.0, 0.0);
            l[(2 * p + 1, 2 * p)] = C64::new(-1.0, 0.0);
        }
        Ok(ModeConjugation { matrix: l, model: ConjugationModel::Symplectic, closure_defect: f64::NAN })
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        crate::error::check_len(self.matrix.ncols(), z.len())?;
        let zc = nalgebra::DVector::from_iterator(z.len(), z.iter().map(|c| c.conj()));
        Ok((&self.matrix * zc).iter().copied().collect())
    }

    /// max |L·conj(L) + 𝟙|.
    pub fn square_defect(&self) -> f64 {
        let m = self.matrix.nrows();
        let sq = &self.matrix * self.matrix.map(|z| z.conj()) + DMatrix::<C64>::identity(m, m);
        sq.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Matrix of C on the span of `modes`, falling back to the symplectic model
/// when the span is not C-closed to `tol`.
pub fn mode_conjugation(modes: &[SpinorOneForm], lat: &Lattice, ip: InnerProduct, tol: f64) -> Result<ModeConjugation> {
    let m = modes.len();
    let mut l = DMatrix::zeros(m, m);
    let mut defect: f64 = 0.0;
    for j in 0..m {
        let c = modes[j].charge_conjugate();
        let mut rest = c.clone();
        for (i, psi) in modes.iter().enumerate() {
            let coeff = psi.inner_product(&c, lat, ip)?;
            l[(i, j)] = coeff;
            rest.axpy(-coeff, psi);
        }
        defect = defect.max(rest.inner_product(&rest, lat, ip)?.re.max(0.0).sqrt());
    }
    if defect <= tol {
        Ok(ModeConjugation { matrix: l, model: ConjugationModel::Geometric, closure_defect: defect })
    } else {
        let mut s = ModeConjugation::symplectic(m)?;
        s.closure_defect = defect;
        Ok(s)
    }
}

/// Max |G₁ − G₂| between the Sobolev Gram matrices of the embedded modes in two frames.
pub fn sobolev_frame_dependence(
    basis: &ModeBasis,
    frame1: &ReferenceFrame,
    frame2: &ReferenceFrame,
    p: u32,
) -> Result<f64> {
    let lat = basis.lattice();
    let ip = InnerProduct::Sobolev { p };
    let e1 = embed_basis(basis, frame1)?;
    let e2 = embed_basis(basis, frame2)?;
    let mut diff: f64 = 0.0;
    for i in 0..e1.len() {
        for j in i..e1.len() {
            let g1 = e1[i].inner_product(&e1[j], lat, ip)?;
            let g2 = e2[i].inner_product(&e2[j], lat, ip)?;
            diff = diff.max((g1 - g2).norm());
        }
    }
    Ok(diff)
}
