use serde::{Deserialize, Serialize};

use crate::boson::{k_from_integer, MAX_BOSON_DIM};
use crate::fock::MAX_FOCK_MODES;
use crate::lattice::{build_lattice, max_modes, InnerProduct, Lattice, SeedFamily};
use crate::numerics::DENSE_THRESHOLD;
use crate::spinor::spinor_dimension;
use crate::{Error, Result};

use super::Suite;

pub const SCHEMA_VERSION: u32 = 1;

/// Hard ceiling on `limits.max_hilbert_dim`, whatever the file says.
pub const HILBERT_CEILING: usize = 1 << 24;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Used when the command line does not name a suite.
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub modes: ModesConfig,
    #[serde(default)]
    pub fermion: FermionConfig,
    #[serde(default)]
    pub boson: BosonConfig,
    #[serde(default)]
    pub rotation: RotationConfig,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub suites: SuiteSettings,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub limits: Limits,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub n: usize,
    pub spacing: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { n: 3, spacing: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerProductKind {
    L2,
    Sobolev,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    pub count: usize,
    pub inner_product: InnerProductKind,
    pub sobolev_p: u32,
}

impl Default for ModesConfig {
    fn default() -> Self {
        ModesConfig { count: 2, inner_product: InnerProductKind::L2, sobolev_p: 1 }
    }
}

impl ModesConfig {
    pub fn inner_product(&self) -> InnerProduct {
        match self.inner_product {
            InnerProductKind::L2 => InnerProduct::L2,
            InnerProductKind::Sobolev => InnerProduct::Sobolev { p: self.sobolev_p },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FermionConfig {
    pub modes: usize,
}

impl Default for FermionConfig {
    fn default() -> Self {
        FermionConfig { modes: 2 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BosonConfig {
    pub cutoff: usize,
}

impl Default for BosonConfig {
    fn default() -> Self {
        BosonConfig { cutoff: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolynomialSource {
    /// CS polynomial of the configured modes.
    ChernSimons,
    /// Seeded random cubic with coefficients in ±scale.
    Random,
    Zero,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotationConfig {
    /// Integer level m with k = m/4π. Ignored when `k` is set.
    pub level: i64,
    pub k: Option<f64>,
    pub polynomial: PolynomialSource,
    pub scale: f64,
}

impl Default for RotationConfig {
    fn default() -> Self {
        RotationConfig { level: 1, k: None, polynomial: PolynomialSource::Random, scale: 0.3 }
    }
}

impl RotationConfig {
    pub fn k(&self) -> f64 {
        self.k.unwrap_or_else(|| k_from_integer(self.level))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Flat,
    LinearX,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub kind: FrameKind,
    /// Strength of the x-dependence for `linear_x`.
    pub epsilon: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig { kind: FrameKind::Flat, epsilon: 0.1 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSettings {
    pub car_relations: CarSettings,
    pub real_structure: RealStructureSettings,
    pub cs_gradient: CsGradientSettings,
    pub rotate_square: RotateSettings,
    pub ym_sectors: YmSettings,
    pub field_commutators: FieldSettings,
    pub spectral_invariant: SpectralSettings,
    pub kernel_degeneracy: KernelSettings,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CarSettings {
    pub fermion_modes: usize,
}

impl Default for CarSettings {
    fn default() -> Self {
        CarSettings { fermion_modes: 6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RealStructureSettings {
    pub cutoff: usize,
    /// Fermion modes for the C² check on the Fock space alone.
    pub conjugation_modes: usize,
}

impl Default for RealStructureSettings {
    fn default() -> Self {
        RealStructureSettings { cutoff: 3, conjugation_modes: 6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CsGradientSettings {
    pub modes: usize,
    pub points: usize,
    pub fd_step: f64,
}

impl Default for CsGradientSettings {
    fn default() -> Self {
        CsGradientSettings { modes: 24, points: 10, fd_step: 1e-5 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotateSettings {
    pub cutoff: usize,
    pub guard: usize,
    /// Low subspace: occupations ≤ cutoff − margin.
    pub margin: usize,
}

impl Default for RotateSettings {
    fn default() -> Self {
        RotateSettings { cutoff: 8, guard: 16, margin: 3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct YmSettings {
    pub cutoff: usize,
    pub eigenpairs: usize,
}

impl Default for YmSettings {
    fn default() -> Self {
        YmSettings { cutoff: 6, eigenpairs: 6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSettings {
    pub modes: usize,
    pub cutoff: usize,
    /// Lattice coordinates of m₁.
    pub point: [usize; 3],
    pub mu: usize,
    pub a: usize,
    pub concentration_counts: Vec<usize>,
}

impl Default for FieldSettings {
    fn default() -> Self {
        FieldSettings { modes: 3, cutoff: 3, point: [1, 1, 1], mu: 0, a: 0, concentration_counts: vec![3, 4, 5, 6] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSettings {
    pub modes: usize,
    pub points: usize,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        SpectralSettings { modes: 20, points: 3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSettings {
    pub tol: f64,
}

impl Default for KernelSettings {
    fn default() -> Self {
        KernelSettings { tol: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    JsonLines,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub tables: TableFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into(), tables: TableFormat::Csv }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    /// Largest doubled (boson ⊗ fermion)² dimension any suite may build.
    pub max_hilbert_dim: usize,
    /// Largest boson dimension handled with dense matrices.
    pub max_dense_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_hilbert_dim: 1 << 20, max_dense_dim: DENSE_THRESHOLD }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn lattice(&self) -> Result<Lattice> {
        build_lattice(self.lattice.n, self.lattice.spacing)
    }

    /// Every bound and resource cap for the suites that `suite` expands to.
    pub fn validate(&self, suite: Suite) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if !(2..=8).contains(&self.lattice.n) {
            return Err(Error::config(format!("lattice.n: {} not in 2..=8", self.lattice.n)));
        }
        if !(self.lattice.spacing.is_finite() && self.lattice.spacing > 0.0) {
            return Err(Error::config("lattice.spacing: must be positive and finite"));
        }
        let lat = self.lattice()?;
        let plane = max_modes(&lat, SeedFamily::PlaneWave);
        let n = self.modes.count;
        let m = self.fermion.modes;
        need(n >= 1 && n <= plane, || format!("modes.count: {n} not in 1..={plane}"))?;
        need(self.modes.sobolev_p <= 4, || "modes.sobolev_p: at most 4".into())?;
        need(m >= n, || format!("fermion.modes: {m} below modes.count {n}"))?;
        need(m <= MAX_FOCK_MODES.min(spinor_dimension(&lat)), || format!("fermion.modes: {m} too large"))?;
        let k = self.rotation.k();
        need(k.is_finite() && k != 0.0, || "rotation: k must be nonzero and finite".into())?;
        need(self.rotation.scale.is_finite() && self.rotation.scale >= 0.0, || "rotation.scale: must be ≥ 0".into())?;
        need(self.frame.epsilon.is_finite(), || "frame.epsilon: must be finite".into())?;
        let lim = &self.limits;
        need(lim.max_hilbert_dim <= HILBERT_CEILING, || {
            format!("limits.max_hilbert_dim: {} above ceiling {HILBERT_CEILING}", lim.max_hilbert_dim)
        })?;
        need(lim.max_dense_dim <= DENSE_THRESHOLD, || {
            format!("limits.max_dense_dim: {} above {DENSE_THRESHOLD}", lim.max_dense_dim)
        })?;
        let s = &self.suites;
        for one in suite.expand() {
            match one {
                Suite::CarRelations => {
                    let fm = s.car_relations.fermion_modes;
                    need(fm >= 1 && fm <= 12, || format!("suites.car_relations.fermion_modes: {fm} not in 1..=12"))?;
                }
                Suite::RealStructure => {
                    let cm = s.real_structure.conjugation_modes;
                    need(cm >= n && cm % 2 == 0 && cm <= 12, || {
                        format!("suites.real_structure.conjugation_modes: {cm} must be even, ≥ {n} and ≤ 12")
                    })?;
                    need(cm <= spinor_dimension(&lat), || "suites.real_structure.conjugation_modes: too large".into())?;
                    self.dirac_dims(n, s.real_structure.cutoff, 0, m)?;
                }
                Suite::CsGradient => {
                    let g = &s.cs_gradient;
                    need(g.modes >= 9 && g.modes <= plane, || format!("suites.cs_gradient.modes: {} not in 9..={plane}", g.modes))?;
                    need(g.points >= 1 && g.points <= 100, || "suites.cs_gradient.points: not in 1..=100".into())?;
                    need(g.fd_step > 0.0 && g.fd_step < 1.0, || "suites.cs_gradient.fd_step: not in (0, 1)".into())?;
                }
                Suite::RotateSquare => {
                    let r = &s.rotate_square;
                    need(r.margin <= r.cutoff, || "suites.rotate_square.margin: exceeds cutoff".into())?;
                    let dim = self.dirac_dims(n, r.cutoff, r.guard, m)?;
                    cap("rotate-square dense boson dimension", dim, lim.max_dense_dim)?;
                }
                Suite::YmSectors => {
                    let y = &s.ym_sectors;
                    let dim = self.dirac_dims(n, y.cutoff, 0, 0)?;
                    need(y.eigenpairs >= 1 && y.eigenpairs <= dim, || "suites.ym_sectors.eigenpairs: out of range".into())?;
                }
                Suite::FieldCommutators => {
                    let f = &s.field_commutators;
                    need(f.modes >= 1 && f.modes <= plane, || "suites.field_commutators.modes: out of range".into())?;
                    need(f.cutoff >= 1, || "suites.field_commutators.cutoff: must be ≥ 1".into())?;
                    need(f.point.iter().all(|&c| c < self.lattice.n), || "suites.field_commutators.point: outside lattice".into())?;
                    need(f.mu < 3 && f.a < 3, || "suites.field_commutators: mu and a must be < 3".into())?;
                    let single = max_modes(&lat, SeedFamily::SingleComponent { a: f.a, mu: f.mu });
                    need(
                        !f.concentration_counts.is_empty() && f.concentration_counts.iter().all(|&c| c >= 1 && c <= single),
                        || format!("suites.field_commutators.concentration_counts: need 1..={single}"),
                    )?;
                    self.dirac_dims(f.modes, f.cutoff, 0, 0)?;
                }
                Suite::SpectralInvariant => {
                    let p = &s.spectral_invariant;
                    need(p.modes >= 9 && p.modes <= plane, || "suites.spectral_invariant.modes: not in 9..=max".into())?;
                    need(p.points >= 1 && p.points <= 100, || "suites.spectral_invariant.points: not in 1..=100".into())?;
                    self.dirac_dims(n, self.boson.cutoff, 0, 0)?;
                }
                Suite::KernelDegeneracy => {
                    let t = s.kernel_degeneracy.tol;
                    need(t > 0.0 && t < 1.0, || "suites.kernel_degeneracy.tol: not in (0, 1)".into())?;
                    self.dirac_dims(n, self.boson.cutoff, 0, m)?;
                }
                Suite::All => unreachable!("expanded"),
            }
        }
        Ok(())
    }

    // Boson dimension for (modes, cutoff, guard), after checking the boson and
    // doubled composite caps (fermion modes m; 0 skips the composite check).
    fn dirac_dims(&self, modes: usize, cutoff: usize, guard: usize, m: usize) -> Result<usize> {
        let levels = cutoff + guard + 1;
        let mut dim: usize = 1;
        for _ in 0..modes {
            dim = dim.checked_mul(levels).filter(|d| *d <= MAX_BOSON_DIM).ok_or(Error::ResourceCap {
                what: "boson dimension",
                value: usize::MAX,
                cap: MAX_BOSON_DIM,
            })?;
        }
        let total = 2 * dim * (1usize << m);
        cap("doubled Hilbert dimension", total, self.limits.max_hilbert_dim)?;
        Ok(dim)
    }
}

fn need(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(msg()))
    }
}

fn cap(what: &'static str, value: usize, cap: usize) -> Result<()> {
    if value > cap {
        Err(Error::ResourceCap { what, value, cap })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let c = ExperimentConfig::parse("schema_version = 1\n").unwrap();
        assert_eq!(c.lattice.n, 3);
        assert_eq!(c.suites.rotate_square.guard, 16);
        c.validate(Suite::All).unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("schema_version = 1\ncolour = 2\n").is_err());
        assert!(ExperimentConfig::parse("schema_version = 1\n[lattice]\nnn = 2\n").is_err());
    }

    #[test]
    fn wrong_schema_and_caps() {
        let c = ExperimentConfig::parse("schema_version = 2\n").unwrap();
        assert!(matches!(c.validate(Suite::CarRelations), Err(Error::Config(_))));
        let c = ExperimentConfig::parse("schema_version = 1\n[limits]\nmax_hilbert_dim = 100\n").unwrap();
        assert!(matches!(c.validate(Suite::KernelDegeneracy), Err(Error::ResourceCap { .. })));
        let c = ExperimentConfig::parse("schema_version = 1\n[suites.rotate_square]\ncutoff = 40\n").unwrap();
        assert!(matches!(c.validate(Suite::RotateSquare), Err(Error::ResourceCap { .. })));
        assert!(c.validate(Suite::CarRelations).is_ok());
    }

    #[test]
    fn field_level_messages() {
        let c = ExperimentConfig::parse("schema_version = 1\n[modes]\ncount = 3\n[fermion]\nmodes = 2\n").unwrap();
        let msg = c.validate(Suite::All).unwrap_err().to_string();
        assert!(msg.contains("fermion.modes"), "{msg}");
    }
}
