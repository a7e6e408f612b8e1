//! Randomized check of the closed-form worst case against the oracle and
//! of the structural properties of the NSNR distance.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::metrics::{d_kl, d_nsnr, nsnr, nsnr_min, worst_case_target};
use crate::oracle::{brute_force_nsnr_min, OracleConfig};
use crate::randgen::{derive_trial_rng, random_spd, SeedSpec};

pub const ORACLE_AGREEMENT_TOL: f64 = 1e-6;
pub const UNDERCUT_TOL: f64 = 1e-9;
pub const TARGET_TOL: f64 = 1e-9;
pub const BOUND_TOL: f64 = 1e-12;
pub const SYMMETRY_REL_TOL: f64 = 1e-10;
pub const SCALE_TOL: f64 = 1e-10;

const SCALES: [f64; 3] = [1e-3, 1.0, 1e3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub pairs: usize,
    /// Fixed dimension, or uniform in `2..=10` per pair when `None`.
    pub dim: Option<usize>,
    pub master_seed: u64,
    /// Eigenvalue range of the random SPD matrices (log-uniform).
    pub eig_range: (f64, f64),
    /// Brute-force comparison is skipped when `None`.
    pub oracle: Option<OracleConfig>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            pairs: 100,
            dim: None,
            master_seed: 0,
            eig_range: (1e-2, 1e2),
            oracle: Some(OracleConfig::default()),
        }
    }
}

/// Worst residual of each check over all pairs. Signed residuals are
/// positive when the check is violated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyReport {
    pub pairs: usize,
    /// `|oracle − closed form|`.
    pub oracle_gap: f64,
    /// `closed form − best sampled or refined NSNR`.
    pub oracle_undercut: f64,
    /// `|nsnr(worst target) − closed form|`.
    pub target_gap: f64,
    /// `d_nsnr − d_kl`.
    pub bound_excess: f64,
    /// `|NSNR_min(C,Ĉ) − NSNR_min(Ĉ,C)| / NSNR_min(C,Ĉ)`.
    pub symmetry_rel: f64,
    /// `|NSNR_min(C, αC) − 1|`.
    pub scale_gap: f64,
    pub failures: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn merge(&mut self, other: &PairResidual) {
        self.pairs += 1;
        self.oracle_gap = self.oracle_gap.max(other.oracle_gap);
        self.oracle_undercut = self.oracle_undercut.max(other.oracle_undercut);
        self.target_gap = self.target_gap.max(other.target_gap);
        self.bound_excess = self.bound_excess.max(other.bound_excess);
        self.symmetry_rel = self.symmetry_rel.max(other.symmetry_rel);
        self.scale_gap = self.scale_gap.max(other.scale_gap);
        if !other.passed() {
            self.failures += 1;
        }
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairs checked        {}", self.pairs)?;
        writeln!(
            f,
            "oracle gap           {:.3e}  (tol {ORACLE_AGREEMENT_TOL:e})",
            self.oracle_gap
        )?;
        writeln!(
            f,
            "oracle undercut      {:.3e}  (tol {UNDERCUT_TOL:e})",
            self.oracle_undercut
        )?;
        writeln!(
            f,
            "worst target gap     {:.3e}  (tol {TARGET_TOL:e})",
            self.target_gap
        )?;
        writeln!(
            f,
            "d_nsnr - d_kl        {:.3e}  (tol {BOUND_TOL:e})",
            self.bound_excess
        )?;
        writeln!(
            f,
            "symmetry (relative)  {:.3e}  (tol {SYMMETRY_REL_TOL:e})",
            self.symmetry_rel
        )?;
        writeln!(
            f,
            "scale equality       {:.3e}  (tol {SCALE_TOL:e})",
            self.scale_gap
        )?;
        write!(f, "failing pairs        {}", self.failures)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PairResidual {
    oracle_gap: f64,
    oracle_undercut: f64,
    target_gap: f64,
    bound_excess: f64,
    symmetry_rel: f64,
    scale_gap: f64,
}

impl PairResidual {
    fn passed(&self) -> bool {
        self.oracle_gap <= ORACLE_AGREEMENT_TOL
            && self.oracle_undercut <= UNDERCUT_TOL
            && self.target_gap <= TARGET_TOL
            && self.bound_excess <= BOUND_TOL
            && self.symmetry_rel <= SYMMETRY_REL_TOL
            && self.scale_gap <= SCALE_TOL
    }
}

pub fn verify(cfg: &VerifyConfig, exec: Execution) -> Result<VerifyReport> {
    if cfg.pairs == 0 {
        return Err(Error::ConfigInvalid(
            "verify needs at least one pair".into(),
        ));
    }
    if let Some(d) = cfg.dim {
        if d < 2 {
            return Err(Error::ConfigInvalid(format!("dimension {d} must be ≥ 2")));
        }
    }
    let (lo, hi) = cfg.eig_range;
    let residuals = try_map_indexed(cfg.pairs, exec, |i| {
        let mut rng = derive_trial_rng(SeedSpec::new(cfg.master_seed, i as u64));
        let dim = cfg.dim.unwrap_or_else(|| rng.random_range(2..=10));
        let c = random_spd(dim, lo, hi, &mut rng)?;
        let c_hat = random_spd(dim, lo, hi, &mut rng)?;

        let closed = nsnr_min(&c, &c_hat)?;
        let mut r = PairResidual::default();
        if let Some(oracle_cfg) = &cfg.oracle {
            let oracle = brute_force_nsnr_min(&c, &c_hat, oracle_cfg, &mut rng)?;
            r.oracle_gap = (oracle.value - closed).abs();
            r.oracle_undercut = closed - oracle.value.min(oracle.sampled_min);
            let target = worst_case_target(&c, &c_hat)?;
            r.target_gap = (nsnr(&target, &c, &c_hat)? - closed).abs();
        }
        r.bound_excess = d_nsnr(&c, &c_hat)? - d_kl(&c, &c_hat)?;
        r.symmetry_rel = (closed - nsnr_min(&c_hat, &c)?).abs() / closed;
        for alpha in SCALES {
            let scaled = c.scaled(alpha)?;
            r.scale_gap = r.scale_gap.max((nsnr_min(&c, &scaled)? - 1.0).abs());
        }
        Ok(r)
    })?;
    let mut report = VerifyReport::default();
    for r in &residuals {
        report.merge(r);
    }
    Ok(report)
}
