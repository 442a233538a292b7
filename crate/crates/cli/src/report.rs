//! Deterministic run reports: a serde tree for `--json` output plus an
//! aligned plain-text rendering for stdout. Field order is fixed by struct
//! order and all collections are vectors, so identical inputs serialize to
//! identical bytes.

use billiard_core::constants::{ConstantsReport, DomainD, KappaReading, Mode, PairConstants};
use billiard_core::dimension::{DimensionBounds, GExtrema};
use billiard_core::Tolerances;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool_version: &'static str,
    pub config_sha256: String,
    pub tolerance_profile: Option<String>,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(
        config_text: &str,
        profile: Option<&str>,
        tolerances: Tolerances,
        seed: Option<u64>,
    ) -> Self {
        let mut h = Sha256::new();
        h.update(config_text.as_bytes());
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            config_sha256: format!("{:x}", h.finalize()),
            tolerance_profile: profile.map(str::to_owned),
            tolerances,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsOut {
    pub mode: Mode,
    pub kappa_reading: KappaReading,
    pub d_min: f64,
    pub d_max: f64,
    pub b_minus: f64,
    pub cos_phi_plus: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub pairs: Vec<PairConstants>,
    pub hull_vertices: Vec<Vec<f64>>,
}

impl ConstantsOut {
    pub fn from_report<const D: usize>(r: &ConstantsReport<D>) -> Self {
        Self {
            mode: r.mode,
            kappa_reading: r.reading,
            d_min: r.d_min,
            d_max: r.d_max,
            b_minus: r.b_minus_global,
            cos_phi_plus: r.cos_phi_plus,
            kappa_minus: r.kappa_minus,
            kappa_plus: r.kappa_plus,
            pairs: r.pairs.clone(),
            hull_vertices: r
                .hull
                .vertices
                .iter()
                .map(|v| v.iter().copied().collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub constants: ConstantsOut,
    pub domain: DomainD,
    pub g_extrema: GExtrema,
    pub bounds: Vec<DimensionBounds>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub modes: Vec<ModeReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.modes {
            let c = &m.constants;
            out.push_str(&format!("mode: {:?}\n", c.mode));
            out.push_str(&format!(
                "  d_min      = {:<12.6} d_max     = {:<12.6}\n",
                c.d_min, c.d_max
            ));
            out.push_str(&format!(
                "  b_minus    = {:<12.6} cos_phi+  = {:<12.6}\n",
                c.b_minus, c.cos_phi_plus
            ));
            out.push_str(&format!(
                "  kappa_min  = {:<12.6} kappa_max = {:<12.6}\n",
                c.kappa_minus, c.kappa_plus
            ));
            out.push_str(&format!(
                "  g interval = [{:.6}, {:.6}]\n",
                m.g_extrema.g_min, m.g_extrema.g_max
            ));
            for b in &m.bounds {
                out.push_str(&format!(
                    "  {:?}: {:.6} <= dim <= {:.6}   (lambda1={:.6}, mu1={:.6}, alpha={:.6}{}, pinching={})\n",
                    b.variant,
                    b.lower,
                    b.upper,
                    b.lambda1,
                    b.mu1,
                    b.alpha,
                    if b.alpha_clamped { " clamped" } else { "" },
                    b.pinching_satisfied,
                ));
            }
        }
        out
    }
}

/// Write text to stdout and, when requested, JSON to a file.
pub fn emit(json_path: Option<&std::path::Path>, json: &str, text: &str) -> std::io::Result<()> {
    print!("{text}");
    if let Some(p) = json_path {
        std::fs::write(p, json)?;
    }
    Ok(())
}
