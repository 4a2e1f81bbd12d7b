//! Convergence studies over mesh families.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    band_split, band_trace, fit_rate, h1_error, l2_boundary_error, necessary_lhs, sufficient_check,
    NecessaryReport, RateFit, SufficientReport,
};
use crate::fem::solver::SolveStats;
use crate::fem::{cea_check, solve_poisson, CeaReport};
use crate::interp::{build_correction, corrected_interpolant, lagrange, CorrectionOptions};
use crate::mesh::{classify, Triangulation};
use crate::meshgen::{self, Band};
use crate::solution::ManufacturedSolution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Uniform,
    SingleBand,
    BabuskaAziz,
    SubdividedBand,
    Cluster,
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "single_band" | "band" => Ok(Self::SingleBand),
            "babuska_aziz" | "ba" => Ok(Self::BabuskaAziz),
            "subdivided_band" | "subdivided" => Ok(Self::SubdividedBand),
            "cluster" => Ok(Self::Cluster),
            _ => Err(format!("unknown family `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub family: Family,
    /// Strictly decreasing mesh sizes; each `1/h` must be an integer.
    pub h_sequence: Vec<f64>,
    /// `h̄ = h^β`.
    pub beta: f64,
    /// Target order α in the necessary-condition length test.
    pub alpha_target: f64,
    /// `C_L` in `L ≥ C_L·h^{2α/5}`.
    pub c_l: f64,
    pub solution: ManufacturedSolution,
    /// Maximum-angle threshold separating T¹ from T².
    pub alpha0: f64,
    pub correction: CorrectionOptions,
    /// Block size of the cluster family.
    pub cluster_k: usize,
}

impl StudyConfig {
    pub fn new(family: Family, h_sequence: Vec<f64>, beta: f64) -> Self {
        Self {
            family,
            h_sequence,
            beta,
            alpha_target: 1.0,
            c_l: 1.0,
            solution: ManufacturedSolution::quadratic(),
            alpha0: meshgen::DEFAULT_ALPHA0,
            correction: CorrectionOptions::default(),
            cluster_k: 2,
        }
    }

    /// `h = 1/n` for each `n`.
    pub fn with_ns(family: Family, ns: &[usize], beta: f64) -> Self {
        Self::new(family, ns.iter().map(|&n| 1.0 / n as f64).collect(), beta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_sequence.is_empty() {
            return Err(Error::Config("empty h sequence".into()));
        }
        if self.h_sequence.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("h sequence must be strictly decreasing".into()));
        }
        for &h in &self.h_sequence {
            let n = (1.0 / h).round();
            if !(h > 0.0) || (n * h - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!("1/h must be an integer, got h = {h}")));
            }
        }
        if !(self.beta >= 1.0) {
            return Err(Error::Config(format!("beta must be at least 1, got {}", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.alpha_target) {
            return Err(Error::Config("alpha must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub h: f64,
    pub hbar: f64,
    pub nx: usize,
    pub num_triangles: usize,
    pub dofs: usize,
    /// `|u − U|₁`.
    pub h1_error: f64,
    /// `|u − U|₁` on the thin elements (band `K̃` elements or strip).
    #[serde(with = "crate::serde_float")]
    pub h1_error_band: f64,
    /// `‖u − U‖_{L²(Γ)}` on a representative Γ.
    #[serde(with = "crate::serde_float")]
    pub l2_gamma: f64,
    #[serde(with = "crate::serde_float")]
    pub a1: f64,
    #[serde(with = "crate::serde_float")]
    pub a2: f64,
    #[serde(with = "crate::serde_float")]
    pub nec_lhs: f64,
    #[serde(with = "crate::serde_float")]
    pub nec_closed_form: f64,
    /// Slope against the previous level.
    #[serde(with = "crate::serde_float")]
    pub rate_running: f64,
    pub lagrange_error: f64,
    pub corrected_error: Option<f64>,
    /// Largest `|Σ h_i w′_i|` over bands, and the matching scale.
    pub trace_weighted_sum: Option<(f64, f64)>,
    pub solver: SolveStats,
    pub necessary: Option<NecessaryReport>,
    pub sufficient: Option<SufficientReport>,
    pub cea: Option<CeaReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub levels: Vec<LevelResult>,
    /// Fit of `h1_error` against `h`.
    pub rate: Option<RateFit>,
    /// Fit of the corrected interpolation error, when available.
    pub corrected_rate: Option<RateFit>,
}

pub const CSV_HEADER: &str = "h,hbar,dofs,h1_error,h1_error_band,l2_gamma,a1,a2,nec_lhs,rate_running";

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

impl StudyResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for l in &self.levels {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                fmt_f(l.h),
                fmt_f(l.hbar),
                l.dofs,
                fmt_f(l.h1_error),
                fmt_f(l.h1_error_band),
                fmt_f(l.l2_gamma),
                fmt_f(l.a1),
                fmt_f(l.a2),
                fmt_f(l.nec_lhs),
                fmt_f(l.rate_running),
            );
        }
        s
    }
}

/// Generated mesh with the metadata the study needs.
struct LevelMesh {
    mesh: Triangulation,
    hbar: f64,
    bands: Vec<Band>,
    /// Elements whose error is reported separately.
    thin: Vec<usize>,
    gamma: Vec<[usize; 2]>,
    clusters: Vec<Vec<usize>>,
    correct: bool,
}

fn build_level(cfg: &StudyConfig, nx: usize) -> Result<LevelMesh> {
    let h = 1.0 / nx as f64;
    let hbar = h.powf(cfg.beta);
    Ok(match cfg.family {
        Family::Uniform => {
            let mesh = meshgen::unit_square_uniform(nx)?;
            // edges on y = 1/2 when it is a grid line
            let gamma = if nx.is_multiple_of(2) {
                let row = nx / 2;
                (0..nx).map(|i| [row * (nx + 1) + i, row * (nx + 1) + i + 1]).collect()
            } else {
                Vec::new()
            };
            LevelMesh {
                mesh,
                hbar: h,
                bands: Vec::new(),
                thin: Vec::new(),
                gamma,
                clusters: Vec::new(),
                correct: false,
            }
        }
        Family::SingleBand => {
            let sb = meshgen::single_band_mesh(nx, hbar)?;
            let band = sb.band().clone();
            LevelMesh {
                thin: band.even_elements.clone(),
                gamma: band.gamma_edges.clone(),
                bands: vec![band],
                hbar,
                clusters: Vec::new(),
                correct: false,
                mesh: sb.rows.mesh,
            }
        }
        Family::BabuskaAziz => {
            let ny = (1.0 / hbar).round().max(1.0) as usize;
            let rm = meshgen::babuska_aziz(nx, ny)?;
            let mid = rm.bands.len() / 2;
            LevelMesh {
                thin: rm.bands.iter().flat_map(|b| b.even_elements.iter().copied()).collect(),
                gamma: rm.bands[mid].gamma_edges.clone(),
                hbar: 1.0 / ny as f64,
                bands: rm.bands,
                clusters: Vec::new(),
                correct: false,
                mesh: rm.mesh,
            }
        }
        Family::SubdividedBand => {
            let sd = meshgen::subdivided_band_mesh(nx, hbar)?;
            LevelMesh {
                thin: sd.tilde_elements.clone(),
                gamma: Vec::new(),
                bands: Vec::new(),
                hbar,
                clusters: Vec::new(),
                correct: true,
                mesh: sd.mesh,
            }
        }
        Family::Cluster => {
            let k = cfg.cluster_k;
            if nx < k + 2 {
                return Err(Error::Config(format!("cluster family needs 1/h ≥ {}", k + 2)));
            }
            let i = (nx - k) / 2;
            let rows = (((k as f64) / nx as f64) / hbar).round().max(1.0) as usize;
            let cm = meshgen::cluster_mesh(nx, (i, i, k), rows)?;
            LevelMesh {
                thin: cm.cluster.clone(),
                gamma: Vec::new(),
                bands: Vec::new(),
                hbar: (k as f64 / nx as f64) / rows as f64,
                clusters: vec![cm.cluster],
                correct: true,
                mesh: cm.mesh,
            }
        }
    })
}

fn run_level(cfg: &StudyConfig, h: f64) -> Result<LevelResult> {
    let nx = (1.0 / h).round() as usize;
    let lm = build_level(cfg, nx)?;
    let u = &cfg.solution;
    let mesh = &lm.mesh;
    let (field, solver) = solve_poisson(mesh, u)?;
    let h1 = h1_error(u, &field, mesh, None);
    let h1_band = if lm.thin.is_empty() {
        f64::NAN
    } else {
        h1_error(u, &field, mesh, Some(&lm.thin))
    };
    let l2_gamma = if lm.gamma.is_empty() {
        f64::NAN
    } else {
        l2_boundary_error(u, &field, mesh, &lm.gamma)
    };
    let lag = lagrange(u, mesh);
    let lagrange_error = h1_error(u, &lag, mesh, None);

    let (mut a1, mut a2, mut nec, mut nec_cf) = (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    let mut necessary = None;
    let mut trace_weighted_sum = None;
    if !lm.bands.is_empty() {
        let mut s1 = 0.0;
        let mut worst: (f64, f64) = (0.0, 0.0);
        for b in &lm.bands {
            let sp = band_split(u, &field, b, mesh)?;
            s1 += sp.a1 * sp.a1;
            let tr = band_trace(&field, b, mesh)?;
            let scale = tr
                .interval_lengths
                .iter()
                .zip(&tr.wprime)
                .map(|(h, w)| (h * w).abs())
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
            if tr.weighted_sum.abs() / scale >= worst.0 / worst.1.max(f64::MIN_POSITIVE) {
                worst = (tr.weighted_sum.abs(), scale);
            }
        }
        a1 = s1.sqrt();
        a2 = h1_band - a1;
        trace_weighted_sum = Some(worst);
        let rep = necessary_lhs(&lm.bands, mesh, cfg.alpha_target, cfg.c_l);
        if lm.bands.len() == 1 {
            nec = rep.bands[0].lhs;
            nec_cf = rep.bands[0].closed_form;
        } else {
            nec = rep.aggregate;
            nec_cf = rep.aggregate_closed_form;
        }
        necessary = Some(rep);
    }

    let (mut corrected_error, mut sufficient, mut cea) = (None, None, None);
    if lm.correct {
        let cls = classify(mesh, cfg.alpha0);
        let spec = build_correction(u, mesh, &cls, &lm.clusters, cfg.correction)?;
        sufficient = Some(sufficient_check(mesh, &cls, &spec, &lm.clusters));
        if spec.admissible {
            let corr = corrected_interpolant(u, mesh, &spec)?;
            corrected_error = Some(h1_error(u, &corr, mesh, None));
            cea = cea_check(u, mesh, &field, &[lag.clone(), corr]).ok();
        }
    }
    if cea.is_none() {
        cea = Some(cea_check(u, mesh, &field, &[lag])?);
    }

    Ok(LevelResult {
        h,
        hbar: lm.hbar,
        nx,
        num_triangles: mesh.num_triangles(),
        dofs: mesh.num_vertices() - mesh.boundary_flags().iter().filter(|&&b| b).count(),
        h1_error: h1,
        h1_error_band: h1_band,
        l2_gamma,
        a1,
        a2,
        nec_lhs: nec,
        nec_closed_form: nec_cf,
        rate_running: f64::NAN,
        lagrange_error,
        corrected_error,
        trace_weighted_sum,
        solver,
        necessary,
        sufficient,
        cea,
    })
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let mut levels = Vec::with_capacity(cfg.h_sequence.len());
    for &h in &cfg.h_sequence {
        let mut l = run_level(cfg, h)?;
        if let Some(prev) = levels.last() {
            let prev: &LevelResult = prev;
            l.rate_running = (l.h1_error / prev.h1_error).ln() / (l.h / prev.h).ln();
        }
        levels.push(l);
    }
    let hs: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let errs: Vec<f64> = levels.iter().map(|l| l.h1_error).collect();
    let rate = fit_rate(&hs, &errs);
    let corrected: Option<Vec<f64>> = levels.iter().map(|l| l.corrected_error).collect();
    let corrected_rate = corrected.and_then(|c| fit_rate(&hs, &c));
    Ok(StudyResult {
        config: cfg.clone(),
        levels,
        rate,
        corrected_rate,
    })
}
