//! The subcommands. Each one returns a report that serializes to the JSON
//! the binary prints; file handling beyond loading stays in `main`.

use std::path::Path;

use geowl_core::oracle::{apply_random_isometry, random_cloud, search_indistinguishable, Alignment, SearchParams};
use geowl_core::one_shot::{reconstruct_one_iter, OneShotConfig};
use geowl_core::recon2d::reconstruct_planar;
use geowl_core::recon_nd::{reconstruct_nd, NdConfig};
use geowl_core::report::{Algorithm, ReconstructionReport};
use geowl_core::wl::{run_wl, ColorStore, Fingerprint};
use geowl_core::{PointCloud, Rational, Scalar};
use serde::Serialize;
use serde_json::Value;

use crate::format::{cloud_to_json, load, LoadedCloud};
use crate::{CliError, Mode, RunConfig};

/// Residual below which a roundtrip counts as recovered.
pub const RESIDUAL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FingerprintJson {
    pub ell: usize,
    pub iteration: usize,
    pub total: u64,
    pub classes: usize,
    /// `(hex digest, multiplicity)`, sorted by digest.
    pub entries: Vec<(String, u64)>,
}

impl From<&Fingerprint> for FingerprintJson {
    fn from(fp: &Fingerprint) -> Self {
        Self {
            ell: fp.ell,
            iteration: fp.iteration,
            total: fp.total(),
            classes: fp.classes(),
            entries: fp.entries.iter().map(|(d, m)| (hex::encode(d), *m)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColorSummary {
    pub label: Option<String>,
    pub n: usize,
    pub dim: usize,
    pub ell: usize,
    pub iters: usize,
    pub mode: &'static str,
    /// Color classes after each iteration, starting with the initial coloring.
    pub class_counts: Vec<usize>,
    pub fingerprint: FingerprintJson,
}

fn color_generic<T: Scalar>(cloud: &PointCloud<T>, ell: usize, iters: usize, cfg: &RunConfig) -> Result<(Vec<usize>, Fingerprint), CliError> {
    let (store, history) = run_wl(cloud, ell, iters, &cfg.wl()).map_err(CliError::from_input)?;
    Ok((history.class_counts(), store.fingerprint(&history, iters)))
}

pub fn color(cloud: &LoadedCloud, cfg: &RunConfig) -> Result<ColorSummary, CliError> {
    cfg.validate()?;
    let (ell, iters) = (cfg.ell.unwrap_or(1), cfg.iters.unwrap_or(3));
    let mode = cfg.mode_for(cloud);
    let (class_counts, fp) = match (cloud, mode) {
        (LoadedCloud::Exact(c), Mode::Exact) => color_generic(c, ell, iters, cfg)?,
        _ => color_generic(&cloud.to_float(), ell, iters, cfg)?,
    };
    Ok(ColorSummary {
        label: cloud.label().map(str::to_owned),
        n: cloud.len(),
        dim: cloud.dim(),
        ell,
        iters,
        mode: mode.name(),
        class_counts,
        fingerprint: (&fp).into(),
    })
}

pub fn cmd_color(path: &Path, cfg: &RunConfig) -> Result<ColorSummary, CliError> {
    color(&load(path)?, cfg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompareReport {
    /// `"equal"` or `"different"`.
    pub verdict: &'static str,
    /// First iteration whose color multisets differ.
    pub first_difference: Option<usize>,
    pub ell: usize,
    pub iters: usize,
    pub mode: &'static str,
    pub class_counts_a: Vec<usize>,
    pub class_counts_b: Vec<usize>,
}

type Comparison = (Option<usize>, Vec<usize>, Vec<usize>);

fn compare_generic<T: Scalar>(a: &PointCloud<T>, b: &PointCloud<T>, ell: usize, iters: usize, cfg: &RunConfig) -> Result<Comparison, CliError> {
    let wl = cfg.wl();
    let mut store = ColorStore::<T>::new(wl.quantum);
    let ha = store.run(a, ell, iters, &wl).map_err(CliError::from_input)?;
    let hb = store.run(b, ell, iters, &wl).map_err(CliError::from_input)?;
    let first = (0..=iters).find(|&t| ha.multiset(t) != hb.multiset(t));
    Ok((first, ha.class_counts(), hb.class_counts()))
}

pub fn compare(a: &LoadedCloud, b: &LoadedCloud, cfg: &RunConfig) -> Result<CompareReport, CliError> {
    cfg.validate()?;
    if a.dim() != b.dim() {
        return Err(CliError::Parse(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    let (ell, iters) = (cfg.ell.unwrap_or(1), cfg.iters.unwrap_or(3));
    let mode = match (cfg.mode_for(a), cfg.mode_for(b)) {
        (Mode::Exact, Mode::Exact) => Mode::Exact,
        _ => Mode::Float,
    };
    let (first, ca, cb) = match (a, b, mode) {
        (LoadedCloud::Exact(a), LoadedCloud::Exact(b), Mode::Exact) => compare_generic(a, b, ell, iters, cfg)?,
        _ => compare_generic(&a.to_float(), &b.to_float(), ell, iters, cfg)?,
    };
    Ok(CompareReport {
        verdict: if first.is_none() { "equal" } else { "different" },
        first_difference: first,
        ell,
        iters,
        mode: mode.name(),
        class_counts_a: ca,
        class_counts_b: cb,
    })
}

pub fn cmd_compare(a: &Path, b: &Path, cfg: &RunConfig) -> Result<CompareReport, CliError> {
    compare(&load(a)?, &load(b)?, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentJson {
    pub rotation: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    pub permutation: Vec<usize>,
    pub residual: f64,
}

impl From<&Alignment> for AlignmentJson {
    fn from(a: &Alignment) -> Self {
        Self {
            rotation: a.rotation.clone(),
            translation: a.translation.clone(),
            permutation: a.permutation.clone(),
            residual: a.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub algorithm: &'static str,
    pub path: &'static str,
    pub mode: &'static str,
    pub n: usize,
    pub dim: usize,
    pub ell: usize,
    pub iters: usize,
    pub passed: bool,
    pub colors_verified: bool,
    pub residual: Option<f64>,
    /// Why the oracle rejected the recovered cloud.
    pub mismatch: Option<String>,
    pub rounds: usize,
    pub round_bound: usize,
    pub epsilon: Option<f64>,
    pub candidates_tried: usize,
    pub assignments: u128,
    pub points: Vec<Vec<f64>>,
    pub alignment: Option<AlignmentJson>,
}

pub fn parse_algorithm(name: &str) -> Result<Algorithm, CliError> {
    [Algorithm::Planar, Algorithm::Nd, Algorithm::OneShot]
        .into_iter()
        .find(|a| a.name() == name)
        .ok_or_else(|| CliError::Parse(format!("unknown algorithm {name:?} (wl2d, wlnd, oneshot)")))
}

/// WL parameters each algorithm is stated for.
fn parameters(algorithm: Algorithm, d: usize) -> Result<(usize, usize), CliError> {
    match algorithm {
        Algorithm::Planar if d <= 2 => Ok((1, 3)),
        Algorithm::Planar => Err(CliError::Parse(format!("wl2d needs d ≤ 2, got {d}"))),
        Algorithm::Nd if d >= 3 => Ok((d - 1, 3)),
        Algorithm::Nd => Err(CliError::Parse(format!("wlnd needs d ≥ 3, got {d}"))),
        Algorithm::OneShot if d >= 1 => Ok((d, 1)),
        Algorithm::OneShot => Err(CliError::Parse("oneshot needs d ≥ 1".into())),
    }
}

fn reconstruct_generic<T: Scalar>(
    cloud: &PointCloud<T>,
    algorithm: Algorithm,
    ell: usize,
    iters: usize,
    cfg: &RunConfig,
    mode: Mode,
) -> Result<(ReconstructionReport, Result<f64, String>), CliError> {
    let (store, history) = run_wl(cloud, ell, iters, &cfg.wl()).map_err(CliError::from_input)?;
    let multiset = history.top();
    let tol = cfg.core_tol(mode);
    let d = cloud.dim();
    let mut report = match algorithm {
        Algorithm::Planar => reconstruct_planar(&store, &multiset, tol),
        Algorithm::Nd => reconstruct_nd(
            &store,
            &multiset,
            d,
            &NdConfig {
                tol,
                samples: cfg.samples,
                seed: cfg.seed,
                max_candidates: usize::try_from(cfg.max_candidates).unwrap_or(usize::MAX),
                max_depth: cfg.max_depth,
            },
        ),
        Algorithm::OneShot => reconstruct_one_iter(
            &store,
            &multiset,
            d,
            &OneShotConfig {
                tol,
                max_candidates: cfg.max_candidates,
            },
        ),
    }
    .map_err(CliError::from_recon)?;
    let check = report
        .check_against(cloud, RESIDUAL_LIMIT)
        .map(|al| al.residual)
        .map_err(|m| m.to_string());
    Ok((report, check))
}

pub fn roundtrip(cloud: &LoadedCloud, algorithm: Algorithm, cfg: &RunConfig) -> Result<RoundtripReport, CliError> {
    cfg.validate()?;
    if cloud.is_empty() {
        return Err(CliError::Parse("empty cloud".into()));
    }
    let cloud = match algorithm {
        Algorithm::Planar if cloud.dim() < 2 => cloud.pad_to(2),
        _ => cloud.clone(),
    };
    let d = cloud.dim();
    let (ell, iters) = parameters(algorithm, d)?;
    if cfg.ell.is_some_and(|l| l != ell) || cfg.iters.is_some_and(|t| t != iters) {
        return Err(CliError::Parse(format!(
            "{} runs with ell={ell}, iters={iters}",
            algorithm.name()
        )));
    }
    let mode = cfg.mode_for(&cloud);
    let (report, check) = match (&cloud, mode) {
        (LoadedCloud::Exact(c), Mode::Exact) => reconstruct_generic(c, algorithm, ell, iters, cfg, mode)?,
        _ => reconstruct_generic(&cloud.to_float(), algorithm, ell, iters, cfg, mode)?,
    };
    let residual = check.as_ref().ok().copied();
    Ok(RoundtripReport {
        algorithm: algorithm.name(),
        path: report.path.name(),
        mode: mode.name(),
        n: cloud.len(),
        dim: d,
        ell,
        iters,
        passed: report.colors_verified && residual.is_some_and(|r| r < RESIDUAL_LIMIT),
        colors_verified: report.colors_verified,
        residual,
        mismatch: check.err(),
        rounds: report.rounds,
        round_bound: report.round_bound,
        epsilon: report.epsilon,
        candidates_tried: report.candidates_tried,
        assignments: report.assignments,
        points: report.points.clone(),
        alignment: report.alignment.as_ref().map(Into::into),
    })
}

pub fn cmd_roundtrip(path: &Path, algorithm: &str, cfg: &RunConfig) -> Result<RoundtripReport, CliError> {
    let algorithm = parse_algorithm(algorithm)?;
    roundtrip(&load(path)?, algorithm, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FindingJson {
    pub attempt: usize,
    pub attempt_seed: u64,
    pub strategy: &'static str,
    pub a: Value,
    pub b: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub ell: usize,
    pub iters: usize,
    pub dim: usize,
    pub n: usize,
    pub budget: usize,
    pub seed: u64,
    pub findings: Vec<FindingJson>,
}

pub fn cmd_search(dim: usize, n: usize, budget: usize, cfg: &RunConfig) -> Result<SearchReport, CliError> {
    cfg.validate()?;
    if dim == 0 || n == 0 {
        return Err(CliError::Parse("search needs dim ≥ 1 and n ≥ 1".into()));
    }
    let params = SearchParams {
        ell: cfg.ell.unwrap_or(1),
        iters: cfg.iters.unwrap_or(3),
        dim,
        n,
        budget,
        seed: cfg.seed,
    };
    geowl_core::wl::tuple_count(n, params.ell, cfg.max_tuples).map_err(CliError::from_input)?;
    let findings = search_indistinguishable(&params, &cfg.wl())
        .into_iter()
        .map(|f| FindingJson {
            attempt: f.attempt,
            attempt_seed: f.attempt_seed,
            strategy: f.strategy.name(),
            a: cloud_to_json(&LoadedCloud::Exact(f.a)),
            b: cloud_to_json(&LoadedCloud::Exact(f.b)),
        })
        .collect();
    Ok(SearchReport {
        ell: params.ell,
        iters: params.iters,
        dim,
        n,
        budget,
        seed: cfg.seed,
        findings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub n: usize,
    pub dim: usize,
    /// Coordinates are multiples of `1/grid`.
    pub grid: i64,
    /// Also apply a random exact isometry drawn from this seed.
    pub isometry_seed: Option<u64>,
}

pub fn cmd_gen(params: &GenParams, cfg: &RunConfig) -> Result<LoadedCloud, CliError> {
    if params.n == 0 || params.dim == 0 || params.grid < 1 {
        return Err(CliError::Parse("gen needs n ≥ 1, dim ≥ 1 and grid ≥ 1".into()));
    }
    let mut cloud = random_cloud::<Rational>(params.n, params.dim, cfg.seed, params.grid);
    if let Some(s) = params.isometry_seed {
        cloud = apply_random_isometry(&cloud, s);
    }
    let label = format!("random n={} d={} seed={}", params.n, params.dim, cfg.seed);
    Ok(LoadedCloud::Exact(cloud.with_label(label)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_json;

    fn cloud(text: &str) -> LoadedCloud {
        parse_json(text).unwrap()
    }

    const SQUARE: &str = r#"{"dim": 2, "points": [["0","0"],["1","0"],["1","1"],["0","1"]], "label": "unit square"}"#;

    #[test]
    fn square_summary_has_four_iterations() {
        let s = color(&cloud(SQUARE), &RunConfig::default()).unwrap();
        assert_eq!(s.class_counts.len(), 4);
        // all four corners look alike
        assert_eq!(s.class_counts, vec![1, 1, 1, 1]);
        assert_eq!(s.fingerprint.total, 4);
    }

    #[test]
    fn tuple_cap_is_exit_three() {
        let c = LoadedCloud::Exact(random_cloud(50, 2, 1, 4));
        let cfg = RunConfig {
            ell: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(color(&c, &cfg).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn line_triples_differ_at_one() {
        let a = cloud(r#"{"points": [["0"],["1"],["2"]]}"#);
        let b = cloud(r#"{"points": [["0"],["1"],["3"]]}"#);
        let r = compare(&a, &b, &RunConfig::default()).unwrap();
        assert_eq!((r.verdict, r.first_difference), ("different", Some(1)));
        assert_eq!(compare(&a, &a, &RunConfig::default()).unwrap().verdict, "equal");
        let plane = cloud(SQUARE);
        assert_eq!(compare(&a, &plane, &RunConfig::default()).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn roundtrips_pass() {
        let tetra = cloud(r#"{"points": [["0","0","0"],["1","0","0"],["0","1","0"],["0","0","1"],["0.25","0.25","0.25"]]}"#);
        assert!(roundtrip(&cloud(SQUARE), Algorithm::Planar, &RunConfig::default()).unwrap().passed);
        assert!(roundtrip(&tetra, Algorithm::Nd, &RunConfig::default()).unwrap().passed);
        assert!(roundtrip(&tetra, Algorithm::OneShot, &RunConfig::default()).unwrap().passed);
        assert_eq!(roundtrip(&tetra, Algorithm::Planar, &RunConfig::default()).unwrap_err().exit_code(), 2);
        assert_eq!(roundtrip(&cloud(SQUARE), Algorithm::Nd, &RunConfig::default()).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = RunConfig {
            tol: 0.0,
            ..RunConfig::default()
        };
        assert_eq!(color(&cloud(SQUARE), &cfg).unwrap_err().exit_code(), 2);
        let cfg = RunConfig {
            max_depth: 0,
            ..RunConfig::default()
        };
        assert_eq!(color(&cloud(SQUARE), &cfg).unwrap_err().exit_code(), 2);
    }
}
