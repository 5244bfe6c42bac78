//! Configuration, mode dispatch and report emission.
//!
//! A run reads a flat TOML file, executes one mode, writes JSON/CSV reports
//! and binary snapshots into the output directory, and finishes with
//! `manifest.json` listing every emitted file with its SHA-256. Every report
//! carries the hash of the configuration that produced it.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dirac::weitzenbock_residual;
use crate::frequency::{monotonicity_report, summarize};
use crate::fueter::{self, SectionOfM};
use crate::gauge::{self, SUnConnection};
use crate::lattice::{build_lattice, TorusLattice};
use crate::snapshot;
use crate::solver::{self, SWState, SolverOptions};
use crate::spin::{identity_suite, make_gamma, GammaRep};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    VerifyIdentities,
    Solve,
    Continue,
    Diagnose,
    Fueter,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::VerifyIdentities => "verify-identities",
            Mode::Solve => "solve",
            Mode::Continue => "continue",
            Mode::Diagnose => "diagnose",
            Mode::Fueter => "fueter",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Background {
    Trivial,
    Random,
}

/// Flat run configuration. Keys not listed here are rejected.
///
/// | key | meaning | default |
/// |---|---|---|
/// | `mode` | one of the five modes | required |
/// | `N`, `L`, `n` | lattice points per axis, side length, rank | 16, 1.0, 2 |
/// | `alpha` | angle for `solve`/`diagnose`, first angle of a geometric schedule | π/4 |
/// | `schedule` | explicit strictly decreasing angles for `continue` | none |
/// | `stages`, `ratio` | geometric schedule `alpha·ratioᵏ` when `schedule` is absent | 6, 0.5 |
/// | `background` | `trivial` or `random` | `trivial` |
/// | `background_seed`, `background_max_angle`, `background_amplitude` | random `B` | 7, 0.5, 0.5 |
/// | `max_iterations`, `tolerance`, `memory` | solver options | 5000, 1e−6, 8 |
/// | `seed` | seed of every randomized step | 1 |
/// | `out` | output directory | `out` |
/// | `snapshot` | input state for `diagnose` | solve first |
/// | `identity_samples` | samples per rank in `verify-identities` | 1000 |
/// | `fueter_points`, `fueter_loops` | sample sizes in `fueter` | 100, 10 |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(rename = "N", default = "defaults::grid")]
    pub grid: usize,
    #[serde(rename = "L", default = "defaults::side")]
    pub side: f64,
    #[serde(default = "defaults::rank")]
    pub n: usize,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default = "defaults::stages")]
    pub stages: usize,
    #[serde(default = "defaults::ratio")]
    pub ratio: f64,
    #[serde(default = "defaults::background")]
    pub background: Background,
    #[serde(default = "defaults::background_seed")]
    pub background_seed: u64,
    #[serde(default = "defaults::max_angle")]
    pub background_max_angle: f64,
    #[serde(default = "defaults::amplitude")]
    pub background_amplitude: f64,
    #[serde(default = "defaults::max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "defaults::tolerance")]
    pub tolerance: f64,
    #[serde(default = "defaults::memory")]
    pub memory: usize,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default = "defaults::out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
    #[serde(default = "defaults::identity_samples")]
    pub identity_samples: usize,
    #[serde(default = "defaults::fueter_points")]
    pub fueter_points: usize,
    #[serde(default = "defaults::fueter_loops")]
    pub fueter_loops: usize,
}

mod defaults {
    use std::path::PathBuf;

    use super::Background;

    pub fn grid() -> usize {
        16
    }
    pub fn side() -> f64 {
        1.0
    }
    pub fn rank() -> usize {
        2
    }
    pub fn alpha() -> f64 {
        std::f64::consts::FRAC_PI_4
    }
    pub fn stages() -> usize {
        6
    }
    pub fn ratio() -> f64 {
        0.5
    }
    pub fn background() -> Background {
        Background::Trivial
    }
    pub fn background_seed() -> u64 {
        7
    }
    pub fn max_angle() -> f64 {
        0.5
    }
    pub fn amplitude() -> f64 {
        0.5
    }
    pub fn max_iterations() -> usize {
        5000
    }
    pub fn tolerance() -> f64 {
        1e-6
    }
    pub fn memory() -> usize {
        8
    }
    pub fn seed() -> u64 {
        1
    }
    pub fn out() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn identity_samples() -> usize {
        1000
    }
    pub fn fueter_points() -> usize {
        100
    }
    pub fn fueter_loops() -> usize {
        10
    }
}

impl RunConfig {
    /// A configuration with every optional key at its default.
    pub fn with_mode(mode: Mode) -> Self {
        toml::from_str(&format!("mode = \"{}\"", mode.name())).expect("defaults parse")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("<file>")
                .to_string();
            Error::Config {
                field,
                message: msg,
            }
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// The angles of a `continue` run.
    pub fn resolved_schedule(&self) -> Vec<f64> {
        match &self.schedule {
            Some(s) => s.clone(),
            None => (0..self.stages)
                .map(|k| self.alpha * self.ratio.powi(k as i32))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 4 || self.grid % 2 != 0 {
            return Err(Error::config(
                "N",
                format!("{} is not an even number of points ≥ 4", self.grid),
            ));
        }
        if !(self.side > 0.0 && self.side.is_finite()) {
            return Err(Error::config(
                "L",
                format!("side length {} is not positive", self.side),
            ));
        }
        if self.n == 0 || self.n > 8 {
            return Err(Error::config("n", format!("rank {} outside 1..=8", self.n)));
        }
        if !(self.alpha > 0.0 && self.alpha <= FRAC_PI_2 + 1e-15) {
            return Err(Error::config(
                "alpha",
                format!("{} outside (0, π/2]", self.alpha),
            ));
        }
        if self.mode == Mode::Continue {
            if self.schedule.is_none() {
                if self.stages == 0 {
                    return Err(Error::config(
                        "stages",
                        "a schedule needs at least one stage",
                    ));
                }
                if !(self.ratio > 0.0 && self.ratio < 1.0) {
                    return Err(Error::config(
                        "ratio",
                        format!("{} outside (0, 1)", self.ratio),
                    ));
                }
            }
            solver::validate_schedule(&self.resolved_schedule())
                .map_err(|e| Error::config("schedule", e.to_string()))?;
        }
        if !(self.background_max_angle > 0.0 && self.background_max_angle < std::f64::consts::PI) {
            return Err(Error::config(
                "background_max_angle",
                format!("{} outside (0, π)", self.background_max_angle),
            ));
        }
        if !(self.background_amplitude >= 0.0 && self.background_amplitude.is_finite()) {
            return Err(Error::config(
                "background_amplitude",
                "must be finite and non-negative",
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("tolerance", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations", "must be positive"));
        }
        if self.mode == Mode::VerifyIdentities && self.identity_samples == 0 {
            return Err(Error::config("identity_samples", "must be positive"));
        }
        if self.mode == Mode::Fueter {
            if self.n < 2 {
                return Err(Error::config("n", "the quotient needs n ≥ 2"));
            }
            if self.fueter_points == 0 {
                return Err(Error::config("fueter_points", "must be positive"));
            }
        }
        Ok(())
    }

    /// The configuration with the output directory blanked, so that runs
    /// into different directories hash alike.
    fn canonical(&self) -> Self {
        RunConfig {
            out: PathBuf::new(),
            ..self.clone()
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(
            serde_json::to_vec(&self.canonical()).expect("config serializes"),
        ))
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            memory: self.memory,
            ..SolverOptions::default()
        }
    }

    fn background_on(&self, lat: &TorusLattice) -> SUnConnection {
        match self.background {
            Background::Trivial => SUnConnection::trivial(lat, self.n),
            Background::Random => gauge::random_background(
                lat,
                self.n,
                self.background_amplitude,
                self.background_max_angle,
                self.background_seed,
            ),
        }
    }
}

/// How the run was parallelized; recorded in the manifest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    /// One thread, fixed summation order, reproducible hashes.
    Reference,
    Parallel(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub mode: Mode,
    pub execution: String,
    pub threads: usize,
    pub passed: bool,
    pub files: Vec<ManifestEntry>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub passed: bool,
    pub manifest: Manifest,
}

/// Collects report files in the output directory.
struct Emitter {
    dir: PathBuf,
    config_hash: String,
    files: Vec<ManifestEntry>,
}

impl Emitter {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(ManifestEntry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn json(&mut self, name: &str, mode: Mode, payload: Value) -> Result<()> {
        let doc = json!({
            "config_hash": self.config_hash,
            "mode": mode,
            "report": payload,
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!("# config_hash={}\n{body}", self.config_hash);
        self.write(name, text.as_bytes())
    }
}

/// Validates, runs the mode under the requested threading, and writes the
/// manifest. The outcome passes iff the mode's required checks pass.
pub fn run(config: &RunConfig, execution: Execution) -> Result<RunOutcome> {
    config.validate()?;
    let threads = match execution {
        Execution::Reference => 1,
        Execution::Parallel(k) => k.max(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    fs::create_dir_all(&config.out)?;
    let mut em = Emitter {
        dir: config.out.clone(),
        config_hash: config.hash(),
        files: Vec::new(),
    };
    em.write(
        "config.json",
        serde_json::to_string_pretty(&config.canonical())?.as_bytes(),
    )?;
    let passed = pool.install(|| dispatch(config, &mut em))?;
    em.files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        config_hash: em.config_hash.clone(),
        mode: config.mode,
        execution: match execution {
            Execution::Reference => "reference".into(),
            Execution::Parallel(_) => "parallel".into(),
        },
        threads,
        passed,
        files: em.files.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(config.out.join("manifest.json"), text)?;
    Ok(RunOutcome { passed, manifest })
}

fn dispatch(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    match cfg.mode {
        Mode::VerifyIdentities => verify_identities(cfg, em),
        Mode::Solve => solve(cfg, em),
        Mode::Continue => continuation(cfg, em),
        Mode::Diagnose => diagnose(cfg, em),
        Mode::Fueter => fueter_mode(cfg, em),
    }
}

/// Weitzenböck residual decay across `N`, `2N`, `4N` must reach this factor.
pub const WEITZENBOCK_DECAY: f64 = 1.5;

fn verify_identities(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let ids = identity_suite(cfg.identity_samples, cfg.seed);
    let g = make_gamma();
    let mut levels = Vec::new();
    for grid in [8, 16, 32] {
        let lat = build_lattice(grid, cfg.side)?;
        let a = gauge::smooth_u1(&lat, 2.0, cfg.seed);
        let b = cfg.background_on(&lat);
        let psi = gauge::smooth_spinor(&lat, cfg.n, 3, cfg.seed.wrapping_add(1));
        levels.push((grid, weitzenbock_residual(&a, &b, &psi, &g, &lat)?));
    }
    let ratios: Vec<f64> = levels.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let weitzenbock_ok = ratios.iter().all(|&r| r >= WEITZENBOCK_DECAY);
    let passed = ids.passed && weitzenbock_ok;
    em.json(
        "identities.json",
        cfg.mode,
        json!({
            "algebra": ids,
            "weitzenbock": {
                "levels": levels.iter().map(|(n, r)| json!({"N": n, "residual": r})).collect::<Vec<_>>(),
                "decay_ratios": ratios,
                "passed": weitzenbock_ok,
            },
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

fn random_start(
    cfg: &RunConfig,
    alpha: f64,
    b: &SUnConnection,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<SWState> {
    let a = gauge::smooth_u1(lat, 1.0, cfg.seed);
    let psi = gauge::smooth_spinor(lat, cfg.n, 3, cfg.seed.wrapping_add(1));
    SWState::new(a, psi, alpha, b, g, lat)
}

/// `‖F_A‖_{L²}` at `α = π/2` must fall below this.
pub const FLATNESS_TOL: f64 = 1e-8;

fn solve(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let lat = build_lattice(cfg.grid, cfg.side)?;
    let g = make_gamma();
    let b = cfg.background_on(&lat);
    let start = random_start(cfg, cfg.alpha, &b, &g, &lat)?;
    let flat_required = (cfg.alpha - FRAC_PI_2).abs() <= 1e-15;
    let mut opts = cfg.solver_options();
    if flat_required {
        // at α = π/2 the curvature part of the residual is F_A itself
        opts.tolerance = opts.tolerance.min(0.1 * FLATNESS_TOL);
    }
    let state = solver::solve_fixed_alpha(start, &b, &g, &lat, &opts)?;
    let f_a = gauge::curvature_l2(&state.a, &lat)?;
    let passed = state.converged && (!flat_required || f_a <= FLATNESS_TOL);
    em.write(
        "state.swn",
        &snapshot::encode(&lat, &state.a, &b, &state.psi, state.alpha)?,
    )?;
    em.json(
        "solve.json",
        cfg.mode,
        json!({
            "stage": state.record(),
            "curvature_l2": f_a,
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

fn continuation(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let lat = build_lattice(cfg.grid, cfg.side)?;
    let g = make_gamma();
    let b = cfg.background_on(&lat);
    let schedule = cfg.resolved_schedule();
    let start = random_start(cfg, schedule[0], &b, &g, &lat)?;
    let trace = solver::continue_alpha(start, &schedule, &b, &g, &lat, &cfg.solver_options())?;
    let records = trace.records();
    let mut csv = String::from("alpha,residual,energy,sup_psi,l2_mu,iterations,converged\n");
    for r in &records {
        csv.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{},{}\n",
            r.alpha, r.residual, r.energy, r.sup_psi, r.l2_mu, r.iterations, r.converged
        ));
    }
    let passed = !trace.aborted && trace.states.iter().all(|s| s.converged);
    em.csv("trace.csv", &csv)?;
    if let Some(last) = trace.states.last() {
        em.write(
            "final.swn",
            &snapshot::encode(&lat, &last.a, &b, &last.psi, last.alpha)?,
        )?;
    }
    em.json(
        "continue.json",
        cfg.mode,
        json!({
            "schedule": schedule,
            "stages": records,
            "aborted": trace.aborted,
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

/// Largest admissible growth-law log discrepancy.
pub const GROWTH_TOL: f64 = 0.3;

fn diagnose(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let g = make_gamma();
    let (lat, b, state) = match &cfg.snapshot {
        Some(path) => {
            let s = snapshot::load_snapshot(path)?;
            let mut state = SWState::new(s.a, s.psi, s.alpha, &s.b, &g, &s.lattice)?;
            state.converged = state.residual <= cfg.tolerance;
            (s.lattice, s.b, state)
        }
        None => {
            let lat = build_lattice(cfg.grid, cfg.side)?;
            let b = cfg.background_on(&lat);
            let start = random_start(cfg, cfg.alpha, &b, &g, &lat)?;
            let state = solver::solve_fixed_alpha(start, &b, &g, &lat, &cfg.solver_options())?;
            (lat, b, state)
        }
    };
    let (profile, summary) = summarize(&state, &b, 0, &lat, &g, 4, cfg.seed)?;
    let mono = monotonicity_report(&profile).ok();
    let mono_ok = mono.as_ref().is_some_and(|m| m.violations.is_empty());
    let growth_ok = summary.growth_discrepancy.is_some_and(|d| d <= GROWTH_TOL);
    let passed = state.converged && mono_ok && growth_ok;
    em.csv("profile.csv", &profile.to_csv())?;
    em.json(
        "diagnose.json",
        cfg.mode,
        json!({
            "stage": state.record(),
            "summary": summary,
            "monotonicity": mono,
            "profile": profile,
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

fn fueter_mode(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let mut dims = Vec::with_capacity(cfg.fueter_points);
    for _ in 0..cfg.fueter_points {
        let q = fueter::random_quotient_point(n, &mut rng)?;
        dims.push(fueter::quotient_dimension_probe(&q).ok());
    }
    let hits = dims.iter().filter(|d| **d == Some(4 * n - 4)).count();
    let dims_ok = 100 * hits >= 99 * dims.len();

    let q = fueter::random_quotient_point(n, &mut rng)?;
    let generator = fueter::canonical_transport(&fueter::pi1_generator(&q, 256), q.rep())?;
    let generator_ok = (generator + 1.0).norm() <= fueter::TRANSPORT_TOL;

    let mut loops = Vec::with_capacity(cfg.fueter_loops);
    for k in 0..cfg.fueter_loops {
        let path = fueter::random_loop(n, 3, 0.3, 2000, 0.7, cfg.seed.wrapping_add(k as u64))?;
        loops.push(fueter::canonical_transport(&path, path[0].rep())?);
    }
    let loop_deviation = fueter::max_z2_deviation(&loops);
    let loops_ok = loop_deviation <= fueter::TRANSPORT_TOL;

    let lat = build_lattice(cfg.grid, cfg.side)?;
    let g = make_gamma();
    let constant = SectionOfM::new(vec![q.clone(); lat.num_sites()], &lat)?;
    let residual = fueter::fueter_residual(&constant, &g, &lat)?;
    let residual_ok = residual <= 1e-10;
    let lift = fueter::lift_section(&fueter::winding_section(&q, &lat)?, &lat, fueter::LIFT_TOL)?
        .summary();
    let lift_ok = lift.holonomies_in_z2 && lift.flatness_sup <= fueter::LIFT_TOL;

    let passed = dims_ok && generator_ok && loops_ok && residual_ok && lift_ok;
    em.json(
        "fueter.json",
        cfg.mode,
        json!({
            "rank": n,
            "dimension_probe": {"expected": 4 * n - 4, "hits": hits, "points": dims.len(), "passed": dims_ok},
            "generator_holonomy": [generator.re, generator.im],
            "loop_holonomies": loops.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "loop_max_deviation": loop_deviation,
            "loops_passed": loops_ok,
            "constant_section_residual": residual,
            "winding_lift": lift,
            "passed": passed,
        }),
    )?;
    Ok(passed)
}

/// Process exit status for a finished or failed run.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(Error::Config { .. }) => 2,
        Err(
            Error::Io(_)
            | Error::Json(_)
            | Error::SnapshotHeader(_)
            | Error::SnapshotVersion { .. }
            | Error::SnapshotSize { .. },
        ) => 3,
        Err(_) => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str, dir: &Path) -> RunConfig {
        let mut c = RunConfig::from_toml(text).unwrap();
        c.out = dir.to_path_buf();
        c
    }

    #[test]
    fn defaults_and_hash_ignore_output_directory() {
        let a = RunConfig::with_mode(Mode::Solve);
        assert_eq!(a.grid, 16);
        let mut b = a.clone();
        b.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn config_errors_name_the_field() {
        let e = RunConfig::from_toml("mode = \"solve\"\nbogus = 1").unwrap_err();
        assert!(
            matches!(e, Error::Config { ref field, .. } if field == "bogus"),
            "{e}"
        );
        let e = RunConfig::from_toml("N = 8").unwrap_err();
        assert!(
            matches!(e, Error::Config { ref field, .. } if field == "mode"),
            "{e}"
        );
        let c = RunConfig::from_toml("mode = \"continue\"\nschedule = [0.5, 0.7]").unwrap();
        let e = c.validate().unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "schedule"));
        assert_eq!(exit_code(&Err(e)), 2);
        let c = RunConfig::from_toml("mode = \"solve\"\nN = 7").unwrap();
        assert!(matches!(c.validate(), Err(Error::Config { ref field, .. }) if field == "N"));
    }

    #[test]
    fn geometric_schedule() {
        let c = RunConfig::from_toml("mode = \"continue\"\nalpha = 0.8\nstages = 3\nratio = 0.5")
            .unwrap();
        assert_eq!(c.resolved_schedule(), vec![0.8, 0.4, 0.2]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn fueter_run_writes_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(
            "mode = \"fueter\"\nN = 6\nn = 2\nfueter_loops = 2",
            dir.path(),
        );
        let out = run(&c, Execution::Reference).unwrap();
        assert!(out.passed);
        let names: Vec<&str> = out.manifest.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(names, ["config.json", "fueter.json"]);
        let report: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("fueter.json")).unwrap())
                .unwrap();
        assert_eq!(report["config_hash"], c.hash());
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn missing_snapshot_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg("mode = \"diagnose\"\nN = 8", dir.path());
        c.snapshot = Some(dir.path().join("absent.swn"));
        assert_eq!(exit_code(&run(&c, Execution::Reference)), 3);
    }
}
