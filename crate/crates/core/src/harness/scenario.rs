use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generators::{ff_set, lattice_set, random_bounded, random_signs, rng, SetGenerator, RNG_ALGORITHM};
use super::output::{csv_document, write_atomic, write_manifest, Manifest};
use crate::error::{Error, Result};
use crate::ff::{is_prime, sphere_decay};
use crate::forms::{counting_gap, ConfigurationSpace, EdgeFunctionFamily};
use crate::hypergraph::BundleSpec;
use crate::lattice::{
    count_asymptotic_scan, density_increment, enumerate_copies, enumerate_copies_naive, minimal_bound,
    normalize_count, summarize_scan, uniformity_test, GridCube, SimplexSpec, SURROGATE_MODULUS,
};
use crate::regularity::weak_regularize;

/// Largest `q` accepted by `ff_count`.
pub const FF_COUNT_MAX_Q: u64 = 17;
/// Largest `q` accepted by `ff_regularize`.
pub const REGULARIZE_MAX_Q: u64 = 11;
/// Largest `lambda^2` accepted by lattice scenarios.
pub const LAMBDA2_MAX: u64 = 100_000;
/// Largest window volume accepted by set-based scenarios.
pub const WINDOW_MAX_VOLUME: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    FfCount,
    FfRegularize,
    FfDecay,
    LatticeCount,
    LatticeScan,
    Uniformity,
    Increment,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::FfCount => "ff_count",
            Kind::FfRegularize => "ff_regularize",
            Kind::FfDecay => "ff_decay",
            Kind::LatticeCount => "lattice_count",
            Kind::LatticeScan => "lattice_scan",
            Kind::Uniformity => "uniformity",
            Kind::Increment => "increment",
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FfCountParams {
    pub q: u64,
    pub d: usize,
    /// One side length per block; every tuple of nonzero elements when absent.
    pub t: Option<Vec<u64>>,
    pub density: f64,
    #[serde(default = "one")]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Signs,
    Bounded,
}

fn signs() -> FamilyKind {
    FamilyKind::Signs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FfRegularizeParams {
    pub q: u64,
    pub d: usize,
    pub k: usize,
    pub eps: f64,
    #[serde(default = "signs")]
    pub family: FamilyKind,
}

fn three() -> u64 {
    3
}

fn hundred_one() -> u64 {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FfDecayParams {
    #[serde(default = "three")]
    pub q_min: u64,
    #[serde(default = "hundred_one")]
    pub q_max: u64,
}

/// A simplex given inline or by a JSON file path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimplexSource {
    Inline { n: usize, points: Vec<Vec<i64>> },
    File(PathBuf),
}

impl SimplexSource {
    pub fn load(&self) -> Result<SimplexSpec> {
        match self {
            SimplexSource::Inline { n, points } => SimplexSpec::new(*n, points.clone()),
            SimplexSource::File(path) => SimplexSpec::load(path),
        }
    }
}

fn unit_q() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeCountParams {
    pub simplex: SimplexSource,
    pub lambda2: u64,
    #[serde(default = "unit_q")]
    pub q: u64,
    #[serde(default)]
    pub verify_naive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeScanParams {
    pub simplex: SimplexSource,
    #[serde(default = "unit_q")]
    pub q: u64,
    pub lambda2_min: u64,
    pub lambda2_max: u64,
}

fn surrogate() -> u64 {
    SURROGATE_MODULUS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetParams {
    pub n: usize,
    pub side: u64,
    pub corner: Option<Vec<i64>>,
    pub generator: SetGenerator,
    pub eps: f64,
    #[serde(default = "surrogate")]
    pub modulus: u64,
}

impl SetParams {
    fn window(&self) -> Result<GridCube> {
        let corner = self.corner.clone().unwrap_or_else(|| vec![0; self.n]);
        if corner.len() != self.n {
            return Err(Error::InvalidParameter(format!("corner needs {} coordinates", self.n)));
        }
        let window = GridCube::new(corner, self.side)?;
        if window.volume() > WINDOW_MAX_VOLUME {
            return Err(Error::CapExceeded(format!("window volume {} > {WINDOW_MAX_VOLUME}", window.volume())));
        }
        Ok(window)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    FfCount(FfCountParams),
    FfRegularize(FfRegularizeParams),
    FfDecay(FfDecayParams),
    LatticeCount(LatticeCountParams),
    LatticeScan(LatticeScanParams),
    Uniformity(SetParams),
    Increment(SetParams),
}

impl Task {
    pub fn kind(&self) -> Kind {
        match self {
            Task::FfCount(_) => Kind::FfCount,
            Task::FfRegularize(_) => Kind::FfRegularize,
            Task::FfDecay(_) => Kind::FfDecay,
            Task::LatticeCount(_) => Kind::LatticeCount,
            Task::LatticeScan(_) => Kind::LatticeScan,
            Task::Uniformity(_) => Kind::Uniformity,
            Task::Increment(_) => Kind::Increment,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: Kind,
    seed: u64,
    output: PathBuf,
    #[serde(default)]
    params: toml::Table,
}

/// One declarative experiment: `kind`, `seed`, `output` and a `[params]` table.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub output: PathBuf,
    pub task: Task,
}

fn params<T: serde::de::DeserializeOwned>(kind: Kind, table: toml::Table) -> Result<T> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| Error::Parse(format!("[params] of {}: {}", kind.name(), e.to_string().trim())))
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim().to_string()))?;
        let p = raw.params;
        let task = match raw.kind {
            Kind::FfCount => Task::FfCount(params(raw.kind, p)?),
            Kind::FfRegularize => Task::FfRegularize(params(raw.kind, p)?),
            Kind::FfDecay => Task::FfDecay(params(raw.kind, p)?),
            Kind::LatticeCount => Task::LatticeCount(params(raw.kind, p)?),
            Kind::LatticeScan => Task::LatticeScan(params(raw.kind, p)?),
            Kind::Uniformity => Task::Uniformity(params(raw.kind, p)?),
            Kind::Increment => Task::Increment(params(raw.kind, p)?),
        };
        Ok(Self { seed: raw.seed, output: raw.output, task })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut s = Self::from_toml(&text)?;
        if s.output.is_relative() {
            if let Some(dir) = path.parent() {
                s.output = dir.join(&s.output);
            }
        }
        Ok(s)
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn all_tuples(q: u64, d: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out.into_iter().flat_map(|t| (1..q).map(move |x| [t.clone(), vec![x]].concat())).collect();
    }
    out
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(sep)
}

#[derive(Serialize)]
struct EdgeNorm {
    edge: String,
    norm: f64,
}

#[derive(Serialize)]
struct FaceComplexity {
    face: String,
    generators: usize,
    atoms: usize,
}

#[derive(Serialize)]
struct StepOut {
    edge: String,
    residual_norm: f64,
    correlation: f64,
    energy_gain: f64,
}

#[derive(Serialize)]
struct RegularizeOut {
    q: u64,
    d: usize,
    k: usize,
    eps: f64,
    iterations: usize,
    final_box_norms: Vec<EdgeNorm>,
    complexities: Vec<FaceComplexity>,
    energy_trace: Vec<f64>,
    steps: Vec<StepOut>,
}

#[derive(Serialize)]
struct UniformityOut {
    n: usize,
    side: u64,
    corner: Vec<i64>,
    modulus: u64,
    eps: f64,
    overall: f64,
    max_relative: f64,
    worst_residue: Vec<i64>,
    is_uniform: bool,
}

#[derive(Serialize)]
struct IncrementStepOut {
    residue: Vec<i64>,
    density_before: f64,
    density_after: f64,
    corner_after: Vec<i64>,
    side_after: u64,
}

#[derive(Serialize)]
struct IncrementOut {
    n: usize,
    modulus: u64,
    eps: f64,
    start_density: f64,
    final_density: f64,
    steps: usize,
    step_bound: usize,
    status: String,
    history: Vec<IncrementStepOut>,
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data");
    text.push('\n');
    text.into_bytes()
}

/// Computes the artifact of a task. Identical inputs give identical bytes.
pub fn execute(task: &Task, seed: u64) -> Result<Vec<u8>> {
    match task {
        Task::FfCount(p) => {
            if p.q > FF_COUNT_MAX_Q {
                return Err(Error::CapExceeded(format!("ff_count q = {} > {FF_COUNT_MAX_Q}", p.q)));
            }
            if p.d == 0 || p.d > 2 {
                return Err(Error::CapExceeded(format!("ff_count supports d in {{1, 2}}, got {}", p.d)));
            }
            if !is_prime(p.q) || p.q < 3 {
                return Err(Error::NotPrime(p.q));
            }
            let tuples = match &p.t {
                Some(t) => vec![t.clone()],
                None => all_tuples(p.q, p.d),
            };
            let mut rows = Vec::new();
            for trial in 0..p.trials {
                let members = ff_set(&SetGenerator::RandomDensity { delta: p.density }, p.q as usize, p.d, seed.wrapping_add(trial as u64))?;
                for t in &tuples {
                    let space = ConfigurationSpace::new(p.q, t)?;
                    if space.d() != p.d {
                        return Err(Error::InvalidParameter(format!("t needs {} entries", p.d)));
                    }
                    let g = counting_gap(&space, &members)?;
                    rows.push(vec![
                        p.q.to_string(),
                        p.d.to_string(),
                        join(t, ";"),
                        fmt(p.density),
                        trial.to_string(),
                        fmt(g.n),
                        fmt(g.m),
                        fmt(g.gap),
                        fmt(g.lower_bound),
                        fmt(g.box_min),
                    ]);
                }
            }
            let header = ["q", "d", "t", "density", "trial", "N", "M", "gap", "lower_bound", "box_min"];
            Ok(csv_document("ff_count", &header, &rows).into_bytes())
        }
        Task::FfRegularize(p) => {
            if p.q > REGULARIZE_MAX_Q {
                return Err(Error::CapExceeded(format!("ff_regularize q = {} > {REGULARIZE_MAX_Q}", p.q)));
            }
            if !is_prime(p.q) || p.q < 3 {
                return Err(Error::NotPrime(p.q));
            }
            let spec = BundleSpec::rectangle(p.d, p.k)?;
            if (p.q * p.q).pow(2 * p.k as u32) > 1 << 26 {
                return Err(Error::CapExceeded("witness search over (q^2)^{2k} co-slice pairs".into()));
            }
            let q = p.q as usize;
            let mut r = rng(seed);
            let fam = EdgeFunctionFamily::from_fn(spec.clone(), q, |e| match p.family {
                FamilyKind::Signs => random_signs(q, 2 * e.arity(), &mut r),
                FamilyKind::Bounded => random_bounded(q, 2 * e.arity(), &mut r),
            })?;
            let reg = weak_regularize(&fam, p.eps)?;
            let out = RegularizeOut {
                q: p.q,
                d: p.d,
                k: p.k,
                eps: reg.eps,
                iterations: reg.iterations,
                final_box_norms: fam
                    .edges()
                    .iter()
                    .zip(&reg.final_box_norms)
                    .map(|(e, &norm)| EdgeNorm { edge: e.to_text(p.d), norm })
                    .collect(),
                complexities: reg
                    .system
                    .parts()
                    .map(|(f, part)| FaceComplexity {
                        face: f.to_string(),
                        generators: part.generator_count(),
                        atoms: part.atom_count(),
                    })
                    .collect(),
                energy_trace: reg.energy_trace.clone(),
                steps: reg
                    .steps
                    .iter()
                    .map(|s| StepOut {
                        edge: s.edge.to_text(p.d),
                        residual_norm: s.residual_norm,
                        correlation: s.correlation,
                        energy_gain: s.energy_gain,
                    })
                    .collect(),
            };
            Ok(json(&out))
        }
        Task::FfDecay(p) => {
            if p.q_max > 1000 {
                return Err(Error::CapExceeded(format!("ff_decay q_max = {} > 1000", p.q_max)));
            }
            let mut rows = Vec::new();
            for q in (p.q_min.max(3)..=p.q_max).filter(|&q| is_prime(q)) {
                for t in 1..q {
                    let s = sphere_decay(q, t)?;
                    rows.push(vec![q.to_string(), t.to_string(), fmt(s.mean_deviation), fmt(s.max_decay_const)]);
                }
            }
            Ok(csv_document("ff_decay", &["q", "t", "mean_dev", "max_decay_const"], &rows).into_bytes())
        }
        Task::LatticeCount(p) => {
            if p.lambda2 > LAMBDA2_MAX {
                return Err(Error::CapExceeded(format!("lambda^2 = {} > {LAMBDA2_MAX}", p.lambda2)));
            }
            let spec = p.simplex.load()?;
            let bound = minimal_bound(&spec, p.lambda2);
            let copies = enumerate_copies(&spec, p.lambda2, p.q, bound)?;
            let raw = copies.len() as u64;
            let mut header = vec!["lambda2", "q", "raw", "normalized"];
            let mut row = vec![p.lambda2.to_string(), p.q.to_string(), raw.to_string(), fmt(normalize_count(&spec, p.q, p.lambda2, raw))];
            if p.verify_naive {
                let naive = enumerate_copies_naive(&spec, p.lambda2, p.q, bound)?;
                header.push("naive_agrees");
                row.push((naive == copies).to_string());
            }
            Ok(csv_document("lattice_count", &header, &[row]).into_bytes())
        }
        Task::LatticeScan(p) => {
            if p.lambda2_max > LAMBDA2_MAX || p.lambda2_min == 0 || p.lambda2_min > p.lambda2_max {
                return Err(Error::InvalidParameter(format!(
                    "need 1 <= lambda2_min <= lambda2_max <= {LAMBDA2_MAX}"
                )));
            }
            let spec = p.simplex.load()?;
            let lambdas: Vec<u64> = (p.lambda2_min..=p.lambda2_max).collect();
            let rows = count_asymptotic_scan(&spec, p.q, &lambdas)?;
            let summary = summarize_scan(&rows);
            let rho = summary.map(|s| s.rho_hat);
            let out: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let dev = match rho {
                        Some(rho) if r.raw > 0 => fmt((r.normalized / rho - 1.0).abs()),
                        _ => String::new(),
                    };
                    vec![r.lambda2.to_string(), r.raw.to_string(), fmt(r.normalized), dev]
                })
                .collect();
            Ok(csv_document("lattice_scan", &["lambda2", "raw", "normalized", "deviation"], &out).into_bytes())
        }
        Task::Uniformity(p) => {
            let window = p.window()?;
            let s = lattice_set(&p.generator, &window, seed)?;
            let r = uniformity_test(&s, p.eps, p.modulus)?;
            Ok(json(&UniformityOut {
                n: p.n,
                side: p.side,
                corner: window.corner().to_vec(),
                modulus: p.modulus,
                eps: p.eps,
                overall: r.overall,
                max_relative: r.max_relative,
                worst_residue: r.worst_residue,
                is_uniform: r.is_uniform,
            }))
        }
        Task::Increment(p) => {
            let window = p.window()?;
            let s = lattice_set(&p.generator, &window, seed)?;
            let r = density_increment(&s, p.eps, p.modulus)?;
            Ok(json(&IncrementOut {
                n: p.n,
                modulus: p.modulus,
                eps: p.eps,
                start_density: s.density(),
                final_density: r.final_set.density(),
                steps: r.steps,
                step_bound: r.step_bound,
                status: format!("{:?}", r.status),
                history: r
                    .history
                    .iter()
                    .map(|h| IncrementStepOut {
                        residue: h.residue.clone(),
                        density_before: h.density_before,
                        density_after: h.density_after,
                        corner_after: h.window_after.corner().to_vec(),
                        side_after: h.window_after.side(),
                    })
                    .collect(),
            }))
        }
    }
}

/// Runs a scenario: writes the artifact atomically, then its manifest.
pub fn run(scenario: &Scenario) -> Result<Manifest> {
    let start = Instant::now();
    let bytes = execute(&scenario.task, scenario.seed)?;
    write_atomic(&scenario.output, &bytes)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: scenario.task.kind().name().to_string(),
        seed: scenario.seed,
        rng: RNG_ALGORITHM.to_string(),
        threads: rayon::current_num_threads(),
        output: scenario.output.display().to_string(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    write_manifest(&scenario.output, &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FF_COUNT: &str = r#"
kind = "ff_count"
seed = 1
output = "ff.csv"

[params]
q = 5
d = 2
density = 0.5
"#;

    #[test]
    fn ff_count_rows_per_tuple() {
        let s = Scenario::from_toml(FF_COUNT).unwrap();
        let text = String::from_utf8(execute(&s.task, s.seed).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# configcount-csv schema=1"));
        assert_eq!(lines.len(), 2 + 16);
        assert_eq!(execute(&s.task, s.seed).unwrap(), text.as_bytes());
    }

    #[test]
    fn config_errors_name_the_field() {
        let bad = FF_COUNT.replace("density = 0.5", "densty = 0.5");
        let err = Scenario::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("densty"), "{err}");
        let err = Scenario::from_toml("kind = \"nope\"\nseed = 1\noutput = \"x\"\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        let capped = FF_COUNT.replace("q = 5", "q = 19");
        let s = Scenario::from_toml(&capped).unwrap();
        assert!(matches!(execute(&s.task, 1), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn lattice_kinds() {
        let text = r#"
kind = "lattice_scan"
seed = 0
output = "scan.csv"
[params]
simplex = { n = 5, points = [[0,0,0,0,0],[1,0,0,0,0]] }
lambda2_min = 1
lambda2_max = 4
"#;
        let s = Scenario::from_toml(text).unwrap();
        let out = String::from_utf8(execute(&s.task, 0).unwrap()).unwrap();
        assert!(out.contains("\n4,90,11.25,"));
        let text = r#"
kind = "increment"
seed = 0
output = "inc.json"
[params]
n = 5
side = 8
eps = 0.5
modulus = 2
generator = { kind = "congruence_class", modulus = 2, residue = [0,0,0,0,0] }
"#;
        let s = Scenario::from_toml(text).unwrap();
        let out: serde_json::Value = serde_json::from_slice(&execute(&s.task, 0).unwrap()).unwrap();
        assert_eq!(out["steps"], 1);
        assert_eq!(out["final_density"], 1.0);
    }

    #[test]
    fn run_writes_artifact_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("decay.toml");
        std::fs::write(&path, "kind = \"ff_decay\"\nseed = 3\noutput = \"decay.csv\"\n[params]\nq_max = 7\n").unwrap();
        let s = Scenario::load(&path).unwrap();
        let m = run(&s).unwrap();
        assert_eq!(m.kind, "ff_decay");
        let csv = std::fs::read_to_string(dir.path().join("decay.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2 + 2 + 4 + 6);
        assert!(dir.path().join("decay.csv.manifest.json").exists());
    }
}
