//! JSON input files, report envelopes and the on-disk period cache.
//!
//! Input schema:
//! `{"lambda": [[re, im], ...], "a": [1|2, ...], "tree": {"inner": [...], "leaves": [...]}, "Lambda": [k, ...]}`
//! with `Lambda` optional. Unknown fields are rejected and every schema error
//! carries the JSON path of the offending value.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::BranchConfig;
use crate::cx::C;
use crate::cycles::SymplecticBasis;
use crate::error::{Error, Result};
use crate::f3::F3Class;
use crate::linalg::Mat;
use crate::periods::{period_matrices, DifferentialBasis, PeriodData, PeriodSettings};
use crate::real::Real;
use crate::spider::Spider;
use crate::tree::{MarkedBinaryTree, TreeSpec};

/// Version of every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the cache directory.
pub const CACHE_ENV: &str = "THOMAE_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub lambda: Vec<[f64; 2]>,
    pub a: Vec<u8>,
    pub tree: TreeSpec,
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub labeling: Option<Vec<i64>>,
}

impl ConfigFile {
    pub fn new(config: &BranchConfig, tree: &MarkedBinaryTree, labeling: Option<&F3Class>) -> Self {
        ConfigFile {
            lambda: config.points().iter().map(|z| [z.re, z.im]).collect(),
            a: config.indices().to_vec(),
            tree: tree.to_spec(),
            labeling: labeling.map(|l| l.coeffs().iter().map(|&k| k as i64).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// A parsed and structurally checked input.
#[derive(Clone, Debug)]
pub struct Problem {
    pub file: ConfigFile,
    pub config: BranchConfig,
    pub tree: MarkedBinaryTree,
    pub labeling: Option<F3Class>,
    /// SHA-256 of the canonical serialization of `file`.
    pub hash: String,
}

impl Problem {
    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let points = file.lambda.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let config = BranchConfig::new(points, file.a.clone())?;
        let tree = MarkedBinaryTree::from_spec(&file.tree)?;
        if tree.m() != config.m() {
            return Err(Error::invalid(format!("tree has {} leaves, configuration has {} points", tree.m(), config.m())));
        }
        let labeling = match &file.labeling {
            Some(k) => Some(F3Class::class(k.iter().copied(), config.indices())?),
            None => None,
        };
        let hash = input_hash(&file);
        Ok(Problem { file, config, tree, labeling, hash })
    }

    pub fn require_labeling(&self) -> Result<&F3Class> {
        self.labeling.as_ref().ok_or_else(|| Error::invalid("the input has no \"Lambda\" field"))
    }
}

/// Parses a config document, reporting schema errors with their JSON path.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema { path, msg: e.into_inner().to_string() }
    })
}

pub fn load_config(path: &Path) -> Result<Problem> {
    let text = fs::read_to_string(path)?;
    Problem::from_file(parse_config(&text)?)
}

pub fn input_hash(file: &ConfigFile) -> String {
    sha256_hex(serde_json::to_string(file).expect("config serializes").as_bytes())
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Common header of every report.
#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_hash: Option<String>,
    pub precision: &'static str,
    pub settings: serde_json::Value,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new<R: Real>(command: &str, input_hash: Option<&str>, settings: serde_json::Value, result: T) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            input_hash: input_hash.map(str::to_string),
            precision: R::NAME,
            settings,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn save_report<T: Serialize>(path: &Path, report: &Report<T>) -> Result<()> {
    write_atomic(path, report.to_json().as_bytes())
}

/// Period data in report form: matrices as `[re, im]` pairs rounded to f64.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodsSummary {
    pub genus: usize,
    pub base_point: [f64; 2],
    pub spider_score: f64,
    pub a_cycles: Vec<String>,
    pub b_cycles: Vec<String>,
    pub forms: DifferentialBasis,
    pub pa: Vec<Vec<[f64; 2]>>,
    pub pb: Vec<Vec<[f64; 2]>>,
    pub tau: Vec<Vec<[f64; 2]>>,
    pub det_pb: [f64; 2],
    pub cond_b: f64,
    pub quad_error: f64,
    pub symmetry_residual: f64,
    pub min_eig_im_tau: f64,
}

impl PeriodsSummary {
    pub fn of<R: Real>(p: &PeriodData<R>) -> Self {
        let d = p.pb.det();
        PeriodsSummary {
            genus: p.basis.genus(),
            base_point: [p.spider.base.re, p.spider.base.im],
            spider_score: p.spider.score,
            a_cycles: p.basis.a.iter().map(|c| c.label.clone()).collect(),
            b_cycles: p.basis.b.iter().map(|c| c.label.clone()).collect(),
            forms: p.forms,
            pa: p.pa.to_pairs(),
            pb: p.pb.to_pairs(),
            tau: p.tau.to_pairs(),
            det_pb: [d.re.to_f64(), d.im.to_f64()],
            cond_b: p.cond_b,
            quad_error: p.quad_error,
            symmetry_residual: p.symmetry_residual,
            min_eig_im_tau: p.min_eig_im_tau,
        }
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Content-addressed store of period matrices. Entries keep every limb as raw
/// bits, so a hit reproduces the computed `PeriodData` exactly.
#[derive(Clone, Debug)]
pub struct PeriodCache {
    dir: PathBuf,
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    schema_version: u32,
    points: Vec<[u64; 2]>,
    a: &'a [u8],
    tree: TreeSpec,
    precision: &'static str,
    settings: &'a PeriodSettings,
}

type BitsMat = Vec<Vec<[Vec<u64>; 2]>>;

#[derive(Serialize, Deserialize)]
struct Entry {
    schema_version: u32,
    key: String,
    precision: String,
    pa: BitsMat,
    pb: BitsMat,
    tau: BitsMat,
    cond_b: u64,
    quad_error: u64,
    symmetry_residual: u64,
    min_eig_im_tau: u64,
    base: [u64; 2],
    score: u64,
    basis: SymplecticBasis,
    forms: DifferentialBasis,
}

fn to_bits<R: Real>(m: &Mat<R>) -> BitsMat {
    let enc = |x: R| x.to_limbs().into_iter().map(f64::to_bits).collect::<Vec<_>>();
    m.to_rows().into_iter().map(|r| r.into_iter().map(|z| [enc(z.re), enc(z.im)]).collect()).collect()
}

fn from_bits<R: Real>(m: &BitsMat) -> Option<Mat<R>> {
    let dec = |b: &[u64]| R::from_limbs(&b.iter().map(|&x| f64::from_bits(x)).collect::<Vec<_>>());
    let mut rows = Vec::with_capacity(m.len());
    for r in m {
        let mut row = Vec::with_capacity(r.len());
        for [re, im] in r {
            row.push(C::new(dec(re)?, dec(im)?));
        }
        rows.push(row);
    }
    Some(Mat::from_rows(rows))
}

impl PeriodCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        PeriodCache { dir: dir.into() }
    }

    /// `explicit`, else `$THOMAE_CACHE_DIR`, else `$HOME/.cache/thomae`.
    pub fn locate(explicit: Option<&Path>) -> Option<Self> {
        if let Some(d) = explicit {
            return Some(Self::new(d));
        }
        if let Some(d) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            return Some(Self::new(d));
        }
        std::env::var_os("HOME").map(|h| Self::new(Path::new(&h).join(".cache").join("thomae")))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key<R: Real>(config: &BranchConfig, tree: &MarkedBinaryTree, settings: &PeriodSettings) -> String {
        let km = KeyMaterial {
            schema_version: SCHEMA_VERSION,
            points: config.points().iter().map(|z| [z.re.to_bits(), z.im.to_bits()]).collect(),
            a: config.indices(),
            tree: tree.to_spec(),
            precision: R::NAME,
            settings,
        };
        sha256_hex(serde_json::to_string(&km).expect("key serializes").as_bytes())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("periods-{key}.json"))
    }

    /// Cached data for `key`; unreadable or mismatched entries count as misses.
    pub fn load<R: Real>(&self, key: &str) -> Option<PeriodData<R>> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let e: Entry = serde_json::from_str(&text).ok()?;
        if e.schema_version != SCHEMA_VERSION || e.key != key || e.precision != R::NAME {
            return None;
        }
        let f = f64::from_bits;
        Some(PeriodData {
            pa: from_bits(&e.pa)?,
            pb: from_bits(&e.pb)?,
            tau: from_bits(&e.tau)?,
            cond_b: f(e.cond_b),
            quad_error: f(e.quad_error),
            symmetry_residual: f(e.symmetry_residual),
            min_eig_im_tau: f(e.min_eig_im_tau),
            spider: Spider { base: Complex64::new(f(e.base[0]), f(e.base[1])), score: f(e.score) },
            basis: e.basis,
            forms: e.forms,
        })
    }

    pub fn store<R: Real>(&self, key: &str, p: &PeriodData<R>) -> Result<()> {
        let e = Entry {
            schema_version: SCHEMA_VERSION,
            key: key.to_string(),
            precision: R::NAME.to_string(),
            pa: to_bits(&p.pa),
            pb: to_bits(&p.pb),
            tau: to_bits(&p.tau),
            cond_b: p.cond_b.to_bits(),
            quad_error: p.quad_error.to_bits(),
            symmetry_residual: p.symmetry_residual.to_bits(),
            min_eig_im_tau: p.min_eig_im_tau.to_bits(),
            base: [p.spider.base.re.to_bits(), p.spider.base.im.to_bits()],
            score: p.spider.score.to_bits(),
            basis: p.basis.clone(),
            forms: p.forms,
        };
        write_atomic(&self.path(key), serde_json::to_string(&e).expect("entry serializes").as_bytes())
    }

    /// Period matrices through the cache; the flag reports a hit.
    pub fn periods<R: Real>(
        &self,
        config: &BranchConfig,
        tree: &MarkedBinaryTree,
        settings: &PeriodSettings,
    ) -> Result<(PeriodData<R>, bool)> {
        let key = Self::key::<R>(config, tree, settings);
        if let Some(p) = self.load::<R>(&key) {
            return Ok((p, true));
        }
        let p = period_matrices::<R>(config, tree, settings)?;
        self.store(&key, &p)?;
        Ok((p, false))
    }
}

/// Period matrices, through `cache` when one is given.
pub fn periods_with_cache<R: Real>(
    cache: Option<&PeriodCache>,
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    settings: &PeriodSettings,
) -> Result<(PeriodData<R>, bool)> {
    match cache {
        Some(c) => c.periods(config, tree, settings),
        None => Ok((period_matrices(config, tree, settings)?, false)),
    }
}
