//! Run configuration: a TOML document, optionally patched by `--set` overrides,
//! deserialized into typed sections and resolved into core types. Angles are
//! in degrees here and converted to radians on resolution.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use switchseq::evaluator::EstimatorGrid;
use switchseq::fisher::{CostSide, FisherCostConfig, Parameter};
use switchseq::{
    AmbiguityGrid, AnnealConfig, ArrayModel, Eadf, FourierStepConfig, PathParameters, Polarization, SoundingConfig,
    StructuralParams, SwitchingSequence,
};

use crate::CliError;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A loaded config: the typed view, the effective document and its location.
pub struct LoadedConfig {
    pub run: RunConfig,
    /// SHA-256 of the effective document (file plus overrides), hex encoded.
    pub hash: String,
    pub effective: String,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

/// Reads `path`, applies `key.path=value` overrides and deserializes.
pub fn load(path: &Path, overrides: &[String]) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let mut doc: toml::Table = toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let effective = toml::to_string(&doc).map_err(|e| config_err(e.to_string()))?;
    // without overrides, parse the original text so error lines match the file
    let run: RunConfig = if overrides.is_empty() {
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&effective).map_err(|e| {
            config_err(format!("{} (after --set overrides, lines refer to the merged document): {e}", path.display()))
        })?
    };
    let hash = Sha256::digest(effective.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { run, hash, effective, base_dir })
}

/// `a.b.c=value`; the value is read as a TOML literal, or as a bare string
/// when it does not parse as one.
fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| config_err(format!("override `{spec}` is not key=value")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("override key `{key}` is malformed")));
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table =
            entry.as_table_mut().ok_or_else(|| config_err(format!("override `{key}`: `{part}` is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; there is no default.
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub array: ArraysSection,
    pub sounding: SoundingSection,
    pub design: Option<DesignSection>,
    pub ambiguity_grid: Option<AmbiguityGridSection>,
    pub truth: Option<TruthSection>,
    pub evaluate: Option<EvaluateSection>,
    pub ambiguity_map: Option<AmbiguityMapSection>,
    pub crlb: Option<CrlbSection>,
    pub bench: Option<BenchSection>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ArraysSection {
    pub tx: ArraySpec,
    pub rx: ArraySpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArraySpec {
    /// Isotropic ULA polarized along the sounding polarization of its side.
    Ula {
        elements: usize,
        #[serde(default = "half")]
        spacing: f64,
    },
    Single,
    /// Measured array from EADF text files, one per polarization.
    Eadf {
        h: Option<PathBuf>,
        v: Option<PathBuf>,
    },
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SoundingSection {
    /// Switching interval in seconds.
    pub dt: f64,
    #[serde(default = "one")]
    pub snapshots: usize,
    /// Snapshot spacing in seconds; defaults to `M_TR·dt`.
    pub snapshot_interval: Option<f64>,
    #[serde(default = "default_pol")]
    pub polarization_tx: String,
    #[serde(default = "default_pol")]
    pub polarization_rx: String,
}

fn one() -> usize {
    1
}

fn default_pol() -> String {
    "V".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignMethod {
    Ff,
    Ambiguity,
    KroneckerFf,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub method: DesignMethod,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_cooling")]
    pub cooling: f64,
    pub initial_temperature: Option<f64>,
    #[serde(default)]
    pub return_final: bool,
    #[serde(default = "default_confidence")]
    pub confidence_level: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Use the polarimetric ambiguity objective (high-XPR when the arrays allow it).
    #[serde(default)]
    pub polarimetric: bool,
    pub fisher: Option<FisherSection>,
}

fn default_iterations() -> usize {
    5000
}

fn default_cooling() -> f64 {
    0.995
}

fn default_confidence() -> f64 {
    0.99
}

fn default_margin() -> f64 {
    0.05
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FisherSection {
    pub azimuth_points: Option<usize>,
    pub elevation_points: Option<usize>,
    /// Subset of `azimuth_tx`, `elevation_tx`, `azimuth_rx`, `elevation_rx`.
    pub terms: Option<Vec<String>>,
    #[serde(default)]
    pub refine: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiguityGridSection {
    pub azimuth_tx: usize,
    #[serde(default = "one")]
    pub elevation_tx: usize,
    #[serde(default = "one")]
    pub azimuth_rx: usize,
    #[serde(default = "one")]
    pub elevation_rx: usize,
    pub doppler: usize,
    pub doppler_bound_hz: Option<f64>,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
}

fn default_exponent() -> f64 {
    switchseq::ambiguity::DEFAULT_EXPONENT
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSection {
    #[serde(default)]
    pub azimuth_tx_deg: f64,
    #[serde(default)]
    pub elevation_tx_deg: f64,
    #[serde(default)]
    pub azimuth_rx_deg: f64,
    #[serde(default)]
    pub elevation_rx_deg: f64,
    #[serde(default)]
    pub doppler_hz: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSource {
    Trivial,
    /// 1-based permutation.
    Perm {
        perm: Vec<usize>,
    },
    /// Sequence file as written by `design`.
    File {
        path: PathBuf,
    },
}

// `flatten` cannot be combined with `deny_unknown_fields`.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct NamedSequence {
    pub name: String,
    #[serde(flatten)]
    pub source: SequenceSource,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub trials: usize,
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub cdf_snr_db: Vec<f64>,
    #[serde(default = "default_cdf_points")]
    pub cdf_points: usize,
    pub sequences: Vec<NamedSequence>,
    #[serde(default)]
    pub grid: GridSection,
}

fn default_cdf_points() -> usize {
    361
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_az_points")]
    pub azimuth_points: usize,
    #[serde(default = "default_az_range")]
    pub azimuth_range_deg: [f64; 2],
    #[serde(default = "default_doppler_points")]
    pub doppler_points: usize,
    pub doppler_range_hz: Option<[f64; 2]>,
    #[serde(default = "default_refine")]
    pub refine_iterations: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            azimuth_points: default_az_points(),
            azimuth_range_deg: default_az_range(),
            doppler_points: default_doppler_points(),
            doppler_range_hz: None,
            refine_iterations: default_refine(),
        }
    }
}

fn default_az_points() -> usize {
    181
}

fn default_az_range() -> [f64; 2] {
    [-180.0, 180.0]
}

fn default_doppler_points() -> usize {
    129
}

fn default_refine() -> usize {
    40
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    /// Degrees for angle axes, Hz for `doppler_offset`.
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiguityMapSection {
    pub sequence: SequenceSource,
    pub rows: SweepSection,
    pub cols: Option<SweepSection>,
    #[serde(default)]
    pub polarimetric: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CrlbSection {
    pub sequence: SequenceSource,
    /// Exactly one of `snr_db` and `sigma`.
    pub snr_db: Option<f64>,
    pub sigma: Option<f64>,
    #[serde(default = "default_crlb_parameters")]
    pub parameters: Vec<String>,
}

fn default_crlb_parameters() -> Vec<String> {
    ["azimuth_tx", "doppler", "amplitude", "phase"].map(String::from).to_vec()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    #[serde(default = "default_kernels")]
    pub kernels: Vec<String>,
    pub sizes: Vec<usize>,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default = "default_min_batch")]
    pub min_batch_ms: u64,
    /// When present, also time FF against the ambiguity baseline at this
    /// many TX elements (single RX).
    pub design_ratio_elements: Option<usize>,
    #[serde(default = "default_ratio_iterations")]
    pub design_ratio_iterations: usize,
}

fn default_kernels() -> Vec<String> {
    ["ambiguity_general", "ambiguity_high_xpr", "fourier_cost"].map(String::from).to_vec()
}

fn default_batches() -> usize {
    5
}

fn default_min_batch() -> u64 {
    20
}

fn default_ratio_iterations() -> usize {
    1000
}

fn deg(x: f64) -> f64 {
    x.to_radians()
}

fn parse_pol(s: &str) -> Result<Polarization, CliError> {
    s.parse().map_err(|e: switchseq::Error| config_err(e.to_string()))
}

impl LoadedConfig {
    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve_path(&self.run.output_dir)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.run.seed.ok_or_else(|| config_err("`seed` is required; runs are never seeded implicitly"))
    }

    pub fn polarizations(&self) -> Result<(Polarization, Polarization), CliError> {
        Ok((parse_pol(&self.run.sounding.polarization_tx)?, parse_pol(&self.run.sounding.polarization_rx)?))
    }

    fn array(&self, spec: &ArraySpec, pol: Polarization) -> Result<ArrayModel, CliError> {
        match spec {
            ArraySpec::Ula { elements, spacing } => {
                ArrayModel::isotropic_ula(*elements, *spacing, pol).map_err(|e| config_err(format!("array: {e}")))
            }
            ArraySpec::Single => Ok(ArrayModel::single_isotropic(pol)),
            ArraySpec::Eadf { h, v } => {
                let read = |p: &Option<PathBuf>| -> Result<Option<Eadf>, CliError> {
                    let Some(p) = p else { return Ok(None) };
                    let path = self.resolve_path(p);
                    let f =
                        File::open(&path).map_err(|e| config_err(format!("cannot open {}: {e}", path.display())))?;
                    Eadf::read_from(BufReader::new(f))
                        .map(Some)
                        .map_err(|e| config_err(format!("{}: {e}", path.display())))
                };
                ArrayModel::measured(read(h)?, read(v)?).map_err(|e| config_err(format!("array: {e}")))
            }
        }
    }

    pub fn arrays(&self) -> Result<(ArrayModel, ArrayModel), CliError> {
        let (pt, pr) = self.polarizations()?;
        Ok((self.array(&self.run.array.tx, pt)?, self.array(&self.run.array.rx, pr)?))
    }

    pub fn dt(&self) -> Result<f64, CliError> {
        let dt = self.run.sounding.dt;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(config_err(format!("sounding.dt must be positive, got {dt}")));
        }
        Ok(dt)
    }

    /// Sounding with the trivial sequence; callers swap in their own.
    pub fn sounding(&self) -> Result<SoundingConfig, CliError> {
        let (tx, rx) = self.arrays()?;
        let (pt, pr) = self.polarizations()?;
        let pairs = tx.element_count() * rx.element_count();
        let seq = SwitchingSequence::trivial(pairs, self.dt()?).map_err(|e| config_err(e.to_string()))?;
        let s = &self.run.sounding;
        SoundingConfig::new(tx, rx, seq)
            .and_then(|c| c.with_snapshots(s.snapshots, s.snapshot_interval))
            .map(|c| c.with_polarization(pt, pr))
            .map_err(|e| config_err(format!("sounding: {e}")))
    }

    pub fn sequence(&self, source: &SequenceSource, pairs: usize) -> Result<SwitchingSequence, CliError> {
        let dt = self.dt()?;
        let seq = match source {
            SequenceSource::Trivial => SwitchingSequence::trivial(pairs, dt),
            SequenceSource::Perm { perm } => SwitchingSequence::new(perm.clone(), dt),
            SequenceSource::File { path } => {
                let path = self.resolve_path(path);
                let f = File::open(&path).map_err(|e| config_err(format!("cannot open {}: {e}", path.display())))?;
                let seq = SwitchingSequence::read_from(BufReader::new(f))
                    .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                if (seq.dt() - dt).abs() > 1e-12 * dt {
                    return Err(config_err(format!(
                        "{}: switching interval {} differs from sounding.dt {dt}",
                        path.display(),
                        seq.dt()
                    )));
                }
                Ok(seq)
            }
        }
        .map_err(|e| config_err(format!("sequence: {e}")))?;
        if seq.len() != pairs {
            return Err(config_err(format!("sequence has {} entries, the arrays form {pairs} pairs", seq.len())));
        }
        Ok(seq)
    }

    pub fn truth(&self) -> Result<PathParameters, CliError> {
        let t = self.run.truth.as_ref().ok_or_else(|| config_err("missing [truth] section"))?;
        let mu = StructuralParams::new(
            deg(t.azimuth_tx_deg),
            deg(t.elevation_tx_deg),
            deg(t.azimuth_rx_deg),
            deg(t.elevation_rx_deg),
            t.doppler_hz,
        );
        PathParameters::new(mu, t.amplitude, t.phase_rad).map_err(|e| config_err(format!("truth: {e}")))
    }

    pub fn design(&self) -> Result<&DesignSection, CliError> {
        self.run.design.as_ref().ok_or_else(|| config_err("missing [design] section"))
    }

    pub fn anneal(&self, seed: u64) -> Result<AnnealConfig, CliError> {
        let d = self.design()?;
        let cfg = AnnealConfig {
            initial_temperature: d.initial_temperature,
            cooling: d.cooling,
            iterations: d.iterations,
            seed,
            return_final: d.return_final,
        };
        cfg.validate().map_err(|e| config_err(format!("design: {e}")))?;
        Ok(cfg)
    }

    pub fn fourier(&self, pairs: usize, dt: f64, seed: u64) -> Result<FourierStepConfig, CliError> {
        let d = self.design()?;
        let cfg = FourierStepConfig {
            confidence_level: d.confidence_level,
            margin: d.margin,
            ..FourierStepConfig::new(pairs, dt, seed)
        };
        cfg.validate().map_err(|e| config_err(format!("design: {e}")))?;
        Ok(cfg)
    }

    /// Fisher cost settings for `side`. Without an explicit term list the
    /// azimuth terms of every multi-element side are active, plus elevation
    /// terms for measured arrays.
    pub fn fisher(&self, side: CostSide, tx: &ArrayModel, rx: &ArrayModel) -> Result<FisherCostConfig, CliError> {
        let f = self.design()?.fisher.clone().unwrap_or_default();
        let measured = |a: &ArrayModel| !a.is_isotropic_ula() && a.element_count() > 1;
        let active = match &f.terms {
            Some(terms) => {
                let mut active = [false; 4];
                for t in terms {
                    let i = ["azimuth_tx", "elevation_tx", "azimuth_rx", "elevation_rx"]
                        .iter()
                        .position(|x| x == t)
                        .ok_or_else(|| config_err(format!("design.fisher: unknown term `{t}`")))?;
                    active[i] = true;
                }
                active
            }
            None => [tx.element_count() > 1, measured(tx), rx.element_count() > 1, measured(rx)],
        };
        let active = match side {
            CostSide::Tx => [active[0], active[1], false, false],
            CostSide::Rx => [false, false, active[2], active[3]],
            CostSide::Joint => active,
        };
        if !active.contains(&true) {
            return Err(config_err("design.fisher: no active cost term for this array geometry"));
        }
        let elevation_default = if measured(tx) || measured(rx) { 91 } else { 1 };
        let cfg = FisherCostConfig {
            azimuth_points: f.azimuth_points.unwrap_or(181),
            elevation_points: f.elevation_points.unwrap_or(elevation_default),
            active,
            side,
            refine: f.refine,
        };
        cfg.validate().map_err(|e| config_err(format!("design.fisher: {e}")))?;
        Ok(cfg)
    }

    pub fn ambiguity_grid(&self) -> Result<AmbiguityGrid, CliError> {
        let g = self
            .run
            .ambiguity_grid
            .as_ref()
            .ok_or_else(|| config_err("method `ambiguity` needs an [ambiguity_grid] section"))?;
        let grid = AmbiguityGrid {
            azimuth_tx: g.azimuth_tx,
            elevation_tx: g.elevation_tx,
            azimuth_rx: g.azimuth_rx,
            elevation_rx: g.elevation_rx,
            doppler: g.doppler,
            doppler_bound: g.doppler_bound_hz,
            exponent: g.exponent,
        };
        grid.validate().map_err(|e| config_err(format!("ambiguity_grid: {e}")))?;
        Ok(grid)
    }

    pub fn estimator_grid(&self, g: &GridSection) -> Result<EstimatorGrid, CliError> {
        let grid = EstimatorGrid {
            azimuth_points: g.azimuth_points,
            azimuth_range: (deg(g.azimuth_range_deg[0]), deg(g.azimuth_range_deg[1])),
            doppler_points: g.doppler_points,
            doppler_range: g.doppler_range_hz.map(|[a, b]| (a, b)),
            refine_iterations: g.refine_iterations,
        };
        grid.validate(self.dt()?).map_err(|e| config_err(format!("evaluate.grid: {e}")))?;
        Ok(grid)
    }
}

pub fn parse_parameters(names: &[String]) -> Result<Vec<Parameter>, CliError> {
    if names.is_empty() {
        return Err(config_err("crlb.parameters is empty"));
    }
    names.iter().map(|n| Parameter::parse(n).map_err(|e| config_err(format!("crlb: {e}")))).collect()
}
