//! Subcommand pipelines. Each one resolves its config, runs, writes its
//! artifacts plus a manifest into the output directory and prints a short
//! summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use switchseq::ambiguity::{
    ambiguity_surface, AmbiguityMode, AmbiguityObjective, AmbiguitySurface, SurfaceAxis, SweepAxis,
};
use switchseq::complexity::{measure_scaling, ScalingKernel};
use switchseq::evaluator::{estimate_cdf, run_monte_carlo, sigma_for_snr, MonteCarloReport, MonteCarloScenario};
use switchseq::fisher::{fim, CostSide, FisherCost, FisherCostConfig, Parameter};
use switchseq::linalg::linspace;
use switchseq::optimizer::{design_ambiguity_baseline, design_ff, design_kronecker_split, DesignReport, SideDesign};
use switchseq::report::{write_cdf_csv, write_crlb_csv, write_design_report, write_monte_carlo_csv, write_surface_csv};
use switchseq::{
    AmbiguityGrid, AnnealConfig, ArrayModel, FourierStepConfig, Polarization, SoundingConfig, SwitchingSequence,
};

use crate::config::{parse_parameters, DesignMethod, LoadedConfig, SweepSection};
use crate::CliError;

/// Collects the files a command writes, in write order.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, written: Vec::new() })
    }

    fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Manifest: command, config hash, seeds, versions and the effective
    /// config. No timestamps, so reruns reproduce it byte for byte.
    fn manifest(mut self, command: &str, cfg: &LoadedConfig, seeds: &[(&str, u64)]) -> Result<PathBuf, CliError> {
        let name = format!("manifest_{command}.txt");
        let outputs = self.written.join(" ");
        self.write(&name, |w| {
            writeln!(w, "command = {command}")?;
            writeln!(w, "switchseq_version = {}", env!("CARGO_PKG_VERSION"))?;
            writeln!(w, "config_sha256 = {}", cfg.hash)?;
            for (k, v) in seeds {
                writeln!(w, "{k} = {v}")?;
            }
            writeln!(w, "outputs = {outputs}")?;
            writeln!(w, "\n# effective config")?;
            w.write_all(cfg.effective.as_bytes())
        })?;
        Ok(self.dir)
    }
}

fn sequence_line(seq: &SwitchingSequence) -> String {
    seq.perm().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

fn require_multi(m: usize, side: &str) -> Result<(), CliError> {
    if m < 2 {
        return Err(CliError::Config(format!("kronecker-ff needs at least 2 {side} elements, got {m}")));
    }
    Ok(())
}

pub fn design(cfg: &LoadedConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let seed = cfg.seed()?;
    let method = cfg.design()?.method;
    let sounding = cfg.sounding()?;
    let dt = cfg.dt()?;
    let pairs = sounding.pairs();
    let anneal = cfg.anneal(seed)?;
    let mut out = Outputs::new(cfg.output_dir())?;
    let mut seeds = vec![("seed", seed)];

    let summary = match method {
        DesignMethod::Ff | DesignMethod::Ambiguity => {
            let report = if method == DesignMethod::Ff {
                let cost =
                    FisherCost::from_sounding(&sounding, &cfg.fisher(CostSide::Joint, sounding.tx(), sounding.rx())?)?;
                design_ff(&cfg.fourier(pairs, dt, seed)?, &anneal, &|eta: &[f64]| cost.evaluate(eta))?
            } else {
                let grid = cfg.ambiguity_grid()?;
                let mode = AmbiguityMode::select(&sounding, &grid, cfg.design()?.polarimetric)?;
                let objective = AmbiguityObjective::new(&sounding, &grid, mode)?;
                design_ambiguity_baseline(pairs, dt, &anneal, &|eta: &[f64]| objective.evaluate(eta))?
            };
            out.write("sequence.txt", |w| report.sequence().write_to(w))?;
            out.write("design_report.txt", |w| write_design_report(w, &report))?;
            summarize(&report)
        }
        DesignMethod::KroneckerFf => {
            let (tx, rx) = (sounding.tx(), sounding.rx());
            let (m_t, m_r) = (tx.element_count(), rx.element_count());
            require_multi(m_t, "TX")?;
            require_multi(m_r, "RX")?;
            let pols = sounding.polarization();
            let tx_cost = FisherCost::new(tx, rx, pols, &cfg.fisher(CostSide::Tx, tx, rx)?)?;
            let rx_cost = FisherCost::new(tx, rx, pols, &cfg.fisher(CostSide::Rx, tx, rx)?)?;
            let (tx_eval, rx_eval) = (|eta: &[f64]| tx_cost.evaluate(eta), |eta: &[f64]| rx_cost.evaluate(eta));
            let rx_seed = seed.wrapping_add(1);
            seeds.push(("rx_seed", rx_seed));
            let tx_side = SideDesign {
                fourier: cfg.fourier(m_t, dt * m_r as f64, seed)?,
                anneal: anneal.clone(),
                cost: &tx_eval,
            };
            let rx_side =
                SideDesign { fourier: cfg.fourier(m_r, dt, rx_seed)?, anneal: cfg.anneal(rx_seed)?, cost: &rx_eval };
            let split = design_kronecker_split(&tx_side, &rx_side, dt)?;
            out.write("sequence.txt", |w| split.joint.write_to(w))?;
            out.write("tx_sequence.txt", |w| split.tx.sequence().write_to(w))?;
            out.write("rx_sequence.txt", |w| split.rx.sequence().write_to(w))?;
            out.write("design_report_tx.txt", |w| write_design_report(w, &split.tx))?;
            out.write("design_report_rx.txt", |w| write_design_report(w, &split.rx))?;
            format!(
                "tx cost {} rx cost {}\nsequence: {}",
                split.tx.cost(),
                split.rx.cost(),
                sequence_line(&split.joint)
            )
        }
    };
    let dir = out.manifest("design", cfg, &seeds)?;
    println!("design ({method:?}, {pairs} pairs) -> {}", dir.display());
    println!("{summary}");
    println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn summarize(report: &DesignReport) -> String {
    format!(
        "initial cost {} final cost {} (best {}, {} accepted moves)\nsequence: {}",
        report.initial_cost,
        report.cost(),
        report.best_cost,
        report.accepted,
        sequence_line(report.sequence())
    )
}

fn snr_tag(snr: f64) -> String {
    format!("{snr}dB")
}

pub fn evaluate(cfg: &LoadedConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let seed = cfg.seed()?;
    let e = cfg.run.evaluate.as_ref().ok_or_else(|| CliError::Config("missing [evaluate] section".into()))?;
    if e.trials == 0 {
        return Err(CliError::Config("evaluate.trials must be at least 1".into()));
    }
    if e.snr_db.is_empty() || e.sequences.is_empty() {
        return Err(CliError::Config("evaluate needs at least one SNR and one sequence".into()));
    }
    if let Some(s) = e.cdf_snr_db.iter().find(|s| !e.snr_db.contains(s)) {
        return Err(CliError::Config(format!("evaluate.cdf_snr_db: {s} dB is not in snr_db")));
    }
    if e.cdf_points < 2 {
        return Err(CliError::Config("evaluate.cdf_points must be at least 2".into()));
    }
    let sounding = cfg.sounding()?;
    let mut names: Vec<&str> = e.sequences.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) || names.iter().any(|n| n.is_empty() || n.contains(['/', '\\'])) {
        return Err(CliError::Config("evaluate.sequences names must be unique, non-empty file stems".into()));
    }
    let sequences = e
        .sequences
        .iter()
        .map(|s| Ok((s.name.clone(), cfg.sequence(&s.source, sounding.pairs())?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let grid = cfg.estimator_grid(&e.grid)?;
    let scenario = MonteCarloScenario {
        sounding,
        truth: cfg.truth()?,
        sequences,
        snr_db: e.snr_db.clone(),
        trials: e.trials,
        seed,
        grid,
        cdf_snr_db: e.cdf_snr_db.clone(),
    };
    let report = run_monte_carlo(&scenario)?;

    let mut out = Outputs::new(cfg.output_dir())?;
    let range = (e.grid.azimuth_range_deg[0], e.grid.azimuth_range_deg[1]);
    for seq in &report.sequences {
        let single = MonteCarloReport { sequences: vec![seq.clone()], trials: report.trials, seed: report.seed };
        out.write(&format!("monte_carlo_{}.csv", seq.name), |w| write_monte_carlo_csv(w, &single))?;
        for &snr in &e.cdf_snr_db {
            let cdf = estimate_cdf(seq, snr, range, e.cdf_points)?;
            out.write(&format!("cdf_{}_{}.csv", seq.name, snr_tag(snr)), |w| write_cdf_csv(w, &cdf))?;
        }
    }
    let dir = out.manifest("evaluate", cfg, &[("seed", seed)])?;
    println!("evaluate ({} sequences, {} trials) -> {}", report.sequences.len(), report.trials, dir.display());
    for seq in &report.sequences {
        if let Some(m) = seq.metrics.last() {
            println!(
                "{}: at {} dB azimuth RMSE {:.4} deg (CRLB {:.4}), Doppler RMSE {:.4} Hz (CRLB {:.4})",
                seq.name,
                m.snr_db,
                m.azimuth_rmse,
                m.azimuth_crlb.sqrt(),
                m.doppler_rmse,
                m.doppler_crlb.sqrt()
            );
        }
    }
    println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn is_angle(axis: SurfaceAxis) -> bool {
    axis != SurfaceAxis::DopplerOffset
}

fn sweep(s: &SweepSection, which: &str) -> Result<SweepAxis, CliError> {
    let axis = SurfaceAxis::parse(&s.axis).map_err(|e| CliError::Config(format!("ambiguity_map.{which}: {e}")))?;
    if s.points == 0 || !s.start.is_finite() || !s.stop.is_finite() || (s.points > 1 && s.stop <= s.start) {
        return Err(CliError::Config(format!(
            "ambiguity_map.{which}: need points ≥ 1 and finite start < stop, got {}..{} with {} points",
            s.start, s.stop, s.points
        )));
    }
    let scale = if is_angle(axis) { 1f64.to_radians() } else { 1.0 };
    Ok(SweepAxis { axis, values: linspace(s.start * scale, s.stop * scale, s.points) })
}

/// Angle axes back to degrees for output.
fn surface_in_degrees(mut s: AmbiguitySurface) -> AmbiguitySurface {
    let convert = |a: &mut SweepAxis| {
        if is_angle(a.axis) {
            a.values.iter_mut().for_each(|v| *v = v.to_degrees());
        }
    };
    convert(&mut s.rows);
    if let Some(c) = s.cols.as_mut() {
        convert(c);
    }
    s
}

pub fn ambiguity_map(cfg: &LoadedConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let m = cfg.run.ambiguity_map.as_ref().ok_or_else(|| CliError::Config("missing [ambiguity_map] section".into()))?;
    let rows = sweep(&m.rows, "rows")?;
    let cols = m.cols.as_ref().map(|c| sweep(c, "cols")).transpose()?;
    if cols.as_ref().is_some_and(|c| c.axis == rows.axis) {
        return Err(CliError::Config("ambiguity_map: rows and cols must sweep different axes".into()));
    }
    let sounding = cfg.sounding()?;
    let seq = cfg.sequence(&m.sequence, sounding.pairs())?;
    let sounding = sounding.with_sequence(seq.clone())?;
    let mode = AmbiguityMode::select(&sounding, &AmbiguityGrid::default(), m.polarimetric)?;
    let truth = cfg.truth()?.structural();
    let surface = ambiguity_surface(seq.eta(), &truth, rows, cols, &sounding, mode)?;
    let peak = surface.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let surface = surface_in_degrees(surface);

    let mut out = Outputs::new(cfg.output_dir())?;
    out.write("ambiguity_surface.csv", |w| write_surface_csv(w, &surface))?;
    let dir = out.manifest("ambiguity-map", cfg, &[])?;
    println!("ambiguity map ({:?}, {}×{}) -> {}", mode, surface.rows.values.len(), surface.ncols(), dir.display());
    println!("peak value {peak:.6}");
    println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}

pub fn crlb(cfg: &LoadedConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let c = cfg.run.crlb.as_ref().ok_or_else(|| CliError::Config("missing [crlb] section".into()))?;
    let params = parse_parameters(&c.parameters)?;
    let sounding = cfg.sounding()?;
    let seq = cfg.sequence(&c.sequence, sounding.pairs())?;
    let sounding = sounding.with_sequence(seq)?;
    let truth = cfg.truth()?;
    let sigma = match (c.snr_db, c.sigma) {
        (Some(snr), None) => sigma_for_snr(&truth, &sounding, snr)?,
        (None, Some(s)) if s > 0.0 && s.is_finite() => s,
        (None, Some(s)) => return Err(CliError::Config(format!("crlb.sigma must be positive, got {s}"))),
        _ => return Err(CliError::Config("crlb needs exactly one of `snr_db` and `sigma`".into())),
    };
    let info = fim(&truth, &sounding, sigma)?.restrict(&params)?;
    let bounds = info.crlb()?;
    // angles leave in degrees: information per deg², bound in deg²
    let per_deg = 1f64.to_radians();
    let rows: Vec<(String, f64, f64)> = params
        .iter()
        .zip(info.diagonal())
        .zip(bounds)
        .map(|((p, d), b)| match p {
            Parameter::AzimuthTx | Parameter::ElevationTx | Parameter::AzimuthRx | Parameter::ElevationRx => {
                (p.label().to_string(), d * per_deg * per_deg, b / (per_deg * per_deg))
            }
            _ => (p.label().to_string(), d, b),
        })
        .collect();

    let mut out = Outputs::new(cfg.output_dir())?;
    out.write("crlb.csv", |w| write_crlb_csv(w, &rows))?;
    let dir = out.manifest("crlb", cfg, &[])?;
    println!("crlb (sigma {sigma:.6e}) -> {}", dir.display());
    for (p, _, b) in &rows {
        println!("{p}: {b:.6e}");
    }
    println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn kernel(label: &str) -> Result<ScalingKernel, CliError> {
    [ScalingKernel::AmbiguityGeneral, ScalingKernel::AmbiguityHighXpr, ScalingKernel::FourierCost]
        .into_iter()
        .find(|k| k.label() == label)
        .ok_or_else(|| CliError::Config(format!("bench: unknown kernel `{label}`")))
}

/// FF and ambiguity-baseline design times on an `elements`-element ULA with a
/// single receiver.
fn design_ratio(elements: usize, dt: f64, iterations: usize, seed: u64) -> Result<(f64, f64), CliError> {
    let anneal = AnnealConfig { iterations, seed, ..AnnealConfig::default() };
    anneal.validate()?;
    let start = Instant::now();
    let tx = ArrayModel::isotropic_ula(elements, 0.5, Polarization::V)?;
    let rx = ArrayModel::single_isotropic(Polarization::V);
    let cost = FisherCost::new(&tx, &rx, (Polarization::V, Polarization::V), &FisherCostConfig::tx_azimuth())?;
    design_ff(&FourierStepConfig::new(elements, dt, seed), &anneal, &|eta: &[f64]| cost.evaluate(eta))?;
    let ff = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let sounding = SoundingConfig::new(tx, rx, SwitchingSequence::trivial(elements, dt)?)?;
    let objective = AmbiguityObjective::new(&sounding, &AmbiguityGrid::default(), AmbiguityMode::SinglePol)?;
    design_ambiguity_baseline(elements, dt, &anneal, &|eta: &[f64]| objective.evaluate(eta))?;
    Ok((ff, start.elapsed().as_secs_f64()))
}

pub fn bench(cfg: &LoadedConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let seed = cfg.seed()?;
    let b = cfg.run.bench.as_ref().ok_or_else(|| CliError::Config("missing [bench] section".into()))?;
    if b.sizes.len() < 2 {
        return Err(CliError::Config("bench.sizes needs at least two sizes".into()));
    }
    if b.batches == 0 {
        return Err(CliError::Config("bench.batches must be at least 1".into()));
    }
    let kernels = b.kernels.iter().map(|k| kernel(k)).collect::<Result<Vec<_>, _>>()?;
    for k in &kernels {
        for &n in &b.sizes {
            let _ = k.prepare(n).map_err(|e| CliError::Config(format!("bench.sizes: {} at {n}: {e}", k.label())))?;
        }
    }
    let min_batch = Duration::from_millis(b.min_batch_ms);
    let measurements = kernels
        .iter()
        .map(|&k| measure_scaling(k, &b.sizes, b.batches, min_batch))
        .collect::<switchseq::Result<Vec<_>>>()?;
    let ratio =
        b.design_ratio_elements.map(|m| design_ratio(m, cfg.dt()?, b.design_ratio_iterations, seed)).transpose()?;

    let mut out = Outputs::new(cfg.output_dir())?;
    out.write("timing.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["size".to_string()];
        header.extend(measurements.iter().map(|m| format!("{}_seconds", m.kernel.label())));
        csv.write_record(&header)?;
        for (i, n) in b.sizes.iter().enumerate() {
            let mut row = vec![n.to_string()];
            row.extend(measurements.iter().map(|m| m.seconds[i].to_string()));
            csv.write_record(&row)?;
        }
        csv.flush()
    })?;
    out.write("timing_slopes.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["kernel", "loglog_slope"])?;
        for m in &measurements {
            csv.write_record([m.kernel.label().to_string(), m.slope.to_string()])?;
        }
        csv.flush()
    })?;
    if let Some((ff, amb)) = ratio {
        out.write("design_timing.csv", |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["ff_seconds", "ambiguity_seconds", "ratio"])?;
            csv.write_record([ff.to_string(), amb.to_string(), (amb / ff).to_string()])?;
            csv.flush()
        })?;
    }
    let dir = out.manifest("bench", cfg, &[("seed", seed)])?;
    println!("bench -> {}", dir.display());
    for m in &measurements {
        println!("{}: log-log slope {:.3}", m.kernel.label(), m.slope);
    }
    if let Some((ff, amb)) = ratio {
        println!("design time FF {ff:.4} s, ambiguity {amb:.4} s, ratio {:.1}", amb / ff);
    }
    println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}
