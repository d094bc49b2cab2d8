//! Subcommand implementations, callable without going through the binary.

use std::path::{Path, PathBuf};

use hfsim_core::congestion::SsnTable;
use hfsim_core::scenario::sample_scenario;
use hfsim_core::stats::power_pdf;
use hfsim_core::synth::{
    check_nyquist, default_baseband_rate, window_samples, Ddc, DdcWindow, Synthesizer, DEFAULT_RF_SAMPLE_RATE,
};
use hfsim_core::{
    AllocationTable, CoefficientTable, InterferenceParams, OutputMode, ScenarioConditions, ScenarioConfig,
};

use crate::analyze::{analyze_file, Analysis, AnalysisOptions};
use crate::config::{Chain, Config, REGIME_WINDOW_S};
use crate::error::CliError;
use crate::format::{default_file_name, SampleFormat, SampleHeader, SampleWriter};
use crate::manifest::{Resolved, RunManifest, SynthPlan, MANIFEST_FILE, SOFTWARE, VERSION};

pub const INTERFERERS_CSV: &str = "interferers.csv";
pub const INTERFERENCE_PDF_CSV: &str = "interference_power_pdf.csv";
/// Bins of the interferer power histogram.
pub const INTERFERENCE_PDF_BINS: usize = 100;
/// Alias warnings logged one by one before switching to a count.
const ALIAS_WARNINGS_SHOWN: usize = 5;

/// Run `f` on a rayon pool of `workers` threads (0: one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::runtime(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Data tables named by a config, or the shipped ones.
#[derive(Debug, Clone)]
pub struct Tables {
    pub allocations: AllocationTable,
    pub coefficients: CoefficientTable,
    pub ssn: SsnTable,
}

impl Tables {
    pub fn load(config: &Config, base: &Path) -> Result<Self, CliError> {
        let d = &config.data;
        let allocations = match Config::resolve_path(base, &d.allocations) {
            Some(p) => AllocationTable::load(p)?,
            None => AllocationTable::shipped(),
        };
        let coefficients = match Config::resolve_path(base, &d.coefficients) {
            Some(p) => CoefficientTable::load(p)?,
            None => CoefficientTable::shipped(),
        };
        coefficients.validate_against(&allocations)?;
        let ssn = match Config::resolve_path(base, &d.ssn) {
            Some(p) => SsnTable::load(p)?,
            None => SsnTable::shipped(),
        };
        Ok(Self { allocations, coefficients, ssn })
    }
}

/// Output plan for a config.
pub fn plan(config: &Config, table: &AllocationTable) -> Result<SynthPlan, CliError> {
    let o = &config.output;
    let duration = config.scenario.total_time;
    let (sample_rate, rf_sample_rate, decimation) = match (o.mode, o.chain) {
        (OutputMode::Rf, Chain::Ddc) => {
            return Err(CliError::config("output.chain = \"ddc\" produces baseband; set output.mode = \"baseband\""))
        }
        (OutputMode::Rf, Chain::Direct) => (o.sample_rate.unwrap_or(DEFAULT_RF_SAMPLE_RATE), None, 1),
        (OutputMode::Baseband, Chain::Direct) => {
            let fs = match o.sample_rate {
                Some(fs) => fs,
                None => default_baseband_rate(table, &config.scenario.allocations, o.center_frequency)?,
            };
            (fs, None, 1)
        }
        (OutputMode::Baseband, Chain::Ddc) => {
            let fs = o.rf_sample_rate / o.decimation as f64;
            if let Some(requested) = o.sample_rate {
                if requested != fs {
                    return Err(CliError::config(format!(
                        "output.sample_rate {requested} differs from rf_sample_rate / decimation = {fs}"
                    )));
                }
            }
            (fs, Some(o.rf_sample_rate), o.decimation)
        }
    };
    Ok(SynthPlan {
        mode: o.mode,
        chain: o.chain,
        sample_rate,
        center_frequency: o.center_frequency,
        rf_sample_rate,
        decimation,
        duration,
        total_samples: window_samples(duration, sample_rate),
        block_size: o.block_size,
    })
}

/// Fail early on interferers the plan cannot represent; warn about ones
/// the down-converter will fold into the output.
pub fn check_plan(plan: &SynthPlan, params: &[InterferenceParams]) -> Result<(), CliError> {
    match (plan.mode, plan.rf_sample_rate) {
        (OutputMode::Rf, _) => check_nyquist(params, OutputMode::Rf, 0.0, plan.sample_rate)?,
        (OutputMode::Baseband, None) => {
            check_nyquist(params, OutputMode::Baseband, plan.center_frequency, plan.sample_rate)?
        }
        (OutputMode::Baseband, Some(rf)) => {
            check_nyquist(params, OutputMode::Rf, 0.0, rf)?;
            let ddc = Ddc::new(rf, plan.center_frequency, plan.decimation)?;
            let warnings = ddc.alias_warnings(params);
            for w in warnings.iter().take(ALIAS_WARNINGS_SHOWN) {
                log::warn!(
                    "interferer {} at {} Hz aliases ({:?}) to {:.1} Hz in the output band",
                    w.index,
                    w.frequency_hz,
                    w.kind,
                    w.output_hz
                );
            }
            if warnings.len() > ALIAS_WARNINGS_SHOWN {
                log::warn!("{} more alias warnings suppressed", warnings.len() - ALIAS_WARNINGS_SHOWN);
            }
        }
    }
    Ok(())
}

/// Synthesize the sample file of `plan` from an interferer table.
pub fn render(plan: &SynthPlan, params: &[InterferenceParams], path: &Path) -> Result<SampleHeader, CliError> {
    let synth = Synthesizer::new(params);
    let mut writer = SampleWriter::create(path)?;
    let fs = plan.sample_rate;
    match (plan.mode, plan.rf_sample_rate) {
        (OutputMode::Rf, _) => {
            for block in synth.stream(OutputMode::Rf, 0.0, fs, plan.total_samples, plan.block_size) {
                writer.write_block(&block?)?;
            }
        }
        (OutputMode::Baseband, None) => {
            for block in synth.stream(OutputMode::Baseband, plan.center_frequency, fs, plan.total_samples, plan.block_size)
            {
                writer.write_block(&block?)?;
            }
        }
        (OutputMode::Baseband, Some(rf)) => {
            let window = DdcWindow::new(&synth, plan.center_frequency, rf, plan.decimation, plan.duration, plan.block_size)?;
            if window.len() != plan.total_samples {
                return Err(CliError::runtime(format!(
                    "down-converter yields {} samples, plan expects {}",
                    window.len(),
                    plan.total_samples
                )));
            }
            for block in window {
                writer.write_block(&block?)?;
            }
        }
    }
    let fallback = SampleHeader {
        format: SampleFormat::for_mode(plan.mode),
        mode: plan.mode,
        sample_rate: fs,
        center_frequency: match plan.mode {
            OutputMode::Rf => 0.0,
            OutputMode::Baseband => plan.center_frequency,
        },
        start_index: 0,
        samples: 0,
    };
    let header = writer.finish(fallback)?;
    if header.samples != plan.total_samples {
        return Err(CliError::runtime(format!("wrote {} samples, plan expects {}", header.samples, plan.total_samples)));
    }
    Ok(header)
}

#[derive(Debug, Clone)]
pub struct SimulateReport {
    pub manifest: RunManifest,
    pub header: SampleHeader,
    pub sample_path: PathBuf,
    pub analysis: Analysis,
}

/// Sample a scenario, synthesize it and analyze the result.
pub fn simulate(
    config_path: &Path,
    out_dir: &Path,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<SimulateReport, CliError> {
    let (mut config, base) = Config::load(config_path)?;
    if let Some(seed) = seed {
        config.scenario.seed = seed;
    }
    if let Some(w) = workers {
        config.run.workers = w;
    }
    config.validate()?;
    let modulation = config.modulation_map()?;
    let tables = Tables::load(&config, &base)?;
    let t = &config.time;
    let ssn = tables.ssn.lookup(t.year, t.month)?;
    let conditions = ScenarioConditions {
        latitude_deg: config.location.latitude,
        longitude_deg: config.location.longitude,
        week: t.week,
        ssn,
        bandwidth_hz: config.receiver.bandwidth,
        regime: t.regime,
    };
    let plan = plan(&config, &tables.allocations)?;
    if plan.total_samples == 0 {
        return Err(CliError::config("output window holds no samples; raise scenario.total_time or the sample rate"));
    }
    if config.scenario.total_time > REGIME_WINDOW_S {
        log::warn!(
            "total_time {} s exceeds the {} h window in which one congestion regime holds",
            config.scenario.total_time,
            REGIME_WINDOW_S / 3600.0
        );
    }
    let s = &config.scenario;
    let scenario = ScenarioConfig {
        conditions,
        allocation_filter: s.allocations.clone(),
        lambda: s.lambda,
        mean_duration: s.mean_duration,
        total_time: s.total_time,
        seed: s.seed,
        antenna_factor_db: config.receiver.antenna_factor,
        load_ohms: config.receiver.load_resistance,
        sample_rate: plan.sample_rate,
        center_frequency: plan.center_frequency,
        output_mode: plan.mode,
    };

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let sample_file = default_file_name(plan.mode).to_string();
    let sample_path = out_dir.join(&sample_file);

    let (params, header) = with_workers(config.run.workers, || -> Result<_, CliError> {
        let params = sample_scenario(&scenario, &tables.coefficients, &tables.allocations)?;
        check_plan(&plan, &params)?;
        log::info!(
            "{} interferers; writing {} samples at {} Hz to {}",
            params.len(),
            plan.total_samples,
            plan.sample_rate,
            sample_path.display()
        );
        let header = render(&plan, &params, &sample_path)?;
        Ok((params, header))
    })??;

    write_interferers(&out_dir.join(INTERFERERS_CSV), &params)?;
    if params.is_empty() {
        log::warn!("no interferers in the window; skipping {INTERFERENCE_PDF_CSV}");
    } else {
        let p: Vec<f64> = params.iter().map(|p| p.power_dbm).collect();
        let pdf = power_pdf(&p, INTERFERENCE_PDF_BINS)?;
        pdf.write_csv(std::fs::File::create(out_dir.join(INTERFERENCE_PDF_CSV))?)?;
    }

    let manifest = RunManifest {
        software: SOFTWARE.into(),
        version: VERSION.into(),
        seed: s.seed,
        resolved: Resolved {
            ssn,
            year: t.year,
            month: t.month,
            week: t.week,
            regime: t.regime,
            allocations: s.allocations.clone(),
            modulation: modulation.iter().map(|(k, m)| (*k, m.to_string())).collect(),
        },
        config: config.clone(),
        synthesis: plan,
        sample_file,
        interferers: params,
    };
    manifest.write(&out_dir.join(MANIFEST_FILE))?;

    let opts = AnalysisOptions {
        bandwidth_hz: config.receiver.bandwidth,
        ..AnalysisOptions::new(config.receiver.load_resistance)
    };
    let analysis = with_workers(config.run.workers, || analyze_file(&sample_path, &opts, out_dir))??;
    Ok(SimulateReport { manifest, header, sample_path, analysis })
}

fn write_interferers(path: &Path, params: &[InterferenceParams]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_path(path)?;
    for p in params {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}

/// Regenerate a run's sample file from its manifest alone.
pub fn replay(manifest_path: &Path, out_dir: &Path, workers: Option<usize>) -> Result<(SampleHeader, PathBuf), CliError> {
    let manifest = RunManifest::read(manifest_path)?;
    let file_name = Path::new(&manifest.sample_file)
        .file_name()
        .ok_or_else(|| CliError::config(format!("manifest names no sample file: `{}`", manifest.sample_file)))?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(file_name);
    let workers = workers.unwrap_or(manifest.config.run.workers);
    let header = with_workers(workers, || render(&manifest.synthesis, &manifest.interferers, &path))??;
    Ok((header, path))
}

#[derive(Debug, Clone)]
pub struct ImportSummary {
    pub table: SsnTable,
    pub rejected: Vec<(usize, String)>,
}

/// Import an upstream sunspot file into the canonical schema at `out`.
/// Accepted rows are written even when some are rejected.
pub fn ssn_import(input: &Path, out: &Path) -> Result<ImportSummary, CliError> {
    let file = std::fs::File::open(input)
        .map_err(|e| CliError::data(format!("cannot read sunspot file {}: {e}", input.display())))?;
    let report = SsnTable::import(file)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    report.table.write_csv(std::fs::File::create(out)?)?;
    Ok(ImportSummary { table: report.table, rejected: report.rejected })
}

/// Parse `YYYY-MM`.
pub fn parse_year_month(s: &str) -> Result<(i32, u32), CliError> {
    let bad = || CliError::usage(format!("`{s}` is not a YYYY-MM month"));
    let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
    let year: i32 = y.parse().map_err(|_| bad())?;
    let month: u32 = m.parse().map_err(|_| bad())?;
    if !(1..=12).contains(&month) {
        return Err(bad());
    }
    Ok((year, month))
}

/// Sunspot numbers from `from` to `to` inclusive.
pub fn ssn_show(table: &SsnTable, from: (i32, u32), to: (i32, u32)) -> Result<Vec<(i32, u32, f64)>, CliError> {
    if to < from {
        return Err(CliError::usage("--to precedes --from"));
    }
    let rows: Vec<_> = table.range(from, to).collect();
    if rows.is_empty() || from == to {
        // names the month and its nearest neighbours
        table.lookup(from.0, from.1)?;
    }
    Ok(rows)
}
