use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qsmc_core::{compute_metrics, run, Controller, RunMetrics, Scenario};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{load_scenario, ControllerName, LoadedScenario, SmoothingName};
use crate::error::CliError;
use crate::output::{
    metrics_json, plot_script, summary_table, write_comparison, write_summary_csv, write_trace,
    ArmResult,
};
use crate::validate::{run_suite, Check};

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Vec<String>,
    pub controller: Option<ControllerName>,
    pub smoothing: Option<SmoothingName>,
    pub quiet: bool,
}

impl Options {
    pub fn load(&self) -> Result<LoadedScenario, CliError> {
        let mut overrides = self.overrides.clone();
        if let Some(c) = self.controller {
            overrides.push(format!("controller = \"{}\"", Controller::from(c).name()));
        }
        if let Some(s) = self.smoothing {
            let name = match s {
                SmoothingName::Sign => "sign",
                SmoothingName::Tanh => "tanh",
            };
            overrides.push(format!("gains.attitude.smoothing = \"{name}\""));
        }
        Ok(load_scenario(self.config.as_deref(), &overrides)?)
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn output_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(output_err(dir))
}

/// Writes through a buffered file at `dir/name`; `name` is a plain file name.
fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<PathBuf, CliError> {
    debug_assert!(crate::config::is_plain_file_name(name));
    let path = dir.join(name);
    let file = File::create(&path).map_err(output_err(&path))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(output_err(&path))?;
    Ok(path)
}

fn run_arm(sc: &Scenario) -> ArmResult {
    match run(sc) {
        Ok(out) => ArmResult {
            metrics: compute_metrics(&out.trace, sc, out.error.as_ref()),
            scenario: sc.clone(),
            trace: out.trace,
            error: out.error,
        },
        Err(e) => ArmResult {
            metrics: compute_metrics(&[], sc, Some(&e)),
            scenario: sc.clone(),
            trace: Vec::new(),
            error: Some(e),
        },
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub metrics: RunMetrics,
    pub files: Vec<PathBuf>,
    pub wall_time: f64,
}

/// Runs one scenario and writes the trace, metrics and plot script.
///
/// Files are written even when the run aborts; the abort is then returned as the error.
pub fn cmd_run(opts: &Options) -> Result<RunReport, CliError> {
    let loaded = opts.load()?;
    let sc = &loaded.scenario;
    let names = &loaded.config.output;
    prepare_dir(&opts.out)?;

    let start = Instant::now();
    let arm = run_arm(sc);
    let wall_time = start.elapsed().as_secs_f64();

    let mut files = vec![write_file(&opts.out, &names.trace, |w| {
        write_trace(w, &arm.trace)
    })?];
    let json = metrics_json(&arm.metrics, sc, arm.error.as_ref());
    files.push(write_file(&opts.out, &names.metrics, |w| {
        serde_json::to_writer_pretty(&mut *w, &json)?;
        std::io::Write::write_all(w, b"\n")
    })?);
    files.push(write_file(&opts.out, &names.plot, |w| {
        std::io::Write::write_all(w, plot_script(&names.trace).as_bytes())
    })?);

    if let Some(source) = arm.error {
        return Err(CliError::Simulation {
            controller: sc.controller.name(),
            source,
        });
    }
    let m = &arm.metrics;
    opts.say(format!(
        "{} run: {} samples in {:.2} s wall time",
        sc.controller.name(),
        m.samples,
        wall_time
    ));
    if let Some(r) = m.rmse_position {
        opts.say(format!(
            "position RMSE (m): {:.3e} {:.3e} {:.3e}",
            r[0], r[1], r[2]
        ));
    }
    opts.say(format!(
        "mean attitude error: {:.3e}",
        m.mean_attitude_error
    ));
    for f in &files {
        opts.say(format!("wrote {}", f.display()));
    }
    Ok(RunReport {
        metrics: arm.metrics,
        files,
        wall_time,
    })
}

/// Quaternion and Euler arms on the same scenario. A failing arm is part of the result.
pub fn cmd_compare(opts: &Options) -> Result<Vec<ArmResult>, CliError> {
    let loaded = opts.load()?;
    prepare_dir(&opts.out)?;
    let arms: Vec<ArmResult> = [Controller::Quaternion, Controller::Euler]
        .into_iter()
        .map(|c| {
            let mut sc = loaded.scenario.clone();
            sc.controller = c;
            run_arm(&sc)
        })
        .collect();
    let cmp = write_file(&opts.out, "compare.csv", |w| write_comparison(w, &arms))?;
    let summary = write_file(&opts.out, "summary.csv", |w| write_summary_csv(w, &arms))?;
    opts.say(summary_table(&arms).trim_end());
    for a in &arms {
        if let Some(e) = &a.error {
            opts.say(format!("{} arm stopped: {e}", a.scenario.controller.name()));
        }
    }
    opts.say(format!("wrote {}", cmp.display()));
    opts.say(format!("wrote {}", summary.display()));
    Ok(arms)
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub index: usize,
    pub offset: [f64; 3],
    pub metrics: RunMetrics,
    pub error: Option<String>,
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "run",
    "dx",
    "dy",
    "dz",
    "completed",
    "rmse_x",
    "rmse_y",
    "rmse_z",
    "mean_enorm",
    "max_torque_norm",
    "reaching_time",
    "error",
];

/// Independent runs from seeded random initial-position offsets, executed in parallel.
pub fn cmd_sweep(opts: &Options) -> Result<Vec<SweepRun>, CliError> {
    let loaded = opts.load()?;
    prepare_dir(&opts.out)?;
    let base = &loaded.scenario;
    let half = loaded.config.sweep.max_offset;
    let mut rng = ChaCha8Rng::seed_from_u64(base.sim.seed);
    let offsets: Vec<[f64; 3]> = (0..loaded.config.sweep.runs)
        .map(|_| {
            std::array::from_fn(|_| {
                if half > 0.0 {
                    rng.gen_range(-half..=half)
                } else {
                    0.0
                }
            })
        })
        .collect();
    let runs: Vec<SweepRun> = offsets
        .par_iter()
        .enumerate()
        .map(|(index, off)| {
            let mut sc = base.clone();
            sc.init.position += qsmc_core::quat::Vec3::from(*off);
            let arm = run_arm(&sc);
            SweepRun {
                index,
                offset: *off,
                metrics: arm.metrics,
                error: arm.error.map(|e| e.to_string()),
            }
        })
        .collect();
    let path = write_file(&opts.out, "sweep.csv", |w| {
        let mut wr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wr.write_record(SWEEP_COLUMNS)?;
        let f = |x: f64| format!("{x:.12e}");
        for r in &runs {
            let m = &r.metrics;
            let rmse = m
                .rmse_position
                .map(|v| v.map(f))
                .unwrap_or_else(|| std::array::from_fn(|_| "nan".into()));
            let mut rec = vec![r.index.to_string()];
            rec.extend(r.offset.map(f));
            rec.push(m.completed.to_string());
            rec.extend(rmse);
            rec.push(f(m.mean_attitude_error));
            rec.push(f(m.max_torque_norm));
            rec.push(
                m.reaching_time_measured
                    .map(f)
                    .unwrap_or_else(|| "nan".into()),
            );
            rec.push(r.error.clone().unwrap_or_default());
            wr.write_record(&rec)?;
        }
        wr.flush()
    })?;
    let done = runs.iter().filter(|r| r.metrics.completed).count();
    opts.say(format!("sweep: {done} of {} runs completed", runs.len()));
    opts.say(format!("wrote {}", path.display()));
    Ok(runs)
}

/// Prints one PASS/FAIL line per property; fails if any property fails.
pub fn cmd_validate(opts: &Options) -> Result<Vec<Check>, CliError> {
    let loaded = opts.load()?;
    let checks = run_suite(&loaded.scenario);
    for c in &checks {
        opts.say(format!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Validate {
            failed,
            total: checks.len(),
        });
    }
    Ok(checks)
}
