//! Trace CSV, metrics JSON, comparison tables and plot scripts.

use std::io::Write;

use qsmc_core::{Error, RunMetrics, Scenario, TraceRow};
use serde_json::json;

pub const METRICS_SCHEMA_VERSION: u32 = 1;

pub const TRACE_COLUMNS: [&str; 41] = [
    "t",
    "x",
    "y",
    "z",
    "xd",
    "yd",
    "zd",
    "v1",
    "v2",
    "v3",
    "q0",
    "q1",
    "q2",
    "q3",
    "q0d",
    "q1d",
    "q2d",
    "q3d",
    "p",
    "q",
    "r",
    "F_th",
    "tau1",
    "tau2",
    "tau3",
    "s1",
    "s2",
    "s3",
    "nhat_x",
    "nhat_y",
    "nhat_z",
    "khat_1",
    "khat_2",
    "khat_3",
    "e0",
    "enorm",
    "omega1_sq",
    "omega2_sq",
    "omega3_sq",
    "omega4_sq",
    "flags",
];

/// Columns of the comparison summary, one row per arm.
pub const SUMMARY_COLUMNS: [&str; 12] = [
    "arm",
    "completed",
    "final_time",
    "rmse_x",
    "rmse_y",
    "rmse_z",
    "mean_enorm",
    "tv_tau1",
    "tv_tau2",
    "tv_tau3",
    "max_torque_norm",
    "singular_events",
];

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn io_err(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        k => std::io::Error::other(format!("{k:?}")),
    }
}

/// Trace row as CSV fields; quaternions are reported with a non-negative scalar part.
pub fn trace_record(r: &TraceRow) -> Vec<String> {
    let q = r.attitude.canonical().to_array();
    let qd = r.desired_attitude.canonical().to_array();
    let mut f: Vec<f64> = vec![r.t];
    f.extend(r.position.iter());
    f.extend(r.reference.position.iter());
    f.extend(r.velocity.iter());
    f.extend(q);
    f.extend(qd);
    f.extend(r.body_rates.iter());
    f.push(r.thrust);
    f.extend(r.torque.iter());
    f.extend(r.s.iter());
    f.extend(r.n_hat.iter());
    f.extend(r.k_hat.iter());
    f.push(r.e0);
    f.push(r.e_norm);
    f.extend(r.omega_sq);
    let mut out: Vec<String> = f.into_iter().map(num).collect();
    out.push(r.flags.to_string());
    out
}

pub fn write_trace<W: Write>(w: W, trace: &[TraceRow]) -> std::io::Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(TRACE_COLUMNS).map_err(io_err)?;
    for r in trace {
        wr.write_record(trace_record(r)).map_err(io_err)?;
    }
    wr.flush()
}

fn smoothing_name(sc: &Scenario) -> &'static str {
    match sc.att_gains.smoothing {
        qsmc_core::attitude::Smoothing::Sign => "sign",
        qsmc_core::attitude::Smoothing::Tanh { .. } => "tanh",
    }
}

pub fn metrics_json(m: &RunMetrics, sc: &Scenario, error: Option<&Error>) -> serde_json::Value {
    json!({
        "schema_version": METRICS_SCHEMA_VERSION,
        "controller": sc.controller.name(),
        "smoothing": smoothing_name(sc),
        "dt": sc.sim.dt,
        "duration": sc.sim.duration,
        "completed": m.completed,
        "error": error.map(|e| e.to_string()),
        "samples": m.samples,
        "final_time": m.final_time,
        "rmse_position": m.rmse_position,
        "rmse_attitude": m.rmse_attitude,
        "mean_attitude_error": m.mean_attitude_error,
        "convergence_time_position": m.convergence_time_position,
        "convergence_time_attitude": m.convergence_time_attitude,
        "chattering_index": m.chattering_index,
        "max_thrust": m.max_thrust,
        "max_torque": m.max_torque,
        "max_torque_norm": m.max_torque_norm,
        "lyapunov_violations": {
            "position": m.lyapunov_violations_position,
            "attitude": m.lyapunov_violations_attitude,
        },
        "max_lyapunov_increase": {
            "position": m.max_lyapunov_increase_position,
            "attitude": m.max_lyapunov_increase_attitude,
        },
        "reaching_time_measured": m.reaching_time_measured,
        "reaching_time_bound": m.reaching_time_bound,
        "reaching_residual_max": m.reaching_residual_max,
        "singular_events": m.singular_events,
        "unrealizable_steps": m.unrealizable_steps,
        "thrust_limit_steps": m.thrust_limit_steps,
        "final_n_hat": m.final_n_hat,
        "final_k_hat": m.final_k_hat,
    })
}

/// Gnuplot script over the trace CSV: tracking, errors and control effort.
pub fn plot_script(trace_file: &str) -> String {
    let col = |name: &str| TRACE_COLUMNS.iter().position(|c| *c == name).unwrap() + 1;
    let mut s = String::new();
    s.push_str("# usage: gnuplot plot.gp  (run inside the output directory)\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 1400,1000\n");
    s.push_str(&format!("data = '{trace_file}'\n\n"));

    s.push_str("set output 'tracking.png'\nset multiplot layout 3,1 title 'Position tracking'\n");
    for (a, d) in [("x", "xd"), ("y", "yd"), ("z", "zd")] {
        s.push_str(&format!(
            "set ylabel '{a} (m)'\nplot data skip 1 using {t}:{c} with lines title '{a}', \\\n     data skip 1 using {t}:{r} with lines dashtype 2 title '{d}'\n",
            t = col("t"),
            c = col(a),
            r = col(d),
        ));
    }
    s.push_str("set xlabel 't (s)'\nunset multiplot\n\n");

    s.push_str(
        "set output 'errors.png'\nset multiplot layout 2,1 title 'Tracking errors'\nunset xlabel\n",
    );
    s.push_str(&format!(
        "set ylabel 'position error (m)'\nplot data skip 1 using {t}:(${x}-${xd}) with lines title 'e_x', \\\n     data skip 1 using {t}:(${y}-${yd}) with lines title 'e_y', \\\n     data skip 1 using {t}:(${z}-${zd}) with lines title 'e_z'\n",
        t = col("t"),
        x = col("x"),
        xd = col("xd"),
        y = col("y"),
        yd = col("yd"),
        z = col("z"),
        zd = col("zd"),
    ));
    s.push_str(&format!(
        "set xlabel 't (s)'\nset ylabel 'attitude error'\nplot data skip 1 using {t}:{e} with lines title '|e|', \\\n     data skip 1 using {t}:(1-${e0}) with lines title '1-e0'\nunset multiplot\n\n",
        t = col("t"),
        e = col("enorm"),
        e0 = col("e0"),
    ));

    s.push_str(
        "set output 'control.png'\nset multiplot layout 2,1 title 'Control inputs'\nunset xlabel\n",
    );
    s.push_str(&format!(
        "set ylabel 'thrust (N)'\nplot data skip 1 using {t}:{f} with lines title 'F'\n",
        t = col("t"),
        f = col("F_th"),
    ));
    s.push_str(&format!(
        "set xlabel 't (s)'\nset ylabel 'torque (N m)'\nplot data skip 1 using {t}:{a} with lines title 'tau1', \\\n     data skip 1 using {t}:{b} with lines title 'tau2', \\\n     data skip 1 using {t}:{c} with lines title 'tau3'\nunset multiplot\n",
        t = col("t"),
        a = col("tau1"),
        b = col("tau2"),
        c = col("tau3"),
    ));
    s
}

/// Per-arm outcome of a comparison.
#[derive(Debug, Clone)]
pub struct ArmResult {
    pub scenario: Scenario,
    pub trace: Vec<TraceRow>,
    pub metrics: RunMetrics,
    pub error: Option<Error>,
}

/// Side-by-side position and attitude errors; an arm that stopped early leaves empty cells.
pub fn write_comparison<W: Write>(w: W, arms: &[ArmResult]) -> std::io::Result<()> {
    let mut wr = csv_writer(w);
    let mut header = vec!["t".to_string()];
    for a in arms {
        let n = a.scenario.controller.name();
        header.extend(["ex", "ey", "ez", "enorm"].map(|c| format!("{c}_{n}")));
    }
    wr.write_record(&header).map_err(io_err)?;
    let rows = arms.iter().map(|a| a.trace.len()).max().unwrap_or(0);
    for k in 0..rows {
        let t = arms
            .iter()
            .find_map(|a| a.trace.get(k))
            .map(|r| r.t)
            .unwrap_or_default();
        let mut rec = vec![num(t)];
        for a in arms {
            match a.trace.get(k) {
                Some(r) => {
                    let e = r.position - r.reference.position;
                    rec.extend([e.x, e.y, e.z, r.e_norm].map(num));
                }
                None => rec.extend(std::iter::repeat_n(String::new(), 4)),
            }
        }
        wr.write_record(&rec).map_err(io_err)?;
    }
    wr.flush()
}

fn summary_cells(a: &ArmResult) -> [String; 12] {
    let m = &a.metrics;
    let rmse = m
        .rmse_position
        .map(|r| r.map(num))
        .unwrap_or_else(|| std::array::from_fn(|_| "nan".into()));
    let [rx, ry, rz] = rmse;
    [
        a.scenario.controller.name().to_string(),
        m.completed.to_string(),
        num(m.final_time),
        rx,
        ry,
        rz,
        num(m.mean_attitude_error),
        num(m.chattering_index[0]),
        num(m.chattering_index[1]),
        num(m.chattering_index[2]),
        num(m.max_torque_norm),
        m.singular_events.to_string(),
    ]
}

pub fn write_summary_csv<W: Write>(w: W, arms: &[ArmResult]) -> std::io::Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(SUMMARY_COLUMNS).map_err(io_err)?;
    for a in arms {
        wr.write_record(summary_cells(a)).map_err(io_err)?;
    }
    wr.flush()
}

/// Fixed-width text rendering of the summary.
pub fn summary_table(arms: &[ArmResult]) -> String {
    const WIDTH: usize = 19;
    let mut s = String::new();
    for c in SUMMARY_COLUMNS {
        s.push_str(&format!("{c:>WIDTH$}"));
    }
    s.push('\n');
    for a in arms {
        for c in summary_cells(a) {
            s.push_str(&format!("{c:>WIDTH$}"));
        }
        s.push('\n');
    }
    s
}
