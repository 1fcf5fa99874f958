//! Byte-stable text report, JSON bundle and CSV series.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::Task;
use crate::run::{Bundle, Instance};
use crate::CliError;

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { (v[m - 1] + v[m]) / 2.0 } else { v[m] })
}

fn lower(v: &impl serde::Serialize) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_string)).unwrap_or_default()
}

pub fn render_text(b: &Bundle) -> String {
    let mut s = String::new();
    let mode =
        if b.exact { "exact".to_string() } else { format!("sampled (shots {}, twirls {}, seed {})", b.shots, b.twirls, b.seed) };
    let tasks: Vec<String> = b.tasks.iter().map(lower).collect();
    let _ = writeln!(s, "scpec report");
    let _ = writeln!(s, "name      {}", b.name);
    let _ = writeln!(s, "schema    {}", b.schema);
    let _ = writeln!(s, "topology  {}", lower(&b.topology));
    let _ = writeln!(s, "ansatz    {}", b.ansatz);
    let _ = writeln!(s, "truth     {}", lower(&b.truth));
    let _ = writeln!(s, "mode      {mode}");
    let _ = writeln!(s, "tasks     {}", if tasks.is_empty() { "-".to_string() } else { tasks.join(",") });
    for inst in &b.instances {
        instance_text(&mut s, inst);
    }
    let sweep: Vec<&Instance> = b.instances.iter().filter(|i| !i.mitigate.is_empty()).collect();
    if sweep.len() > 1 {
        let _ = writeln!(s, "\n== bias by size ==");
        let _ = writeln!(s, "{:>4} {:>14} {:>16}", "n", "|bias| consist", "|bias| inconsist");
        for i in sweep {
            let (c, ic) = median_bias(i);
            let _ = writeln!(s, "{:>4} {:>14.6e} {:>16.6e}", i.n, c, ic);
        }
    }
    s
}

fn median_bias(i: &Instance) -> (f64, f64) {
    let c = median(i.mitigate.iter().map(|r| (r.ratio_consistent - 1.0).abs()).collect()).unwrap_or(0.0);
    let ic = median(i.mitigate.iter().map(|r| (r.ratio_inconsistent - 1.0).abs()).collect()).unwrap_or(0.0);
    (c, ic)
}

fn instance_text(s: &mut String, i: &Instance) {
    if let Some(l) = &i.learn {
        let _ = writeln!(s, "\n== learn (n = {}) ==", i.n);
        let _ =
            writeln!(s, "settings {}  rows {}  cols {}  rank {}  kernel {}", l.settings, l.rows, l.cols, l.rank, l.kernel_dim);
        let _ = writeln!(s, "residual {:.6e}  dropped rows {}", l.residual, l.dropped);
    }
    if !i.mitigate.is_empty() {
        let _ = writeln!(s, "\n== mitigate (n = {}) ==", i.n);
        let _ = writeln!(
            s,
            "{:<14} {:<12} {:>6} {:>12} {:>12} {:>12} {:>13} {:>13} {:>10}",
            "circuit",
            "observable",
            "ideal",
            "unmitigated",
            "pred consist",
            "pred inconst",
            "ratio consist",
            "ratio inconst",
            "ratio se"
        );
        for r in &i.mitigate {
            let obs = if r.observable.len() > 12 { format!("{}..", &r.observable[..10]) } else { r.observable.clone() };
            let _ = writeln!(
                s,
                "{:<14} {:<12} {:>6} {:>12.8} {:>12.8} {:>12.8} {:>13.8} {:>13.8} {:>10.2e}",
                r.circuit,
                obs,
                r.ideal,
                r.unmitigated,
                r.predicted_consistent,
                r.predicted_inconsistent,
                r.ratio_consistent,
                r.ratio_inconsistent,
                r.ratio_stderr
            );
        }
        let (c, ic) = median_bias(i);
        let _ = writeln!(s, "median |ratio - 1|: consistent {c:.6e}, inconsistent {ic:.6e}");
    }
    if let Some(g) = &i.gauge_opt {
        let _ = writeln!(s, "\n== gauge-opt (n = {}) ==", i.n);
        let _ = writeln!(s, "ls residual {:.6e}  epsilon {:.6e}  kernel {}", g.ls_residual, g.epsilon, g.kernel_dim);
        let _ = writeln!(
            s,
            "residual two-step {:.6e}  one-step {:.6e}  iterations {}",
            g.residual_two_step, g.residual_star, g.iterations
        );
        let _ = writeln!(s, "{:<10} {:>12} {:>14} {:>12}", "slot", "gamma_0", "gamma_two_step", "gamma_*");
        for r in &g.gamma {
            let _ = writeln!(s, "{:<10} {:>12.6} {:>14.6} {:>12.6}", r.slot, r.gamma_0, r.gamma_two_step, r.gamma_star);
        }
    }
}

fn observables_csv(b: &Bundle) -> String {
    let mut s = String::from("n,circuit,observable,ideal,unmitigated,unmitigated_stderr,ratio_consistent,ratio_inconsistent\n");
    for i in &b.instances {
        for r in &i.mitigate {
            let _ = writeln!(
                s,
                "{},{},{},{},{:e},{:e},{:e},{:e}",
                i.n,
                r.circuit,
                r.observable,
                r.ideal,
                r.unmitigated,
                r.unmitigated_stderr,
                r.ratio_consistent,
                r.ratio_inconsistent
            );
        }
    }
    s
}

fn gamma_csv(b: &Bundle) -> String {
    let mut s = String::from("n,slot,gamma_0,gamma_two_step,gamma_star\n");
    for i in &b.instances {
        for r in i.gauge_opt.iter().flat_map(|g| &g.gamma) {
            let _ = writeln!(s, "{},{},{:e},{:e},{:e}", i.n, r.slot, r.gamma_0, r.gamma_two_step, r.gamma_star);
        }
    }
    s
}

fn trace_csv(b: &Bundle) -> String {
    let mut s = String::from("n,iteration,log_gamma\n");
    for i in &b.instances {
        for (k, v) in i.gauge_opt.iter().flat_map(|g| g.trace.iter().enumerate()) {
            let _ = writeln!(s, "{},{},{v:e}", i.n, 100 * k);
        }
    }
    s
}

/// Write the bundle under `dir`. `report.txt` and `bundle.json` always;
/// the CSV series when the report task was requested.
pub fn emit(b: &Bundle, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let json = serde_json::to_string_pretty(b).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    let mut files = vec![("report.txt", render_text(b)), ("bundle.json", json)];
    if b.tasks.contains(&Task::Report) {
        files.push(("observables.csv", observables_csv(b)));
        files.push(("gamma.csv", gamma_csv(b)));
        files.push(("trace.csv", trace_csv(b)));
    }
    let mut written = vec![];
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}
