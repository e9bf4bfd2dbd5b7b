//! Files written by the command line: schedule tables, scatter and curve
//! data, sequence traces, and staircase plots.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::schedule::ModelSchedule;

use super::experiment::{ExperimentResult, Method};
use super::loader::write_cost_profile;

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_schedule(path: &Path, schedule: &ModelSchedule) -> Result<()> {
    write_file(path, |out| schedule.write_csv(out))
}

pub fn read_schedule(path: &Path) -> Result<ModelSchedule> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ModelSchedule::read_csv(std::io::BufReader::new(file))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Step plot of validation accuracy against budget. Each record contributes
/// one horizontal step from its own cost to the next record's cost (the
/// last step runs to the right edge); a filled dot marks where a step starts
/// and an open dot where it ends.
pub fn staircase_svg(schedule: &ModelSchedule, title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<path class="axes" d="M {MARGIN} {MARGIN} V {y0:.2} H {x1:.2}" stroke="black" fill="none"/>"#,
        y0 = HEIGHT - MARGIN,
        x1 = WIDTH - MARGIN
    );
    let records = schedule.records();
    if let (Some(first), Some(last)) = (records.first(), records.last()) {
        let c_lo = first.cost.as_f64();
        let c_hi = last.cost.as_f64();
        let c_span = if c_hi > c_lo { c_hi - c_lo } else { c_hi.abs().max(1.0) };
        let right = c_hi + 0.1 * c_span;
        let c_min = (c_lo - 0.1 * c_span).max(0.0);
        let a_lo = first.val_accuracy;
        let a_hi = last.val_accuracy;
        let a_pad = ((a_hi - a_lo) * 0.1).max(0.01);
        let (a_min, a_max) = (a_lo - a_pad, a_hi + a_pad);
        let px = |c: f64| MARGIN + (c - c_min) / (right - c_min) * (WIDTH - 2.0 * MARGIN);
        let py = |a: f64| HEIGHT - MARGIN - (a - a_min) / (a_max - a_min) * (HEIGHT - 2.0 * MARGIN);
        for (k, r) in records.iter().enumerate() {
            let end = records.get(k + 1).map_or(right, |n| n.cost.as_f64());
            let (x0, x1, y) = (px(r.cost.as_f64()), px(end), py(r.val_accuracy));
            let _ = writeln!(
                svg,
                r#"<path class="step" d="M {x0:.2} {y:.2} H {x1:.2}" stroke="steelblue" stroke-width="2" fill="none"/>"#
            );
            let _ = writeln!(svg, r#"<circle cx="{x0:.2}" cy="{y:.2}" r="3" fill="steelblue"/>"#);
            if k + 1 < records.len() {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{x1:.2}" cy="{y:.2}" r="3" fill="white" stroke="steelblue"/>"#
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">cost {c_lo}..{c_hi}</text>"#,
            MARGIN,
            HEIGHT - MARGIN / 3.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="5" y="{}" font-family="sans-serif" font-size="11">acc {a_lo:.4}..{a_hi:.4}</text>"#,
            MARGIN - 8.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_staircase(path: &Path, schedule: &ModelSchedule, title: &str) -> Result<()> {
    let svg = staircase_svg(schedule, title);
    write_file(path, |out| out.write_all(svg.as_bytes()))
}

/// Writes every artifact of an experiment under `out_dir`:
///
/// * `scatter.csv`: `normalized_cost,accuracy,method,run`
/// * `curves.csv`: `normalized_cost,smoothed_accuracy,method`
/// * per run: cost profile, both schedules, member traces and a staircase plot
/// * `failures.csv` listing runs that did not complete
///
/// Returns the paths written, in order.
pub fn emit_outputs(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let scatter = out_dir.join("scatter.csv");
    let points = result.points();
    write_file(&scatter, |out| {
        writeln!(out, "normalized_cost,accuracy,method,run")?;
        for p in &points {
            writeln!(out, "{},{},{},{}", p.normalized_cost, p.accuracy, p.method, p.run)?;
        }
        Ok(())
    })?;
    written.push(scatter);

    let curves_path = out_dir.join("curves.csv");
    let mut curves = Vec::new();
    for method in [Method::Msb, Method::LogitB] {
        match result.curve(method) {
            Ok(c) => curves.push((method, c)),
            Err(Error::TooFewPoints(_)) => {}
            Err(e) => return Err(e),
        }
    }
    write_file(&curves_path, |out| {
        writeln!(out, "normalized_cost,smoothed_accuracy,method")?;
        for (method, curve) in &curves {
            for (x, y) in curve {
                writeln!(out, "{x},{y},{method}")?;
            }
        }
        Ok(())
    })?;
    written.push(curves_path);

    for run in &result.runs {
        let stem = format!("run{:03}", run.run);
        let path = out_dir.join(format!("{stem}_costs.csv"));
        write_file(&path, |out| write_cost_profile(&run.profile, out))?;
        written.push(path);
        let path = out_dir.join(format!("{stem}_msb.csv"));
        write_schedule(&path, &run.msb.schedule)?;
        written.push(path);
        let path = out_dir.join(format!("{stem}_logitb.csv"));
        write_schedule(&path, &run.logitb)?;
        written.push(path);
        for member in &run.msb.members {
            let path = out_dir.join(format!("{stem}_trace_{}.csv", member.kind.name()));
            write_file(&path, |out| member.write_trace(out))?;
            written.push(path);
        }
        let path = out_dir.join(format!("{stem}_msb.svg"));
        write_staircase(&path, &run.msb.schedule, &format!("msb schedule, run {}", run.run))?;
        written.push(path);
    }

    let failures = out_dir.join("failures.csv");
    write_file(&failures, |out| {
        writeln!(out, "run,error")?;
        for (run, e) in &result.failures {
            writeln!(out, "{run},\"{}\"", e.to_string().replace('"', "'"))?;
        }
        Ok(())
    })?;
    written.push(failures);
    Ok(written)
}
