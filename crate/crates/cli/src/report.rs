//! Delimited text outputs. Everything here is a pure function of its
//! inputs so repeated runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use hinfraud::bench::BenchRow;
use hinfraud::collective::{LoopHistory, PhaseTimes};
use hinfraud::eval::{rela_impr, MetricName, Metrics, SignificanceRow};
use hinfraud::metapath::{MetaPathPair, PathTrace};
use hinfraud::hin::HinSchema;
use hinfraud::{Error, Result};

pub fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io { path: parent.into(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

fn metrics_cells(m: &Metrics) -> String {
    format!("{:.6},{:.6},{:.6},{:.6}", m.recall, m.precision, m.f_score, m.accuracy)
}

fn rela_cells(m: &Metrics, base: &Metrics) -> String {
    MetricName::ALL
        .iter()
        .map(|&k| fmt_opt(rela_impr(m.get(k), base.get(k)).ok()))
        .collect::<Vec<_>>()
        .join(",")
}

pub const METRICS_HEADER: &str = "recall,precision,f_score,accuracy";

pub fn metrics_table(m: &Metrics) -> String {
    format!("{METRICS_HEADER}\n{}\n", metrics_cells(m))
}

/// Header lines then one row per iteration.
pub fn run_report(meta: &[(&str, String)], history: &LoopHistory<f64>) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}: {v}");
    }
    let converged = history.converged_at.map_or_else(|| "none".to_string(), |t| t.to_string());
    let _ = writeln!(out, "# converged_at: {converged}");
    let _ = writeln!(
        out,
        "iteration,{METRICS_HEADER},change_fraction,rela_impr_recall,rela_impr_precision,rela_impr_f_score,rela_impr_accuracy"
    );
    let base = history.baseline().metrics;
    for rec in &history.iterations {
        let Some(m) = rec.metrics else { continue };
        let rela = base.map_or_else(|| "NA,NA,NA,NA".to_string(), |b| rela_cells(&m, &b));
        let _ = writeln!(out, "{},{},{},{}", rec.iteration, metrics_cells(&m), fmt_opt(rec.change_fraction), rela);
    }
    out
}

pub fn predictions(ids: &[String], test: &[usize], proba: &[f64], labels: &[u8]) -> String {
    let mut out = String::from("transaction_id,proba,label\n");
    for ((&i, p), l) in test.iter().zip(proba).zip(labels) {
        let _ = writeln!(out, "{},{p},{l}", ids[i]);
    }
    out
}

pub fn timings(times: &[PhaseTimes]) -> String {
    let mut out = String::from("iteration,features_ms,fit_ms,predict_ms\n");
    for (t, p) in times.iter().enumerate() {
        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
        let _ = writeln!(out, "{t},{:.3},{:.3},{:.3}", ms(p.features), ms(p.fit), ms(p.predict));
    }
    out
}

pub struct WindowRow {
    pub window: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub baseline: Metrics,
    pub last: Metrics,
    pub iterations: usize,
}

pub fn windows(rows: &[WindowRow]) -> String {
    let mut out = String::from(
        "window,n_train,n_test,iterations,baseline_recall,baseline_precision,baseline_f_score,baseline_accuracy,\
         recall,precision,f_score,accuracy,rela_impr_recall,rela_impr_precision,rela_impr_f_score,rela_impr_accuracy\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "W{},{},{},{},{},{},{}",
            r.window,
            r.n_train,
            r.n_test,
            r.iterations,
            metrics_cells(&r.baseline),
            metrics_cells(&r.last),
            rela_cells(&r.last, &r.baseline)
        );
    }
    out
}

pub fn significance(rows: &[SignificanceRow]) -> String {
    let mut out = String::from("column,semantics,t,p,significant\n");
    for r in rows {
        let p = r.p.map_or_else(|| "NA".to_string(), |p| format!("{p:.6e}"));
        let _ = writeln!(
            out,
            "z_{},{},{},{},{}",
            r.column,
            r.semantics,
            fmt_opt(r.t),
            p,
            if r.significant { "yes" } else { "no" }
        );
    }
    out
}

pub fn bench(rows: &[BenchRow]) -> String {
    let mut out = format!("{}\n", BenchRow::HEADER);
    for r in rows {
        let _ = writeln!(out, "{}", r.to_line());
    }
    out
}

pub fn provenance(pairs: &[MetaPathPair], traces: &[PathTrace], schema: &HinSchema) -> String {
    let mut out = String::from("column,left,right,end_type,left_simple,semantics\n");
    for (j, p) in pairs.iter().enumerate() {
        let _ = writeln!(
            out,
            "z_{j},{},{},{},{},{}",
            p.left,
            p.right,
            schema.node_type_name(p.end_type),
            traces[p.left].is_simple(schema),
            p.semantics
        );
    }
    out
}

pub fn paths(traces: &[PathTrace], pairs: &[MetaPathPair], schema: &HinSchema) -> String {
    let mut out = String::from("trace,simple,path\n");
    for (i, t) in traces.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", t.is_simple(schema), t.render(schema));
    }
    out.push('\n');
    out.push_str(&provenance(pairs, traces, schema));
    out
}
