use std::collections::HashMap;
use std::path::{Path, PathBuf};

use hinfraud::bench::{benchmark_pair, BenchMode, DEFAULT_DENSE_WORK_CAP};
use hinfraud::classify::{self, threshold_labels, TrainedModel};
use hinfraud::collective::{run_baseline, run_collective};
use hinfraud::datagen::{generate, GenConfig};
use hinfraud::eval::{metrics, sample_rows, significance_report, window_dataset};
use hinfraud::features::compute_all_features;
use hinfraud::hin::io::{read_features, write_matrix, DatasetPaths, SCHEMA_FILE};
use hinfraud::hin::{load_hin, Dataset, HinSchema, LabelState};
use hinfraud::metapath::MetaPaths;
use hinfraud::{split_seed, Error, Result};
use log::{info, warn};
use ndarray::{Array2, Axis};

use crate::config::RunConfig;
use crate::report::{self, WindowRow};

const CLASSIFIER_STREAM: u64 = 1;
const SAMPLING_STREAM: u64 = 2;

pub struct Context {
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
}

impl Context {
    pub fn root_seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    fn classifier_seed(&self) -> u64 {
        split_seed(self.root_seed(), CLASSIFIER_STREAM)
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// A dataset cut down to one window's train and test transactions.
pub struct Prepared {
    pub data: Dataset<f64>,
    pub labels: LabelState<f64>,
    pub window: usize,
    pub windows: usize,
}

fn check_dataset_dir(dir: &Path) -> Result<()> {
    if dir.join(SCHEMA_FILE).is_file() {
        Ok(())
    } else {
        Err(Error::ConfigInvalid(format!("{} is not a dataset directory (no {SCHEMA_FILE})", dir.display())))
    }
}

pub fn prepare(dir: &Path, config: &RunConfig, window: Option<usize>) -> Result<Prepared> {
    check_dataset_dir(dir)?;
    let full = Dataset::<f64>::load(dir)?;
    let windows = config.windows;
    let window = window.unwrap_or(windows);
    let (data, labels) = window_dataset(&full, windows, window)?;
    Ok(Prepared { data, labels, window, windows })
}

fn truth_of(p: &Prepared, rows: &[usize]) -> Vec<u8> {
    rows.iter().map(|&i| p.data.labels.truth[i]).collect()
}

pub fn cmd_generate(ctx: &Context) -> Result<()> {
    let mut config = match &ctx.config_path {
        Some(path) => GenConfig::load(path)?,
        None => GenConfig::default(),
    };
    if let Some(seed) = ctx.seed {
        config.seed = seed;
    }
    let g = generate(&config)?;
    g.write(&ctx.out_dir)?;
    let frauds = g.labels.truth.iter().filter(|&&v| v == 1).count();
    println!(
        "wrote {} transactions ({} fraud, {:.4} rate) to {}",
        g.labels.truth.len(),
        frauds,
        frauds as f64 / g.labels.truth.len() as f64,
        ctx.out_dir.display()
    );
    Ok(())
}

pub fn cmd_inspect_paths(_ctx: &Context, data: &Path) -> Result<()> {
    check_dataset_dir(data)?;
    let schema = HinSchema::load(&data.join(SCHEMA_FILE))?;
    let paths = DatasetPaths::for_schema(data, &schema);
    let hin = load_hin(&paths.schema, &paths.nodes, &paths.edges)?;
    let meta = MetaPaths::<f64>::build(&hin);
    print!("{}", report::paths(&meta.traces(), &meta.pairs, hin.schema()));
    println!("\n# traces: {}, meta-path features: {}", meta.paths.len(), meta.c());
    Ok(())
}

fn load_feature_table(p: &Prepared, path: Option<&Path>) -> Result<Array2<f64>> {
    match path {
        Some(path) => read_features(path, &p.data.hin),
        None => Ok(p.data.features.clone()),
    }
}

pub fn cmd_train(ctx: &Context, config: &RunConfig, data: &Path, window: Option<usize>, features: Option<&Path>) -> Result<()> {
    let p = prepare(data, config, window)?;
    let x = load_feature_table(&p, features)?;
    let x_train = x.select(Axis(0), p.labels.train_indices());
    let model = classify::fit(&config.classifier_spec(ctx.classifier_seed()), x_train.view(), &p.labels.train_labels())?;
    let path = ctx.out("model.json");
    std::fs::create_dir_all(&ctx.out_dir).map_err(|e| Error::Io { path: ctx.out_dir.clone(), source: e })?;
    model.save(&path)?;
    println!("trained {} on {} rows x {} features -> {}", model.spec.kind.name(), x_train.nrows(), x.ncols(), path.display());
    Ok(())
}

pub fn cmd_predict(
    ctx: &Context,
    config: &RunConfig,
    data: &Path,
    window: Option<usize>,
    model_path: &Path,
    features: Option<&Path>,
) -> Result<()> {
    let p = prepare(data, config, window)?;
    let model = TrainedModel::<f64>::load(model_path)?;
    let x = load_feature_table(&p, features)?;
    let test = p.labels.test_indices();
    let proba = model.predict_proba(x.select(Axis(0), test).view())?;
    let labels = threshold_labels(&proba, model.spec.threshold);
    let ids = p.data.hin.node_ids(p.data.hin.schema().target());
    let path = ctx.out("predictions.csv");
    report::write(&path, &report::predictions(ids, test, &proba, &labels))?;
    println!("wrote {} predictions to {}", test.len(), path.display());
    Ok(())
}

pub fn cmd_run(ctx: &Context, config: &RunConfig, data: &Path, window: Option<usize>) -> Result<()> {
    let p = prepare(data, config, window)?;
    let meta = MetaPaths::<f64>::build(&p.data.hin);
    let loop_config = config.loop_config(ctx.classifier_seed());
    let test = p.labels.test_indices().to_vec();
    let n_train = p.labels.train_indices().len();
    let out = run_collective(&meta, p.data.features.view(), p.labels.clone(), &loop_config, Some(&p.data.labels.truth), |_, _| {})?;
    let header = [
        ("classifier", loop_config.classifier.kind.name().to_string()),
        ("root_seed", ctx.root_seed().to_string()),
        ("window", format!("W{} of {}", p.window, p.windows)),
        ("train_transactions", n_train.to_string()),
        ("test_transactions", test.len().to_string()),
        ("meta_path_features", meta.c().to_string()),
        ("label_mode", format!("{:?}", loop_config.features.label_mode).to_lowercase()),
        ("self_exclusion", loop_config.features.self_exclusion.to_string()),
        ("feature_labels", "shared: train truth plus current test predictions for every row".to_string()),
        ("max_iterations", loop_config.max_iterations.to_string()),
        ("early_stop_fraction", loop_config.early_stop_fraction.to_string()),
    ];
    let text = report::run_report(&header, &out.history);
    report::write(&ctx.out("report.txt"), &text)?;
    let ids = p.data.hin.node_ids(p.data.hin.schema().target());
    let last = out.history.last();
    report::write(
        &ctx.out("predictions.csv"),
        &report::predictions(ids, &test, &last.test_probabilities, &last.test_predictions),
    )?;
    report::write(&ctx.out("timings.csv"), &report::timings(&out.timings))?;
    print!("{text}");
    Ok(())
}

fn read_predictions(path: &Path, p: &Prepared) -> Result<HashMap<usize, u8>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    let mut reader = csv::Reader::from_reader(file);
    let target = p.data.hin.schema().target();
    let mut out = HashMap::new();
    for (line, rec) in reader.records().enumerate() {
        let parse = |msg: String| Error::Parse { path: path.into(), line: line + 2, msg };
        let rec = rec.map_err(|e| parse(e.to_string()))?;
        let id = rec.get(0).ok_or_else(|| parse("missing transaction id".into()))?;
        let label: u8 = rec
            .get(2)
            .ok_or_else(|| parse("missing label".into()))?
            .trim()
            .parse()
            .map_err(|_| parse("label is not 0/1".into()))?;
        if label > 1 {
            return Err(parse("label is not 0/1".into()));
        }
        let pos = p
            .data
            .hin
            .node_position(target, id.trim())
            .ok_or_else(|| Error::UnknownNodeId { link: "predictions".into(), id: id.into() })?;
        out.insert(pos, label);
    }
    Ok(out)
}

pub fn cmd_evaluate(ctx: &Context, config: &RunConfig, data: &Path, window: Option<usize>, predictions: Option<&Path>) -> Result<()> {
    if let Some(path) = predictions {
        let p = prepare(data, config, window)?;
        let preds = read_predictions(path, &p)?;
        let mut rows: Vec<usize> = preds.keys().copied().collect();
        rows.sort_unstable();
        let pred: Vec<u8> = rows.iter().map(|i| preds[i]).collect();
        let m = metrics(&truth_of(&p, &rows), &pred)?;
        let text = report::metrics_table(&m);
        report::write(&ctx.out("metrics.csv"), &text)?;
        print!("{text}");
        return Ok(());
    }
    let loop_config = config.loop_config(ctx.classifier_seed());
    let mut rows = Vec::new();
    let mut significance = Vec::new();
    for w in 1..=config.windows {
        let p = prepare(data, config, Some(w))?;
        let meta = MetaPaths::<f64>::build(&p.data.hin);
        let test = p.labels.test_indices().to_vec();
        let n_train = p.labels.train_indices().len();
        let out = run_collective(&meta, p.data.features.view(), p.labels.clone(), &loop_config, Some(&p.data.labels.truth), |_, _| {})?;
        let baseline = out.history.baseline().metrics.expect("truth supplied");
        let last = out.history.last().metrics.expect("truth supplied");
        info!("W{w}: recall {:.4} -> {:.4}", baseline.recall, last.recall);
        rows.push(WindowRow { window: w, n_train, n_test: test.len(), baseline, last, iterations: out.history.iterations.len() - 1 });
        if w == config.windows {
            let sample = sample_rows(&test, config.sample_size, split_seed(ctx.root_seed(), SAMPLING_STREAM));
            let names: Vec<String> = meta.pairs.iter().map(|p| p.semantics.clone()).collect();
            significance = significance_report(out.meta_features.view(), &names, &p.data.labels.truth, &sample, config.alpha)?;
        }
    }
    let windows = report::windows(&rows);
    report::write(&ctx.out("windows.csv"), &windows)?;
    report::write(&ctx.out("significance.csv"), &report::significance(&significance))?;
    print!("{windows}");
    let flagged = significance.iter().filter(|r| r.significant).count();
    println!("# significance (two-sided Welch, alpha {}): {flagged} of {} columns flagged", config.alpha, significance.len());
    Ok(())
}

/// Train truth with test entries from `predictions` or, failing that, the
/// baseline classifier.
fn initial_labels(ctx: &Context, config: &RunConfig, p: &Prepared, predictions: Option<&Path>) -> Result<LabelState<f64>> {
    let mut labels = p.labels.clone();
    let test = labels.test_indices().to_vec();
    let pred = match predictions {
        Some(path) => {
            let map = read_predictions(path, p)?;
            test.iter()
                .map(|i| map.get(i).copied().ok_or_else(|| Error::ConfigInvalid(format!("no prediction for test row {i}"))))
                .collect::<Result<Vec<u8>>>()?
        }
        None => run_baseline(p.data.features.view(), &labels, &config.classifier_spec(ctx.classifier_seed()))?.1,
    };
    let proba: Vec<f64> = pred.iter().map(|&v| v as f64).collect();
    labels.set_test_predictions(&pred, &proba)?;
    Ok(labels)
}

pub fn cmd_dump_features(ctx: &Context, config: &RunConfig, data: &Path, window: Option<usize>, predictions: Option<&Path>) -> Result<()> {
    let p = prepare(data, config, window)?;
    let labels = initial_labels(ctx, config, &p, predictions)?;
    let meta = MetaPaths::<f64>::build(&p.data.hin);
    let z = compute_all_features(&meta, &labels.snapshot(config.label_mode), labels.train_prior(), config.self_exclusion)?;
    let ids = p.data.hin.node_ids(p.data.hin.schema().target());
    let path = ctx.out("features.csv");
    write_matrix(&path, "txn_id", ids, &[("x", &p.data.features), ("z", &z)])?;
    report::write(&ctx.out("provenance.csv"), &report::provenance(&meta.pairs, &meta.traces(), p.data.hin.schema()))?;
    println!("wrote {} rows x ({} + {}) columns to {}", ids.len(), p.data.features.ncols(), z.ncols(), path.display());
    Ok(())
}

pub struct BenchOptions {
    pub pairs: Vec<usize>,
    pub modes: Vec<BenchMode>,
    pub parallel: bool,
    pub dense_work_cap: Option<usize>,
}

pub fn cmd_bench(ctx: &Context, config: &RunConfig, data: &Path, window: Option<usize>, opts: &BenchOptions) -> Result<()> {
    let p = prepare(data, config, window)?;
    let meta = MetaPaths::<f64>::build(&p.data.hin);
    let y = p.labels.snapshot(config.label_mode);
    let fallback = p.labels.train_prior();
    let pairs: Vec<usize> = if opts.pairs.is_empty() { (0..meta.c()).collect() } else { opts.pairs.clone() };
    let cap = opts.dense_work_cap.unwrap_or(DEFAULT_DENSE_WORK_CAP);
    let body = || -> Result<Vec<hinfraud::bench::BenchRow>> {
        let mut rows = Vec::new();
        for &pair in &pairs {
            for &mode in &opts.modes {
                match benchmark_pair(&meta, pair, mode, &y, fallback, config.self_exclusion, cap) {
                    Ok(row) => rows.push(row),
                    Err(Error::OracleCapExceeded { size, cap }) => {
                        warn!("pair {pair}: dense mode needs {size} products, above the cap of {cap}; skipped")
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(rows)
    };
    let rows = if opts.parallel {
        body()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?
            .install(body)?
    };
    let text = report::bench(&rows);
    report::write(&ctx.out("bench.csv"), &text)?;
    print!("{text}");
    Ok(())
}
