use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::manifest::{sha256_file, Manifest, MANIFEST_FILE};
use super::params::{parse_config_text, Params};
use super::{
    AlertOpts, CleanOpts, Cli, CliError, Command, ModelOpts, ResampleOpts, RfeOpts, SplitOpts, EXIT_FAILURE, EXIT_OK,
};
use crate::error::Error;
use crate::featsel::{apply_minmax, fit_minmax, rfe, ForestParams, RfeParams};
use crate::flowdata::{preprocess, CleanConfig, CleanReport, Dataset, FlowReader, LabelMap, Profile};
use crate::monitor::{monitor_file, stage_run, FollowConfig, MonitorConfig, Stage, StageSpec};
use crate::pipeline::{
    confusion_matrix, fit, load_model_file, save_model_file, split, FitOptions, MetricsReport, ModelConfig,
    Prediction, TrainedModel, MODEL_KEYS,
};
use crate::resample::{resample_pipeline, ResampleConfig, SmoteTarget};

type CliResult<T> = Result<T, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn failure_at(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Failure(format!("{}: {e}", path.display()))
}

/// Per-run state: parameter resolution, then inputs, then outputs.
struct Ctx<'a> {
    command: &'static str,
    params: Params,
    seed: u64,
    profile: Profile,
    out_dir: PathBuf,
    config_file: Option<String>,
    effective: BTreeMap<String, String>,
    inputs: Vec<(String, String)>,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    /// Ends parameter resolution: prints warnings, checksums every input
    /// (a missing one fails with its path) and creates the output directory.
    fn begin(&mut self, inputs: &[&str]) -> CliResult<()> {
        let (effective, warnings) = std::mem::take(&mut self.params).finish(self.command);
        self.effective = effective;
        for w in warnings {
            let _ = writeln!(self.err, "warning: {w}");
        }
        for path in self.config_file.iter().map(String::as_str).chain(inputs.iter().copied()) {
            let sum = sha256_file(Path::new(path)).map_err(|e| failure_at(Path::new(path), e))?;
            self.inputs.push((path.to_string(), sum));
        }
        fs::create_dir_all(&self.out_dir).map_err(|e| failure_at(&self.out_dir, e))?;
        Ok(())
    }

    fn output(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_output(&self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
        let path = self.output(name);
        fs::write(&path, contents).map_err(|e| failure_at(&path, e))
    }

    fn say(&mut self, text: impl std::fmt::Display) {
        let _ = write!(self.out, "{text}");
    }

    /// Writes the run manifest and passes the exit status through.
    fn finish(self, code: i32) -> CliResult<i32> {
        let manifest = Manifest {
            command: self.command.to_string(),
            config: self.effective.clone(),
            inputs: self.inputs.clone(),
        };
        self.write_output(MANIFEST_FILE, manifest.to_string())?;
        Ok(code)
    }
}

pub(super) fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let file = match &cli.shared.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| failure_at(Path::new(path), e))?;
            parse_config_text(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let mut params = Params::new(file, cli.shared.config.clone().unwrap_or_default());
    let seed = params.get("seed", cli.shared.seed, 0)?;
    let profile_flag = cli
        .shared
        .profile
        .as_deref()
        .map(str::parse::<Profile>)
        .transpose()
        .map_err(|e| usage(e.to_string()))?;
    let profile = params.get("profile", profile_flag, Profile::Ids2017)?;
    let out_dir = params.get("out_dir", cli.shared.out_dir.clone(), "nids-out".to_string())?;
    let command = match &cli.command {
        Command::Preprocess { .. } => "preprocess",
        Command::SelectFeatures { .. } => "select-features",
        Command::Resample { .. } => "resample",
        Command::Train { .. } => "train",
        Command::Evaluate { .. } => "evaluate",
        Command::Predict { .. } => "predict",
        Command::Monitor { .. } => "monitor",
        Command::StageRun { .. } => "stage-run",
    };
    let mut ctx = Ctx {
        command,
        params,
        seed,
        profile,
        out_dir: PathBuf::from(out_dir),
        config_file: cli.shared.config.clone(),
        effective: BTreeMap::new(),
        inputs: Vec::new(),
        out,
        err,
    };
    match cli.command {
        Command::Preprocess { input, clean } => cmd_preprocess(ctx, input, clean),
        Command::SelectFeatures { data, clean, split, rfe } => cmd_select(ctx, data, clean, split, rfe),
        Command::Resample {
            data,
            features,
            clean,
            split,
            resample,
        } => cmd_resample(ctx, data, features, clean, split, resample),
        Command::Train {
            data,
            out,
            features,
            no_select,
            no_resample,
            clean,
            split,
            rfe,
            resample,
            model,
        } => {
            let data = ctx.params.required("data", data)?;
            let out = ctx.params.optional("out", out)?;
            let features = ctx.params.optional("features", features)?;
            let select = ctx.params.get("select", no_select.then_some(false), true)?;
            let resample_on = ctx.params.get("resample", no_resample.then_some(false), true)?;
            let clean = resolve_clean(&mut ctx, clean)?;
            let train_frac = resolve_split(&mut ctx, split)?;
            let rfe = resolve_rfe(&mut ctx, rfe)?;
            let resample = resolve_resample(&mut ctx, resample)?;
            let model = resolve_model(&mut ctx, model)?;
            let options = FitOptions {
                train_frac,
                split_seed: ctx.seed,
                select: select.then_some(rfe),
                resample: resample_on.then_some(resample),
                model,
            };
            cmd_train(ctx, data, out, features, clean, options)
        }
        Command::Evaluate { model, data } => {
            let model = ctx.params.required("model", model)?;
            let data = ctx.params.required("data", data)?;
            cmd_evaluate(ctx, model, data)
        }
        Command::Predict { model, data } => {
            let model = ctx.params.required("model", model)?;
            let data = ctx.params.required("data", data)?;
            cmd_predict(ctx, model, data)
        }
        Command::Monitor {
            model,
            input,
            stage,
            alert,
            follow,
            poll_ms,
            idle_ms,
        } => {
            let model = ctx.params.required("model", model)?;
            let input = ctx.params.required("input", input)?;
            let stage_flag = stage
                .as_deref()
                .map(str::parse::<Stage>)
                .transpose()
                .map_err(|e| usage(e.to_string()))?;
            let stage = ctx.params.get("stage", stage_flag, Stage::Monitor)?;
            let mut config = resolve_alert(&mut ctx, alert, stage)?;
            let follow = ctx.params.get("follow", follow.then_some(true), false)?;
            let poll = ctx.params.get("poll_ms", poll_ms, 500)?;
            let idle = ctx.params.get("idle_ms", idle_ms, 5000)?;
            if follow {
                config.follow = Some(FollowConfig {
                    poll: Duration::from_millis(poll),
                    idle_timeout: Duration::from_millis(idle),
                });
            }
            cmd_monitor(ctx, model, input, config)
        }
        Command::StageRun {
            model,
            build,
            test,
            deploy,
            monitor,
            alert,
        } => {
            let model = ctx.params.required("model", model)?;
            let mut specs = Vec::new();
            for (stage, flag) in Stage::ALL.into_iter().zip([build, test, deploy, monitor]) {
                if let Some(input) = ctx.params.optional(stage.as_str(), flag)? {
                    specs.push((stage, input));
                }
            }
            if specs.is_empty() {
                return Err(usage("stage-run needs at least one of --build, --test, --deploy, --monitor"));
            }
            let base = resolve_alert(&mut ctx, alert, Stage::Monitor)?;
            cmd_stage_run(ctx, model, specs, base)
        }
    }
}

struct CleanSetup {
    labels: Option<String>,
    config: CleanConfig,
}

fn in_unit(key: &str, v: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(usage(format!("{key} {v} outside [0, 1]")))
    }
}

fn at_least_one(key: &str, v: usize) -> CliResult<usize> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(usage(format!("{key} must be at least 1")))
    }
}

fn resolve_clean(ctx: &mut Ctx, opts: CleanOpts) -> CliResult<CleanSetup> {
    let labels = ctx.params.optional("labels", opts.labels)?;
    if ctx.profile == Profile::Custom && labels.is_none() {
        return Err(usage("--profile custom needs --labels"));
    }
    let zero_threshold = in_unit("zero_threshold", ctx.params.get("zero_threshold", opts.zero_threshold, 0.30)?)?;
    Ok(CleanSetup {
        labels,
        config: CleanConfig {
            zero_threshold,
            ..CleanConfig::default()
        },
    })
}

fn resolve_split(ctx: &mut Ctx, opts: SplitOpts) -> CliResult<f64> {
    let frac = ctx.params.get("train_frac", opts.train_frac, 0.8)?;
    if frac > 0.0 && frac < 1.0 {
        Ok(frac)
    } else {
        Err(usage(format!("train_frac {frac} outside (0, 1)")))
    }
}

fn resolve_rfe(ctx: &mut Ctx, opts: RfeOpts) -> CliResult<RfeParams> {
    let d = RfeParams::default();
    Ok(RfeParams {
        target_k: at_least_one("rfe_k", ctx.params.get("rfe_k", opts.rfe_k, d.target_k)?)?,
        step: at_least_one("rfe_step", ctx.params.get("rfe_step", opts.rfe_step, d.step)?)?,
        forest: ForestParams {
            n_trees: at_least_one("trees", ctx.params.get("trees", opts.trees, d.forest.n_trees)?)?,
            max_depth: ctx.params.get("max_depth", opts.max_depth, d.forest.max_depth)?,
            min_leaf: at_least_one("min_leaf", ctx.params.get("min_leaf", opts.min_leaf, d.forest.min_leaf)?)?,
            features_per_split: None,
            seed: ctx.seed,
        },
    })
}

fn parse_smote_target(text: &str) -> CliResult<SmoteTarget> {
    if text.trim().eq_ignore_ascii_case("auto") {
        return Ok(SmoteTarget::Auto);
    }
    let mut ratios = BTreeMap::new();
    for part in text.split(',') {
        let (class, ratio) = part
            .rsplit_once(':')
            .ok_or_else(|| usage(format!("smote_target entry {part:?} is not Class:ratio")))?;
        let ratio: f64 = ratio
            .trim()
            .parse()
            .map_err(|_| usage(format!("smote_target ratio {ratio:?} is not a number")))?;
        if !(0.0..=1.0).contains(&ratio) {
            return Err(usage(format!("smote_target ratio {ratio} outside [0, 1]")));
        }
        ratios.insert(class.trim().to_string(), ratio);
    }
    Ok(SmoteTarget::Ratios(ratios))
}

fn resolve_resample(ctx: &mut Ctx, opts: ResampleOpts) -> CliResult<ResampleConfig> {
    let d = ResampleConfig::default();
    Ok(ResampleConfig {
        smote_k: at_least_one("smote_k", ctx.params.get("smote_k", opts.smote_k, d.smote_k)?)?,
        enn_k: at_least_one("enn_k", ctx.params.get("enn_k", opts.enn_k, d.enn_k)?)?,
        target: parse_smote_target(&ctx.params.get("smote_target", opts.smote_target, "auto".to_string())?)?,
        seed: ctx.seed,
    })
}

fn resolve_model(ctx: &mut Ctx, opts: ModelOpts) -> CliResult<ModelConfig> {
    let mut config = ModelConfig::default();
    let flags = [
        ("batch_size", opts.batch_size.map(|v| v.to_string())),
        ("conv", opts.conv),
        ("dropout", opts.dropout),
        ("epochs", opts.epochs.map(|v| v.to_string())),
        ("learning_rate", opts.learning_rate.map(|v| v.to_string())),
        ("lstm", opts.lstm),
    ];
    debug_assert!(flags.iter().all(|(k, _)| MODEL_KEYS.contains(k)));
    for (key, flag) in flags {
        let default = config.get(key).expect("model key");
        let value = ctx.params.get(key, flag, default)?;
        config.set(key, &value).map_err(|e| usage(e.to_string()))?;
    }
    config.seed = ctx.seed;
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn resolve_alert(ctx: &mut Ctx, opts: AlertOpts, stage: Stage) -> CliResult<MonitorConfig> {
    let threshold = in_unit("threshold", ctx.params.get("threshold", opts.threshold, 0.5)?)?;
    let anomalous = ctx.params.optional("anomalous", opts.anomalous)?.map(|list| {
        list.split(',')
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect()
    });
    Ok(MonitorConfig {
        stage,
        threshold,
        anomalous,
        follow: None,
    })
}

fn label_map(ctx: &Ctx, labels: Option<&str>) -> CliResult<LabelMap> {
    match labels {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| failure_at(Path::new(path), e))?;
            LabelMap::parse(&text, ctx.profile).map_err(|e| failure_at(Path::new(path), e))
        }
        None => Ok(LabelMap::for_profile(ctx.profile)?),
    }
}

fn load_dataset(path: &str, map: &LabelMap, config: &CleanConfig) -> CliResult<(Dataset, CleanReport)> {
    let file = File::open(path).map_err(|e| failure_at(Path::new(path), e))?;
    preprocess(BufReader::new(file), map, config).map_err(|e| failure_at(Path::new(path), e))
}

fn read_feature_list(path: &str) -> CliResult<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| failure_at(Path::new(path), e))?;
    let names: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();
    if names.is_empty() {
        return Err(failure_at(Path::new(path), "no feature names"));
    }
    Ok(names)
}

fn csv_bytes(data: &Dataset) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    data.write_csv(&mut buf)?;
    Ok(buf)
}

fn cmd_preprocess(mut ctx: Ctx, input: Option<String>, clean: CleanOpts) -> CliResult<i32> {
    let input = ctx.params.required("input", input)?;
    let clean = resolve_clean(&mut ctx, clean)?;
    let mut reads = vec![input.as_str()];
    reads.extend(clean.labels.as_deref());
    ctx.begin(&reads)?;
    let map = label_map(&ctx, clean.labels.as_deref())?;
    let (data, report) = load_dataset(&input, &map, &clean.config)?;
    ctx.write_output("clean.csv", csv_bytes(&data)?)?;
    ctx.write_output("clean_report.txt", report.to_string())?;
    ctx.say(format_args!(
        "{} rows x {} features; dropped {} rows and {} columns\n",
        data.n_rows(),
        data.n_cols(),
        report.rows.len(),
        report.columns.len()
    ));
    ctx.finish(EXIT_OK)
}

fn cmd_select(mut ctx: Ctx, data: Option<String>, clean: CleanOpts, split_opts: SplitOpts, rfe_opts: RfeOpts) -> CliResult<i32> {
    let data = ctx.params.required("data", data)?;
    let clean = resolve_clean(&mut ctx, clean)?;
    let frac = resolve_split(&mut ctx, split_opts)?;
    let params = resolve_rfe(&mut ctx, rfe_opts)?;
    let mut reads = vec![data.as_str()];
    reads.extend(clean.labels.as_deref());
    ctx.begin(&reads)?;
    let map = label_map(&ctx, clean.labels.as_deref())?;
    let (dataset, _) = load_dataset(&data, &map, &clean.config)?;
    let (train, _) = split(&dataset, frac, ctx.seed)?;
    let ranking = rfe(&train, &params)?;
    let mut list = String::new();
    for name in &ranking.selected {
        let _ = writeln!(list, "{name}");
    }
    ctx.write_output("features.txt", list)?;
    ctx.write_output("importance.txt", ranking.importance_report())?;
    ctx.say(ranking.importance_report());
    ctx.finish(EXIT_OK)
}

fn cmd_resample(
    mut ctx: Ctx,
    data: Option<String>,
    features: Option<String>,
    clean: CleanOpts,
    split_opts: SplitOpts,
    opts: ResampleOpts,
) -> CliResult<i32> {
    let data = ctx.params.required("data", data)?;
    let features = ctx.params.optional("features", features)?;
    let clean = resolve_clean(&mut ctx, clean)?;
    let frac = resolve_split(&mut ctx, split_opts)?;
    let config = resolve_resample(&mut ctx, opts)?;
    let mut reads = vec![data.as_str()];
    reads.extend(features.as_deref());
    reads.extend(clean.labels.as_deref());
    ctx.begin(&reads)?;
    let map = label_map(&ctx, clean.labels.as_deref())?;
    let (mut dataset, _) = load_dataset(&data, &map, &clean.config)?;
    if let Some(path) = &features {
        dataset = dataset.select_columns(&read_feature_list(path)?)?;
    }
    let (train, _) = split(&dataset, frac, ctx.seed)?;
    let scaler = fit_minmax(&train)?;
    let mut scaled = apply_minmax(&train, &scaler)?;
    // Scaled codes no longer index the category tables.
    scaled.set_encodings(Vec::new());
    let (out, report) = resample_pipeline(&scaled, &config)?;
    ctx.write_output("resampled.csv", csv_bytes(&out)?)?;
    ctx.write_output("resample_report.txt", report.to_string())?;
    ctx.say(&report);
    ctx.finish(EXIT_OK)
}

fn cmd_train(
    mut ctx: Ctx,
    data: String,
    out: Option<String>,
    features: Option<String>,
    clean: CleanSetup,
    mut options: FitOptions,
) -> CliResult<i32> {
    let model_path = out.map(PathBuf::from).unwrap_or_else(|| ctx.output("model.nidm"));
    let mut reads = vec![data.as_str()];
    reads.extend(features.as_deref());
    reads.extend(clean.labels.as_deref());
    ctx.begin(&reads)?;
    let map = label_map(&ctx, clean.labels.as_deref())?;
    let (mut dataset, _) = load_dataset(&data, &map, &clean.config)?;
    if let Some(path) = &features {
        dataset = dataset.select_columns(&read_feature_list(path)?)?;
        options.select = None;
    }
    let outcome = fit(&dataset, Some(map.source().to_string()), &options)?;
    save_model_file(&outcome.model, &model_path).map_err(|e| failure_at(&model_path, e))?;

    let mut history = String::from("epoch,loss,accuracy\n");
    for (i, e) in outcome.model.history.epochs.iter().enumerate() {
        let _ = writeln!(history, "{},{},{}", i + 1, e.loss, e.accuracy);
    }
    let (_, holdout) = split(&dataset, options.train_frac, options.split_seed)?;
    ctx.write_output("summary.txt", outcome.summary.to_string())?;
    ctx.write_output("history.csv", &history)?;
    ctx.write_output("holdout.csv", csv_bytes(&holdout)?)?;
    if let Some(ranking) = &outcome.ranking {
        ctx.write_output("importance.txt", ranking.importance_report())?;
    }
    if let Some(report) = &outcome.resample {
        ctx.write_output("resample_report.txt", report.to_string())?;
    }
    write_metrics(&ctx, &outcome.metrics)?;

    ctx.say(&outcome.summary);
    if let Some(report) = &outcome.resample {
        ctx.say(format_args!("\n{report}"));
    }
    ctx.say(format_args!("\n{history}\n{}", outcome.metrics));
    ctx.say(format_args!("model written to {}\n", model_path.display()));
    ctx.finish(EXIT_OK)
}

fn write_metrics(ctx: &Ctx, metrics: &MetricsReport) -> CliResult<()> {
    ctx.write_output("metrics.txt", metrics.to_string())?;
    ctx.write_output("metrics.json", metrics.to_json() + "\n")?;
    ctx.write_output("confusion.csv", metrics.confusion_csv())
}

struct Scored {
    line: u64,
    raw_label: String,
    /// Model class index of the label; `None` when the label rules drop it.
    truth: Option<usize>,
    prediction: Prediction,
}

struct ScoredFile {
    rows: Vec<Scored>,
    /// Rows that failed to parse or carry unusable feature values.
    skipped: u64,
}

/// Scores a flow CSV row by row through the model's own record path, with
/// the monitor's skip rules.
fn score_file(model: &TrainedModel, path: &str) -> CliResult<ScoredFile> {
    let at = |e: Error| failure_at(Path::new(path), e);
    let file = File::open(path).map_err(|e| failure_at(Path::new(path), e))?;
    let mut reader = FlowReader::new(BufReader::new(file)).map_err(at)?;
    if let Some(missing) = model.features.iter().find(|f| !reader.header().contains(f)) {
        return Err(at(Error::Schema(format!("input lacks selected feature {missing:?}"))));
    }
    let map = model.label_map()?;
    let mut scored = ScoredFile {
        rows: Vec::new(),
        skipped: 0,
    };
    while let Some(item) = reader.next_record() {
        if reader.failed() {
            return Err(failure_at(Path::new(path), "read failed"));
        }
        let Ok(record) = item else {
            scored.skipped += 1;
            continue;
        };
        let name = match &map {
            Some(map) => map.classify(record.raw_label()).map_err(at)?.map(|i| map.classes()[i].clone()),
            None => Some(record.raw_label().trim().to_string()),
        };
        let truth = name.map(|n| model.class_names.iter().position(|c| *c == n));
        let truth = match truth {
            Some(None) => {
                return Err(at(Error::UnknownLabel(format!(
                    "{} (line {}) is not a model class",
                    record.raw_label(),
                    record.line()
                ))))
            }
            Some(Some(i)) => Some(i),
            None => None,
        };
        let prediction = match model.score_record(&record) {
            Ok(p) => p,
            Err(Error::Row { .. } | Error::UnknownCategory { .. }) => {
                scored.skipped += 1;
                continue;
            }
            Err(e) => return Err(at(e)),
        };
        scored.rows.push(Scored {
            line: record.line(),
            raw_label: record.raw_label().to_string(),
            truth,
            prediction,
        });
    }
    Ok(scored)
}

fn load_model(path: &str) -> CliResult<TrainedModel> {
    load_model_file(Path::new(path)).map_err(|e| failure_at(Path::new(path), e))
}

fn cmd_evaluate(mut ctx: Ctx, model_path: String, data: String) -> CliResult<i32> {
    ctx.begin(&[&model_path, &data])?;
    let model = load_model(&model_path)?;
    let scored = score_file(&model, &data)?;
    let (truth, predicted): (Vec<usize>, Vec<usize>) = scored
        .rows
        .iter()
        .filter_map(|s| s.truth.map(|t| (t, s.prediction.class)))
        .unzip();
    if truth.is_empty() {
        return Err(failure_at(Path::new(&data), "no scorable labelled rows"));
    }
    let confusion = confusion_matrix(model.class_names.len(), &truth, &predicted)?;
    let metrics = MetricsReport::from_confusion(model.class_names.clone(), confusion)?;
    write_metrics(&ctx, &metrics)?;
    ctx.say(&metrics);
    ctx.say(format_args!(
        "scored={} skipped={} dropped={}\n",
        truth.len(),
        scored.skipped,
        scored.rows.len() - truth.len()
    ));
    ctx.finish(EXIT_OK)
}

fn cmd_predict(mut ctx: Ctx, model_path: String, data: String) -> CliResult<i32> {
    ctx.begin(&[&model_path, &data])?;
    let model = load_model(&model_path)?;
    let scored = score_file(&model, &data)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    let csv_fail = |e: csv::Error| CliError::Failure(e.to_string());
    let mut header = vec!["line".to_string(), "label".into(), "class".into(), "confidence".into()];
    header.extend(model.class_names.iter().map(|c| format!("p_{c}")));
    out.write_record(&header).map_err(csv_fail)?;
    for s in &scored.rows {
        let mut row = vec![
            s.line.to_string(),
            s.raw_label.clone(),
            model.class_names[s.prediction.class].clone(),
            s.prediction.confidence.to_string(),
        ];
        row.extend(s.prediction.distribution.iter().map(f64::to_string));
        out.write_record(&row).map_err(csv_fail)?;
    }
    let bytes = out.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
    ctx.write_output("predictions.csv", bytes)?;
    ctx.say(format_args!("predicted={} skipped={}\n", scored.rows.len(), scored.skipped));
    ctx.finish(EXIT_OK)
}

fn cmd_monitor(mut ctx: Ctx, model: String, input: String, config: MonitorConfig) -> CliResult<i32> {
    ctx.begin(&[&model, &input])?;
    let log = ctx.output(&format!("{}.log", config.stage));
    let summary = monitor_file(Path::new(&model), Path::new(&input), &config, &log)
        .map_err(|e| CliError::Failure(format!("{} stage: {e}", config.stage)))?;
    ctx.say(&summary);
    ctx.finish(summary.exit_status())
}

fn cmd_stage_run(mut ctx: Ctx, model: String, specs: Vec<(Stage, String)>, base: MonitorConfig) -> CliResult<i32> {
    let mut reads = vec![model.as_str()];
    reads.extend(specs.iter().map(|(_, p)| p.as_str()));
    ctx.begin(&reads)?;
    let specs: Vec<StageSpec> = specs
        .into_iter()
        .map(|(stage, input)| StageSpec {
            config: MonitorConfig { stage, ..base.clone() },
            input: PathBuf::from(input),
        })
        .collect();
    let report = stage_run(Path::new(&model), &specs, &ctx.out_dir);
    for stage in &report.stages {
        match &stage.result {
            Ok(s) => ctx.say(format_args!(
                "{}: exit {} anomalies={} log={}\n",
                stage.stage,
                s.exit_status(),
                s.anomalies,
                stage.log.display()
            )),
            Err(e) => {
                let _ = writeln!(ctx.err, "error: {} stage: {e}", stage.stage);
            }
        }
    }
    for stage in &report.skipped {
        ctx.say(format_args!("{stage}: skipped\n"));
    }
    let code = report.exit_status();
    if code == EXIT_FAILURE {
        return Ok(code);
    }
    ctx.finish(code)
}
