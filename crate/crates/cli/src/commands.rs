use std::fmt::Write as _;
use std::path::Path;

use auditml_core::eval::{compare_models, cross_validate, figure_aggregates, record_correlations, ConfusionMatrix};
use auditml_core::record::write_records;
use auditml_core::synthgen::{generate_with_signal, validate_generation};
use auditml_core::TrainedModel;
use serde::Serialize;

use crate::config::{load_config, DataSource, PipelineConfig};
use crate::modelfile::{load_model, ModelFile};
use crate::pipeline::{all_specs, importance, load_records, model_spec, prepare, svm_grid};
use crate::report::{self, FileRef, Outputs};
use crate::{Cli, CliError, Command, ModelArg};

fn resolve_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    let input = match &cli.command {
        Command::Gen => None,
        Command::Prep { input }
        | Command::Train { input, .. }
        | Command::Predict { input, .. }
        | Command::Cv { input, .. }
        | Command::Compare { input }
        | Command::Importance { input, .. }
        | Command::Corr { input }
        | Command::Figures { input } => input.as_ref(),
    };
    if let Some(p) = input {
        cfg.data = DataSource::Csv(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Subcommand and its options as recorded in the manifest.
fn command_line(cmd: &Command) -> Vec<String> {
    let mut v: Vec<String> = Vec::new();
    let mut push = |s: &str| v.push(s.to_string());
    match cmd {
        Command::Gen => push("gen"),
        Command::Prep { .. } => push("prep"),
        Command::Train { model, .. } => {
            push("train");
            push("--model");
            push(model.tag());
        }
        Command::Predict { .. } => push("predict"),
        Command::Cv { model, grid, .. } => {
            push("cv");
            push("--model");
            push(model.tag());
            if *grid {
                push("--grid");
            }
        }
        Command::Compare { .. } => push("compare"),
        Command::Importance { model, .. } => {
            push("importance");
            push("--model");
            push(model.tag());
        }
        Command::Corr { .. } => push("corr"),
        Command::Figures { .. } => push("figures"),
    }
    v
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    let mut out = Outputs::create(&cfg.output_dir)?;
    let line = command_line(&cli.command);
    let inputs = match &cli.command {
        Command::Gen => gen(&cfg, &mut out)?,
        Command::Prep { .. } => prep(&cfg, &mut out)?,
        Command::Train { model, .. } => train(&cfg, *model, &mut out)?,
        Command::Predict { model, .. } => predict(&cfg, model, &mut out)?,
        Command::Cv { model, grid, .. } => return cv(&cfg, *model, *grid, out, &line),
        Command::Compare { .. } => return compare(&cfg, out, &line),
        Command::Importance { model, .. } => importance_cmd(&cfg, *model, &mut out)?,
        Command::Corr { .. } => corr(&cfg, &mut out)?,
        Command::Figures { .. } => figures(&cfg, &mut out)?,
    };
    out.finish(&line, &cfg, inputs)
}

fn gen(cfg: &PipelineConfig, out: &mut Outputs) -> Result<Vec<FileRef>, CliError> {
    let DataSource::Generate(g) = &cfg.data else {
        return Err(CliError::Config("gen needs a generator data source, but data.path is set".into()));
    };
    let generated = generate_with_signal(g, cfg.seed)?;
    out.write("data.csv", &write_records(&generated.records))?;
    let validation = validate_generation(&generated.records, g);
    let mut text = format!("records {}\n", validation.n);
    if let Some(r) = validation.positive_rate {
        let _ = writeln!(text, "positive rate {r:.4}");
    }
    text.push_str("pair target achieved pass\n");
    for p in &validation.pairs {
        let achieved = p.achieved.map(|a| format!("{a:.4}")).unwrap_or_else(|| "undefined".into());
        let _ = writeln!(text, "({}, {}) {:.4} {achieved} {}", p.a, p.b, p.target, p.pass);
    }
    if validation.low_n {
        text.push_str("note: fewer than 1000 records, correlation checks are advisory\n");
    } else if !validation.all_pass() {
        eprintln!("warning: generated correlations miss their targets, see generation.txt");
    }
    out.write("generation.txt", &text)?;
    #[derive(Serialize)]
    struct GenReport<'a> {
        validation: &'a auditml_core::synthgen::ValidationReport,
        calibration: &'a auditml_core::synthgen::Calibration,
    }
    out.json(
        "generation.json",
        &GenReport {
            validation: &validation,
            calibration: &generated.calibration,
        },
    )?;
    Ok(Vec::new())
}

fn prep(cfg: &PipelineConfig, out: &mut Outputs) -> Result<Vec<FileRef>, CliError> {
    let (records, inputs) = load_records(cfg)?;
    let (pre, prepared) = prepare(cfg, &records)?;
    let data = &prepared.dataset;
    out.write("prepared.csv", &report::dataset_csv(data, &prepared.years))?;
    out.write("prep.txt", &report::prep_text(&prepared.report, data))?;
    out.json("preprocessor.json", &pre)?;
    Ok(inputs)
}

fn train(cfg: &PipelineConfig, which: ModelArg, out: &mut Outputs) -> Result<Vec<FileRef>, CliError> {
    let (records, inputs) = load_records(cfg)?;
    let (pre, prepared) = prepare(cfg, &records)?;
    let data = &prepared.dataset;
    let model = TrainedModel::fit(&model_spec(cfg, which), data, cfg.seed)?;
    if !model.converged() {
        return Err(CliError::Convergence(format!("{} solver hit its pass limit", model.spec.name)));
    }
    let confusion = ConfusionMatrix::from_predictions(&model.predict_labels(data)?, data.labels())?;
    let file = ModelFile {
        model,
        preprocessor: pre,
        label: cfg.label.clone(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
    };
    out.write(&format!("model-{}.aml", which.tag()), &file.to_text())?;
    let m = confusion.metrics();
    let [neg, pos] = data.class_counts();
    let text = format!(
        "{} on {} rows ({neg} class 0, {pos} class 1), {} features\n\
         training accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4}\n",
        file.model.spec.name,
        data.n_rows(),
        data.n_features(),
        m.accuracy,
        m.precision,
        m.recall,
        m.f1
    );
    out.write(&format!("train-{}.txt", which.tag()), &text)?;
    out.json(&format!("train-{}.json", which.tag()), &serde_json::json!({
        "model": file.model.spec.name,
        "features": data.feature_names(),
        "class_counts": [neg, pos],
        "training_confusion": confusion,
        "training_metrics": m,
    }))?;
    Ok(inputs)
}

fn predict(cfg: &PipelineConfig, model_path: &Path, out: &mut Outputs) -> Result<Vec<FileRef>, CliError> {
    let file = load_model(model_path)?;
    let model_bytes = std::fs::read(model_path).map_err(|e| CliError::Io(e.to_string()))?;
    let (records, mut inputs) = load_records(cfg)?;
    inputs.push(FileRef::of(&model_path.display().to_string(), &model_bytes));
    let prepared = file.preprocessor.transform_unlabeled(&records)?;
    let data = &prepared.dataset;
    let scored = file.model.predict(data)?;
    let mut csv = String::from("row,group,year,label,score\n");
    for (i, (label, score)) in scored.iter().enumerate() {
        let _ = writeln!(csv, "{i},{},{},{label},{score}", data.group_keys()[i], prepared.years[i]);
    }
    out.write("predictions.csv", &csv)?;
    let positive = scored.iter().filter(|p| p.0 == 1).count();
    out.write(
        "predictions.txt",
        &format!(
            "{} scored {} rows: {positive} predicted {}, {} not\n",
            file.model.spec.name,
            scored.len(),
            file.label.positive_class_name,
            scored.len() - positive
        ),
    )?;
    Ok(inputs)
}

fn cv(cfg: &PipelineConfig, which: ModelArg, grid: bool, mut out: Outputs, line: &[String]) -> Result<(), CliError> {
    let (records, inputs) = load_records(cfg)?;
    let (_, prepared) = prepare(cfg, &records)?;
    let data = &prepared.dataset;
    let converged = if grid {
        if which != ModelArg::Svm {
            return Err(CliError::Usage("--grid is only available for --model svm".into()));
        }
        let (points, best) = svm_grid(cfg, data)?;
        out.write("cv-svm-grid.csv", &report::grid_csv(&points))?;
        out.write("cv-svm-grid.txt", &report::grid_text(&points, best))?;
        out.write("cv-svm-grid-folds.csv", &report::folds_csv(&points.iter().map(|p| &p.report).collect::<Vec<_>>()))?;
        out.json("cv-svm-grid.json", &serde_json::json!({ "points": points, "best": best }))?;
        points.iter().all(|p| p.report.all_converged())
    } else {
        let r = cross_validate(&model_spec(cfg, which), data, cfg.k_folds, cfg.seed)?;
        let tag = which.tag();
        out.write(&format!("cv-{tag}.csv"), &report::folds_csv(&[&r]))?;
        out.write(&format!("cv-{tag}.txt"), &format!("{}{}", report::metrics_note(&cfg.label), report::cv_text(&r)))?;
        out.json(&format!("cv-{tag}.json"), &r)?;
        r.all_converged()
    };
    out.finish(line, cfg, inputs)?;
    if converged {
        Ok(())
    } else {
        Err(CliError::Convergence("solver hit its pass limit on some folds; reports were written".into()))
    }
}

fn compare(cfg: &PipelineConfig, mut out: Outputs, line: &[String]) -> Result<(), CliError> {
    let (records, inputs) = load_records(cfg)?;
    let (_, prepared) = prepare(cfg, &records)?;
    let table = compare_models(&all_specs(cfg), &prepared.dataset, cfg.k_folds, cfg.seed)?;
    out.write("comparison.csv", &report::comparison_csv(&table))?;
    out.write(
        "comparison.txt",
        &format!("{}{}", report::metrics_note(&cfg.label), table.render()),
    )?;
    out.write("comparison-folds.csv", &report::folds_csv(&table.rows.iter().collect::<Vec<_>>()))?;
    out.json("comparison.json", &table)?;
    out.finish(line, cfg, inputs)?;
    if table.rows.iter().all(|r| r.all_converged()) {
        Ok(())
    } else {
        Err(CliError::Convergence("solver hit its pass limit on some folds; reports were written".into()))
    }
}

fn importance_cmd(cfg: &PipelineConfig, which: ModelArg, out: &mut Outputs) -> Result<Vec<FileRef>, CliError> {
    let (records, inputs) = load_records(cfg)?;
    let (_, prepared) = prepare(cfg, &records)?;
    let r = importance(cfg, &prepared.dataset, which)?;
    let tag = which.tag();
    out.write(&format!("importance-{tag}.csv"), &report::importance_csv(&r))?;
    out.write(&format!("importance-{tag}.txt"), &report::importance_text(&r))?;
    out.json(&format!("importance-{tag}.json"), &r)?;
    Ok(inputs)
}

fn corr(cfg: &PipelineConfig, out: &mut Outputs) -> Result<Vec<FileRef>, CliError> {
    let (records, inputs) = load_records(cfg)?;
    let m = record_correlations(&records);
    out.write("corr.csv", &report::corr_csv(&m))?;
    out.write("corr.txt", &report::corr_text(&m))?;
    out.json("corr.json", &m)?;
    Ok(inputs)
}

fn figures(cfg: &PipelineConfig, out: &mut Outputs) -> Result<Vec<FileRef>, CliError> {
    let (records, inputs) = load_records(cfg)?;
    let f = figure_aggregates(&records);
    out.write("figure1.csv", &report::figure1_csv(&f))?;
    out.write("figure2.csv", &report::figure2_csv(&f))?;
    out.write("figures.txt", &report::figures_text(&f))?;
    out.json("figures.json", &f)?;
    Ok(inputs)
}
