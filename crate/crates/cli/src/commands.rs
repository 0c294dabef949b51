use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Duration;

use anyhow::{anyhow, Context};
use pseudosum_core::annotator::{ApiDocs, ApiSet, RetrievalKb};
use pseudosum_core::corpus::{ingest_corpus, write_jsonl, FunctionRecord};
use pseudosum_core::evalkit::{bleu_bias_probe, evaluate_run, StrucNormalizer};
use pseudosum_core::fcg::{parse_call_graph, resort as resort_graph, GraphFormat};
use pseudosum_core::summarize::{
    graph_from_corpus, run_pipeline, HttpBackend, HttpConfig, MockBackend, PipelineConfig, SummarizerBackend,
    TranscriptEntry,
};
use pseudosum_core::{CallGraph, FunctionId, MetricParams};

use crate::config::{read_input, BackendKind, RunConfig};
use crate::{runtime, usage, CliError, EvaluateArgs};

pub(crate) fn load_graph(path: &Path, format: Option<GraphFormat>) -> Result<CallGraph, CliError> {
    let format = format
        .or_else(|| GraphFormat::from_path(path))
        .ok_or_else(|| usage(anyhow!("cannot tell the format of {}; pass --format", path.display())))?;
    let text = read_input(path)?;
    parse_call_graph(&text, format).with_context(|| format!("{}", path.display())).map_err(usage)
}

/// Loads a JSON-lines corpus, logging per-line diagnostics.
pub(crate) fn load_corpus(path: &Path) -> Result<Vec<FunctionRecord>, CliError> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display())).map_err(usage)?;
    let ingested = ingest_corpus(BufReader::new(file)).map_err(usage)?;
    for d in &ingested.diagnostics {
        log::warn!("{}: {d}", path.display());
    }
    Ok(ingested.records)
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).map_err(runtime)?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display())).map_err(runtime)
}

pub(crate) fn write_records<T: serde::Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_jsonl(items, &mut buf).map_err(runtime)?;
    write_file(path, buf)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(runtime)
}

pub(crate) fn resort(graph: &Path, format: Option<GraphFormat>, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let order = resort_graph(&load_graph(graph, format)?);
    let text = if json {
        serde_json::to_string(&order).map_err(runtime)? + "\n"
    } else {
        order.iter().map(|id| format!("{id}\n")).collect()
    };
    emit(out, &text)
}

fn make_backend(cfg: &RunConfig) -> Result<Box<dyn SummarizerBackend>, CliError> {
    let b = &cfg.backend;
    match b.kind {
        BackendKind::Mock => Ok(Box::new(MockBackend)),
        BackendKind::Http => {
            let (Some(url), Some(model)) = (&b.url, &b.model) else {
                return Err(usage(anyhow!("http backend needs both `url` and `model`")));
            };
            let mut http = HttpConfig::new(url, model);
            http.retries = b.retries;
            http.timeout = Duration::from_secs(b.timeout_secs);
            if let Some(var) = &b.key_env {
                http.api_key = Some(std::env::var(var).map_err(|_| usage(anyhow!("environment variable {var} is not set")))?);
            }
            Ok(Box::new(HttpBackend::new(http).map_err(runtime)?))
        }
    }
}

fn pipeline_config(cfg: &RunConfig) -> Result<PipelineConfig, CliError> {
    let k = &cfg.knowledge;
    let apis = match &k.api_set {
        Some(p) => ApiSet::parse(&read_input(p)?),
        None => ApiSet::default(),
    };
    let docs = match &k.api_docs {
        Some(p) => ApiDocs::from_json(&read_input(p)?).with_context(|| format!("{}", p.display())).map_err(usage)?,
        None => ApiDocs::default(),
    };
    let kb = match &k.retrieval {
        Some(p) => RetrievalKb::from_json(&read_input(p)?).with_context(|| format!("{}", p.display())).map_err(usage)?,
        None => RetrievalKb::default(),
    };
    Ok(PipelineConfig { budget: cfg.backend.budget_words, apis, kb, docs })
}

pub(crate) fn summarize(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let records = load_corpus(&cfg.corpus)?;
    let graph = match &cfg.graph {
        Some(p) => load_graph(p, None)?,
        None => graph_from_corpus(&records).map_err(usage)?,
    };
    let pipeline = pipeline_config(cfg)?;
    let mut backend = make_backend(cfg)?;

    let run = run_pipeline(&records, &graph, &mut *backend, &pipeline).map_err(usage)?;

    let dir = &cfg.output_dir;
    write_records(&dir.join("transcript.jsonl"), &run.transcript)?;
    let summaries = serde_json::to_string_pretty(&run.summaries).map_err(runtime)? + "\n";
    write_file(&dir.join("summaries.json"), summaries)?;
    write_file(&dir.join("config.echo.toml"), cfg.to_toml())?;

    emit(
        out,
        &format!("summarized {} function(s), {} failed; wrote {}\n", run.transcript.len(), run.failed(), dir.display()),
    )
}

/// Generated summaries in file order, from a transcript or a summaries map.
fn load_generated(path: &Path) -> Result<Vec<(FunctionId, String)>, CliError> {
    let text = read_input(path)?;
    let ctx = || format!("{}", path.display());
    if path.extension().is_some_and(|e| e == "jsonl") {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let entry: TranscriptEntry = serde_json::from_str(line)
                .with_context(|| format!("{} line {}", path.display(), i + 1))
                .map_err(usage)?;
            out.push((entry.id, entry.summary));
        }
        Ok(out)
    } else {
        let map: BTreeMap<FunctionId, String> = serde_json::from_str(&text).with_context(ctx).map_err(usage)?;
        Ok(map.into_iter().collect())
    }
}

fn load_references(path: &Path) -> Result<BTreeMap<FunctionId, String>, CliError> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        Ok(load_corpus(path)?.into_iter().filter_map(|r| Some((r.id, r.summary?))).collect())
    } else {
        serde_json::from_str(&read_input(path)?).with_context(|| format!("{}", path.display())).map_err(usage)
    }
}

pub(crate) fn evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.transcript.is_none() && args.bias_probe.is_none() {
        return Err(usage(anyhow!("nothing to do: pass --transcript/--references or --bias-probe")));
    }
    let params = args.metrics.apply(MetricParams::default())?;

    if let Some(n) = args.bias_probe {
        if n == 0 {
            return Err(usage(anyhow!("--bias-probe needs a length of at least 1")));
        }
        let csv = bleu_bias_probe::<f64>(n, params.bleu_max_n).to_csv();
        match &args.probe_out {
            Some(p) => write_file(p, csv)?,
            None => emit(out, &csv)?,
        }
    }

    let (Some(transcript), Some(references)) = (&args.transcript, &args.references) else {
        return Ok(());
    };
    let generated = load_generated(transcript)?;
    let refs = load_references(references)?;
    let report = evaluate_run(generated.iter().map(|(id, s)| (id, s.as_str())), &refs, &params).map_err(usage)?;
    for id in &report.unmatched {
        log::warn!("no reference for `{id}`");
    }

    let mut value = serde_json::to_value(&report).map_err(runtime)?;
    if args.normalize_struc {
        let pairs: Vec<(&str, &str)> = generated
            .iter()
            .filter_map(|(id, s)| refs.get(id).map(|r| (s.as_str(), r.as_str())))
            .collect();
        let norm = StrucNormalizer::fit(pairs.iter().copied(), &params);
        if let Some(rows) = value.get_mut("per_function").and_then(|v| v.as_array_mut()) {
            for (row, (c, r)) in rows.iter_mut().zip(&pairs) {
                row["struc_normalized"] = norm.struc(c, r, &params).into();
            }
        }
    }
    let text = serde_json::to_string_pretty(&value).map_err(runtime)? + "\n";
    match &args.out {
        Some(p) => write_file(p, text),
        None => emit(out, &text),
    }
}
