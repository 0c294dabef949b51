use std::io::Write;
use std::path::Path;

use pseudosum_core::annotator::{ApiSet, RuleLabeler};
use pseudosum_core::corpus::{build_csl, build_evas_pairs, filter_corpus, EvasConfig, StripError, Stripper};
use pseudosum_core::evalkit::Polarity;
use pseudosum_core::MetricParams;
use serde::Serialize;

use crate::commands::{load_corpus, write_records};
use crate::config::read_input;
use crate::{runtime, usage, CliError, DatasetCommand};

#[derive(Serialize)]
struct RejectLine<'a> {
    id: &'a str,
    reason: &'static str,
    detail: String,
}

fn load_apis(path: Option<&Path>) -> Result<ApiSet, CliError> {
    Ok(match path {
        Some(p) => ApiSet::parse(&read_input(p)?),
        None => ApiSet::default(),
    })
}

fn say(out: &mut dyn Write, msg: String) -> Result<(), CliError> {
    writeln!(out, "{msg}").map_err(runtime)
}

pub(crate) fn run(cmd: DatasetCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        DatasetCommand::Filter { input, out: dest, rejects } => {
            let outcome = filter_corpus(load_corpus(&input)?);
            write_records(&dest, &outcome.kept)?;
            if let Some(path) = rejects {
                let lines = outcome.rejected.iter().map(|r| RejectLine {
                    id: r.record.id.as_str(),
                    reason: r.reason.name(),
                    detail: r.reason.to_string(),
                });
                write_records(&path, lines)?;
            }
            for r in &outcome.rejected {
                log::info!("rejected `{}`: {} ({})", r.record.id, r.reason.name(), r.reason);
            }
            say(out, format!("kept {}, rejected {}", outcome.kept.len(), outcome.rejected.len()))
        }
        DatasetCommand::Strip { input, out: dest, level, seed, apis } => {
            let records = load_corpus(&input)?;
            let apis = load_apis(apis.as_deref())?;
            let stripper = Stripper::new(seed, &apis, &records);
            let mut stripped = Vec::with_capacity(records.len());
            for r in &records {
                match stripper.strip(r, level) {
                    Ok(s) => stripped.push(s),
                    Err(StripError::NoOpLevel) => {
                        return Err(usage(anyhow::anyhow!("--level must be demi or all")))
                    }
                    Err(e) => log::warn!("skipped: {e}"),
                }
            }
            write_records(&dest, &stripped)?;
            say(out, format!("stripped {} of {} function(s)", stripped.len(), records.len()))
        }
        DatasetCommand::Csl { input, out: dest, apis } => {
            let records = load_corpus(&input)?;
            let labeler = RuleLabeler::new(load_apis(apis.as_deref())?);
            let (entries, failures) = build_csl(&records, &labeler);
            for (id, e) in &failures {
                log::warn!("skipped `{id}`: {e}");
            }
            write_records(&dest, &entries)?;
            say(out, format!("labeled {} function(s), skipped {}", entries.len(), failures.len()))
        }
        DatasetCommand::Evas { input, out: dest, ratio, total, seed, metrics } => {
            let records = load_corpus(&input)?;
            let params = metrics.apply(MetricParams::default())?;
            let cfg = EvasConfig { ratio, total, seed };
            let pairs = build_evas_pairs(&records, &cfg, &params).map_err(usage)?;
            let pos = pairs.iter().filter(|p| p.polarity == Polarity::Positive).count();
            write_records(&dest, &pairs)?;
            say(out, format!("wrote {} pair(s): {} positive, {} negative", pairs.len(), pos, pairs.len() - pos))
        }
    }
}
