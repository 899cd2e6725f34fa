//! Command-line front end. Machine output goes to files or standard output,
//! progress and diagnostics to standard error.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::codecs::{CodecError, FormatKind};
use crate::editops::{
    generate_negatives, ged_with, select_hard_negative, EditConfig, EditError, EditPlan,
    GedConfig,
};
use crate::graph::LdGraph;
use crate::pipeline::{
    self, bucket_by_complexity, corpus_to_jsonl, emit_dpo_records, emit_sft_records,
    evaluate_predictions, load_corpus, parse_predictions, split_corpus, to_jsonl, CorpusRecord,
    PipelineError, Sample,
};
use crate::retrieval::{Bm25Index, Bm25Params};
use crate::synthgen::{generate_corpus, SynthParams};
use crate::xml::{parse_xml_with, XmlOptions};

pub const SEED_ENV: &str = "LADDER_FORGE_SEED";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Keys accepted in the `--config` TOML file. Flags override them.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<FormatKind>,
    pub tau: Option<f64>,
    pub num_seeds: Option<usize>,
    pub base_seed: Option<u64>,
    pub k: Option<usize>,
    pub k1: Option<f64>,
    pub b: Option<f64>,
    pub sft_fraction: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<FileConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ladder-forge",
    version,
    about = "Ladder Diagram graph codecs, evaluation and training-data preparation"
)]
struct Cli {
    /// TOML file with default values for format, tau, num_seeds, base_seed,
    /// k, k1, b and sft_fraction.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct FormatArg {
    /// Code format: xml, json or metaprogram.
    #[arg(long, value_name = "FORMAT")]
    format: Option<FormatKind>,
}

#[derive(Debug, Args)]
struct EditArgs {
    /// Deletion ratio in [0, 1].
    #[arg(long)]
    tau: Option<f64>,
    /// Number of edited candidates per graph.
    #[arg(long)]
    num_seeds: Option<usize>,
    /// Seed of candidate 0; candidate i uses base_seed + i.
    #[arg(long)]
    base_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct Bm25Args {
    /// BM25 term-frequency saturation.
    #[arg(long)]
    k1: Option<f64>,
    /// BM25 length normalization.
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Debug, Args)]
struct OutputArg {
    /// Output file; standard output when omitted.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert one program between formats.
    Convert {
        #[arg(long, value_name = "FORMAT")]
        from: FormatKind,
        #[arg(long, value_name = "FORMAT")]
        to: FormatKind,
        /// Ignore unknown XML attributes and elements.
        #[arg(long)]
        lenient: bool,
        /// Input file, or - for standard input.
        input: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Check that a program decodes to a valid graph.
    Validate {
        #[command(flatten)]
        format: FormatArg,
        #[arg(long)]
        lenient: bool,
        input: PathBuf,
    },
    /// Score a prediction file against a ground-truth corpus.
    Eval {
        #[arg(long, value_name = "FILE")]
        gt: PathBuf,
        #[arg(long, value_name = "FILE")]
        pred: PathBuf,
        #[command(flatten)]
        format: FormatArg,
        /// Remove surrounding ``` fence lines from predictions.
        #[arg(long)]
        strip_fences: bool,
        /// Also report per-bucket summaries over this many complexity buckets.
        #[arg(long, value_name = "N")]
        buckets: Option<usize>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Write every edited candidate of a program with a provenance record.
    Negatives {
        #[command(flatten)]
        format: FormatArg,
        #[command(flatten)]
        edit: EditArgs,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        input: PathBuf,
    },
    /// Print the hard negative of a program.
    Hardneg {
        #[command(flatten)]
        format: FormatArg,
        #[command(flatten)]
        edit: EditArgs,
        /// Write the pair provenance as JSON to this file.
        #[arg(long, value_name = "FILE")]
        provenance: Option<PathBuf>,
        input: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Build a BM25 index over corpus prompts.
    Index {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[command(flatten)]
        format: FormatArg,
        #[command(flatten)]
        bm25: Bm25Args,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Rank indexed prompts against a query.
    Retrieve {
        #[arg(long, value_name = "FILE")]
        index: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(short, long)]
        k: Option<usize>,
        /// Sample id to leave out of the ranking.
        #[arg(long)]
        exclude: Option<String>,
    },
    /// Emit retrieval-augmented SFT records.
    PrepareSft {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[command(flatten)]
        format: FormatArg,
        #[arg(short, long)]
        k: Option<usize>,
        #[command(flatten)]
        bm25: Bm25Args,
        #[arg(long)]
        lenient: bool,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Emit DPO records with hard negatives; retrieval runs over the pool.
    PrepareDpo {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        /// Retrieval pool, normally the SFT split.
        #[arg(long, value_name = "FILE")]
        pool: PathBuf,
        #[command(flatten)]
        format: FormatArg,
        #[arg(short, long)]
        k: Option<usize>,
        #[command(flatten)]
        bm25: Bm25Args,
        #[command(flatten)]
        edit: EditArgs,
        #[arg(long)]
        lenient: bool,
        /// Write skipped samples with reasons to this file.
        #[arg(long, value_name = "FILE")]
        skipped: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Shuffle a corpus file and split it in two.
    Split {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[arg(long)]
        sft_fraction: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        sft_out: PathBuf,
        #[arg(long, value_name = "FILE")]
        pref_out: PathBuf,
    },
    /// Partition a corpus into complexity buckets.
    Buckets {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[command(flatten)]
        format: FormatArg,
        #[arg(short, long, default_value_t = 5)]
        n: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Generate a synthetic corpus.
    Synth {
        #[arg(short, long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        min_nodes: usize,
        #[arg(long, default_value_t = 24)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0.3)]
        branch_prob: f64,
        #[arg(long, default_value_t = 0.25)]
        fb_prob: f64,
        #[arg(long, default_value_t = 3)]
        max_rungs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        format: FormatArg,
        #[command(flatten)]
        out: OutputArg,
    },
}

/// Settings after merging flags, config file and environment.
struct Resolver {
    file: FileConfig,
}

impl Resolver {
    fn format(&self, arg: &FormatArg) -> CliResult<FormatKind> {
        arg.format.or(self.file.format).ok_or_else(|| {
            CliError::Usage("no format given: pass --format or set `format` in the config".into())
        })
    }

    fn k(&self, arg: Option<usize>) -> usize {
        arg.or(self.file.k).unwrap_or(1)
    }

    fn bm25(&self, arg: &Bm25Args) -> Bm25Params {
        let d = Bm25Params::default();
        Bm25Params {
            k1: arg.k1.or(self.file.k1).unwrap_or(d.k1),
            b: arg.b.or(self.file.b).unwrap_or(d.b),
        }
    }

    fn edit(&self, arg: &EditArgs) -> CliResult<EditConfig> {
        let d = EditConfig::default();
        let base_seed = match arg.base_seed.or(self.file.base_seed) {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v.trim().parse().map_err(|_| {
                    CliError::Usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))
                })?,
                Err(_) => d.base_seed,
            },
        };
        let cfg = EditConfig {
            tau: arg.tau.or(self.file.tau).unwrap_or(d.tau),
            num_seeds: arg.num_seeds.or(self.file.num_seeds).unwrap_or(d.num_seeds),
            base_seed,
        };
        cfg.check().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Data(format!("standard input: {e}")))?;
        Ok(s)
    } else {
        pipeline::read_text(path).map_err(|e| CliError::Data(e.to_string()))
    }
}

fn write_output(out: &OutputArg, text: &str) -> CliResult<()> {
    match &out.output {
        Some(p) => pipeline::write_text(p, text).map_err(|e| CliError::Data(e.to_string())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Data(format!("standard output: {e}")))
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    pipeline::write_text(path, text).map_err(|e| CliError::Data(e.to_string()))
}

fn parse_graph(text: &str, format: FormatKind, lenient: bool) -> CliResult<LdGraph> {
    let g = match format {
        FormatKind::Xml => parse_xml_with(text, XmlOptions { lenient })?,
        f => f.parse(text)?,
    };
    Ok(g)
}

fn load(path: &Path, format: FormatKind, lenient: bool) -> CliResult<Vec<Sample>> {
    let loaded = load_corpus(path, format, lenient)?;
    for s in &loaded.skipped {
        eprintln!("skipped {s}");
    }
    Ok(loaded.samples)
}

fn build_index(samples: &[Sample], params: Bm25Params) -> CliResult<Bm25Index> {
    Bm25Index::build(samples.iter().map(|s| (s.sample_id.clone(), s.prompt())), params)
        .map_err(|e| PipelineError::from(e).into())
}

#[derive(Serialize)]
struct CandidateProvenance<'a> {
    seed_index: usize,
    seed: u64,
    tau: f64,
    plan: &'a EditPlan,
    ged: u64,
    ged_exact: bool,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = Resolver { file };
    match cli.command {
        Command::Convert {
            from,
            to,
            lenient,
            input,
            out,
        } => {
            let g = parse_graph(&read_input(&input)?, from, lenient)?;
            write_output(&out, &to.render(&g)?)
        }
        Command::Validate {
            format,
            lenient,
            input,
        } => {
            let g = parse_graph(&read_input(&input)?, cfg.format(&format)?, lenient)?;
            println!(
                "valid: {} nodes, {} edges, {} rungs",
                g.node_count(),
                g.edge_count(),
                g.rung_starts().len()
            );
            Ok(())
        }
        Command::Eval {
            gt,
            pred,
            format,
            strip_fences,
            buckets,
            out,
        } => {
            let format = cfg.format(&format)?;
            let gt = load(&gt, format, false)?;
            let preds = parse_predictions(&read_input(&pred)?)?;
            let report = evaluate_predictions(&preds, &gt, format, strip_fences, buckets)?;
            let s = &report.summary;
            eprintln!(
                "n={} node_f1={:.1} edge_f1={:.1} node_em={:.1} edge_em={:.1} program_em={:.1} unparseable={} missing={}",
                s.n_samples, s.node_f1, s.edge_f1, s.node_em, s.edge_em, s.program_em,
                report.unparseable, report.missing
            );
            write_output(&out, &report.to_jsonl())
        }
        Command::Negatives {
            format,
            edit,
            out_dir,
            input,
        } => {
            let format = cfg.format(&format)?;
            let edit = cfg.edit(&edit)?;
            let g = parse_graph(&read_input(&input)?, format, false)?;
            let cands = generate_negatives(&g, &edit).map_err(edit_error)?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
            let ged_cfg = GedConfig::default();
            for c in &cands {
                let stem = format!("negative_{:03}", c.seed_index);
                let score = ged_with(&g, &c.graph, &ged_cfg);
                write_file(
                    &out_dir.join(format!("{stem}.meta")),
                    &FormatKind::Metaprogram.render(&c.graph)?,
                )?;
                let prov = CandidateProvenance {
                    seed_index: c.seed_index,
                    seed: c.seed_value,
                    tau: edit.tau,
                    plan: &c.plan,
                    ged: score.cost,
                    ged_exact: score.exact,
                };
                let mut json = serde_json::to_string(&prov).expect("provenance serializes");
                json.push('\n');
                write_file(&out_dir.join(format!("{stem}.provenance.json")), &json)?;
            }
            eprintln!("wrote {} candidates to {}", cands.len(), out_dir.display());
            Ok(())
        }
        Command::Hardneg {
            format,
            edit,
            provenance,
            input,
            out,
        } => {
            let format = cfg.format(&format)?;
            let edit = cfg.edit(&edit)?;
            let g = parse_graph(&read_input(&input)?, format, false)?;
            let usable: Vec<_> = generate_negatives(&g, &edit)
                .map_err(edit_error)?
                .into_iter()
                .filter(|c| format.render(&c.graph).is_ok())
                .collect();
            let pair = select_hard_negative(&g, &usable, edit.tau, &GedConfig::default())
                .map_err(edit_error)?;
            let json = serde_json::to_string(&pair.provenance).expect("provenance serializes");
            match provenance {
                Some(p) => write_file(&p, &format!("{json}\n"))?,
                None => eprintln!("{json}"),
            }
            write_output(&out, &format.render(&pair.rejected)?)
        }
        Command::Index {
            corpus,
            format,
            bm25,
            out,
        } => {
            let samples = load(&corpus, cfg.format(&format)?, false)?;
            let index = build_index(&samples, cfg.bm25(&bm25))?;
            eprintln!("indexed {} prompts", index.doc_count());
            write_output(&out, &index.to_jsonl())
        }
        Command::Retrieve {
            index,
            query,
            k,
            exclude,
        } => {
            let index = Bm25Index::from_jsonl(&read_input(&index)?)
                .map_err(|e| CliError::Data(e.to_string()))?;
            let k = cfg.k(k);
            if k == 0 {
                return Err(CliError::Usage("k must be at least 1".into()));
            }
            let hits = index.top_k(&query, k, exclude.as_deref());
            print!("{}", to_jsonl(&hits));
            Ok(())
        }
        Command::PrepareSft {
            corpus,
            format,
            k,
            bm25,
            lenient,
            out,
        } => {
            let format = cfg.format(&format)?;
            let samples = load(&corpus, format, lenient)?;
            let index = build_index(&samples, cfg.bm25(&bm25))?;
            let records = emit_sft_records(&samples, &index, format, cfg.k(k))?;
            eprintln!("wrote {} SFT records", records.len());
            write_output(&out, &to_jsonl(&records))
        }
        Command::PrepareDpo {
            corpus,
            pool,
            format,
            k,
            bm25,
            edit,
            lenient,
            skipped,
            out,
        } => {
            let format = cfg.format(&format)?;
            let edit = cfg.edit(&edit)?;
            let samples = load(&corpus, format, lenient)?;
            let pool = load(&pool, format, lenient)?;
            let index = build_index(&pool, cfg.bm25(&bm25))?;
            let result = emit_dpo_records(
                &samples,
                &pool,
                &index,
                format,
                cfg.k(k),
                &edit,
                &GedConfig::default(),
            )?;
            eprintln!(
                "wrote {} DPO records, skipped {}",
                result.records.len(),
                result.skipped.len()
            );
            for s in &result.skipped {
                eprintln!("skipped {}: {}", s.sample_id, s.reason);
            }
            if let Some(p) = skipped {
                write_file(&p, &to_jsonl(&result.skipped))?;
            }
            write_output(&out, &to_jsonl(&result.records))
        }
        Command::Split {
            corpus,
            sft_fraction,
            seed,
            sft_out,
            pref_out,
        } => {
            let text = read_input(&corpus)?;
            let mut records = Vec::new();
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CorpusRecord = serde_json::from_str(line)
                    .map_err(|e| CliError::Data(format!("line {}: {e}", i + 1)))?;
                records.push(rec);
            }
            let fraction = sft_fraction.or(cfg.file.sft_fraction).unwrap_or(0.8);
            let (a, b) = split_corpus(&records, fraction, seed.unwrap_or(0))?;
            write_file(&sft_out, &to_jsonl(&a))?;
            write_file(&pref_out, &to_jsonl(&b))?;
            eprintln!("split {} records into {} and {}", records.len(), a.len(), b.len());
            Ok(())
        }
        Command::Buckets {
            corpus,
            format,
            n,
            out,
        } => {
            let samples = load(&corpus, cfg.format(&format)?, false)?;
            let buckets = bucket_by_complexity(&samples, n)?;
            write_output(&out, &to_jsonl(&buckets))
        }
        Command::Synth {
            n,
            min_nodes,
            max_nodes,
            branch_prob,
            fb_prob,
            max_rungs,
            seed,
            format,
            out,
        } => {
            let params = SynthParams {
                n_samples: n,
                min_nodes,
                max_nodes,
                branch_prob,
                fb_prob,
                max_rungs,
                seed,
            };
            let samples = generate_corpus(&params).map_err(|e| CliError::Usage(e.to_string()))?;
            let text = corpus_to_jsonl(&samples, cfg.format(&format)?)?;
            eprintln!("generated {} samples", samples.len());
            write_output(&out, &text)
        }
    }
}

fn edit_error(e: EditError) -> CliError {
    PipelineError::from(e).into()
}

/// Parse `argv` (program name first), run the command and return the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("usage error: {m}"),
                CliError::Data(m) => eprintln!("error: {m}"),
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["ladder-forge", "convert", "--bogus"]), 2);
        assert_eq!(run(["ladder-forge"]), 2);
        assert_eq!(run(["ladder-forge", "--help"]), 0);
    }

    #[test]
    fn config_keys() {
        let c: FileConfig = toml::from_str("format = \"json\"\ntau = 0.2\nk = 3\n").unwrap();
        assert_eq!(c.format, Some(FormatKind::Json));
        assert_eq!(c.tau, Some(0.2));
        assert!(toml::from_str::<FileConfig>("nope = 1").is_err());
    }
}
