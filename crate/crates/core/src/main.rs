use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ontonav::bundled;
use ontonav::corpus::{CorpusConfig, Format, DEFAULT_PROMOTION_MIN_MEMBERS, DEFAULT_TAU};
use ontonav::engine::{ArticleHit, Engine, EngineConfig, DEFAULT_BASE_URL};
use ontonav::eval::{self, JudgmentSet};
use ontonav::lexicon::{ProposalKind, Resolution, Verdict};
use ontonav::service::{self, Service};
use ontonav::textproc::Language;
use ontonav::Error;

/// Bilingual navigator over the ACM Computing Classification System.
#[derive(Parser, Debug)]
#[command(name = "ontonav", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// State directory. Without it nothing is persisted between runs.
    #[arg(long, global = true, env = "ONTONAV_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Provider config (TOML).
    #[arg(long, global = true, env = "ONTONAV_PROVIDERS")]
    providers: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "table", env = "ONTONAV_FORMAT")]
    format: OutputFormat,
    /// Query language.
    #[arg(long, global = true, default_value = "en", env = "ONTONAV_LANG")]
    lang: Language,
    /// Minimum title/keyword overlap for a standard assignment.
    #[arg(long, global = true, default_value_t = DEFAULT_TAU, env = "ONTONAV_TAU")]
    tau: usize,
    /// Minimum size of an orphan group promoted to a branch.
    #[arg(long, global = true, default_value_t = DEFAULT_PROMOTION_MIN_MEMBERS, env = "ONTONAV_PROMOTION_N")]
    promotion_n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replace the taxonomy with a CCS document and reclassify the corpus.
    Load { file: PathBuf },
    /// Parse a BibTeX or DBLP XML file into the corpus.
    Ingest {
        file: PathBuf,
        /// bibtex or dblp-xml; guessed from the extension when absent.
        #[arg(long = "input-format")]
        input_format: Option<Format>,
        /// Promote orphan groups to new branches afterwards.
        #[arg(long)]
        promote: bool,
    },
    /// Recompute co-occurrence and dual-indexing links.
    Link,
    /// Search the corpus through the node a query resolves to.
    Search {
        query: String,
        #[arg(long, default_value_t = service::DEFAULT_SEARCH_LIMIT)]
        limit: usize,
    },
    /// Resolve a query to taxonomy nodes.
    Resolve {
        query: String,
        /// Print every match, not only the best.
        #[arg(long)]
        all: bool,
    },
    /// Render meta-query URLs for a node, or for explicit terms.
    Metaquery {
        node: Option<String>,
        #[arg(long)]
        provider: Option<String>,
        /// Explicit terms instead of a node's label lemmas.
        #[arg(long, num_args = 1.., conflicts_with = "node")]
        terms: Vec<String>,
    },
    /// Submit a French label proposal for a node.
    Propose {
        node: String,
        text: String,
        #[arg(long, default_value = "specification")]
        kind: ProposalKind,
        #[arg(long)]
        proposer: String,
    },
    /// Cast a committee vote on a proposal.
    Vote {
        id: u64,
        #[arg(long)]
        member: String,
        #[arg(long)]
        verdict: Verdict,
    },
    /// Print the RSS 1.0 feed of pending proposals (JSON: the proposals).
    Feed,
    /// Print the RDF snapshot of the corpus (JSON: the stored articles).
    Snapshot,
    /// Export articles as BibTeX, by key or for a whole branch.
    ExportBibtex {
        keys: Vec<String>,
        #[arg(long, conflicts_with = "keys")]
        node: Option<String>,
    },
    /// Print the taxonomy document.
    ExportTaxonomy,
    /// Promote orphan groups to new branches.
    Promote,
    /// Run the relevance evaluation.
    Eval {
        /// Queries file; the bundled Table I queries when absent.
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Judgments file; empty when absent.
        #[arg(long)]
        judgments: Option<PathBuf>,
        /// Aggregate the bundled measured percentages instead of searching.
        #[arg(long, conflicts_with_all = ["queries", "judgments"])]
        bypass: bool,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080", env = "ONTONAV_LISTEN")]
        listen: SocketAddr,
        /// Public base URL for feed links.
        #[arg(long, env = "ONTONAV_BASE_URL")]
        base_url: Option<String>,
    },
}

impl Command {
    fn mutates(&self) -> bool {
        matches!(
            self,
            Command::Load { .. }
                | Command::Ingest { .. }
                | Command::Link
                | Command::Propose { .. }
                | Command::Vote { .. }
                | Command::Promote
        )
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> ontonav::Result<()> {
    let g = &cli.global;
    let mut config = EngineConfig {
        data_dir: g.data_dir.clone(),
        providers: g.providers.clone(),
        corpus: CorpusConfig {
            tau: g.tau,
            promotion_min_members: g.promotion_n,
        },
        ..EngineConfig::default()
    };
    if let Command::Serve { base_url, listen } = &cli.command {
        config.base_url = base_url.clone().unwrap_or_else(|| format!("http://{listen}"));
    } else {
        config.base_url = DEFAULT_BASE_URL.to_string();
    }
    if cli.command.mutates() && g.data_dir.is_none() {
        eprintln!("warning: no --data-dir given, changes are not persisted");
    }
    let mut engine = Engine::open(config)?;
    let json = g.format == OutputFormat::Json;
    let out = &mut io::stdout().lock();

    match cli.command {
        Command::Load { file } => {
            let summary = engine.load_taxonomy(fs::File::open(&file)?)?;
            for u in &summary.bootstrap.untranslated {
                eprintln!("untranslated {}: {}", u.code, u.reason);
            }
            emit(out, json, &summary, |s| {
                format!(
                    "loaded {} nodes; {} translated, {} adopted, {} untranslated; {} co-occurrence and {} dual links; {} articles reclassified\n",
                    s.nodes,
                    s.bootstrap.translated,
                    s.bootstrap.adopted,
                    s.bootstrap.untranslated.len(),
                    s.links.cooccurrence,
                    s.links.dual_indexing,
                    s.reclassified
                )
            })
        }
        Command::Ingest {
            file,
            input_format,
            promote,
        } => {
            let format = input_format.unwrap_or_else(|| guess_format(&file));
            let bytes = fs::read(&file)?;
            let outcome = engine.ingest(&bytes, format, promote)?;
            for s in &outcome.report.skipped {
                eprintln!("{}:{s}", file.display());
            }
            if outcome.report.ignored > 0 {
                eprintln!("{}: {} other records ignored", file.display(), outcome.report.ignored);
            }
            emit(out, json, &outcome, |o| {
                let mut text = format!(
                    "inserted {}, updated {}, unchanged {}, skipped {}\n",
                    o.stats.inserted,
                    o.stats.updated,
                    o.stats.unchanged,
                    o.report.skipped.len()
                );
                for p in &o.promotions {
                    text.push_str(&format!(
                        "promoted {} \"{}\" ({} articles)\n",
                        p.code,
                        p.label,
                        p.members.len()
                    ));
                }
                text
            })
        }
        Command::Link => {
            let summary = engine.link()?;
            emit(out, json, &summary, |s| {
                format!(
                    "{} co-occurrence links, {} dual-indexing links\n",
                    s.cooccurrence, s.dual_indexing
                )
            })
        }
        Command::Search { query, limit } => {
            let res = engine.search(&query, g.lang, limit.max(1))?;
            emit(out, json, &res, |r| {
                let mut text = String::new();
                match (&r.node, &r.resolution) {
                    (Some(n), _) => text.push_str(&format!("node {} {}\n", n.code, n.label_en)),
                    (None, Resolution::Miss(m)) => text.push_str(&format!("{}\n", m.message)),
                    (None, _) => {}
                }
                text.push_str(&hits_table(&r.hits));
                text
            })
        }
        Command::Resolve { query, all } => {
            let res = engine.resolve(&query, g.lang)?;
            emit(out, json, &res, |r| match r {
                Resolution::Miss(m) => format!("{}\n", m.message),
                Resolution::Found { matches } => {
                    let take = if all { matches.len() } else { 1 };
                    matches
                        .iter()
                        .take(take)
                        .map(|m| {
                            let label = engine
                                .taxonomy()
                                .node(&m.code)
                                .map(|n| n.label_en.as_str())
                                .unwrap_or_default();
                            if all {
                                format!("{} {} ({:.2})\n", m.code, label, m.score)
                            } else {
                                format!("{} {}\n", m.code, label)
                            }
                        })
                        .collect()
                }
            })
        }
        Command::Metaquery { node, provider, terms } => {
            let queries = match (node, provider) {
                (Some(node), None) => engine.node_metaqueries(&node)?,
                (Some(node), Some(p)) => vec![engine.render_metaquery(&p, &engine.node_terms(&node)?)?],
                (None, Some(p)) => vec![engine.render_metaquery(&p, &terms)?],
                (None, None) => return Err(Error::Validation("give a node code, or --provider with --terms".into())),
            };
            emit(out, json, &queries, |qs| {
                qs.iter().map(|q| format!("{:<8} {}\n", q.provider, q.url)).collect()
            })
        }
        Command::Propose {
            node,
            text,
            kind,
            proposer,
        } => {
            let p = engine.propose(&node, &text, kind, &proposer)?;
            emit(out, json, &p, |p| {
                format!("proposal {} on {} ({}): {}\n", p.id, p.node, p.kind, p.proposed_text)
            })
        }
        Command::Vote { id, member, verdict } => {
            let p = engine.vote(id, &member, verdict)?;
            emit(out, json, &p, |p| {
                format!(
                    "proposal {} is {:?} ({} approvals, {} rejections)\n",
                    p.id,
                    p.status,
                    p.approvals(),
                    p.rejections()
                )
                .to_lowercase()
            })
        }
        Command::Feed if json => {
            let pending: Vec<_> = engine.lexicon().pending().collect();
            emit(out, true, &pending, |_| String::new())
        }
        Command::Feed => raw(out, &engine.feed()),
        Command::Snapshot if json => {
            let articles: Vec<_> = engine.corpus().articles().collect();
            emit(out, true, &articles, |_| String::new())
        }
        Command::Snapshot => raw(out, &engine.snapshot()),
        Command::ExportBibtex { keys, node } => {
            let keys = match node {
                Some(code) => engine.corpus().keys_under(&code, engine.taxonomy())?,
                None if keys.is_empty() => return Err(Error::Validation("give article keys or --node".into())),
                None => keys,
            };
            if json {
                let records = keys
                    .iter()
                    .map(|k| engine.corpus().article(k).map(|a| &a.record))
                    .collect::<ontonav::Result<Vec<_>>>()?;
                emit(out, true, &records, |_| String::new())
            } else {
                raw(out, &engine.export_bibtex_keys(&keys)?)
            }
        }
        Command::ExportTaxonomy => raw(out, &engine.taxonomy().to_json()),
        Command::Promote => {
            let promotions = engine.promote()?;
            emit(out, json, &promotions, |ps| {
                if ps.is_empty() {
                    return "no orphan group is large enough\n".to_string();
                }
                ps.iter()
                    .map(|p| {
                        format!(
                            "promoted {} \"{}\" under {} ({} articles)\n",
                            p.code,
                            p.label,
                            p.parent,
                            p.members.len()
                        )
                    })
                    .collect()
            })
        }
        Command::Eval {
            queries,
            judgments,
            bypass,
        } => {
            let report = if bypass {
                eval::bypass_report(&bundled::table_one())
            } else {
                let queries = match queries {
                    Some(path) => eval::queries_from_json(&fs::read_to_string(path)?)?,
                    None => eval::table_one_queries(&bundled::table_one()),
                };
                let judgments = match judgments {
                    Some(path) => JudgmentSet::from_json(&fs::read_to_string(path)?)?,
                    None => JudgmentSet::default(),
                };
                engine.eval(&queries, &judgments)
            };
            emit(out, json, &report, |r| r.to_table())
        }
        Command::Serve { listen, .. } => {
            let service = Arc::new(Service::new(engine));
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("serving on http://{listen}");
            runtime.block_on(service::serve(service, listen))
        }
    }
}

fn guess_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("xml") => Format::DblpXml,
        _ => Format::Bibtex,
    }
}

fn emit<T: Serialize>(
    out: &mut impl Write,
    json: bool,
    value: &T,
    table: impl FnOnce(&T) -> String,
) -> ontonav::Result<()> {
    if json {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)?;
    } else {
        out.write_all(table(value).as_bytes())?;
    }
    Ok(())
}

fn raw(out: &mut impl Write, text: &str) -> ontonav::Result<()> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn hits_table(hits: &[ArticleHit]) -> String {
    if hits.is_empty() {
        return "no articles\n".to_string();
    }
    hits.iter()
        .map(|h| {
            let year = h.year.map(|y| y.to_string()).unwrap_or_default();
            let link = h.link.url().unwrap_or("-");
            format!("{:<24} {:>4} {}  {}\n", h.key, year, h.title, link)
        })
        .collect()
}
