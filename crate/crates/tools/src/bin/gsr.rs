use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gsr_core::direct::{delta_gap_analysis, gap_inputs, EntityLexicons, DEFAULT_BIN_EDGES, DEFAULT_GAP_EPSILON};
use gsr_core::geometry::{debias_regular, debias_strong, genderedness};
use gsr_core::gsr::{audit, Cutoff};
use gsr_core::stats::{paired_t_test, pearson, spearman, DEFAULT_TRIALS};
use gsr_core::synthetic::{
    build_synthetic_collection, build_toy_collection, run_simulation, simulate_engine, JobTable, ParityLab,
    SimCollection, SimEngineKind, TraitTable, DEFAULT_PARITY_SAMPLES,
};
use gsr_core::text::{query_genderedness, tokenize};
use gsr_core::{
    DefinitionalPairs, DirectionOptions, Document, EmbeddingStore, GenderDirection, GenderedWordSet, PcaCentering,
    Projector, Qrels, RunSet, StopList, Topic, WordGenderedness,
};
use gsr_tools::collection_io::{self, DocFormat};
use gsr_tools::embedding_io::{self, EmbeddingFormat, LoadOptions};
use gsr_tools::experiments::{default_dichotomies, parity_parallel, validate, Dichotomy};
use gsr_tools::pipeline::{self, Corpus, EngineKind, RetrievalOptions, METRIC_NAMES};
use gsr_tools::report::{self, file_digest, text_digest, Header};
use gsr_tools::{direction_for, runfile, tables, Warnings, SIGN_ANCHOR};

#[derive(Parser)]
#[command(name = "gsr", version, about = "Measure gender stereotype reinforcement in ranking systems")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the gender direction and report its statistics.
    Direction(DirectionCmd),
    /// Genderedness of words and queries.
    Score(ScoreCmd),
    /// Rank topics by genderedness and show both extremes.
    QueriesReport(QueriesReportCmd),
    /// Measure a system on a collection against the perfect engine.
    Audit(AuditCmd),
    /// Stereotypical, neutral and counter-stereotypical engines on the toy collection.
    Toy(SimCmd),
    /// The same three engines on the job/trait collection.
    Synthetic(SimCmd),
    /// Sample toy solutions and correlate the slope with the stereotypical share.
    Parity(ParityCmd),
    /// Permutation tests on gendered word lists.
    Validate(ValidateCmd),
    /// Entity-based check of direct stereotypes against the perfect engine.
    Direct(DirectCmd),
    /// Correlate slopes from two sets of audit reports.
    Compare(CompareCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Centering {
    Midpoint,
    Mean,
}

#[derive(Args)]
struct EmbeddingArgs {
    /// word2vec binary or whitespace text vectors, optionally gzipped.
    #[arg(long)]
    embeddings: PathBuf,
    /// Guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<EmbeddingFormat>,
    /// Read only the first N vectors.
    #[arg(long)]
    limit: Option<usize>,
    /// CSV of `female,male` definitional pairs.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Word with positive genderedness.
    #[arg(long, default_value = SIGN_ANCHOR)]
    anchor: String,
    #[arg(long, value_enum, default_value_t = Centering::Midpoint)]
    centering: Centering,
    /// Scale pair differences to unit length before the PCA.
    #[arg(long)]
    normalize_differences: bool,
}

struct Space {
    store: EmbeddingStore,
    direction: GenderDirection,
    header: Header,
}

impl Space {
    fn projector(&self) -> Projector<'_> {
        Projector::new(&self.store, &self.direction)
    }
}

impl EmbeddingArgs {
    fn load(&self) -> Result<Space> {
        let format = self.format.unwrap_or_else(|| EmbeddingFormat::guess(&self.embeddings));
        let store = embedding_io::load(&self.embeddings, format, LoadOptions { limit: self.limit })
            .with_context(|| format!("loading {}", self.embeddings.display()))?;
        log::info!("loaded {} vectors of dimension {}", store.len(), store.dim());
        let (pairs, pairs_tag) = match &self.pairs {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                (tables::parse_pairs(&text)?, text_digest(&text))
            }
            None => (DefinitionalPairs::default(), "bundled".to_string()),
        };
        let options = DirectionOptions {
            centering: match self.centering {
                Centering::Midpoint => PcaCentering::PairMidpoint,
                Centering::Mean => PcaCentering::DifferenceMean,
            },
            normalize_differences: self.normalize_differences,
        };
        let direction = direction_for(&store, &pairs, &self.anchor, options)?;
        let header = Header::new()
            .with("embeddings", self.embeddings.display())
            .with("embeddings_digest", file_digest(&self.embeddings)?)
            .with("vectors", store.len())
            .with("dim", store.dim())
            .with("pairs", pairs_tag)
            .with("anchor", &self.anchor)
            .with("centering", format!("{:?}", options.centering))
            .with("normalize_differences", options.normalize_differences)
            .with("explained_variance", direction.explained_variance_ratio());
        Ok(Space {
            store,
            direction,
            header,
        })
    }
}

#[derive(Args)]
struct StopArgs {
    /// One stop word per line; the bundled English list by default.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl StopArgs {
    fn load(&self) -> Result<(StopList, String)> {
        let stops = match &self.stopwords {
            Some(p) => tables::parse_stop_list(&read(p)?),
            None => StopList::default(),
        };
        let digest = text_digest(&stops.iter().collect::<Vec<_>>().join("\n"));
        Ok((stops, digest))
    }
}

#[derive(Args)]
struct TableArgs {
    /// CSV `group,job,pct_female,pct_male`.
    #[arg(long)]
    jobs: Option<PathBuf>,
    /// CSV `group,adjective` with groups agency and communion.
    #[arg(long)]
    traits: Option<PathBuf>,
}

impl TableArgs {
    fn load(&self) -> Result<(JobTable, TraitTable)> {
        let jobs = match &self.jobs {
            Some(p) => tables::parse_jobs(&read(p)?).with_context(|| format!("in {}", p.display()))?,
            None => JobTable::default(),
        };
        let traits = match &self.traits {
            Some(p) => tables::parse_traits(&read(p)?).with_context(|| format!("in {}", p.display()))?,
            None => TraitTable::default(),
        };
        Ok((jobs, traits))
    }
}

#[derive(Args)]
struct CollectionArgs {
    /// TREC topics; only titles are used.
    #[arg(long)]
    topics: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    /// Document file or directory of files.
    #[arg(long)]
    docs: PathBuf,
    /// Guessed per file when omitted.
    #[arg(long, value_enum)]
    doc_format: Option<DocFormat>,
}

struct LoadedCollection {
    corpus: Corpus,
    documents: Vec<Document>,
    warnings: Warnings,
}

impl CollectionArgs {
    fn load(&self, stops: &StopList) -> Result<LoadedCollection> {
        let topics = collection_io::parse_topics(&collection_io::read_to_string(&self.topics)?)
            .with_context(|| format!("in {}", self.topics.display()))?;
        let mut warnings = Warnings::default();
        let qrels = collection_io::parse_qrels(&collection_io::read_to_string(&self.qrels)?, &mut warnings)
            .with_context(|| format!("in {}", self.qrels.display()))?;
        let documents = collection_io::load_documents(&self.docs, self.doc_format, &mut warnings)
            .with_context(|| format!("in {}", self.docs.display()))?;
        for w in warnings.iter() {
            log::warn!("{}: {}", w.locator, w.message);
        }
        log::info!("{} topics, {} documents", topics.len(), documents.len());
        let corpus = Corpus::new(topics, &documents, qrels, stops);
        Ok(LoadedCollection {
            corpus,
            documents,
            warnings,
        })
    }

    fn describe(&self, header: &mut Header, coll: &LoadedCollection) -> Result<()> {
        header.push("topics_digest", file_digest(&self.topics)?);
        header.push("qrels_digest", file_digest(&self.qrels)?);
        header.push("documents", coll.documents.len());
        header.push("parse_warnings", coll.warnings.len());
        Ok(())
    }
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum)]
    engine: EngineKind,
    /// TREC run file for `--engine runfile`.
    #[arg(long)]
    run: Option<PathBuf>,
    /// Documents retrieved per query.
    #[arg(long, default_value_t = 1000)]
    depth: usize,
}

impl EngineArgs {
    fn read_run(&self) -> Result<Option<RunSet>> {
        match (&self.run, self.engine) {
            (Some(p), EngineKind::Runfile) => {
                let run = runfile::parse_run(&read(p)?).with_context(|| format!("in {}", p.display()))?;
                Ok(Some(run))
            }
            (None, EngineKind::Runfile) => bail!("--engine runfile needs --run"),
            (Some(_), _) => bail!("--run is only used with --engine runfile"),
            (None, _) => Ok(None),
        }
    }

    fn label(&self) -> String {
        self.engine
            .to_possible_value()
            .map_or_else(|| format!("{:?}", self.engine), |v| v.get_name().to_string())
    }

    fn describe(&self, header: &mut Header) -> Result<()> {
        header.push("engine", self.label());
        header.push("depth", self.depth);
        if let Some(p) = &self.run {
            header.push("run_digest", file_digest(p)?);
        }
        Ok(())
    }
}

#[derive(Args)]
struct DirectionCmd {
    #[command(flatten)]
    emb: EmbeddingArgs,
    /// Extra words to score besides the pair members.
    #[arg(long = "word")]
    words: Vec<String>,
}

#[derive(Args)]
struct ScoreCmd {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    stops: StopArgs,
    /// Words or quoted queries, one result row each.
    inputs: Vec<String>,
    /// File with one word or query per line.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct QueriesReportCmd {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    stops: StopArgs,
    #[arg(long)]
    topics: PathBuf,
    /// Queries shown at each extreme.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Full ranking as TSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Debias {
    None,
    Regular,
    Strong,
}

#[derive(Args)]
struct AuditCmd {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    stops: StopArgs,
    #[command(flatten)]
    collection: CollectionArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Debias the vectors the engine ranks with; measurement always uses the
    /// original vectors.
    #[arg(long, value_enum, default_value_t = Debias::None)]
    debias: Debias,
    /// Words left untouched by regular debiasing, one per line.
    #[arg(long)]
    exempt: Option<PathBuf>,
    /// Depth for the Kendall tau comparison with the original ranking.
    #[arg(long, default_value_t = 100)]
    tau_depth: usize,
    /// System name written into the report.
    #[arg(long)]
    name: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimCmd {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    stops: StopArgs,
    #[command(flatten)]
    tables: TableArgs,
    /// Directory for the three slope reports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory to write the collection (topics, docs, qrels, runs) to.
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args)]
struct ParityCmd {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    stops: StopArgs,
    #[command(flatten)]
    tables: TableArgs,
    #[arg(long, default_value_t = DEFAULT_PARITY_SAMPLES)]
    samples: usize,
    /// Scatter CSV of slope against stereotypical share.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateCmd {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    tables: TableArgs,
    /// Monte Carlo trials when exact enumeration is too large.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Swap the two lists of every dichotomy.
    #[arg(long)]
    swap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DirectCmd {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    stops: StopArgs,
    #[command(flatten)]
    collection: CollectionArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, requires = "female_lexicon")]
    male_lexicon: Option<PathBuf>,
    #[arg(long, requires = "male_lexicon")]
    female_lexicon: Option<PathBuf>,
    /// First names added to the male lexicon.
    #[arg(long, requires = "female_names")]
    male_names: Option<PathBuf>,
    #[arg(long, requires = "male_names")]
    female_names: Option<PathBuf>,
    /// Comma-separated, strictly increasing bin edges over g(q).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bins: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_GAP_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareCmd {
    /// Audit reports from the first setting.
    #[arg(long, num_args = 1.., required = true)]
    a: Vec<PathBuf>,
    /// Audit reports from the second setting, matched by system name.
    #[arg(long, num_args = 1.., required = true)]
    b: Vec<PathBuf>,
    /// Compare relative slopes instead of raw ones.
    #[arg(long)]
    relative: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn base_header(command: &str, seed: u64, space: &Space) -> Header {
    let mut h = Header::new().with("command", command).with("seed", seed);
    h.0.extend(space.header.0.iter().cloned());
    h
}

fn fmt_g(g: Option<f64>) -> String {
    g.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

fn direction_cmd(cmd: &DirectionCmd) -> Result<()> {
    let space = cmd.emb.load()?;
    let dir = &space.direction;
    println!("vectors\t{}", space.store.len());
    println!("dim\t{}", space.store.dim());
    println!("pairs_used\t{}", dir.pairs_used().pairs().len());
    for (f, m) in dir.dropped_pairs() {
        println!("pair_dropped\t{f},{m}");
    }
    println!("explained_variance\t{:.4}", dir.explained_variance_ratio());
    println!("word\tg");
    let mut words: Vec<String> = dir.pairs_used().tokens().map(str::to_string).collect();
    words.extend(cmd.words.iter().cloned());
    for w in words {
        println!("{w}\t{}", fmt_g(genderedness(&space.store, dir, &w)));
    }
    Ok(())
}

fn score_cmd(cmd: &ScoreCmd) -> Result<()> {
    let mut inputs = cmd.inputs.clone();
    if let Some(p) = &cmd.file {
        inputs.extend(tables::parse_word_list(&read(p)?));
    }
    ensure!(!inputs.is_empty(), "nothing to score: pass words or --file");
    let space = cmd.emb.load()?;
    let (stops, _) = cmd.stops.load()?;
    let scorer = space.projector();
    println!("input\tg\tterms");
    for input in &inputs {
        let bag = tokenize(input, &stops);
        let terms: Vec<String> = bag.iter().map(|t| format!("{t}:{}", fmt_g(scorer.word(t)))).collect();
        let g = query_genderedness(&bag, &scorer);
        if g.is_none() {
            if bag.is_empty() {
                eprintln!("{input:?}: genderedness undefined, only stop words");
            } else {
                eprintln!("{input:?}: genderedness undefined, no term has a vector");
            }
        }
        let g = g.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"));
        println!("{input}\t{g}\t{}", terms.join(" "));
    }
    Ok(())
}

fn queries_report_cmd(cmd: &QueriesReportCmd, seed: u64) -> Result<()> {
    let space = cmd.emb.load()?;
    let (stops, stops_digest) = cmd.stops.load()?;
    let topics = collection_io::parse_topics(&collection_io::read_to_string(&cmd.topics)?)?;
    let scorer = space.projector();
    let mut rows: Vec<(Topic, f64, String)> = Vec::new();
    for t in topics {
        let bag = tokenize(&t.title, &stops);
        match query_genderedness(&bag, &scorer) {
            Some(g) => {
                let terms: Vec<String> = bag.iter().map(|w| format!("{w}:{}", fmt_g(scorer.word(w)))).collect();
                rows.push((t, g, terms.join(" ")));
            }
            None => log::warn!("topic {}: genderedness undefined", t.id),
        }
    }
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.id.cmp(&b.0.id)));
    let line = |rank: usize, r: &(Topic, f64, String)| format!("{rank}\t{}\t{:.6}\t{}\t{}", r.0.id, r.1, r.0.title, r.2);
    if rows.len() < 2 * cmd.top {
        log::warn!("only {} scorable topics, listing all of them", rows.len());
        println!("rank\tquery_id\tg_q\ttitle\tterms");
        for (i, r) in rows.iter().enumerate() {
            println!("{}", line(i + 1, r));
        }
    } else {
        println!("most female\nrank\tquery_id\tg_q\ttitle\tterms");
        for (i, r) in rows.iter().take(cmd.top).enumerate() {
            println!("{}", line(i + 1, r));
        }
        println!("\nmost male\nrank\tquery_id\tg_q\ttitle\tterms");
        let n = rows.len();
        for (i, r) in rows.iter().rev().take(cmd.top).enumerate() {
            println!("{}", line(n - i, r));
        }
    }
    if let Some(out) = &cmd.out {
        let mut h = base_header("queries-report", seed, &space);
        h.push("stopwords_digest", stops_digest);
        h.push("topics_digest", file_digest(&cmd.topics)?);
        let mut text = h.render();
        text.push_str("rank\tquery_id\tg_q\ttitle\tterms\n");
        for (i, r) in rows.iter().enumerate() {
            text.push_str(&line(i + 1, r));
            text.push('\n');
        }
        write(out, &text)?;
    }
    Ok(())
}

fn audit_cmd(cmd: &AuditCmd, seed: u64) -> Result<()> {
    let space = cmd.emb.load()?;
    let (stops, stops_digest) = cmd.stops.load()?;
    let coll = cmd.collection.load(&stops)?;
    let corpus = &coll.corpus;
    let given_run = cmd.engine.read_run()?;
    let scorer = pipeline::genderedness_table(&space.store, &space.direction, &corpus.vocabulary());
    let engine_store = match cmd.debias {
        Debias::None => None,
        Debias::Regular => {
            let exempt = match &cmd.exempt {
                Some(p) => GenderedWordSet::new(tables::parse_word_list(&read(p)?)),
                None => GenderedWordSet::default_set(),
            };
            Some(debias_regular(&space.store, &space.direction, &exempt)?)
        }
        Debias::Strong => Some(debias_strong(&space.store, &space.direction)?),
    };
    if engine_store.is_some() && !cmd.engine.engine.uses_embeddings() {
        log::warn!("--debias has no effect on the {} engine", cmd.engine.label());
    }
    let opts = RetrievalOptions {
        depth: cmd.engine.depth,
        seed,
        ..RetrievalOptions::default()
    };
    let store = engine_store.as_ref().unwrap_or(&space.store);
    let run = pipeline::retrieve(cmd.engine.engine, corpus, Some(store), given_run.as_ref(), &opts)?;
    let report = audit(&run, &corpus.queries, &corpus.docs, &corpus.qrels, &scorer)?;

    let system = cmd.name.clone().unwrap_or_else(|| match cmd.debias {
        Debias::None => cmd.engine.label(),
        d => format!("{}-{}", cmd.engine.label(), d.to_possible_value().unwrap().get_name()),
    });
    let mut header = base_header("audit", seed, &space);
    header.push("stopwords_digest", stops_digest);
    cmd.collection.describe(&mut header, &coll)?;
    cmd.engine.describe(&mut header)?;
    header.push("debias", cmd.debias.to_possible_value().unwrap().get_name());
    header.push("cutoff", "relevant_count");
    out_dir(&cmd.out)?;
    write(&cmd.out.join("audit.tsv"), &report::audit_tsv(&header, &system, &report))?;
    write(&cmd.out.join("scatter.csv"), &report::scatter_csv(&report.system))?;
    write(&cmd.out.join("run.txt"), &runfile::write_run(&run, &system))?;
    let metrics = pipeline::effectiveness(&run, corpus);
    write(&cmd.out.join("metrics.tsv"), &report::metrics_tsv(&header, &METRIC_NAMES, &metrics))?;
    if !coll.warnings.is_empty() {
        let text: String = coll.warnings.iter().map(|w| format!("{}\t{}\n", w.locator, w.message)).collect();
        write(&cmd.out.join("warnings.tsv"), &text)?;
    }

    println!("system\t{system}");
    println!("queries\t{}", report.system.n);
    println!("dropped\t{}", report.system_dropped.len());
    println!("gsr\t{:.6e}", report.system.slope);
    println!("perfect_gsr\t{:.6e}", report.perfect.slope);
    match report.system.relative_pct {
        Some(r) => println!("relative_pct\t{r:.2}"),
        None => println!("relative_pct\tNA"),
    }
    for (i, name) in METRIC_NAMES.iter().enumerate() {
        let mean = metrics.iter().map(|r| r.1[i]).sum::<f64>() / metrics.len().max(1) as f64;
        println!("{name}\t{mean:.4}");
    }

    if engine_store.is_some() {
        let before = pipeline::retrieve(cmd.engine.engine, corpus, Some(&space.store), given_run.as_ref(), &opts)?;
        debias_effects(cmd, &header, corpus, &scorer, &before, &run, &metrics)?;
    }
    Ok(())
}

/// Rank disruption and effectiveness change caused by debiasing.
fn debias_effects(
    cmd: &AuditCmd,
    header: &Header,
    corpus: &Corpus,
    scorer: &BTreeMap<String, f64>,
    before: &RunSet,
    after: &RunSet,
    metrics_after: &[(String, Vec<f64>)],
) -> Result<()> {
    let rows = pipeline::kendall_rows(before, after, corpus, scorer, cmd.tau_depth);
    let mut text = header.clone().with("tau_depth", cmd.tau_depth).render();
    text.push_str("query_id\tabs_g_q\ttau\n");
    for (q, g, tau) in &rows {
        text.push_str(&format!("{q}\t{g}\t{tau}\n"));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
    match pearson(&x, &y) {
        Ok(c) => {
            text.push_str(&format!("# pearson_r\t{}\n# pearson_p\t{}\n", c.r, c.p));
            println!("tau_vs_abs_gq_r\t{:.4}\tp\t{:.3e}", c.r, c.p);
        }
        Err(e) => {
            text.push_str("# pearson_r\tNA\n");
            log::warn!("Kendall tau correlation undefined: {e}");
        }
    }
    write(&cmd.out.join("kendall.tsv"), &text)?;

    let metrics_before = pipeline::effectiveness(before, corpus);
    let mut text = header.render();
    text.push_str("metric\tmean_before\tmean_after\tt\tp\tsignificant_05\tsignificant_01\n");
    for (i, name) in METRIC_NAMES.iter().enumerate() {
        let a: Vec<f64> = metrics_before.iter().map(|r| r.1[i]).collect();
        let b: Vec<f64> = metrics_after.iter().map(|r| r.1[i]).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
        match paired_t_test(&a, &b) {
            Ok(t) => text.push_str(&format!(
                "{name}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                mean(&a),
                mean(&b),
                t.t,
                t.p,
                t.significant_at_05(),
                t.significant_at_01()
            )),
            Err(e) => {
                log::warn!("{name}: paired t-test undefined: {e}");
                text.push_str(&format!("{name}\t{}\t{}\tNA\tNA\tfalse\tfalse\n", mean(&a), mean(&b)));
            }
        }
    }
    write(&cmd.out.join("ttest.tsv"), &text)
}

/// Exported collections use numeric topic ids, as TREC topic files require.
fn export_collection(
    dir: &Path,
    coll: &SimCollection,
    jobs: &JobTable,
    traits: &TraitTable,
    label: &str,
) -> Result<()> {
    out_dir(dir)?;
    let ids: BTreeMap<&str, String> = coll
        .topics
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), (i + 1).to_string()))
        .collect();
    let topics: Vec<Topic> = coll.topics.iter().map(|t| Topic::new(ids[t.id.as_str()].clone(), t.title.clone())).collect();
    write(&dir.join("topics.txt"), &collection_io::write_topics(&topics))?;
    write(&dir.join("docs.jsonl"), &collection_io::write_jsonl(&coll.documents))?;
    let mut qrels = Qrels::new();
    for t in &coll.topics {
        let prefix = format!("{}_", t.id);
        for d in coll.documents.iter().filter(|d| d.id.starts_with(&prefix)) {
            qrels.insert(&ids[t.id.as_str()], &d.id, 1)?;
        }
    }
    write(&dir.join("qrels.txt"), &collection_io::write_qrels(&qrels))?;
    for kind in SimEngineKind::ALL {
        let run = simulate_engine(kind, coll, jobs, traits)?;
        let renamed: RunSet = run
            .iter()
            .map(|l| {
                let items = l.items().iter().map(|i| (i.doc_id.clone(), i.score)).collect();
                gsr_core::RankedList::from_ordered(ids[l.query_id.as_str()].as_str(), items)
            })
            .collect::<gsr_core::Result<_>>()?;
        let tag = format!("{label}_{}", kind.label());
        write(&dir.join(format!("run_{}.txt", kind.label())), &runfile::write_run(&renamed, &tag))?;
    }
    Ok(())
}

fn sim_cmd(cmd: &SimCmd, seed: u64, toy: bool) -> Result<()> {
    let label = if toy { "toy" } else { "synthetic" };
    let space = cmd.emb.load()?;
    let (stops, stops_digest) = cmd.stops.load()?;
    let (jobs, traits) = cmd.tables.load()?;
    let coll = if toy {
        build_toy_collection(&jobs)
    } else {
        build_synthetic_collection(&jobs, &traits)
    };
    let results = run_simulation(&coll, &jobs, &traits, &space.projector(), &stops)?;
    let mut header = base_header(label, seed, &space);
    header.push("stopwords_digest", stops_digest);
    header.push("jobs_digest", text_digest(&tables::write_jobs(&jobs)));
    if !toy {
        header.push("traits_digest", text_digest(&tables::write_traits(&traits)));
    }
    println!("engine\tgsr\tn");
    for (kind, r) in SimEngineKind::ALL.iter().zip(&results) {
        println!("{}\t{:.6}\t{}", kind.label(), r.slope, r.n);
    }
    if let Some(dir) = &cmd.out {
        out_dir(dir)?;
        for (kind, r) in SimEngineKind::ALL.iter().zip(&results) {
            let system = format!("{label}_{}", kind.label());
            write(&dir.join(format!("{system}.tsv")), &report::slope_tsv(&header, &system, r, &[]))?;
        }
    }
    if let Some(dir) = &cmd.export {
        export_collection(dir, &coll, &jobs, &traits, label)?;
    }
    Ok(())
}

fn parity_cmd(cmd: &ParityCmd, seed: u64) -> Result<()> {
    let space = cmd.emb.load()?;
    let (stops, stops_digest) = cmd.stops.load()?;
    let (jobs, _) = cmd.tables.load()?;
    let lab = ParityLab::with_jobs(&jobs, &space.projector(), &stops)?;
    let outcome = parity_parallel(&lab, cmd.samples, seed)?;
    println!("samples\t{}", outcome.samples.len());
    println!("pearson_r\t{:.4}", outcome.correlation.r);
    println!("pearson_p\t{:.3e}", outcome.correlation.p);
    println!("max_decomposition_error\t{:.3e}", outcome.max_decomposition_error);
    if let Some(out) = &cmd.out {
        let mut h = base_header("parity", seed, &space);
        h.push("stopwords_digest", stops_digest);
        h.push("jobs_digest", text_digest(&tables::write_jobs(&jobs)));
        h.push("samples", cmd.samples);
        h.push("pearson_r", outcome.correlation.r);
        let mut text = h.render();
        text.push_str("gsr,pct_stereotypical\n");
        for s in &outcome.samples {
            text.push_str(&format!("{},{}\n", s.gsr, s.pct_stereotypical));
        }
        write(out, &text)?;
    }
    Ok(())
}

fn validate_cmd(cmd: &ValidateCmd, seed: u64) -> Result<()> {
    let space = cmd.emb.load()?;
    let (jobs, traits) = cmd.tables.load()?;
    let mut dichotomies = default_dichotomies(&jobs, &traits);
    if cmd.swap {
        dichotomies = dichotomies.iter().map(Dichotomy::swapped).collect();
    }
    let results = validate(&space.projector(), &dichotomies, cmd.trials, seed)?;
    let mut text = base_header("validate", seed, &space)
        .with("trials", cmd.trials)
        .with("swap", cmd.swap)
        .render();
    text.push_str("dichotomy\tfemale_list\tfemale_mean\tfemale_n\tmale_list\tmale_mean\tmale_n\tp\texact\tresolution\tat_resolution\n");
    for r in &results {
        let d = &r.dichotomy;
        for w in &r.missing {
            log::warn!("{}: no vector for {w}", d.name);
        }
        let o = &r.outcome;
        let row = format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            d.name,
            d.female_label,
            r.female_mean,
            r.female_scores.len(),
            d.male_label,
            r.male_mean,
            r.male_scores.len(),
            o.p,
            o.exact,
            o.resolution(),
            o.at_resolution()
        );
        text.push_str(&row);
        let p = if o.at_resolution() {
            format!("p < {:.3e} (at resolution)", o.resolution() * 1.0001)
        } else {
            format!("p = {:.3e}", o.p)
        };
        println!(
            "{}: {} {:.4} (n={}) vs {} {:.4} (n={}), {p}{}",
            d.name,
            d.female_label,
            r.female_mean,
            r.female_scores.len(),
            d.male_label,
            r.male_mean,
            r.male_scores.len(),
            if o.exact { ", exact" } else { ", Monte Carlo" }
        );
    }
    if let Some(out) = &cmd.out {
        write(out, &text)?;
    }
    Ok(())
}

fn read_lexicon(path: &Path) -> Result<Vec<String>> {
    Ok(tables::parse_word_list(&read(path)?))
}

fn direct_cmd(cmd: &DirectCmd, seed: u64) -> Result<()> {
    let space = cmd.emb.load()?;
    let (stops, stops_digest) = cmd.stops.load()?;
    let coll = cmd.collection.load(&stops)?;
    let corpus = &coll.corpus;
    let scorer = pipeline::genderedness_table(&space.store, &space.direction, &corpus.vocabulary());
    let mut lex = match (&cmd.male_lexicon, &cmd.female_lexicon) {
        (Some(m), Some(f)) => EntityLexicons::new(read_lexicon(m)?, read_lexicon(f)?)?,
        _ => EntityLexicons::default(),
    };
    if let (Some(m), Some(f)) = (&cmd.male_names, &cmd.female_names) {
        lex = lex.with_names(read_lexicon(m)?, read_lexicon(f)?);
    }
    let given_run = cmd.engine.read_run()?;
    let opts = RetrievalOptions {
        depth: cmd.engine.depth,
        seed,
        ..RetrievalOptions::default()
    };
    let system = pipeline::retrieve(cmd.engine.engine, corpus, Some(&space.store), given_run.as_ref(), &opts)?;
    let perfect = pipeline::retrieve(EngineKind::Perfect, corpus, None, None, &opts)?;
    let common: BTreeSet<&str> = system.query_ids().filter(|q| perfect.get(q).is_some()).collect();
    for q in system.query_ids().chain(perfect.query_ids()).filter(|q| !common.contains(q)) {
        log::warn!("query {q}: missing from the system or the perfect run, skipped");
    }
    let keep = |run: &RunSet| -> RunSet { run.iter().filter(|l| common.contains(l.query_id.as_str())).cloned().collect() };
    let entity_docs = coll
        .documents
        .iter()
        .map(|d| (d.id.clone(), tokenize(&d.text, &StopList::empty())))
        .collect();
    let (inputs, undefined) = gap_inputs(
        &keep(&system),
        &keep(&perfect),
        &corpus.queries,
        &entity_docs,
        &lex,
        &scorer,
        Cutoff::RelevantCount(&corpus.qrels),
    )?;
    for q in &undefined {
        log::warn!("query {q}: genderedness undefined, not binned");
    }
    let edges = cmd.bins.clone().unwrap_or_else(|| DEFAULT_BIN_EDGES.to_vec());
    let table = delta_gap_analysis(&inputs, &edges, cmd.epsilon)?;
    let mut header = base_header("direct", seed, &space);
    header.push("stopwords_digest", stops_digest);
    cmd.collection.describe(&mut header, &coll)?;
    cmd.engine.describe(&mut header)?;
    header.push("epsilon", cmd.epsilon);
    header.push(
        "bins",
        edges.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
    );
    header.push("male_entities", lex.male().len());
    header.push("female_entities", lex.female().len());
    out_dir(&cmd.out)?;
    let bins = report::bins_tsv(&header, &table);
    write(&cmd.out.join("bins.tsv"), &bins)?;
    write(&cmd.out.join("gaps.tsv"), &report::gap_records_tsv(&table))?;
    print!("{}", bins.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect::<String>());
    Ok(())
}

fn compare_cmd(cmd: &CompareCmd) -> Result<()> {
    let load = |paths: &[PathBuf]| -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        for p in paths {
            let s = report::parse_audit_summary(&read(p)?).with_context(|| format!("in {}", p.display()))?;
            let v = if cmd.relative {
                s.relative_pct
                    .with_context(|| format!("{}: no relative slope", p.display()))?
            } else {
                s.slope
            };
            ensure!(out.insert(s.system.clone(), v).is_none(), "system {} appears twice", s.system);
        }
        Ok(out)
    };
    let a = load(&cmd.a)?;
    let b = load(&cmd.b)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    println!("system\ta\tb");
    for (sys, va) in &a {
        match b.get(sys) {
            Some(vb) => {
                println!("{sys}\t{va}\t{vb}");
                x.push(*va);
                y.push(*vb);
            }
            None => log::warn!("system {sys} only in --a"),
        }
    }
    for sys in b.keys().filter(|s| !a.contains_key(*s)) {
        log::warn!("system {sys} only in --b");
    }
    ensure!(x.len() >= 3, "at least 3 systems must appear in both sets, found {}", x.len());
    let rho = spearman(&x, &y)?;
    let r = pearson(&x, &y)?;
    println!("spearman_rho\t{:.4}\tp\t{:.3e}", rho.r, rho.p);
    println!("pearson_r\t{:.4}\tp\t{:.3e}", r.r, r.p);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Direction(c) => direction_cmd(c),
        Command::Score(c) => score_cmd(c),
        Command::QueriesReport(c) => queries_report_cmd(c, seed),
        Command::Audit(c) => audit_cmd(c, seed),
        Command::Toy(c) => sim_cmd(c, seed, true),
        Command::Synthetic(c) => sim_cmd(c, seed, false),
        Command::Parity(c) => parity_cmd(c, seed),
        Command::Validate(c) => validate_cmd(c, seed),
        Command::Direct(c) => direct_cmd(c, seed),
        Command::Compare(c) => compare_cmd(c),
    }
}
