//! `phylokit` command-line tool. Exit status is 0 on success and 2 on any
//! input error.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use phylokit::codon::{independence_test, segre_residual, CodonCounts};
use phylokit::evolution::simulate_leaf_sequences;
use phylokit::formats::{
    emit_distance_json, emit_fasta, emit_hmm_json, emit_newick, emit_phylip, parse_distance_matrix, parse_fasta,
    parse_hmm_json, parse_m_dissimilarity_json, parse_newick, parse_observations, parse_pair_hmm_json,
    AlignedFasta, FastaRecord, HmmModel,
};
use phylokit::hmm::{baum_welch_train, forward_log_probability, viterbi_explanation};
use phylokit::pairhmm::{
    delannoy_count, enumerate_alignments, pair_probability, parametric_polygon, score_alignment_basic,
    viterbi_alignment, ScoringScheme,
};
use phylokit::pipeline::{
    find_motif, pairwise_site_differences, run_pipeline, PipelineConfig, PipelineInput, DEFAULT_GENOME_LENGTH,
    DEFAULT_MOTIF,
};
use phylokit::treespace::{
    check_four_point, check_m_tree, check_metric, generalized_neighbor_join, gr36_residuals, neighbor_join,
    splits_of_tree, tree_metric, DissimilarityMap, MTreeViolation, MetricViolation,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "phylokit", version, about = "Phylogenomic inference toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distances, neighbor-joining tree, conservation probability and motif search.
    Pipeline(PipelineArgs),
    /// Jukes-Cantor distances from an aligned FASTA file.
    Dist {
        /// Aligned FASTA
        #[arg(long)]
        alignment: PathBuf,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Phylip)]
        format: MatrixFormat,
    },
    /// Neighbor joining.
    #[command(subcommand)]
    Nj(NjCommand),
    /// Pair-HMM alignment.
    #[command(subcommand)]
    Align(AlignCommand),
    /// Hidden Markov models.
    #[command(subcommand)]
    Hmm(HmmCommand),
    /// Codon independence statistics for coding sequences.
    Codon {
        /// FASTA of in-frame coding sequences; all records are pooled
        #[arg(long)]
        fasta: PathBuf,
    },
    /// Tree-metric checks.
    #[command(subcommand)]
    Tree(TreeCommand),
    /// Exact motif occurrences in every record of a FASTA file.
    Motif {
        #[arg(long)]
        fasta: PathBuf,
        #[arg(long, default_value = DEFAULT_MOTIF)]
        motif: String,
    },
    /// Simulate leaf sequences down a Newick tree under Jukes-Cantor.
    Simulate {
        #[arg(long)]
        newick: PathBuf,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Phylip,
    Json,
}

#[derive(Args)]
struct PipelineArgs {
    /// Distance matrix (PHYLIP square or JSON)
    #[arg(long, conflicts_with = "alignment", required_unless_present = "alignment")]
    distances: Option<PathBuf>,
    /// Aligned FASTA of four-fold degenerate sites
    #[arg(long)]
    alignment: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_MOTIF)]
    motif: String,
    #[arg(long, default_value_t = DEFAULT_GENOME_LENGTH)]
    genome_length: f64,
    /// FASTA files searched for the motif
    #[arg(long)]
    context: Vec<PathBuf>,
    /// Write the JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum NjCommand {
    /// Neighbor-joining tree from a distance matrix.
    Build {
        #[arg(long)]
        distances: PathBuf,
        /// Also report joins and clamped branches as JSON
        #[arg(long)]
        json: bool,
    },
    /// Generalized neighbor joining from a 3-dissimilarity map (JSON).
    Generalized {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct SequencePair {
    /// FASTA file whose first two records are aligned
    #[arg(long, conflicts_with = "seqs")]
    fasta: Option<PathBuf>,
    /// The two sequences, given directly
    #[arg(num_args = 2, value_names = ["SEQ1", "SEQ2"])]
    seqs: Vec<String>,
}

impl SequencePair {
    fn load(&self) -> Result<(String, String)> {
        if let Some(path) = &self.fasta {
            let recs = parse_fasta(&read_input(path)?)?;
            if recs.len() < 2 {
                bail!("{} holds {} records; two are needed", path.display(), recs.len());
            }
            return Ok((recs[0].sequence.clone(), recs[1].sequence.clone()));
        }
        match self.seqs.as_slice() {
            [a, b] => Ok((a.to_ascii_uppercase(), b.to_ascii_uppercase())),
            _ => bail!("give two sequences or --fasta"),
        }
    }
}

#[derive(Subcommand)]
enum AlignCommand {
    /// Probability of the pair under a pair HMM.
    Prob {
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        pair: SequencePair,
    },
    /// Most probable alignment under a pair HMM.
    Viterbi {
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        pair: SequencePair,
    },
    /// Best alignment under match +1, mismatch -mis, indel -gap.
    Score {
        #[arg(long)]
        mis: f64,
        #[arg(long)]
        gap: f64,
        #[command(flatten)]
        pair: SequencePair,
    },
    /// Parametric alignment polygon over (#mismatch, #indel).
    Polygon {
        #[command(flatten)]
        pair: SequencePair,
    },
    /// Count and list the alignments of two lengths.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Print only the count
        #[arg(long)]
        count: bool,
    },
}

#[derive(Subcommand)]
enum HmmCommand {
    /// Probability of each observation line.
    Forward {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        obs: PathBuf,
    },
    /// Most probable hidden path of each observation line.
    Viterbi {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        obs: PathBuf,
    },
    /// Baum-Welch training.
    Train {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Stop once the log-likelihood gain falls below this; `-inf` runs every iteration
        #[arg(long, default_value_t = 1e-8, allow_hyphen_values = true)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum TreeCommand {
    /// Metric and four-point checks of a distance matrix.
    Fourpoint {
        #[arg(long)]
        distances: PathBuf,
    },
    /// m-tree check of an m-dissimilarity map (JSON).
    Mtree {
        #[arg(long)]
        input: PathBuf,
    },
    /// Residuals of the five Gr(3,6) relations for a 6-taxon 3-dissimilarity map.
    Gr36 {
        #[arg(long)]
        input: PathBuf,
    },
    /// Splits of a Newick tree.
    Splits {
        #[arg(long)]
        newick: PathBuf,
    },
    /// Path-length metric of a Newick tree.
    Metric {
        #[arg(long)]
        newick: PathBuf,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Phylip)]
        format: MatrixFormat,
    },
}

/// File contents, or standard input for `-`.
fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn emit_matrix(d: &DissimilarityMap, format: MatrixFormat) {
    match format {
        MatrixFormat::Phylip => print!("{}", emit_phylip(d)),
        MatrixFormat::Json => println!("{}", emit_distance_json(d)),
    }
}

fn load_distances(path: &Path) -> Result<DissimilarityMap> {
    parse_distance_matrix(&read_input(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_hmm(model: &Path, obs: &Path) -> Result<(HmmModel, Vec<Vec<usize>>)> {
    let m = parse_hmm_json(&read_input(model)?).with_context(|| format!("in {}", model.display()))?;
    let data = parse_observations(&read_input(obs)?, m.alphabet.as_deref())
        .with_context(|| format!("in {}", obs.display()))?;
    Ok((m, data))
}

fn metric_violation(d: &DissimilarityMap, v: &MetricViolation) -> Value {
    let t = d.taxa();
    match *v {
        MetricViolation::Negative { i, j } => json!({"negative": [t[i], t[j]]}),
        MetricViolation::Triangle { x, y, z } => json!({"triangle": [t[x], t[y], t[z]]}),
    }
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    let input = match (&args.distances, &args.alignment) {
        (Some(d), _) => PipelineInput::Distances(load_distances(d)?),
        (None, Some(a)) => PipelineInput::Alignment(
            AlignedFasta::parse(&read_input(a)?).with_context(|| format!("in {}", a.display()))?,
        ),
        (None, None) => bail!("give --distances or --alignment"),
    };
    let mut config = PipelineConfig::new(input);
    config.motif = args.motif.clone();
    config.genome_length = args.genome_length;
    for path in &args.context {
        config.motif_targets.extend(parse_fasta(&read_input(path)?)?);
    }
    let report = run_pipeline(&config)?;
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(out) = &args.out {
        fs::write(out, format!("{json}\n")).with_context(|| format!("cannot write {}", out.display()))?;
    }
    if args.json {
        println!("{json}");
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn dist(alignment: &Path, format: MatrixFormat) -> Result<()> {
    let a = AlignedFasta::parse(&read_input(alignment)?)?;
    let names: Vec<String> = a.names().iter().map(|s| s.to_string()).collect();
    let n = names.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (sites, diffs) = pairwise_site_differences(&a, &names[i], &names[j])?;
            let v = phylokit::evolution::jc_distance(sites, diffs)
                .with_context(|| format!("pair {} and {}", names[i], names[j]))?;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    emit_matrix(&DissimilarityMap::new(names, d)?, format);
    Ok(())
}

fn nj(cmd: &NjCommand) -> Result<()> {
    match cmd {
        NjCommand::Build { distances, json } => {
            let r = neighbor_join(&load_distances(distances)?)?;
            if *json {
                print_json(&json!({
                    "newick": emit_newick(&r.tree),
                    "clampedBranches": r.clamped,
                    "joins": r.joins,
                }));
            } else {
                println!("{}", emit_newick(&r.tree));
                if r.clamped > 0 {
                    eprintln!("warning: {} negative branch lengths set to 0", r.clamped);
                }
            }
        }
        NjCommand::Generalized { input } => {
            let d = parse_m_dissimilarity_json(&read_input(input)?)?;
            let r = generalized_neighbor_join(&d)?;
            println!("{}", emit_newick(&r.tree));
            if r.clamped > 0 {
                eprintln!("warning: {} negative branch lengths set to 0", r.clamped);
            }
        }
    }
    Ok(())
}

fn align(cmd: &AlignCommand) -> Result<()> {
    let load_params = |p: &Path| parse_pair_hmm_json(&read_input(p)?).with_context(|| format!("in {}", p.display()));
    match cmd {
        AlignCommand::Prob { params, pair } => {
            let (s1, s2) = pair.load()?;
            let p = pair_probability(&load_params(params)?, &s1, &s2)?;
            print_json(&json!({"probability": p, "logProbability": p.ln()}));
        }
        AlignCommand::Viterbi { params, pair } => {
            let (s1, s2) = pair.load()?;
            let r = viterbi_alignment(&load_params(params)?, &s1, &s2)?;
            print_json(&json!({"alignment": r.alignment.to_string(), "logScore": r.score}));
        }
        AlignCommand::Score { mis, gap, pair } => {
            let (s1, s2) = pair.load()?;
            let r = score_alignment_basic(&ScoringScheme::new(*mis, *gap)?, &s1, &s2)?;
            print_json(&json!({"alignment": r.alignment.to_string(), "score": r.score}));
        }
        AlignCommand::Polygon { pair } => {
            let (s1, s2) = pair.load()?;
            print_json(&serde_json::to_value(parametric_polygon(&s1, &s2)?)?);
        }
        AlignCommand::Enumerate { n, m, count } => {
            if *count {
                println!("{}", delannoy_count(*n, *m));
            } else {
                for a in enumerate_alignments(*n, *m)? {
                    println!("{a}");
                }
            }
        }
    }
    Ok(())
}

fn hmm(cmd: &HmmCommand) -> Result<()> {
    match cmd {
        HmmCommand::Forward { model, obs } => {
            let (m, data) = load_hmm(model, obs)?;
            let mut out = Vec::new();
            for sigma in &data {
                let lp = forward_log_probability(&m.params, sigma)?;
                out.push(json!({"probability": lp.exp(), "logProbability": lp}));
            }
            print_json(&Value::Array(out));
        }
        HmmCommand::Viterbi { model, obs } => {
            let (m, data) = load_hmm(model, obs)?;
            let mut out = Vec::new();
            for sigma in &data {
                let e = viterbi_explanation(&m.params, sigma)?;
                out.push(json!({"path": e.labels, "logScore": e.log_score}));
            }
            print_json(&Value::Array(out));
        }
        HmmCommand::Train { model, obs, iters, tol } => {
            let (m, data) = load_hmm(model, obs)?;
            let r = baum_welch_train(&m.params, &data, *iters, *tol)?;
            let trained = HmmModel {
                params: r.params.clone(),
                alphabet: m.alphabet,
            };
            let model: Value = serde_json::from_str(&emit_hmm_json(&trained))?;
            print_json(&json!({
                "model": model,
                "logLikelihoods": r.log_likelihoods,
                "iterations": r.iterations(),
                "converged": r.converged,
            }));
        }
    }
    Ok(())
}

fn codon(fasta: &Path) -> Result<()> {
    let records = parse_fasta(&read_input(fasta)?)?;
    let mut counts = CodonCounts::from_table([[[0; 4]; 4]; 4]);
    for r in &records {
        counts.merge(&CodonCounts::from_sequence(&r.sequence).with_context(|| format!("record {}", r.name))?);
    }
    let test = independence_test(&counts)?;
    let m = counts.total() as f64;
    let mut p = [[[0.0; 4]; 4]; 4];
    for (i, plane) in counts.table().iter().enumerate() {
        for (j, row) in plane.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                p[i][j][k] = c as f64 / m;
            }
        }
    }
    let segre = segre_residual(&p)?;
    print_json(&json!({
        "g2": test.g2,
        "chi2": test.chi2,
        "df": test.df,
        "sigma2": segre.sigma2(),
        "maxMinor": segre.max_minor,
        "codons": counts.total(),
    }));
    Ok(())
}

fn tree(cmd: &TreeCommand) -> Result<()> {
    match cmd {
        TreeCommand::Fourpoint { distances } => {
            let d = load_distances(distances)?;
            let metric = check_metric(&d);
            let fp = check_four_point(&d);
            print_json(&json!({
                "isMetric": metric.is_metric,
                "metricViolation": metric.violation.map(|v| metric_violation(&d, &v)),
                "fourPoint": fp.holds,
                "quadruple": fp.quadruple.map(|q| q.map(|i| d.taxa()[i].clone())),
            }));
        }
        TreeCommand::Mtree { input } => {
            let d = parse_m_dissimilarity_json(&read_input(input)?)?;
            let v = check_m_tree(&d)?;
            let names = |idx: &[usize]| idx.iter().map(|&i| d.taxa()[i].clone()).collect::<Vec<_>>();
            let violation = v.violation.as_ref().map(|w| match w {
                MTreeViolation::Metric { y, violation } => {
                    let (induced, _) = d.induced(y).expect("violation indices are valid");
                    json!({"y": names(y), "metric": metric_violation(&induced, violation)})
                }
                MTreeViolation::FourPoint { y, quadruple } => {
                    let (induced, _) = d.induced(y).expect("violation indices are valid");
                    let q: Vec<&String> = quadruple.iter().map(|&i| &induced.taxa()[i]).collect();
                    json!({"y": names(y), "quadruple": q})
                }
            });
            print_json(&json!({"holds": v.holds, "vacuous": v.vacuous, "violation": violation}));
        }
        TreeCommand::Gr36 { input } => {
            let d = parse_m_dissimilarity_json(&read_input(input)?)?;
            print_json(&json!({"residuals": gr36_residuals(&d)?}));
        }
        TreeCommand::Splits { newick } => {
            let t = parse_newick(&read_input(newick)?)?;
            let s = splits_of_tree(&t)?;
            let splits: Vec<Value> = s
                .splits
                .iter()
                .zip(&s.lengths)
                .map(|(sp, len)| json!({"split": sp.to_string(), "length": len}))
                .collect();
            print_json(&json!({"binary": s.binary, "splits": splits}));
        }
        TreeCommand::Metric { newick, format } => {
            let t = parse_newick(&read_input(newick)?)?;
            emit_matrix(&tree_metric(&t)?, *format);
        }
    }
    Ok(())
}

fn motif(fasta: &Path, motif: &str) -> Result<()> {
    if motif.is_empty() {
        bail!("empty motif");
    }
    let motif = motif.to_ascii_uppercase();
    let mut hits = Vec::new();
    for r in parse_fasta(&read_input(fasta)?)? {
        for position in find_motif(&r.sequence, &motif) {
            hits.push(json!({"taxon": r.name, "position": position}));
        }
    }
    print_json(&json!({"motif": motif, "hits": hits}));
    Ok(())
}

fn simulate(newick: &Path, length: usize, seed: u64) -> Result<()> {
    let t = parse_newick(&read_input(newick)?)?;
    let records: Vec<FastaRecord> = simulate_leaf_sequences(&t, length, seed)?
        .into_iter()
        .map(|(name, sequence)| FastaRecord { name, sequence })
        .collect();
    print!("{}", emit_fasta(&records));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Pipeline(args) => pipeline(args),
        Command::Dist { alignment, format } => dist(alignment, *format),
        Command::Nj(cmd) => nj(cmd),
        Command::Align(cmd) => align(cmd),
        Command::Hmm(cmd) => hmm(cmd),
        Command::Codon { fasta } => codon(fasta),
        Command::Tree(cmd) => tree(cmd),
        Command::Motif { fasta, motif: m } => motif(fasta, m),
        Command::Simulate { newick, length, seed } => simulate(newick, *length, *seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
