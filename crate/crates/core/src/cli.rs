//! Command-line pipeline: simulate, index, cluster, call, validate, stats.
//!
//! Settings resolve in the order defaults, `--config` file, `EBWTPC_*`
//! environment variables, command-line flags. Every report starts with the
//! effective configuration as `#`-prefixed TOML lines.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterParams, ClusterScanner, ClusterWriter};
use crate::error::Error;
use crate::index::{build_index, open_readers, write_index, IndexPaths};
use crate::sequences::{augment_with_rc, load_fasta, write_fasta, write_record, FastaReader, ReadCollection, Sample};
use crate::simulate::{
    mutate_genome, random_genome, read_truth_tsv, simulate_reads, write_origins_tsv, write_truth_tsv, MutationPlan,
    ReadParams, NONISOLATED_WINDOW,
};
use crate::snpcall::{call_snps_files, read_calls, write_calls, CallParams, CallStats};
use crate::stats::{stats_table, PoissonModel};
use crate::validate::{score_calls, TruthGrid, ValidationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Window ending with the allele.
    pub left: usize,
    pub right: usize,
    pub min_per_sample: u32,
    /// Minimum total cluster size kept by the cluster stage.
    pub min_size: u64,
    pub lcp_min: u32,
    pub alpha: f64,
    pub max_variants: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub threads: usize,
    pub buffer_cap: usize,
    /// Genome length for the cluster-size model; also the simulated length.
    pub genome_len: Option<u64>,
    /// Combined coverage of both samples, used to estimate the genome length
    /// when it is not given.
    pub coverage: Option<f64>,
    pub read_len: usize,
    pub coverage1: f64,
    pub coverage2: f64,
    pub density: f64,
    pub nonisolated_fraction: f64,
    pub work_dir: PathBuf,
}

pub const DEFAULT_SIM_GENOME_LEN: u64 = 100_000;

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            left: crate::snpcall::DEFAULT_LEFT,
            right: crate::snpcall::DEFAULT_RIGHT,
            min_per_sample: crate::snpcall::DEFAULT_MIN_PER_SAMPLE,
            min_size: crate::clustering::DEFAULT_MIN_SIZE,
            lcp_min: crate::clustering::DEFAULT_LCP_MIN,
            alpha: crate::snpcall::DEFAULT_ALPHA,
            max_variants: crate::snpcall::DEFAULT_MAX_VARIANTS,
            epsilon: 0.0012,
            seed: 42,
            threads: 1,
            buffer_cap: crate::snpcall::DEFAULT_BUFFER_CAP,
            genome_len: None,
            coverage: None,
            read_len: 100,
            coverage1: 30.0,
            coverage2: 22.0,
            density: 1e-3,
            nonisolated_fraction: 0.2,
            work_dir: PathBuf::from("ebwtpc-run"),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).context("parsing configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()).into());
        }
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.left == 0 || self.right == 0 {
            bail!("context windows must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha {} outside (0, 1)", self.alpha);
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            bail!("epsilon {} outside [0, 1)", self.epsilon);
        }
        if self.max_variants == 0 || self.threads == 0 || self.lcp_min == 0 || self.read_len < 2 {
            bail!("max variants, threads, lcp-min must be positive and read length at least 2");
        }
        Ok(())
    }

    /// The configuration as `#`-prefixed lines for report headers.
    pub fn header(&self) -> String {
        self.to_toml().lines().map(|l| format!("# {l}\n")).collect()
    }

    fn sim_genome_len(&self) -> usize {
        self.genome_len.unwrap_or(DEFAULT_SIM_GENOME_LEN) as usize
    }
}

#[derive(Debug, Parser)]
#[command(name = "ebwtpc", version, about = "eBWT positional clustering and reference-free SNP calling")]
pub struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, env = "EBWTPC_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "EBWTPC_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, env = "EBWTPC_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, env = "EBWTPC_GENOME_LEN")]
    pub genome_len: Option<u64>,
    #[arg(long, env = "EBWTPC_EPSILON")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    #[arg(long, env = "EBWTPC_READ_LEN")]
    pub read_len: Option<usize>,
    #[arg(long, env = "EBWTPC_COVERAGE1")]
    pub coverage1: Option<f64>,
    #[arg(long, env = "EBWTPC_COVERAGE2")]
    pub coverage2: Option<f64>,
    /// Planted SNPs per base.
    #[arg(long, env = "EBWTPC_DENSITY")]
    pub density: Option<f64>,
    /// Fraction of planted sites that are close pairs.
    #[arg(long, env = "EBWTPC_NONISOLATED_FRACTION")]
    pub nonisolated_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LcpArgs {
    #[arg(long, env = "EBWTPC_LCP_MIN")]
    pub lcp_min: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ClusterArgs {
    #[arg(long, env = "EBWTPC_MIN_SIZE")]
    pub min_size: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct WindowArgs {
    /// Left window length, allele included.
    #[arg(short = 'L', long = "left", env = "EBWTPC_LEFT")]
    pub left: Option<usize>,
    #[arg(short = 'R', long = "right", env = "EBWTPC_RIGHT")]
    pub right: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CallArgs {
    /// Minimum letters per sample in a cluster.
    #[arg(short = 'm', long = "min-per-sample", env = "EBWTPC_MIN_PER_SAMPLE")]
    pub min_per_sample: Option<u32>,
    /// Maximum SNPs per call, the main one included.
    #[arg(short = 'v', long = "max-variants", env = "EBWTPC_MAX_VARIANTS")]
    pub max_variants: Option<usize>,
    #[arg(long, env = "EBWTPC_ALPHA")]
    pub alpha: Option<f64>,
    /// Combined coverage of both samples; estimates the genome length.
    #[arg(long, env = "EBWTPC_COVERAGE")]
    pub coverage: Option<f64>,
    /// Coordinates held in memory before spilling to disk.
    #[arg(long, env = "EBWTPC_BUFFER_CAP")]
    pub buffer_cap: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a genome, a mutated copy, reads of both and the truth set.
    Simulate {
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Build GSA, eBWT and LCP of two samples and their reverse complements.
    Index {
        #[arg(long)]
        reads1: PathBuf,
        #[arg(long)]
        reads2: PathBuf,
        /// Output prefix for .gsa, .ebwt, .lcp, .reads.fa and .meta.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Detect positional clusters from the LCP array.
    Cluster {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        lcp: LcpArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
    },
    /// Call SNPs between the two samples.
    Call {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        call: CallArgs,
        #[command(flatten)]
        lcp: LcpArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Score calls against planted SNPs.
    Validate {
        #[arg(long)]
        truth: PathBuf,
        /// Reference (sample 1) genome.
        #[arg(long)]
        genome: PathBuf,
        #[arg(long)]
        calls: PathBuf,
        /// TSV report; defaults to `<calls>.validation.tsv`.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Print expected cluster sizes, bands and the distinct-error bound over k.
    Stats {
        /// Reads per sample strand (`m`); derived from coverage when absent.
        #[arg(long)]
        reads: Option<f64>,
        #[arg(long, env = "EBWTPC_COVERAGE")]
        coverage: Option<f64>,
        #[arg(long, env = "EBWTPC_READ_LEN")]
        read_len: Option<usize>,
        #[arg(long, env = "EBWTPC_ALPHA")]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 8)]
        k_min: u32,
        #[arg(long, default_value_t = 40)]
        k_max: u32,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Simulate, index, cluster, call and validate in one directory.
    All {
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        lcp: LcpArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        call: CallArgs,
    },
}

fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
    if let Some(v) = src {
        *dst = v.clone();
    }
}

impl ModelArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        if self.genome_len.is_some() {
            c.genome_len = self.genome_len;
        }
        set(&mut c.epsilon, &self.epsilon);
    }
}

impl SimArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        set(&mut c.read_len, &self.read_len);
        set(&mut c.coverage1, &self.coverage1);
        set(&mut c.coverage2, &self.coverage2);
        set(&mut c.density, &self.density);
        set(&mut c.nonisolated_fraction, &self.nonisolated_fraction);
    }
}

impl LcpArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        set(&mut c.lcp_min, &self.lcp_min);
    }
}

impl ClusterArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        set(&mut c.min_size, &self.min_size);
    }
}

impl WindowArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        set(&mut c.left, &self.left);
        set(&mut c.right, &self.right);
    }
}

impl CallArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        set(&mut c.min_per_sample, &self.min_per_sample);
        set(&mut c.max_variants, &self.max_variants);
        set(&mut c.alpha, &self.alpha);
        set(&mut c.buffer_cap, &self.buffer_cap);
        if self.coverage.is_some() {
            c.coverage = self.coverage;
        }
    }
}

impl Cli {
    /// Effective configuration for this invocation.
    pub fn config(&self) -> anyhow::Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        set(&mut c.threads, &self.threads);
        set(&mut c.seed, &self.seed);
        match &self.command {
            Command::Simulate { sim, model, .. } => {
                sim.apply(&mut c);
                model.apply(&mut c);
                c.genome_len.get_or_insert(DEFAULT_SIM_GENOME_LEN);
            }
            Command::Index { .. } => {}
            Command::Cluster { lcp, cluster, .. } => {
                lcp.apply(&mut c);
                cluster.apply(&mut c);
            }
            Command::Call { window, call, lcp, model, .. } => {
                window.apply(&mut c);
                call.apply(&mut c);
                lcp.apply(&mut c);
                model.apply(&mut c);
            }
            Command::Validate { window, .. } => window.apply(&mut c),
            Command::Stats { coverage, read_len, alpha, model, .. } => {
                model.apply(&mut c);
                set(&mut c.read_len, read_len);
                set(&mut c.alpha, alpha);
                if coverage.is_some() {
                    c.coverage = *coverage;
                }
            }
            Command::All { out, sim, model, lcp, cluster, window, call } => {
                set(&mut c.work_dir, out);
                sim.apply(&mut c);
                model.apply(&mut c);
                lcp.apply(&mut c);
                cluster.apply(&mut c);
                window.apply(&mut c);
                call.apply(&mut c);
                c.genome_len.get_or_insert(DEFAULT_SIM_GENOME_LEN);
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Sidecar describing an indexed collection, written next to the arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub reads1: u64,
    pub reads2: u64,
    pub bases1: u64,
    pub bases2: u64,
    pub skipped1: u64,
    pub skipped2: u64,
    pub mean_read_len: f64,
    /// Reads in the indexed (augmented) collection.
    pub indexed_reads: u64,
    /// Rank of the first sample-2 read in the indexed collection.
    pub sample_boundary: u64,
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut p = prefix.as_os_str().to_owned();
    p.push(ext);
    PathBuf::from(p)
}

pub fn meta_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".meta")
}

pub fn reads_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".reads.fa")
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn require(path: &Path) -> anyhow::Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingInput(path.to_path_buf()).into())
    }
}

pub struct SimulationOutputs {
    pub reference: PathBuf,
    pub mutated: PathBuf,
    pub reads1: PathBuf,
    pub reads2: PathBuf,
    pub truth: PathBuf,
}

pub fn run_simulate(cfg: &PipelineConfig, out: &Path) -> anyhow::Result<SimulationOutputs> {
    let n = cfg.sim_genome_len();
    let r = cfg.read_len;
    let genome = random_genome(n, cfg.seed);
    let plan = MutationPlan::Random {
        density: cfg.density,
        min_spacing: 2 * NONISOLATED_WINDOW + 2,
        nonisolated_fraction: cfg.nonisolated_fraction,
        margin: r.max(cfg.left).max(cfg.right),
    };
    let (mutated, variants) = mutate_genome(&genome, &plan, cfg.seed + 1)?;
    let o = SimulationOutputs {
        reference: out.join("genome1.fa"),
        mutated: out.join("genome2.fa"),
        reads1: out.join("reads1.fa"),
        reads2: out.join("reads2.fa"),
        truth: out.join("truth.tsv"),
    };
    write_record(&mut create(&o.reference)?, "genome1", &genome)?;
    write_record(&mut create(&o.mutated)?, "genome2", &mutated)?;
    write_truth_tsv(create(&o.truth)?, &variants)?;
    for (sample, genome, cov, reads_out, seed) in [
        (Sample::First, &genome, cfg.coverage1, &o.reads1, cfg.seed + 2),
        (Sample::Second, &mutated, cfg.coverage2, &o.reads2, cfg.seed + 3),
    ] {
        let params = ReadParams {
            reads: ReadParams::reads_for_coverage(cov, n, r),
            read_len: r,
            epsilon: cfg.epsilon,
            seed,
        };
        let (reads, origins) = simulate_reads(genome, &params, sample)?;
        write_fasta(create(reads_out)?, &reads)?;
        let origins_path = out.join(format!("origins{}.tsv", sample.index() + 1));
        write_origins_tsv(create(&origins_path)?, &origins)?;
    }
    log::info!("simulated n={n}, {} variants into {}", variants.len(), out.display());
    Ok(o)
}

pub fn run_index(reads1: &Path, reads2: &Path, prefix: &Path) -> anyhow::Result<IndexMeta> {
    let s1 = load_fasta(reads1, Sample::First)?;
    let s2 = load_fasta(reads2, Sample::Second)?;
    let meta = IndexMeta {
        reads1: s1.collection.len() as u64,
        reads2: s2.collection.len() as u64,
        bases1: s1.collection.total_length() as u64,
        bases2: s2.collection.total_length() as u64,
        skipped1: s1.skipped as u64,
        skipped2: s2.skipped as u64,
        mean_read_len: 0.0,
        indexed_reads: 0,
        sample_boundary: 0,
    };
    let both = ReadCollection::two_samples(s1.collection, s2.collection)?;
    let aug = augment_with_rc(&both);
    let idx = build_index(&aug)?;
    let paths = IndexPaths::from_prefix(prefix);
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_index(&paths, &idx)?;
    write_fasta(create(&reads_path(prefix))?, &aug)?;
    let meta = IndexMeta {
        mean_read_len: both.mean_read_length(),
        indexed_reads: aug.len() as u64,
        sample_boundary: aug.sample_boundary() as u64,
        ..meta
    };
    fs::write(meta_path(prefix), toml::to_string(&meta)?)?;
    log::info!("indexed {} reads, {} suffixes", aug.len(), idx.len());
    Ok(meta)
}

pub fn read_meta(prefix: &Path) -> anyhow::Result<IndexMeta> {
    let path = meta_path(prefix);
    require(&path)?;
    let text = fs::read_to_string(&path)?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn run_cluster(cfg: &PipelineConfig, prefix: &Path, out: &Path) -> anyhow::Result<u64> {
    let paths = IndexPaths::from_prefix(prefix);
    require(&paths.lcp)?;
    let (_, _, mut lcp) = open_readers(&paths)?;
    let params = ClusterParams {
        lcp_min: cfg.lcp_min,
        min_size: cfg.min_size,
    };
    let mut err = None;
    let values = std::iter::from_fn(|| match lcp.next_item() {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            None
        }
    });
    let mut writer = ClusterWriter::create(out)?;
    for c in ClusterScanner::new(values, params) {
        writer.push(&c)?;
    }
    if let Some(e) = err {
        return Err(e.into());
    }
    let count = writer.finish()?;
    log::info!("wrote {count} clusters to {}", out.display());
    Ok(count)
}

/// Genome length for the model: given directly, or total bases over the
/// combined coverage.
pub fn model_genome_len(cfg: &PipelineConfig, meta: &IndexMeta) -> anyhow::Result<f64> {
    match (cfg.genome_len, cfg.coverage) {
        (Some(n), _) => Ok(n as f64),
        (None, Some(cov)) if cov > 0.0 => Ok((meta.bases1 + meta.bases2) as f64 / cov),
        _ => bail!("the cluster-size model needs --genome-len or --coverage"),
    }
}

pub fn call_params(cfg: &PipelineConfig, meta: &IndexMeta) -> anyhow::Result<CallParams> {
    let n = model_genome_len(cfg, meta)?;
    let model = PoissonModel::new(
        (meta.reads1 + meta.reads2) as f64,
        n,
        meta.mean_read_len,
        cfg.epsilon,
        cfg.lcp_min,
    )?;
    let mut p = CallParams::new(model, meta.sample_boundary as u32);
    p.left = cfg.left;
    p.right = cfg.right;
    p.min_per_sample = cfg.min_per_sample;
    p.max_variants = cfg.max_variants;
    p.alpha = cfg.alpha;
    p.buffer_cap = cfg.buffer_cap;
    p.threads = cfg.threads;
    p.validate()?;
    Ok(p)
}

pub fn write_call_stats<W: Write>(mut out: W, cfg: &PipelineConfig, s: &CallStats) -> std::io::Result<()> {
    out.write_all(cfg.header().as_bytes())?;
    let rows: [(&str, u64); 20] = [
        ("gsa_records_read", s.gsa.items_read),
        ("ebwt_records_read", s.ebwt.items_read),
        ("lcp_records_read", s.lcp.items_read),
        ("index_length", s.gsa.len),
        ("clusters_in_file", s.clusters_in_file.unwrap_or(s.clusters_read)),
        ("clusters_read", s.clusters_read),
        ("too_small", s.too_small),
        ("left_tail", s.left_tail),
        ("right_tail", s.right_tail),
        ("no_variant", s.no_variant),
        ("candidates", s.candidates),
        ("candidate_rows", s.candidate_rows),
        ("no_consensus", s.no_consensus),
        ("too_many_variants", s.too_many_variants),
        ("calls", s.calls),
        ("coords_spilled", s.buffer.spilled),
        ("spill_runs", s.buffer.runs),
        ("snippet_bases", s.snippet_bases),
        ("read_records", s.read_records),
        ("reads_passes", u64::from(s.reads_passes)),
    ];
    writeln!(out, "counter\tvalue")?;
    for (k, v) in rows {
        writeln!(out, "{k}\t{v}")?;
    }
    out.flush()
}

pub fn stats_path(calls: &Path) -> PathBuf {
    with_suffix(calls, ".stats.tsv")
}

pub fn run_call(cfg: &PipelineConfig, prefix: &Path, clusters: &Path, out: &Path) -> anyhow::Result<CallStats> {
    let paths = IndexPaths::from_prefix(prefix);
    for p in [&paths.gsa, &paths.ebwt, &paths.lcp, clusters] {
        require(p)?;
    }
    let meta = read_meta(prefix)?;
    let reads = reads_path(prefix);
    require(&reads)?;
    let params = call_params(cfg, &meta)?;
    let (calls, stats) = call_snps_files(&paths, clusters, &reads, &params)?;
    write_calls(create(out)?, &calls)?;
    write_call_stats(create(&stats_path(out))?, cfg, &stats)?;
    log::info!("{} calls written to {}", calls.len(), out.display());
    Ok(stats)
}

fn load_genome(path: &Path) -> anyhow::Result<Vec<u8>> {
    let mut records = FastaReader::open(path)?;
    let Some(first) = records.next() else {
        bail!("{} holds no sequence", path.display());
    };
    Ok(first?.seq.to_ascii_uppercase())
}

pub fn run_validate(cfg: &PipelineConfig, truth: &Path, genome: &Path, calls: &Path) -> anyhow::Result<ValidationReport> {
    for p in [truth, genome, calls] {
        require(p)?;
    }
    let variants = read_truth_tsv(truth)?;
    let genome = load_genome(genome)?;
    let grid = TruthGrid::build(&variants, &genome, cfg.left, cfg.right)?;
    let pairs = read_calls(calls)?;
    Ok(score_calls(&grid, &pairs))
}

pub fn write_report(path: &Path, cfg: &PipelineConfig, report: &ValidationReport) -> anyhow::Result<()> {
    let mut out = create(path)?;
    report.write_tsv(&mut out, &cfg.to_toml())?;
    out.flush()?;
    Ok(())
}

pub fn run_stats<W: Write>(
    mut out: W,
    cfg: &PipelineConfig,
    reads: Option<f64>,
    k_min: u32,
    k_max: u32,
) -> anyhow::Result<()> {
    let n = cfg.genome_len.unwrap_or(DEFAULT_SIM_GENOME_LEN) as f64;
    let r = cfg.read_len as f64;
    let m = match (reads, cfg.coverage) {
        (Some(m), _) => m,
        (None, Some(cov)) => cov * n / r,
        (None, None) => bail!("stats needs --reads or --coverage"),
    };
    if k_min == 0 || k_max < k_min || f64::from(k_max) >= r {
        bail!("k range {k_min}..={k_max} must satisfy 0 < k_min <= k_max < r");
    }
    let base = PoissonModel::new(m, n, r, cfg.epsilon, k_min)?;
    out.write_all(cfg.header().as_bytes())?;
    writeln!(out, "k\tlambda\tcoverage\tband_lo\tband_hi\tbest_delta\tcondition2_bound")?;
    for row in stats_table(&base, k_min..=k_max, cfg.alpha)? {
        writeln!(
            out,
            "{}\t{:.6}\t{:.4}\t{}\t{}\t{}\t{:.6}",
            row.k, row.lambda, row.coverage, row.band.lo, row.band.hi, row.best_delta, row.condition2_bound
        )?;
    }
    Ok(())
}

/// Runs the whole pipeline in `cfg.work_dir`; the report lands in
/// `report.tsv` there.
pub fn run_all(cfg: &PipelineConfig) -> anyhow::Result<ValidationReport> {
    let dir = &cfg.work_dir;
    let mut cfg = cfg.clone();
    cfg.genome_len = Some(cfg.sim_genome_len() as u64);
    let sim = run_simulate(&cfg, dir)?;
    let prefix = dir.join("index");
    run_index(&sim.reads1, &sim.reads2, &prefix)?;
    let clusters = dir.join("clusters.bin");
    run_cluster(&cfg, &prefix, &clusters)?;
    let calls = dir.join("calls.fa");
    run_call(&cfg, &prefix, &clusters, &calls)?;
    let report = run_validate(&cfg, &sim.truth, &sim.reference, &calls)?;
    write_report(&dir.join("report.tsv"), &cfg, &report)?;
    Ok(report)
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = cli.config()?;
    match &cli.command {
        Command::Simulate { out, .. } => {
            run_simulate(&cfg, out)?;
        }
        Command::Index { reads1, reads2, out } => {
            let meta = run_index(reads1, reads2, out)?;
            println!("{}", toml::to_string(&meta)?.trim_end());
        }
        Command::Cluster { index, out, .. } => {
            let n = run_cluster(&cfg, index, out)?;
            println!("clusters\t{n}");
        }
        Command::Call { index, clusters, out, .. } => {
            let stats = run_call(&cfg, index, clusters, out)?;
            println!("calls\t{}", stats.calls);
        }
        Command::Validate { truth, genome, calls, out, .. } => {
            let report = run_validate(&cfg, truth, genome, calls)?;
            let path = out.clone().unwrap_or_else(|| with_suffix(calls, ".validation.tsv"));
            write_report(&path, &cfg, &report)?;
            print!("{}", cfg.header());
            println!("{report}");
        }
        Command::Stats { reads, k_min, k_max, .. } => {
            run_stats(std::io::stdout().lock(), &cfg, *reads, *k_min, *k_max)?;
        }
        Command::All { .. } => {
            let report = run_all(&cfg)?;
            print!("{}", cfg.header());
            println!("{report}");
        }
    }
    Ok(())
}
