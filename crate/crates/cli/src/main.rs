use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use cohesion_core::cohesion::{cohesion_matrix, community_graph, CohesionMatrix};
use cohesion_core::generate::{generate, GeneratorKind, GeneratorSpec};
use cohesion_core::io as cio;
use cohesion_core::spaces::{
    aggregate_outlier_responses, induced_triplet, validate_axioms, AxiomScope, DissimilaritySpace,
    Metric, TieMode, TiePolicy, TripletComparisonSpace,
};
use cohesion_core::structure::{
    count_point_like_partitions, enumerate_point_like, point_like_partitions, quotient,
    PointLikeFamily, PointLikePartition,
};
use cohesion_core::verify::{self, CheckResult};

#[derive(Parser)]
#[command(
    name = "cohesion",
    version,
    about = "Cohesion and point-like structure of comparison data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cohesion matrix.
    Compute {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
        format: MatrixFormat,
    },
    /// Point-like sets and the partitions they form.
    Pointlike {
        #[command(flatten)]
        input: Input,
        /// Largest general triplet space searched exhaustively.
        #[arg(long, default_value_t = 16)]
        cap: usize,
        /// Also list every point-like partition.
        #[arg(long)]
        list_partitions: bool,
        /// Refuse to list more partitions than this.
        #[arg(long, default_value_t = 10_000)]
        max_partitions: u128,
    },
    /// Quotient by a point-like partition.
    Quotient {
        #[command(flatten)]
        input: Input,
        /// `label block_id` lines; defaults to the maximal proper point-like sets.
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Comma-separated representative labels, one per block.
        #[arg(long, value_delimiter = ',')]
        reps: Option<Vec<String>>,
        #[arg(long, default_value_t = 16)]
        cap: usize,
    },
    /// Mutual-cohesion graph with strong ties.
    Communities {
        #[command(flatten)]
        input: Input,
        /// Strong-tie threshold; defaults to half the weighted mean self-cohesion.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
    },
    /// Run every applicable property check; exits non-zero if any fails.
    Verify {
        #[command(flatten)]
        input: Input,
        /// `label block_id` lines enabling the quotient checks.
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Comma-separated outlier labels enabling the outlier checks.
        #[arg(long, value_delimiter = ',')]
        outliers: Option<Vec<String>>,
    },
    /// Write a synthetic configuration.
    Synth {
        #[command(flatten)]
        gen: GeneratorArgs,
        #[arg(long, value_enum, default_value_t = SynthFormat::Coords)]
        format: SynthFormat,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// Dissimilarity matrix CSV.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Coordinate CSV, one point per row.
    #[arg(long)]
    coords: Option<PathBuf>,
    /// Outlier responses, `i j k [w]` per line.
    #[arg(long)]
    triplets: Option<PathBuf>,
    /// Built-in generator.
    #[arg(long, value_enum)]
    synth: Option<SynthKind>,
}

#[derive(Args)]
struct Input {
    #[command(flatten)]
    source: Source,
    /// `label p` lines; uniform when omitted.
    #[arg(long)]
    mass: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with_all = ["matrix", "triplets"])]
    metric: Option<MetricArg>,
    #[arg(long, value_enum, conflicts_with = "triplets")]
    tie_policy: Option<TieArg>,
    /// Dissimilarities within this of a triple's minimum count as tied.
    #[arg(long, conflicts_with = "triplets")]
    epsilon: Option<f64>,
    #[command(flatten)]
    gen: GeneratorParams,
    /// Worker threads for the cohesion kernel.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GeneratorArgs {
    #[arg(long, value_enum)]
    synth: SynthKind,
    #[command(flatten)]
    params: GeneratorParams,
}

#[derive(Args, Clone)]
struct GeneratorParams {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chain length.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Chain ratio offset.
    #[arg(long, default_value_t = 0.1)]
    chain_epsilon: f64,
    #[arg(long, value_delimiter = ',', default_value = "20,30,50")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5")]
    intra_scales: Vec<f64>,
    #[arg(long, default_value_t = 20.0)]
    inter_scale: f64,
    #[arg(long, default_value_t = 90)]
    n_ball: usize,
    #[arg(long, default_value_t = 10)]
    n_out: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 10.0)]
    outlier_distance: f64,
    /// Mass of the heavy point in the ordering example.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    GeometricChain,
    SeparatedBlocks,
    BallWithOutliers,
    OrderingExample,
    FourGroupOutlier,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Manhattan,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Strict,
    UniformSplit,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthFormat {
    Coords,
    Matrix,
}

struct Loaded {
    space: Option<DissimilaritySpace>,
    triplets: TripletComparisonSpace,
    blocks: Vec<Vec<usize>>,
    outliers: Vec<usize>,
}

fn generator_spec(kind: SynthKind, p: &GeneratorParams) -> GeneratorSpec {
    let kind = match kind {
        SynthKind::GeometricChain => GeneratorKind::GeometricChain {
            n: p.n,
            epsilon: p.chain_epsilon,
        },
        SynthKind::SeparatedBlocks => GeneratorKind::SeparatedBlocks {
            sizes: p.sizes.clone(),
            intra_scales: p.intra_scales.clone(),
            inter_scale: p.inter_scale,
        },
        SynthKind::BallWithOutliers => GeneratorKind::BallWithOutliers {
            n_ball: p.n_ball,
            n_out: p.n_out,
            radius: p.radius,
            outlier_distance: p.outlier_distance,
        },
        SynthKind::OrderingExample => GeneratorKind::OrderingExample { p: p.p },
        SynthKind::FourGroupOutlier => GeneratorKind::FourGroupOutlier,
    };
    GeneratorSpec::new(kind, p.seed)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_mass_file(path: Option<&Path>, labels: &[String]) -> Result<Option<Vec<f64>>> {
    path.map(|p| {
        cio::read_mass(open(p)?, labels).with_context(|| format!("reading {}", p.display()))
    })
    .transpose()
}

impl Input {
    fn tie_policy(&self) -> Result<TiePolicy> {
        let mode = match self.tie_policy {
            Some(TieArg::Strict) => TieMode::Strict,
            Some(TieArg::UniformSplit) | None => TieMode::UniformSplit,
        };
        Ok(TiePolicy::new(mode, self.epsilon.unwrap_or(0.0))?)
    }

    fn load(&self) -> Result<Loaded> {
        if let Some(threads) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("configuring the thread pool")?;
        }
        let src = &self.source;
        let mass_path = self.mass.as_deref();
        let (space, blocks, outliers) = if let Some(path) = &src.triplets {
            let (labels, responses) = cio::read_triplets(open(path)?)
                .with_context(|| format!("reading {}", path.display()))?;
            let mass = read_mass_file(mass_path, &labels)?;
            let t = aggregate_outlier_responses(labels, mass, &responses)?;
            return Ok(Loaded {
                space: None,
                triplets: t,
                blocks: Vec::new(),
                outliers: Vec::new(),
            });
        } else if let Some(path) = &src.matrix {
            let (labels, d) = cio::read_distance_csv(open(path)?)
                .with_context(|| format!("reading {}", path.display()))?;
            let mass = read_mass_file(mass_path, &labels)?;
            (
                DissimilaritySpace::new(labels, d, mass)?,
                Vec::new(),
                Vec::new(),
            )
        } else if let Some(path) = &src.coords {
            let (labels, coords) = cio::read_coords_csv(open(path)?)
                .with_context(|| format!("reading {}", path.display()))?;
            let metric = match self.metric {
                Some(MetricArg::Manhattan) => Metric::Manhattan,
                _ => Metric::Euclidean,
            };
            let mass = read_mass_file(mass_path, &labels)?;
            (
                DissimilaritySpace::from_coords(labels, coords, metric, mass)?,
                Vec::new(),
                Vec::new(),
            )
        } else {
            let kind = src.synth.expect("clap requires one source");
            let s = generate(&generator_spec(kind, &self.gen))?;
            let space = match read_mass_file(mass_path, s.space.labels())? {
                Some(m) => s.space.with_mass(m)?,
                None => s.space,
            };
            (space, s.blocks, s.outliers)
        };
        let triplets = induced_triplet(&space, self.tie_policy()?)?;
        Ok(Loaded {
            space: Some(space),
            triplets,
            blocks,
            outliers,
        })
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        output_writer(self.output.as_deref())
    }
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(mut w: Box<dyn Write>, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn label_indices(t: &TripletComparisonSpace, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|l| {
            t.index_of(l)
                .with_context(|| format!("unknown label `{l}`"))
        })
        .collect()
}

fn read_partition_file(path: &Path, t: &TripletComparisonSpace) -> Result<PointLikePartition> {
    let blocks = cio::read_partition(open(path)?, t.labels())
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(PointLikePartition::certify(t, blocks)?)
}

/// The children of the whole set, or the whole set when it has none.
fn coarsest_partition(
    t: &TripletComparisonSpace,
    family: &PointLikeFamily,
) -> Result<PointLikePartition> {
    let n = t.len();
    let whole = family
        .sets()
        .iter()
        .position(|s| s.len() == n)
        .context("family lacks the whole set")?;
    let children = family.children(whole);
    if children.is_empty() {
        return Ok(PointLikePartition::whole(n));
    }
    let blocks = children.iter().map(|&c| family.sets()[c].clone()).collect();
    Ok(PointLikePartition::certify(t, blocks)?)
}

fn cohesion_of(t: &TripletComparisonSpace) -> Result<CohesionMatrix> {
    Ok(cohesion_matrix(t)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Compute { input, format } => {
            let loaded = input.load()?;
            let c = cohesion_of(&loaded.triplets)?;
            let w = input.writer()?;
            match format {
                MatrixFormat::Csv => {
                    cio::write_matrix_csv(w, c.labels(), c.values())?;
                }
                MatrixFormat::Json => write_json(w, &cio::CohesionDocument::new(&c))?,
            }
        }
        Command::Pointlike {
            input,
            cap,
            list_partitions,
            max_partitions,
        } => {
            let loaded = input.load()?;
            let t = &loaded.triplets;
            let family = enumerate_point_like(t, cap)?;
            let count = count_point_like_partitions(&family);
            let partitions = if list_partitions {
                if count > max_partitions {
                    bail!("{count} point-like partitions exceed --max-partitions {max_partitions}");
                }
                Some(point_like_partitions(&family))
            } else {
                None
            };
            let doc = cio::FamilyDocument::new(
                &family,
                t.labels(),
                t.mass(),
                count,
                partitions.as_deref(),
            );
            write_json(input.writer()?, &doc)?;
        }
        Command::Quotient {
            input,
            partition,
            reps,
            cap,
        } => {
            let loaded = input.load()?;
            let t = &loaded.triplets;
            let partition = match &partition {
                Some(path) => read_partition_file(path, t)?,
                None => coarsest_partition(t, &enumerate_point_like(t, cap)?)?,
            };
            let reps = reps.map(|r| label_indices(t, &r)).transpose()?;
            let q = quotient(t, &partition, reps.as_deref())?;
            let c = cohesion_of(q.space())?;
            let doc = cio::QuotientDocument::new(&q, t.labels(), &c);
            write_json(input.writer()?, &doc)?;
        }
        Command::Communities {
            input,
            threshold,
            format,
        } => {
            let loaded = input.load()?;
            let c = cohesion_of(&loaded.triplets)?;
            let g = community_graph(&c, threshold);
            let w = input.writer()?;
            match format {
                GraphFormat::Dot => cio::write_community_dot(w, &g)?,
                GraphFormat::Csv => cio::write_community_edges(w, &g)?,
                GraphFormat::Json => write_json(w, &cio::CommunityDocument::new(&g))?,
            }
        }
        Command::Verify {
            input,
            partition,
            outliers,
        } => {
            let loaded = input.load()?;
            let results = verify_all(&input, &loaded, partition.as_deref(), outliers.as_deref())?;
            let passed = results.iter().all(|r| r.passed);
            write_json(input.writer()?, &results)?;
            return Ok(passed);
        }
        Command::Synth {
            gen,
            format,
            output,
        } => {
            let s = generate(&generator_spec(gen.synth, &gen.params))?;
            let mut w = output_writer(output.as_deref())?;
            match format {
                SynthFormat::Coords => {
                    let coords = s
                        .space
                        .coords()
                        .context("generator produced no coordinates")?;
                    let dim = coords.first().map_or(0, Vec::len);
                    let mut header = vec!["label".to_string()];
                    header.extend((0..dim).map(|k| format!("x{k}")));
                    writeln!(w, "{}", header.join(","))?;
                    for (label, point) in s.space.labels().iter().zip(coords) {
                        let cells: Vec<String> = point.iter().map(f64::to_string).collect();
                        writeln!(w, "{label},{}", cells.join(","))?;
                    }
                    w.flush()?;
                }
                SynthFormat::Matrix => {
                    cio::write_matrix_csv(w, s.space.labels(), s.space.distances())?;
                }
            }
        }
    }
    Ok(true)
}

fn verify_all(
    input: &Input,
    loaded: &Loaded,
    partition: Option<&Path>,
    outliers: Option<&[String]>,
) -> Result<Vec<CheckResult>> {
    let t = &loaded.triplets;
    let partition = match partition {
        Some(path) => Some(read_partition_file(path, t)?),
        None => default_partition(t, &loaded.blocks),
    };
    let outliers = match outliers {
        Some(names) => label_indices(t, names)?,
        None => loaded.outliers.clone(),
    };
    match &loaded.space {
        Some(space) => Ok(verify::run_all(
            space,
            input.tie_policy()?,
            partition.as_ref(),
            &outliers,
        )?),
        None => {
            if !outliers.is_empty() {
                bail!("outlier checks need dissimilarities; use --matrix, --coords or --synth");
            }
            let c = cohesion_of(t)?;
            let report = validate_axioms(t, &AxiomScope::Exhaustive);
            let mut results = vec![CheckResult {
                name: "axioms".into(),
                passed: report.passed,
                max_residual: report
                    .violations
                    .iter()
                    .map(|v| v.residual)
                    .fold(0.0, f64::max),
                tolerance: cohesion_core::spaces::AXIOM_TOLERANCE,
                details: report
                    .violations
                    .iter()
                    .take(25)
                    .map(|v| format!("{:?} at {:?}", v.axiom, v.triple))
                    .collect(),
            }];
            results.push(verify::check_average_half(&c));
            results.push(verify::check_kernel_oracle(t)?);
            results.push(verify::check_dominance(t, &c, partition.as_ref()));
            if let Some(p) = &partition {
                results.push(verify::check_local_mass_quotient(t, p, None)?);
                results.push(verify::check_quotient_fractal(t, p, None)?);
            }
            results.push(verify::check_ordering_example(
                &verify::default_ordering_grid(),
            )?);
            Ok(results)
        }
    }
}

/// Generator blocks plus singletons for the remaining points, when every
/// block is point-like.
fn default_partition(
    t: &TripletComparisonSpace,
    blocks: &[Vec<usize>],
) -> Option<PointLikePartition> {
    if blocks.is_empty() {
        return None;
    }
    let mut covered = vec![false; t.len()];
    let mut all = blocks.to_vec();
    for b in blocks {
        for &x in b {
            covered[x] = true;
        }
    }
    all.extend((0..t.len()).filter(|&x| !covered[x]).map(|x| vec![x]));
    PointLikePartition::certify(t, all).ok()
}

const GENERATOR_ARGS: [&str; 11] = [
    "seed",
    "n",
    "chain_epsilon",
    "sizes",
    "intra_scales",
    "inter_scale",
    "n_ball",
    "n_out",
    "radius",
    "outlier_distance",
    "p",
];

/// Generator parameters only make sense with `--synth`. `requires` does not
/// see through the source group, so this is checked after parsing.
fn check_generator_args(matches: &ArgMatches) -> clap::error::Result<()> {
    let Some((name, sub)) = matches.subcommand() else {
        return Ok(());
    };
    if sub.try_contains_id("synth").unwrap_or(false) {
        return Ok(());
    }
    for id in GENERATOR_ARGS {
        if sub.value_source(id) == Some(ValueSource::CommandLine) {
            let flag = id.replace('_', "-");
            let mut cmd = Cli::command();
            let cmd = cmd
                .find_subcommand_mut(name)
                .expect("parsed subcommand exists");
            return Err(cmd.error(
                clap::error::ErrorKind::MissingRequiredArgument,
                format!("--{flag} requires --synth"),
            ));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match check_generator_args(&matches).and_then(|()| Cli::from_arg_matches(&matches)) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
