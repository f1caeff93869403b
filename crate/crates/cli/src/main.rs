use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qc_polar::code_model::{load_spec, save_spec, CodeSpec, ShiftBaseMatrix};
use qc_polar::construction::{greedy_prune, profile, select_frozen, BerEvaluator, CycleProxy, Method, PruneEvaluator};
use qc_polar::crc::Crc;
use qc_polar::decoders::{BoxplusMode, DecoderKind};
use qc_polar::encoder::encode_qc;
use qc_polar::protograph::{analyze, hill_climb_shifts, random_shifts, HillClimbConfig};
use qc_polar::simulator::{snr_grid, sweep, SimConfig, SnrConvention};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod frames;

use frames::{BitFormat, LlrFormat};

#[derive(Parser)]
#[command(name = "qcpolar", version, about = "Quasi-cyclic polar codes: encode, decode, analyze, design, simulate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode data frames.
    Encode(EncodeArgs),
    /// Decode channel LLR frames.
    Decode(DecodeArgs),
    /// Cycle spectrum and girth of the lifted graph.
    Analyze(AnalyzeArgs),
    /// Build a spec: frozen set, shifts and optional pruning.
    Design(DesignArgs),
    /// AWGN Monte Carlo BER/FER sweep.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Data frames (K bits each); stdin if omitted.
    #[arg(long, conflicts_with = "random")]
    input: Option<PathBuf>,
    /// Encode this many random frames instead of reading input.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BitFormat::Bits)]
    format: BitFormat,
    /// Also write the data frames here (useful with --random).
    #[arg(long)]
    data_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderName {
    Sc,
    Scl,
    Bp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeName {
    Exact,
    Minsum,
}

impl From<ModeName> for BoxplusMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Exact => BoxplusMode::Exact,
            ModeName::Minsum => BoxplusMode::MinSum,
        }
    }
}

#[derive(Args)]
struct DecoderOpts {
    #[arg(long, value_enum, default_value_t = DecoderName::Bp)]
    decoder: DecoderName,
    /// SCL list size.
    #[arg(long, default_value_t = 8)]
    list: usize,
    /// BP iterations.
    #[arg(long, default_value_t = 32)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = ModeName::Exact)]
    mode: ModeName,
    /// Stop BP once the hard decisions are a codeword.
    #[arg(long)]
    early_stop: bool,
}

impl DecoderOpts {
    fn kind(&self) -> DecoderKind {
        let mode = self.mode.into();
        match self.decoder {
            DecoderName::Sc => DecoderKind::Sc { mode },
            DecoderName::Scl => DecoderKind::Scl { list: self.list, mode },
            DecoderName::Bp => DecoderKind::Bp {
                iterations: self.iters,
                mode,
                early_stop: self.early_stop,
            },
        }
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// LLR frames (N values each, positive favours 0); stdin if omitted.
    #[arg(long)]
    llrs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LlrFormat::Csv)]
    llr_format: LlrFormat,
    #[command(flatten)]
    decoder: DecoderOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Longest cycle searched, in check traversals.
    #[arg(long, default_value_t = 8)]
    c_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodName {
    Bhatta,
    Ga,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShiftInit {
    Zero,
    Random,
    /// Random start followed by girth hill climbing.
    Hill,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvaluatorName {
    Ber,
    Proxy,
}

#[derive(Args)]
struct DesignArgs {
    /// Stages; the proto length is 2^n.
    #[arg(long)]
    n: usize,
    /// Lift factor.
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long, value_enum, default_value_t = MethodName::Ga)]
    method: MethodName,
    /// Design erasure probability (bhatta) or design Es/N0 in dB (ga).
    #[arg(long)]
    param: Option<f64>,
    /// Code rate; K_proto = round(rate * 2^n).
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    #[arg(long, value_enum, default_value_t = ShiftInit::Hill)]
    shifts: ShiftInit,
    /// Hill-climbing candidate evaluations.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Longest cycle, in check traversals, for hill climbing and the proxy evaluator.
    #[arg(long, default_value_t = 6)]
    c_max: usize,
    /// Fraction of units to prune greedily.
    #[arg(long, default_value_t = 0.0)]
    prune: f64,
    #[arg(long, value_enum, default_value_t = EvaluatorName::Ber)]
    evaluator: EvaluatorName,
    /// Pilot Eb/N0 (dB) of the BER evaluator.
    #[arg(long, default_value_t = 2.0)]
    pilot_snr: f64,
    /// Frames per BER evaluation.
    #[arg(long, default_value_t = 10_000)]
    frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CRC generator with its leading term, e.g. 0x107.
    #[arg(long)]
    crc_poly: Option<String>,
    /// Spec output; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Design log CSV (step, pruned unit, metric).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionName {
    Ebn0,
    Esn0,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    decoder: DecoderOpts,
    #[arg(long, default_value_t = 0.0)]
    snr_start: f64,
    #[arg(long, default_value_t = 4.0)]
    snr_stop: f64,
    #[arg(long, default_value_t = 0.5)]
    snr_step: f64,
    #[arg(long, value_enum, default_value_t = ConventionName::Ebn0)]
    snr_convention: ConventionName,
    #[arg(long, default_value_t = 100_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 100)]
    max_frame_errors: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Send the all-zero codeword.
    #[arg(long)]
    czero: bool,
    /// Noise stream tag; runs with equal tags and seeds see the same noise.
    #[arg(long, default_value = "")]
    crn_tag: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_spec(path: &Path) -> Result<CodeSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_spec(&text).with_context(|| format!("loading spec {}", path.display()))
}

fn open_input(path: Option<&Path>) -> Result<Box<dyn BufRead>> {
    Ok(match path {
        Some(p) => Box::new(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?)),
        None => Box::new(BufReader::new(io::stdin())),
    })
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn encode(args: EncodeArgs) -> Result<()> {
    let spec = read_spec(&args.spec)?;
    let data = match args.random {
        Some(count) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..count).map(|_| (0..spec.k()).map(|_| rng.gen_range(0..2)).collect()).collect()
        }
        None => frames::read_bits(open_input(args.input.as_deref())?.as_mut(), args.format, spec.k())?,
    };
    if let Some(p) = &args.data_out {
        let mut w = open_output(Some(p))?;
        frames::write_bits(w.as_mut(), args.format, &data)?;
        w.flush()?;
    }
    let codewords = data
        .iter()
        .enumerate()
        .map(|(i, d)| encode_qc(&spec, d).with_context(|| format!("frame {}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = open_output(args.out.as_deref())?;
    frames::write_bits(out.as_mut(), args.format, &codewords)?;
    out.flush()?;
    Ok(())
}

fn decode(args: DecodeArgs) -> Result<()> {
    let spec = read_spec(&args.spec)?;
    let kind = args.decoder.kind();
    let mut dec = kind.build(&spec)?;
    let llrs = frames::read_llrs(open_input(args.llrs.as_deref())?.as_mut(), args.llr_format, spec.block_len())?;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "frame,decisions,boxplus,additions,unit_updates,ops,iterations,converged")?;
    for (i, frame) in llrs.iter().enumerate() {
        let res = dec.decode(frame).with_context(|| format!("frame {}", i + 1))?;
        let bits: String = res.data.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            i + 1,
            bits,
            res.ops.boxplus,
            res.ops.additions,
            res.ops.unit_updates,
            res.ops.total(),
            res.iterations,
            res.converged
        )?;
    }
    out.flush()?;
    Ok(())
}

fn analyze_cmd(args: AnalyzeArgs) -> Result<()> {
    let spec = read_spec(&args.spec)?;
    if args.c_max < 2 {
        bail!("--c-max must be at least 2");
    }
    let report = analyze(&spec, args.c_max)?;
    let girth = report.girth.map_or("none".to_string(), |g| g.to_string());
    let mut out = open_output(args.out.as_deref())?;
    writeln!(
        out,
        "# lengths in check traversals; one class per proto walk, each standing for Q = {} lifted cycles",
        spec.lift_q
    )?;
    writeln!(out, "length,class_count,girth")?;
    for (len, count) in &report.counts {
        writeln!(out, "{len},{count},{girth}")?;
    }
    writeln!(out, "# witness: {}", report.witness_line())?;
    out.flush()?;
    Ok(())
}

fn design(args: DesignArgs) -> Result<()> {
    if args.n == 0 || args.n > 20 {
        bail!("--n must be in 1..=20");
    }
    let len = 1usize << args.n;
    let k = (args.rate * len as f64).round() as usize;
    if k == 0 || k > len {
        bail!("rate {} gives K_proto = {k} for 2^n = {len}", args.rate);
    }
    let method = match args.method {
        MethodName::Bhatta => Method::Bhattacharyya {
            erasure: args.param.unwrap_or(0.5),
        },
        MethodName::Ga => Method::GaussianApprox {
            snr_db: args.param.unwrap_or(2.0),
        },
    };
    let frozen = select_frozen(&profile(args.n, method)?, k)?;
    let shifts = match args.shifts {
        _ if args.q == 1 => ShiftBaseMatrix::zeros(args.n),
        ShiftInit::Zero => ShiftBaseMatrix::zeros(args.n),
        ShiftInit::Random => random_shifts(args.n, args.q, args.seed),
        ShiftInit::Hill => {
            let start = CodeSpec::new(args.n, args.q, frozen.clone(), random_shifts(args.n, args.q, args.seed))?;
            let cfg = HillClimbConfig {
                budget: args.budget,
                c_max: args.c_max,
                shift_samples: None,
                seed: args.seed,
            };
            let res = hill_climb_shifts(&start, &cfg)?;
            eprintln!(
                "hill climb: {} evaluations, {} accepted, cycles {:?} -> {:?}",
                res.evaluations,
                res.accepted,
                res.initial.vector(),
                res.report.vector()
            );
            res.shifts
        }
    };
    let crc = args
        .crc_poly
        .as_deref()
        .map(|s| {
            let digits = s.trim_start_matches("0x").trim_start_matches("0X");
            let poly = u64::from_str_radix(digits, 16).with_context(|| format!("bad CRC polynomial {s:?}"))?;
            Ok::<_, anyhow::Error>(Crc::new(poly)?)
        })
        .transpose()?;
    let mut spec = CodeSpec::new(args.n, args.q, frozen, shifts)?.with_crc(crc);
    spec.check()?;

    eprintln!("frozen set by {method}, K_proto = {k}");
    let log;
    if args.prune > 0.0 {
        let evaluator: Box<dyn PruneEvaluator> = match args.evaluator {
            EvaluatorName::Proxy => Box::new(CycleProxy { c_max: args.c_max }),
            EvaluatorName::Ber => {
                let mut ev = BerEvaluator::new(args.pilot_snr, args.seed);
                ev.frames = args.frames;
                Box::new(ev)
            }
        };
        let trace = greedy_prune(&spec, args.prune, evaluator.as_ref())?;
        log = trace.to_csv();
        if let Some(last) = trace.final_spec() {
            spec = last.clone();
        }
    } else {
        log = "step,pruned_unit,metric\n".to_string();
    }

    let mut out = open_output(args.out.as_deref())?;
    out.write_all(save_spec(&spec).as_bytes())?;
    out.flush()?;
    match &args.log {
        Some(p) => fs::write(p, log).with_context(|| format!("writing {}", p.display()))?,
        None => eprint!("{log}"),
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let spec = read_spec(&args.spec)?;
    let mut cfg = SimConfig::new(spec, args.decoder.kind());
    cfg.snr_db = snr_grid(args.snr_start, args.snr_stop, args.snr_step)?;
    cfg.convention = match args.snr_convention {
        ConventionName::Ebn0 => SnrConvention::EbN0,
        ConventionName::Esn0 => SnrConvention::EsN0,
    };
    cfg.max_frames = args.max_frames;
    cfg.max_frame_errors = args.max_frame_errors;
    cfg.seed = args.seed;
    cfg.all_zero = args.czero;
    cfg.crn_tag = args.crn_tag;
    let table = sweep(&cfg)?;
    let mut out = open_output(args.out.as_deref())?;
    out.write_all(table.to_csv().as_bytes())?;
    out.flush()?;
    for p in table.points.iter().filter(|p| p.unreliable) {
        eprintln!("warning: {} dB has only {} bit errors", p.snr_db, p.bit_errs);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Design(a) => design(a),
        Command::Simulate(a) => simulate(a),
    }
}
