use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nptmark_core::attacks::{AttackKind, AttackSpec};
use nptmark_core::embed::{self, default_stride, host_digest, Logo, Placement, PlacementKind, Region};
use nptmark_core::extract::{
    default_known_row_indices, estimate_logo_size, extract_nonblind, extract_quasiblind_bottom,
    DetectedRegion, ExtractionReport, KnownRows, QuasiBlindOptions,
};
use nptmark_core::face::{
    evaluate_split, extract_features_with, preprocess, FeatureTransform, Gallery, LabeledImage,
    SplitRole, FACE_SIDE,
};
use nptmark_core::sweep::robustness_sweep;
use nptmark_core::transforms::NptOperator;
use nptmark_core::image::quantize_matrix;
use nptmark_core::{Matrix, SampleDepth};

use crate::error::{Error, Result};
use crate::gallery::{load_gallery, save_gallery};
use crate::io::{load_gray, save_gray, write_atomic};
use crate::sidecar::{parse_list, parse_region, report_text, EmbedMeta};
use crate::sweep::{parse_fill, rows_to_csv, SweepConfig};

/// Watermark grayscale images with the natural preserving transform.
#[derive(Debug, Parser)]
#[command(name = "nptmark", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hide a logo in a square host image.
    Embed(EmbedArgs),
    /// Recover a logo from a watermarked image.
    Extract(ExtractArgs),
    /// Degrade an image with noise, cropping or block compression.
    Attack(AttackArgs),
    /// Embed, attack and extract over a configured grid; write a CSV table.
    Sweep(SweepArgs),
    /// Hartley-coefficient face matching.
    Recognize {
        #[command(subcommand)]
        command: RecognizeCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlacementArg {
    Bottom,
    Topleft,
    Optimum,
}

impl From<PlacementArg> for PlacementKind {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Bottom => PlacementKind::Bottom,
            PlacementArg::Topleft => PlacementKind::TopLeft,
            PlacementArg::Optimum => PlacementKind::Optimum,
        }
    }
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long)]
    host: PathBuf,
    #[arg(long)]
    logo: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum)]
    placement: PlacementArg,
    /// Scan stride for the optimum placement [default: 1 up to 128 pixels, else 4].
    #[arg(long)]
    stride: Option<usize>,
    /// Watermarked image; `.pfm` keeps full precision, `.pgm` rounds to 8 bits.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Bottom placement: also write the host rows a quasi-blind extractor needs.
    #[arg(long)]
    known_rows_out: Option<PathBuf>,
    /// Comma-separated row indices for `--known-rows-out` [default: evenly spaced].
    #[arg(long)]
    known_row_indices: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Nonblind,
    Quasiblind,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    watermarked: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Original host (non-blind mode).
    #[arg(long)]
    host: Option<PathBuf>,
    /// Known host rows (quasi-blind mode).
    #[arg(long)]
    known_rows: Option<PathBuf>,
    #[arg(long)]
    known_row_indices: Option<String>,
    /// Sidecar written by `embed --meta`.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Geometry without a sidecar.
    #[arg(long, value_enum)]
    placement: Option<PlacementArg>,
    /// Logo size as ROWSxCOLS.
    #[arg(long)]
    logo_dims: Option<String>,
    /// Embedding region as row,col,rows,cols.
    #[arg(long)]
    region: Option<String>,
    /// Reference logo; enables the NCORR field of the report.
    #[arg(long)]
    logo: Option<PathBuf>,
    #[arg(long)]
    out_logo: PathBuf,
    /// Quasi-blind: the reconstructed host.
    #[arg(long)]
    out_host: Option<PathBuf>,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = QuasiBlindOptions::default().tamper_tolerance)]
    tamper_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttackKindArg {
    Noise,
    Crop,
    Compress,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: AttackKindArg,
    #[arg(long)]
    sigma: Option<f64>,
    /// row,col,rows,cols
    #[arg(long)]
    rect: Option<String>,
    #[arg(long, default_value = "zero")]
    fill: String,
    #[arg(long)]
    quality: Option<u8>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    host: PathBuf,
    #[arg(long)]
    logo: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// TOML file listing placements and attacks.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_csv: PathBuf,
}

#[derive(Debug, Subcommand)]
enum RecognizeCommand {
    /// Enroll every image under DIR/<label>/ into a gallery.
    Enroll {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        corner_size: usize,
        #[arg(long)]
        gallery: PathBuf,
    },
    /// Print the nearest gallery label and its distance.
    Match {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        gallery: PathBuf,
    },
    /// Rank-1 accuracy per corner size over a train/test split.
    Eval {
        #[arg(long)]
        dir: PathBuf,
        /// Lines of `<path relative to DIR><whitespace>train|test`.
        #[arg(long)]
        split: PathBuf,
        /// Comma-separated corner sizes.
        #[arg(long)]
        sizes: String,
        /// Use psi(alpha) instead of the Hartley matrix.
        #[arg(long)]
        npt_alpha: Option<f64>,
        /// Accuracy table file; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `argv` and run; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("nptmark: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed(args) => cmd_embed(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Recognize { command } => cmd_recognize(command),
    }
}

fn load_square(path: &Path) -> Result<Matrix> {
    square(path, load_gray(path)?.into_pixels())
}

fn square(path: &Path, pixels: Matrix) -> Result<Matrix> {
    if !pixels.is_square() {
        return Err(Error::Usage(format!(
            "{}: host must be square, got {}x{}",
            path.display(),
            pixels.rows(),
            pixels.cols()
        )));
    }
    Ok(pixels)
}

fn load_logo(path: &Path) -> Result<Logo> {
    Ok(Logo::new(load_gray(path)?.into_pixels())?)
}

fn operator(order: usize, alpha: f64) -> Result<NptOperator> {
    NptOperator::new(order, alpha).map_err(|e| Error::Usage(e.to_string()))
}

fn cmd_embed(args: EmbedArgs) -> Result<()> {
    let host = load_square(&args.host)?;
    let logo = load_logo(&args.logo)?;
    let n = host.rows();
    let op = operator(n, args.alpha)?;
    let kind = PlacementKind::from(args.placement);
    if args.known_rows_out.is_some() && kind != PlacementKind::Bottom {
        return Err(Error::Usage("--known-rows-out needs bottom placement".into()));
    }
    let stride = args.stride.unwrap_or_else(|| default_stride(n));
    let wm = embed::embed(&host, &logo, &op, kind, stride)?;

    let known = match &args.known_rows_out {
        Some(_) => {
            let r = wm.placement.region.rows;
            let indices = match &args.known_row_indices {
                Some(text) => parse_list(text)?,
                None => default_known_row_indices(n, r),
            };
            if indices.len() != r || indices.iter().any(|&i| i >= n - r) {
                return Err(Error::Usage(format!(
                    "need {r} known row indices below {}",
                    n - r
                )));
            }
            Some(KnownRows::from_host(&host, indices))
        }
        None => None,
    };

    save_gray(&args.out, &wm.data)?;
    if let (Some(path), Some(k)) = (&args.known_rows_out, &known) {
        save_gray(path, &k.rows)?;
    }
    if let Some(path) = &args.meta {
        let meta = EmbedMeta {
            placement: wm.placement,
            alpha: args.alpha,
            order: n,
            host_digest: wm.host_digest,
            known_row_indices: known.map(|k| k.indices),
        };
        write_atomic(path, meta.to_text().as_bytes())?;
    }
    Ok(())
}

fn parse_dims(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Usage(format!("--logo-dims expects ROWSxCOLS, got '{text}'"));
    let (m, n) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let m = m.trim().parse::<usize>().map_err(|_| bad())?;
    let n = n.trim().parse::<usize>().map_err(|_| bad())?;
    if m == 0 || n == 0 {
        return Err(bad());
    }
    Ok((m, n))
}

fn geometry_from_flags(
    args: &ExtractArgs,
    order: usize,
    watermarked: &Matrix,
    depth: SampleDepth,
    host: Option<&Matrix>,
) -> Result<Placement> {
    let (kind, dims) = match (args.placement, &args.logo_dims) {
        (Some(p), Some(d)) => (PlacementKind::from(p), parse_dims(d)?),
        _ => {
            return Err(Error::Usage(
                "extract needs --meta, or --placement and --logo-dims".into(),
            ))
        }
    };
    let (m, n) = dims;
    let region = match &args.region {
        Some(text) => parse_region(text)?,
        None => match kind {
            PlacementKind::Bottom => {
                if (m * n) % order != 0 {
                    return Err(Error::Usage(format!(
                        "{m}x{n} logo does not fill whole rows of a {order}-pixel host"
                    )));
                }
                let r = m * n / order;
                if r > order {
                    return Err(Error::Usage("logo larger than host".into()));
                }
                Region {
                    row: order - r,
                    col: 0,
                    rows: r,
                    cols: order,
                }
            }
            PlacementKind::TopLeft => {
                let side = m.max(n);
                Region {
                    row: 0,
                    col: 0,
                    rows: side,
                    cols: side,
                }
            }
            PlacementKind::Optimum => {
                let host = host.ok_or_else(|| {
                    Error::Usage("optimum placement without a sidecar needs --region".into())
                })?;
                // Restored host pixels went through the watermarked file's
                // sample format; compare at that precision.
                let stored = match depth {
                    SampleDepth::Float => host.map(|v| v as f32 as f64),
                    SampleDepth::Eight => quantize_matrix(host),
                };
                match estimate_logo_size(watermarked, &stored)? {
                    DetectedRegion::Block(region) => region,
                    DetectedRegion::Bottom { .. } => {
                        return Err(Error::Usage(
                            "image looks bottom-embedded, not block-embedded".into(),
                        ))
                    }
                }
            }
        },
    };
    Ok(Placement {
        kind,
        region,
        logo_rows: m,
        logo_cols: n,
    })
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let loaded = load_gray(&args.watermarked)?;
    let depth = loaded.depth();
    let watermarked = square(&args.watermarked, loaded.into_pixels())?;
    let n = watermarked.rows();
    let op = operator(n, args.alpha)?;
    let meta = match &args.meta {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let meta = EmbedMeta::parse(&text)?;
            if meta.order != n {
                return Err(Error::Usage(format!(
                    "sidecar describes a {}-pixel image, watermarked image has {n}",
                    meta.order
                )));
            }
            if meta.alpha != args.alpha {
                return Err(Error::Usage(format!(
                    "--alpha {} differs from the sidecar's {}",
                    args.alpha, meta.alpha
                )));
            }
            Some(meta)
        }
        None => None,
    };
    if args.out_host.is_some() && args.mode == ModeArg::Nonblind {
        return Err(Error::Usage("--out-host applies to quasiblind mode".into()));
    }
    let reference = args.logo.as_deref().map(load_logo).transpose()?;

    let (report, reconstructed) = match args.mode {
        ModeArg::Nonblind => {
            let path = args
                .host
                .as_deref()
                .ok_or_else(|| Error::Usage("nonblind mode needs --host".into()))?;
            let host = load_square(path)?;
            if host.rows() != n {
                return Err(Error::Usage("host and watermarked sizes differ".into()));
            }
            if let Some(meta) = &meta {
                if host_digest(&host) != meta.host_digest {
                    return Err(Error::Usage(format!(
                        "{} is not the host recorded in the sidecar",
                        path.display()
                    )));
                }
            }
            let placement = match &meta {
                Some(m) => m.placement,
                None => geometry_from_flags(&args, n, &watermarked, depth, Some(&host))?,
            };
            (extract_nonblind(&watermarked, &placement, &host, &op)?, None)
        }
        ModeArg::Quasiblind => {
            let path = args
                .known_rows
                .as_deref()
                .ok_or_else(|| Error::Usage("quasiblind mode needs --known-rows".into()))?;
            let rows = load_gray(path)?.into_pixels();
            let placement = match &meta {
                Some(m) => m.placement,
                None => geometry_from_flags(&args, n, &watermarked, depth, None)?,
            };
            let r = placement.region.rows;
            let indices = match (&args.known_row_indices, meta.as_ref().and_then(|m| m.known_row_indices.clone())) {
                (Some(text), _) => parse_list(text)?,
                (None, Some(idx)) => idx,
                (None, None) => default_known_row_indices(n, r),
            };
            let known = KnownRows { indices, rows };
            let options = QuasiBlindOptions {
                tamper_tolerance: args.tamper_tolerance,
            };
            let report = extract_quasiblind_bottom(&watermarked, &placement, &known, &op, options)?;
            let mut host = watermarked.clone();
            if let Some(hidden) = &report.recovered_host_region {
                host.set_block(0, 0, hidden);
            }
            (report, Some(host))
        }
    };
    let report: ExtractionReport = match &reference {
        Some(logo) => report.with_reference(logo)?,
        None => report,
    };
    let text = report_text(&report, args.alpha);

    save_gray(&args.out_logo, report.logo.pixels())?;
    if let (Some(path), Some(host)) = (&args.out_host, &reconstructed) {
        save_gray(path, host)?;
    }
    match &args.report {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_attack(args: AttackArgs) -> Result<()> {
    let image = load_gray(&args.input)?.into_pixels();
    let kind = match args.kind {
        AttackKindArg::Noise => AttackKind::GaussianNoise {
            sigma: args
                .sigma
                .ok_or_else(|| Error::Usage("noise needs --sigma".into()))?,
        },
        AttackKindArg::Crop => AttackKind::Crop {
            rect: parse_region(
                args.rect
                    .as_deref()
                    .ok_or_else(|| Error::Usage("crop needs --rect".into()))?,
            )?,
            fill: parse_fill(&args.fill)?,
        },
        AttackKindArg::Compress => AttackKind::Compress {
            quality: args
                .quality
                .ok_or_else(|| Error::Usage("compress needs --quality".into()))?,
        },
    };
    let spec = AttackSpec {
        kind,
        seed: args.seed,
    };
    let out = spec.apply(&image).map_err(|e| Error::Usage(e.to_string()))?;
    save_gray(&args.out, &out)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let plan = SweepConfig::parse(&text)?.plan()?;
    let host = load_square(&args.host)?;
    let logo = load_logo(&args.logo)?;
    let n = host.rows();
    let op = operator(n, args.alpha)?;
    let stride = plan.stride.unwrap_or_else(|| default_stride(n));
    let rows = robustness_sweep(&host, &logo, &op, &plan.placements, &plan.attacks, stride)?;
    write_atomic(&args.out_csv, rows_to_csv(&rows).as_bytes())
}

fn is_image(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("pgm" | "pfm" | "png")
    )
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

/// Images under `dir/<label>/`, sorted by path.
fn labeled_images(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for sub in sorted_entries(dir)? {
        if !sub.is_dir() {
            continue;
        }
        let label = sub
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Usage(format!("{}: label is not UTF-8", sub.display())))?
            .to_string();
        for file in sorted_entries(&sub)? {
            if file.is_file() && is_image(&file) {
                out.push((label.clone(), file));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Usage(format!(
            "{}: no images found under <label>/ subdirectories",
            dir.display()
        )));
    }
    Ok(out)
}

fn face_features(path: &Path, s: usize, transform: &FeatureTransform) -> Result<nptmark_core::face::FaceFeature> {
    let image = preprocess(load_gray(path)?.pixels())?;
    Ok(extract_features_with(&image, s, transform)?)
}

fn cmd_recognize(command: RecognizeCommand) -> Result<()> {
    let hartley = FeatureTransform::hartley(FACE_SIDE)?;
    match command {
        RecognizeCommand::Enroll {
            dir,
            corner_size,
            gallery,
        } => {
            let mut g = Gallery::new(corner_size);
            for (label, path) in labeled_images(&dir)? {
                g.enroll(label, face_features(&path, corner_size, &hartley)?)?;
            }
            save_gallery(&gallery, &g)
        }
        RecognizeCommand::Match { image, gallery } => {
            let g = load_gallery(&gallery)?;
            let query = face_features(&image, g.corner_size(), &hartley)?;
            let m = g.best_match(&query)?;
            println!("label={}\ndistance={:.6}", m.label, m.distance);
            Ok(())
        }
        RecognizeCommand::Eval {
            dir,
            split,
            sizes,
            npt_alpha,
            out,
        } => {
            let sizes = parse_list(&sizes)?;
            if sizes.is_empty() {
                return Err(Error::Usage("--sizes lists no corner sizes".into()));
            }
            let text = fs::read_to_string(&split).map_err(|e| Error::io(&split, e))?;
            let mut dataset = Vec::new();
            let mut roles = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let bad = || Error::Usage(format!("{}:{}: expected '<path> train|test'", split.display(), lineno + 1));
                let (rel, role) = line.rsplit_once(char::is_whitespace).ok_or_else(bad)?;
                let role = match role {
                    "train" => SplitRole::Train,
                    "test" => SplitRole::Test,
                    _ => return Err(bad()),
                };
                let rel = Path::new(rel.trim());
                let label = rel
                    .parent()
                    .and_then(|p| p.to_str())
                    .filter(|p| !p.is_empty())
                    .ok_or_else(bad)?
                    .to_string();
                dataset.push(LabeledImage {
                    label,
                    image: load_gray(&dir.join(rel))?.into_pixels(),
                });
                roles.push(role);
            }
            let transform = match npt_alpha {
                Some(alpha) => FeatureTransform::Npt(operator(FACE_SIDE, alpha)?),
                None => hartley,
            };
            let table = evaluate_split(&dataset, &roles, &sizes, &transform)?;
            let mut csv = String::from("corner_size,correct,total,accuracy\n");
            for row in table {
                let _ = writeln!(
                    csv,
                    "{},{},{},{:.6}",
                    row.corner_size, row.correct, row.total, row.accuracy
                );
            }
            match out {
                Some(path) => write_atomic(&path, csv.as_bytes()),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}
