//! `sar3d`: simulate, image and inspect FMCW MIMO-SAR data from the shell.
//!
//! Lengths on the command line are in millimetres. Usage errors exit with
//! status 2, runtime failures with status 1 and a one-line message.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sar3d_core::analysis::{psf_metrics, theoretical_resolution};
use sar3d_core::backprojection::{backproject, VoxelGrid};
use sar3d_core::io::{
    export_slices, parse_config, read_beat_cube, read_volume, write_beat_cube, write_volume,
    RunConfig, DEFAULT_FLOOR_DB, EXAMPLE_CONFIG,
};
use sar3d_core::{
    add_noise, reconstruct, simulate_beat, BeatCube, ImageVolume, ReconParams, Window,
};

#[derive(Parser)]
#[command(
    name = "sar3d",
    version,
    about = "FMCW MIMO-SAR simulation and 3D imaging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a beat cube from a config.
    Simulate {
        /// Config file, or `example` for the built-in one.
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `[noise] snr_db`; `inf` disables noise.
        #[arg(long)]
        snr_db: Option<f64>,
        /// Overrides `[noise] seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Range-migration reconstruction; also writes `<out>.params`.
    Reconstruct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Take recon defaults from this config before applying flags.
        #[arg(long)]
        config: Option<String>,
        #[command(flatten)]
        recon: ReconFlags,
    },
    /// Exact backprojection onto the range-migration voxel grid, cropped
    /// to the `--z lo,hi` window.
    Backproject {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Depth window `lo,hi` in mm.
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<f64>,
        #[command(flatten)]
        recon: ReconFlags,
    },
    /// Print peak, half-power widths and sidelobe ratio of a volume.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write one graymap per range cut.
    Slices {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated depths in mm.
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_FLOOR_DB, allow_negative_numbers = true)]
        floor_db: f64,
    },
    /// Print theoretical range and cross-range resolution.
    Resolution {
        #[arg(long)]
        config: String,
        /// Range in mm for the cross-range figures; defaults to the first
        /// scatterer.
        #[arg(long)]
        z: Option<f64>,
    },
}

#[derive(Args)]
struct ReconFlags {
    #[arg(long)]
    nz: Option<usize>,
    /// `n` or `nx,ny`.
    #[arg(long, value_parser = parse_zero_pad)]
    zero_pad: Option<[usize; 2]>,
    /// `none` or `raised-cosine`.
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
}

impl ReconFlags {
    fn apply(&self, mut p: ReconParams) -> ReconParams {
        if let Some(nz) = self.nz {
            p.nz = nz;
        }
        if let Some(pad) = self.zero_pad {
            p.zero_pad = pad;
        }
        if let Some(w) = self.window {
            p.window = w;
        }
        p
    }
}

fn mm_to_m(values: &[f64]) -> Vec<f64> {
    values.iter().map(|mm| mm * 1e-3).collect()
}

fn parse_zero_pad(s: &str) -> std::result::Result<[usize; 2], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{v}` is not a count"))
        })
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [n] => Ok([n, n]),
        [x, y] => Ok([x, y]),
        _ => Err("expected `n` or `nx,ny`".into()),
    }
}

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    Window::parse(s).ok_or_else(|| format!("unknown window `{s}`"))
}

fn load_config(source: &str) -> Result<RunConfig> {
    let text = if source == "example" {
        EXAMPLE_CONFIG.as_bytes().to_vec()
    } else {
        std::fs::read(source).with_context(|| format!("reading {source}"))?
    };
    parse_config(&text).with_context(|| format!("config {source}"))
}

fn load_cube(path: &Path) -> Result<BeatCube> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_beat_cube(&mut BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn load_volume(path: &Path) -> Result<ImageVolume> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_volume(&mut BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn save_volume(volume: &ImageVolume, path: &Path) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write_volume(volume, &mut w)?;
    w.flush()?;
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".params");
    PathBuf::from(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            snr_db,
            seed,
        } => {
            let cfg = load_config(&config)?;
            let cube = simulate_beat(&cfg.scene, &cfg.chirp, &cfg.scan, &cfg.layout)?;
            let snr = snr_db.unwrap_or(cfg.noise.snr_db);
            let cube = add_noise(&cube, snr, seed.unwrap_or(cfg.noise.seed))?;
            let mut w = BufWriter::new(
                File::create(&out).with_context(|| format!("creating {}", out.display()))?,
            );
            write_beat_cube(&cube, &mut w)?;
            w.flush()?;
        }
        Command::Reconstruct {
            input,
            out,
            config,
            recon,
        } => {
            let base = match config {
                Some(c) => load_config(&c)?.recon,
                None => ReconParams::default(),
            };
            let result = reconstruct(&load_cube(&input)?, &recon.apply(base))?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            save_volume(&result.volume, &out)?;
            std::fs::write(sidecar(&out), result.params_text())?;
        }
        Command::Backproject {
            input,
            out,
            z,
            recon,
        } => {
            let [lo, hi] = mm_to_m(&z)[..] else {
                bail!("--z takes exactly two depths `lo,hi`");
            };
            if !(hi >= lo) {
                bail!("--z window is empty: {} > {} mm", lo * 1e3, hi * 1e3);
            }
            let cube = load_cube(&input)?;
            let grid = VoxelGrid::of_volume(
                &reconstruct(&cube, &recon.apply(ReconParams::default()))?.volume,
            );
            let dz = grid.spacing[2];
            let first = ((lo - grid.origin[2]) / dz).ceil();
            let last = ((hi - grid.origin[2]) / dz).floor();
            if first < 0.0 || last >= grid.shape[2] as f64 || last < first {
                bail!(
                    "--z window {}..{} mm has no voxels inside the imaged depth range",
                    lo * 1e3,
                    hi * 1e3
                );
            }
            let cropped = VoxelGrid {
                shape: [grid.shape[0], grid.shape[1], (last - first) as usize + 1],
                origin: [grid.origin[0], grid.origin[1], grid.origin[2] + first * dz],
                ..grid
            };
            save_volume(&backproject(&cube, &cropped)?, &out)?;
        }
        Command::Analyze { input } => {
            print!("{}", psf_metrics(&load_volume(&input)?)?.to_text());
        }
        Command::Slices {
            input,
            out,
            z,
            floor_db,
        } => {
            for p in export_slices(&load_volume(&input)?, &mm_to_m(&z), floor_db, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Resolution { config, z } => {
            let cfg = load_config(&config)?;
            let range = match z {
                Some(mm) => mm * 1e-3,
                None => match cfg.scene.scatterers.first() {
                    Some(s) => s.position[2] - cfg.scan.z_plane(),
                    None => bail!("config has no scatterers; pass --z"),
                },
            };
            let r = theoretical_resolution(&cfg.chirp, &cfg.scan, range)?;
            let mm = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{:.2}", v * 1e3));
            println!("range_mm: {:.2}", range * 1e3);
            println!("dz_mm: {:.2}", r.dz * 1e3);
            println!("dx_mm: {}", mm(r.dx));
            println!("dy_mm: {}", mm(r.dy));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("sar3d: {msg}");
            ExitCode::from(1)
        }
    }
}
