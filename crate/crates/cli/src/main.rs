use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavemod::sim::runner::{run_ber, run_papr, run_psd, write_csv, write_plot_data};
use wavemod::sim::{MetricKind, ScenarioConfig};
use wavemod::Error;

/// Monte Carlo BER, PSD and PAPR experiments for the wavemod modems.
#[derive(Parser, Debug)]
#[command(name = "wavemod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bit error rate over an Eb/N0 grid, with the closed-form OFDM reference.
    Ber(Common),
    /// Welch power spectral density of a frame stream, normalized to the in-band plateau.
    Psd(Common),
    /// CCDF of the per-frame peak-to-average power ratio.
    Papr(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// ofdm, gfdm, gfdm_oqam_circular, linear_gfdm or fbmc
    #[arg(long)]
    waveform: Option<String>,
    /// awgn, tifs or tvfs
    #[arg(long)]
    channel: Option<String>,
    /// Eb/N0 grid in dB: comma-separated list or start:step:stop
    #[arg(long, allow_hyphen_values = true)]
    ebn0: Option<String>,
    #[arg(long)]
    frames: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Key-value file; its entries override the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write whitespace-separated columns for gnuplot (next to --out, with a .dat extension)
    #[arg(long)]
    emit_plot_data: bool,
    /// Any other config key, as key=value; may be repeated
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(metric: MetricKind, args: &Common) -> Result<ScenarioConfig, Error> {
    let mut cfg = ScenarioConfig {
        metric,
        ..Default::default()
    };
    let flags = [
        ("waveform", &args.waveform),
        ("channel", &args.channel),
        ("ebn0_grid_db", &args.ebn0),
        ("frames", &args.frames),
        ("seed", &args.seed),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    for pair in &args.set {
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::Config {
            field: "set".into(),
            reason: format!("expected key=value, got `{pair}`"),
        })?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(out) = &args.out {
        cfg.output_path = Some(out.clone());
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            field: "config".into(),
            reason: format!("cannot read {}: {e}", path.display()),
        })?;
        cfg.apply_text(&text)?;
    }
    if cfg.metric != metric {
        return Err(Error::Config {
            field: "metric".into(),
            reason: format!("config file asks for `{}` but the subcommand is `{}`", cfg.metric.name(), metric.name()),
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn plot_path(out: &Path) -> PathBuf {
    out.with_extension("dat")
}

fn run(metric: MetricKind, args: &Common) -> Result<(), Error> {
    let cfg = build_config(metric, args)?;
    let curve = match metric {
        MetricKind::Ber => {
            let report = run_ber(&cfg)?;
            for p in &report.points {
                eprintln!(
                    "Eb/N0 {:>6.2} dB: {} errors / {} bits in {} frames (theory {:.3e})",
                    p.ebn0_db, p.tally.errors, p.tally.total, p.frames, p.theory
                );
            }
            report.curve
        }
        MetricKind::Psd => {
            let report = run_psd(&cfg)?;
            for k in [1.0, 2.0, 8.0, 32.0] {
                eprintln!("suppression {k:>4} subcarriers from the band edge: {:.1} dB", report.suppression_at(k)?);
            }
            report.curve
        }
        MetricKind::Papr => run_papr(&cfg)?.curve,
    };
    match &cfg.output_path {
        Some(path) => {
            write_csv(&curve, path)?;
            eprintln!("wrote {}", path.display());
            if args.emit_plot_data {
                let dat = plot_path(path);
                write_plot_data(&curve, &dat)?;
                eprintln!("wrote {}", dat.display());
            }
        }
        None if args.emit_plot_data => {
            let mut buf = Vec::new();
            curve.write_plot_data(&mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
        }
        None => print!("{}", curve.to_csv_string()),
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidParameter { .. } => 2,
        e if e.is_numerical() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (metric, args) = match &cli.command {
        Command::Ber(a) => (MetricKind::Ber, a),
        Command::Psd(a) => (MetricKind::Psd, a),
        Command::Papr(a) => (MetricKind::Papr, a),
    };
    match run(metric, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavemod: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> (MetricKind, Common) {
        let cli = Cli::try_parse_from(argv).unwrap();
        match cli.command {
            Command::Ber(a) => (MetricKind::Ber, a),
            Command::Psd(a) => (MetricKind::Psd, a),
            Command::Papr(a) => (MetricKind::Papr, a),
        }
    }

    #[test]
    fn flags_reach_the_config() {
        let (m, a) = parse(&[
            "wavemod", "ber", "--waveform", "fbmc", "--channel", "tvfs", "--ebn0", "-2,0,2", "--frames", "9",
            "--seed", "4", "--set", "receiver=mmse",
        ]);
        let cfg = build_config(m, &a).unwrap();
        assert_eq!(cfg.waveform.name(), "fbmc");
        assert_eq!(cfg.ebn0_grid_db, vec![-2.0, 0.0, 2.0]);
        assert_eq!((cfg.frames, cfg.seed), (9, 4));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config { field: "x".into(), reason: String::new() }), 2);
        assert_eq!(exit_code(&Error::IllConditionedEqualization { bin: 3, magnitude: 0.0 }), 3);
        assert_eq!(exit_code(&Error::Singular { column: 0, pivot: 0.0 }), 3);
        assert_eq!(exit_code(&Error::Io("disk".into())), 1);
    }

    #[test]
    fn bad_set_pair_names_the_flag() {
        let (m, a) = parse(&["wavemod", "papr", "--set", "frames"]);
        match build_config(m, &a) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "set"),
            other => panic!("{other:?}"),
        }
    }
}
