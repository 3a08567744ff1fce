//! Command-line driver.
//!
//! Subcommands: `plate | wedge | pec-wedge | validate`. A key-value config
//! file selects media, geometry, sweep and integration settings; a handful
//! of flags override single entries. Results are CSV on stdout or at
//! `--output`, byte-identical across reruns for a fixed config and seed.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 tolerance miss in strict mode.

mod commands;
mod config;

use commands::{run_pec_wedge, run_plate, run_validate, run_wedge, CommandOutcome, FaultInjection};
use config::{parse_config, RunConfig};

const USAGE: &str = "usage: cpmse <plate|wedge|pec-wedge|validate> [options]

options:
  --config <path>       key-value run configuration (single source of truth)
  --output <path>       write CSV here instead of stdout
  --tolerance <x>       scale all per-order tolerances by x
  --max-order <n>       highest expansion order to evaluate
  --seed <n>            integrator seed
  --threads <n>         worker threads for sweep rows / replicates
  --strict              exit 3 when any integral misses its tolerance
  --inject-fault frame  (validate) corrupt a tangent frame to prove detection
";

fn fail_config(msg: &str) -> ! {
    eprintln!("configuration error: {msg}");
    std::process::exit(2);
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        print!("{USAGE}");
        std::process::exit(if args.is_empty() { 2 } else { 0 });
    }
    let command = args[0].clone();

    let mut cfg = RunConfig::default();
    let mut output_override: Option<String> = None;
    let mut strict_flag = false;
    let mut fault = FaultInjection::None;
    let mut pending: Vec<(String, String)> = Vec::new();

    let mut it = args[1..].iter();
    while let Some(arg) = it.next() {
        let mut take = |name: &str| -> String {
            it.next()
                .unwrap_or_else(|| fail_config(&format!("{name} needs a value")))
                .clone()
        };
        match arg.as_str() {
            "--config" => {
                let path = take("--config");
                let text = std::fs::read_to_string(&path)
                    .unwrap_or_else(|e| fail_config(&format!("cannot read {path}: {e}")));
                cfg = parse_config(&text).unwrap_or_else(|e| fail_config(&e));
            }
            "--output" => output_override = Some(take("--output")),
            "--tolerance" => pending.push(("tolerance".into(), take("--tolerance"))),
            "--max-order" => pending.push(("max-order".into(), take("--max-order"))),
            "--seed" => pending.push(("seed".into(), take("--seed"))),
            "--threads" => pending.push(("threads".into(), take("--threads"))),
            "--strict" => strict_flag = true,
            "--inject-fault" => {
                fault = match take("--inject-fault").as_str() {
                    "frame" => FaultInjection::FrameOrthonormality,
                    other => fail_config(&format!("unknown fault `{other}`")),
                }
            }
            other => fail_config(&format!("unknown option `{other}`")),
        }
    }
    // Flag overrides are applied after the config file so the file stays the
    // single source of defaults.
    for (key, value) in pending {
        match key.as_str() {
            "tolerance" => {
                cfg.tolerance_scale = value
                    .parse()
                    .unwrap_or_else(|_| fail_config("--tolerance needs a number"))
            }
            "max-order" => {
                cfg.max_order = value
                    .parse()
                    .unwrap_or_else(|_| fail_config("--max-order needs an integer"))
            }
            "seed" => {
                cfg.seed = value
                    .parse()
                    .unwrap_or_else(|_| fail_config("--seed needs an integer"))
            }
            "threads" => {
                cfg.threads = value
                    .parse()
                    .unwrap_or_else(|_| fail_config("--threads needs an integer"))
            }
            _ => unreachable!(),
        }
    }
    if strict_flag {
        cfg.strict = true;
    }
    if cfg.max_order + 1 > cpmse::quadrature::MAX_CHAIN_POINTS {
        fail_config(&format!(
            "max_order {} beyond the supported chain length",
            cfg.max_order
        ));
    }

    let outcome: Result<CommandOutcome, String> = match command.as_str() {
        "plate" => run_plate(&cfg),
        "wedge" => run_wedge(&cfg),
        "pec-wedge" => run_pec_wedge(&cfg),
        "validate" => run_validate(&cfg, fault),
        other => fail_config(&format!("unknown command `{other}`; see --help")),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => fail_config(&e),
    };

    let text = outcome.lines.join("\n") + "\n";
    match output_override.or(cfg.output.clone()) {
        Some(path) => std::fs::write(&path, &text)
            .unwrap_or_else(|e| fail_config(&format!("cannot write {path}: {e}"))),
        None => print!("{text}"),
    }

    if outcome.failures > 0 {
        std::process::exit(1);
    }
    if cfg.strict && outcome.tolerance_miss {
        std::process::exit(3);
    }
}
