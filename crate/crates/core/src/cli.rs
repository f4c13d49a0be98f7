use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use scpdp_core::area::{AreaReport, DmrEstimate};
use scpdp_core::faultsim::report::trials_to_csv;
use scpdp_core::faultsim::{
    exhaustive_single_fault, run_campaign, CampaignConfig, CoverageReport, FaultMode, InputPolicy,
    Polarity,
};
use scpdp_core::gate::{GateWiring, InputRail, OutputRail, RailExpression};
use scpdp_core::netlist::{
    check_equivalence, expand_dual_rail, parse_netlist, simulate, Simulator,
};
use scpdp_core::sbox::{build_sbox_netlist, check_sbox_netlist, CompositeFieldParams};
use scpdp_core::verify::{
    boolean_difference_tables, check_xor_identities, gate_truth_mismatch,
    nonvalid_propagation_violations, single_fault_exhaustive_gate_with,
};
use scpdp_core::{classify, DualRailNetlist, GateKind, RailPair, SingleRailNetlist};

/// Dual-rail self-checking logic: gate proofs, S-box generation and fault campaigns.
#[derive(Parser, Debug)]
#[command(name = "scpdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustive checks of the gate cells.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Generate or check the composite-field AES S-box netlist.
    Sbox {
        #[command(subcommand)]
        action: SboxAction,
    },
    /// Run a fault-injection campaign and write a coverage report.
    Campaign(CampaignArgs),
    /// Technology-independent transistor estimate.
    Area(AreaArgs),
    /// Evaluate a netlist once, optionally with stuck-at faults.
    Simulate(SimulateArgs),
}

#[derive(Subcommand, Debug)]
enum VerifyWhat {
    /// Truth tables, XOR Boolean differences and single-fault sweeps.
    Gates {
        /// Replace the AND gate's O_bar wiring with a broken variant.
        #[arg(long, hide = true)]
        corrupt_wiring: bool,
    },
}

#[derive(Subcommand, Debug)]
enum SboxAction {
    Emit {
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    Verify {
        /// Netlist file to check instead of the generated one.
        #[arg(long)]
        netlist: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PolaritySel {
    One(Polarity),
    Both,
}

#[derive(Args, Debug, Default)]
struct CampaignArgs {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Netlist path, or `sbox` for the built-in S-box.
    #[arg(long)]
    netlist: Option<String>,
    /// sa0, sa1 or both.
    #[arg(long)]
    polarity: Option<String>,
    /// random or burst.
    #[arg(long)]
    mode: Option<String>,
    /// Fault sizes, e.g. `1-14` or `1,2,8`.
    #[arg(long)]
    sizes: Option<String>,
    /// Patterns per polarity, spread over the sizes.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// random or exhaustive.
    #[arg(long)]
    inputs: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Every site, both polarities, every input vector.
    #[arg(long)]
    single_exhaustive: bool,
    /// Input vectors for --single-exhaustive on netlists too wide to enumerate.
    #[arg(long)]
    vector_budget: Option<u64>,
    /// Write one CSV row per trial to this file.
    #[arg(long)]
    per_trial: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct AreaArgs {
    #[arg(long, default_value = "sbox")]
    netlist: String,
    /// Also print the naive duplication estimate.
    #[arg(long)]
    compare_dmr: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "sbox")]
    netlist: String,
    /// Input vector in hex; primary input `i` is bit `i`.
    #[arg(long)]
    input: String,
    /// `<site>:<0|1>`, repeatable. Sites are net names, `sig@o.inv` style
    /// internal nodes, or `#index`.
    #[arg(long)]
    fault: Vec<String>,
}

enum Status {
    Pass,
    Fail,
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Verify {
            what: VerifyWhat::Gates { corrupt_wiring },
        } => verify_gates(corrupt_wiring),
        Command::Sbox { action } => sbox(action),
        Command::Campaign(args) => campaign(args),
        Command::Area(args) => area(args),
        Command::Simulate(args) => simulate_cmd(args),
    };
    match result {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn verify_gates(corrupt: bool) -> Result<Status> {
    let mut w = GateWiring::SCPDP;
    if corrupt {
        w = w.with_expression(
            GateKind::And,
            OutputRail::OBar,
            RailExpression::new(InputRail::ABar, InputRail::B, InputRail::ABar, InputRail::A),
        );
    }
    let mut ok = true;

    println!("truth tables (4 valid inputs per gate)");
    for k in GateKind::ALL {
        match gate_truth_mismatch(&w, k) {
            None => println!("  {:<4} pass", k.name()),
            Some((a, b, got)) => {
                ok = false;
                println!(
                    "  {:<4} FAIL: A={} B={} gives {got}",
                    k.name(),
                    a as u8,
                    b as u8
                );
            }
        }
    }

    println!("xor boolean differences");
    for c in check_xor_identities(&w) {
        ok &= c.passed();
        let valid = match c.valid_other_ok {
            Some(v) => format!(", 1 on valid other input: {}", pass_fail(v)),
            None => String::new(),
        };
        println!(
            "  {:<36} expected {:<12} {}{valid}",
            c.table.to_string(),
            c.expected,
            pass_fail(c.exact_ok)
        );
    }
    for k in [GateKind::And, GateKind::Or] {
        println!("{} boolean differences (informational)", k.name());
        for t in boolean_difference_tables(&w, k) {
            println!("  {t}");
        }
    }

    println!("single-fault sweep (16 sites x 2 polarities x 4 inputs)");
    for k in GateKind::ALL {
        let m = single_fault_exhaustive_gate_with(&w, k);
        let t = m.totals();
        let good = m.check().is_ok();
        ok &= good;
        println!(
            "  {:<4} masked {:>3} detected {:>3} sdc {:>2}  {}",
            k.name(),
            t.masked,
            t.detected,
            t.sdc,
            pass_fail(good)
        );
        for case in &m.sdc_cases {
            println!("       counterexample: {case}");
        }
    }

    println!("non-valid inputs never yield a valid wrong output");
    for k in GateKind::ALL {
        let v = nonvalid_propagation_violations(&w, k);
        ok &= v.is_empty();
        println!("  {:<4} {}", k.name(), pass_fail(v.is_empty()));
        for x in v.iter().take(4) {
            println!(
                "       counterexample: A={} B={} gives {}",
                x.a, x.b, x.output
            );
        }
    }

    println!(
        "{}",
        if ok {
            "all checks passed"
        } else {
            "verification FAILED"
        }
    );
    Ok(if ok { Status::Pass } else { Status::Fail })
}

fn builtin_sbox() -> Result<SingleRailNetlist> {
    Ok(build_sbox_netlist(&CompositeFieldParams::standard())?)
}

fn load_netlist(spec: &str) -> Result<SingleRailNetlist> {
    if spec == "sbox" {
        return builtin_sbox();
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    parse_netlist(&text).with_context(|| format!("parsing {spec}"))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sbox(action: SboxAction) -> Result<Status> {
    match action {
        SboxAction::Emit { output } => {
            write_out(output.as_deref(), &builtin_sbox()?.to_text())?;
            Ok(Status::Pass)
        }
        SboxAction::Verify { netlist } => {
            let n = match netlist {
                Some(p) => load_netlist(&p.to_string_lossy())?,
                None => builtin_sbox()?,
            };
            if let Err(e) = check_sbox_netlist(&n) {
                println!("FAIL: {e}");
                return Ok(Status::Fail);
            }
            println!("256/256 match, output is a permutation");
            let d = expand_dual_rail(&n);
            if let Err(e) = check_equivalence(&n, &d, 0) {
                println!("FAIL: dual-rail form: {e}");
                return Ok(Status::Fail);
            }
            println!("dual-rail form equivalent on 256/256 inputs, all pairs valid");
            Ok(Status::Pass)
        }
    }
}

fn parse_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), i + 1))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

/// Merge config-file values into unset flags.
fn apply_config(a: &mut CampaignArgs, cfg: BTreeMap<String, String>) -> Result<()> {
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        v.parse().map_err(|e| anyhow!("config key `{k}`: {e}"))
    }
    fn flag(k: &str, v: &str) -> Result<bool> {
        match v {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => bail!("config key `{k}`: expected true or false, got `{v}`"),
        }
    }
    for (k, v) in cfg {
        match k.as_str() {
            "netlist" => {
                a.netlist.get_or_insert(v);
            }
            "polarity" => {
                a.polarity.get_or_insert(v);
            }
            "mode" => {
                a.mode.get_or_insert(v);
            }
            "sizes" => {
                a.sizes.get_or_insert(v);
            }
            "inputs" => {
                a.inputs.get_or_insert(v);
            }
            "trials" => {
                if a.trials.is_none() {
                    a.trials = Some(num(&k, &v)?);
                }
            }
            "seed" => {
                if a.seed.is_none() {
                    a.seed = Some(num(&k, &v)?);
                }
            }
            "workers" => {
                if a.workers.is_none() {
                    a.workers = Some(num(&k, &v)?);
                }
            }
            "vector-budget" => {
                if a.vector_budget.is_none() {
                    a.vector_budget = Some(num(&k, &v)?);
                }
            }
            "single-exhaustive" => a.single_exhaustive |= flag(&k, &v)?,
            "per-trial" => {
                a.per_trial.get_or_insert(PathBuf::from(v));
            }
            "output" => {
                a.output.get_or_insert(PathBuf::from(v));
            }
            "format" => {
                if a.format.is_none() {
                    a.format = Some(
                        Format::from_str(&v, true)
                            .map_err(|e| anyhow!("config key `format`: {e}"))?,
                    );
                }
            }
            _ => bail!("unknown config key `{k}`"),
        }
    }
    Ok(())
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || anyhow!("bad fault size list `{s}`");
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi): (usize, usize) = (
                    lo.trim().parse().map_err(|_| bad())?,
                    hi.trim().parse().map_err(|_| bad())?,
                );
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        bail!("no fault sizes given");
    }
    Ok(out)
}

fn parse_polarity(s: &str) -> Result<PolaritySel> {
    if s == "both" {
        return Ok(PolaritySel::Both);
    }
    s.parse()
        .map(PolaritySel::One)
        .map_err(|e: String| anyhow!(e))
}

fn campaign(mut a: CampaignArgs) -> Result<Status> {
    if let Some(path) = a.config.clone() {
        let cfg = parse_config(&path)?;
        apply_config(&mut a, cfg)?;
    }
    let n = load_netlist(a.netlist.as_deref().unwrap_or("sbox"))?;
    let d = expand_dual_rail(&n);
    let format = a.format.unwrap_or(Format::Csv);
    let seed = a.seed.unwrap_or(1);
    let workers = a.workers.unwrap_or(0);

    let (report, sdc_lines, trial_csv) = if a.single_exhaustive {
        let r = exhaustive_single_fault(&d, a.vector_budget.unwrap_or(65_536), seed, workers)?;
        let sites = d.fault_sites();
        let lines: Vec<String> = r
            .sdc
            .iter()
            .map(|c| {
                format!(
                    "SDC site {} {} input {}",
                    d.site_name(&sites[c.site]),
                    c.polarity,
                    scpdp_core::faultsim::report::input_hex(&c.input)
                )
            })
            .collect();
        (r.report, Some(lines), None)
    } else {
        let base = CampaignConfig::default();
        let polarity = parse_polarity(a.polarity.as_deref().unwrap_or("both"))?;
        let cfg = CampaignConfig {
            polarity: Polarity::Sa0,
            mode: match &a.mode {
                Some(m) => m.parse::<FaultMode>().map_err(|e| anyhow!(e))?,
                None => base.mode,
            },
            sizes: match &a.sizes {
                Some(s) => parse_sizes(s)?,
                None => base.sizes,
            },
            trials: a.trials.unwrap_or(base.trials),
            seed,
            inputs: match &a.inputs {
                Some(s) => s.parse::<InputPolicy>().map_err(|e| anyhow!(e))?,
                None => base.inputs,
            },
            workers,
            record_trials: a.per_trial.is_some(),
        };
        let polarities = match polarity {
            PolaritySel::One(p) => vec![p],
            PolaritySel::Both => {
                if a.per_trial.is_some() {
                    bail!("--per-trial needs a single polarity");
                }
                vec![Polarity::Sa0, Polarity::Sa1]
            }
        };
        let mut merged: Option<CoverageReport> = None;
        let mut records = Vec::new();
        for p in polarities {
            let r = run_campaign(
                &d,
                &CampaignConfig {
                    polarity: p,
                    ..cfg.clone()
                },
            )?;
            records.extend(r.trials);
            merged = Some(match merged {
                None => r.report,
                Some(m) => m.merge(r.report),
            });
        }
        let sites = d.fault_sites();
        let trial_csv = a
            .per_trial
            .is_some()
            .then(|| trials_to_csv(&records, |s| d.site_name(&sites[s as usize])));
        (merged.expect("at least one polarity"), None, trial_csv)
    };

    if let (Some(path), Some(text)) = (&a.per_trial, &trial_csv) {
        write_out(Some(path), text)?;
    }
    let body = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    write_out(a.output.as_deref(), &body)?;

    // human summary goes to stderr when the report itself is on stdout
    let mut human = String::new();
    human.push_str(&format!(
        "netlist {} sites, {} inputs\n",
        d.site_count(),
        d.input_count()
    ));
    for p in [Polarity::Sa0, Polarity::Sa1] {
        let strata: Vec<_> = report.strata.iter().filter(|s| s.polarity == p).collect();
        if strata.is_empty() {
            continue;
        }
        let mut total = scpdp_core::faultsim::Stratum::new(p, strata[0].mode, 0);
        for s in &strata {
            total.absorb(s);
        }
        human.push_str(&format!(
            "{p} {}: FC {}% ({} trials, {} SDC)\n",
            total.mode.name(),
            scpdp_core::faultsim::report::format_percent(total.fc()),
            total.trials,
            total.sdc
        ));
    }
    human.push_str(&format!("aggregate FC {}%\n", report.fc_percent()));
    if let Some(lines) = sdc_lines {
        if lines.is_empty() {
            human.push_str("SDC: none\n");
        }
        for l in lines {
            human.push_str(&l);
            human.push('\n');
        }
    }
    if a.output.is_some() {
        print!("{human}");
    } else {
        eprint!("{human}");
    }
    Ok(Status::Pass)
}

fn area(a: AreaArgs) -> Result<Status> {
    let n = load_netlist(&a.netlist)?;
    let d = expand_dual_rail(&n);
    let r = AreaReport::of(&d);
    let dmr = a.compare_dmr.then(|| DmrEstimate::of(&d));
    if a.json {
        let mut v = serde_json::to_value(&r)?;
        if let Some(dmr) = dmr {
            v["dmr_approximate"] = serde_json::to_value(dmr)?;
        }
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("{r}");
        if let Some(dmr) = dmr {
            println!("{dmr}");
        }
    }
    Ok(Status::Pass)
}

fn parse_hex_bits(s: &str, n: usize) -> Result<Vec<bool>> {
    let digits = s.trim_start_matches("0x");
    if digits.is_empty() {
        bail!("empty input vector");
    }
    let mut bits = Vec::new();
    for c in digits.chars().rev() {
        let v = c
            .to_digit(16)
            .ok_or_else(|| anyhow!("bad hex digit `{c}` in `{s}`"))?;
        bits.extend((0..4).map(|i| (v >> i) & 1 == 1));
    }
    if bits[n.min(bits.len())..].iter().any(|&b| b) {
        bail!("input `{s}` does not fit in {n} inputs");
    }
    bits.resize(n, false);
    Ok(bits)
}

fn simulate_cmd(a: SimulateArgs) -> Result<Status> {
    let n = load_netlist(&a.netlist)?;
    let d: DualRailNetlist = expand_dual_rail(&n);
    let input = parse_hex_bits(&a.input, d.input_count())?;
    let mut faults = Vec::new();
    for f in &a.fault {
        let (site, v) = f
            .rsplit_once(':')
            .ok_or_else(|| anyhow!("fault `{f}` must be <site>:<0|1>"))?;
        let stuck = match v {
            "0" => false,
            "1" => true,
            _ => bail!("fault `{f}`: stuck value must be 0 or 1"),
        };
        let idx = d
            .find_site(site)
            .ok_or_else(|| anyhow!("unknown fault site `{site}`"))?;
        faults.push((d.fault_sites()[idx], stuck));
    }
    let golden: Vec<RailPair> = {
        let mut sim = Simulator::new(&d);
        let words: Vec<u64> = input.iter().map(|&b| b as u64).collect();
        sim.run(&words, None)
            .into_iter()
            .map(|(h, l)| RailPair::new(h & 1 == 1, l & 1 == 1))
            .collect()
    };
    let out = simulate(&d, &input, &faults);
    for (&s, p) in n.outputs().iter().zip(&out) {
        let v = match p.value() {
            Some(b) => (b as u8).to_string(),
            None => "X".into(),
        };
        println!("{} = {v} {p}", n.name(s));
    }
    println!("outcome: {}", classify(&golden, &out));
    Ok(Status::Pass)
}
