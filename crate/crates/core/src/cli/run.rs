use std::path::PathBuf;

use serde::Serialize;

use super::config::{Command, RunConfig};
use crate::diagnostics::{diagnose_code, entropy_convergence, DiagnosticFixture, InstanceReport};
use crate::error::{Error, SimulationError};
use crate::exponents::{
    eta, eta_with, lossless_bound, region_for_rates, wyner_ziv_rmin_with, DistortionSpec, EtaCurve, SolverOptions,
};
use crate::probcore::{ConditionalPmf, JointPmf};
use crate::report::{sig12, CsvTable};
use crate::schemes::{HopNetworkSpec, Protocol};
use crate::simulator::{
    calibration_table, estimates_table, fit_exponent, run_trials, strong_converse_sweep, sweep_table, ExperimentSpec,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One output file, rendered in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn csv(name: &str, table: CsvTable) -> Self {
        Self { name: name.to_string(), contents: table.render() }
    }

    fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut contents = serde_json::to_string_pretty(value).expect("report serializes");
        contents.push('\n');
        Self { name: name.to_string(), contents }
    }
}

/// Provenance lines every CSV starts with.
fn header(table: CsvTable, cfg: &RunConfig) -> CsvTable {
    let rest = table.meta.clone();
    let mut t = CsvTable { meta: Vec::new(), ..table }
        .meta("tool", format!("hopex {VERSION}"))
        .meta("command", cfg.command.name())
        .meta("config_hash", cfg.hash())
        .meta("seed", cfg.seed);
    t.meta.extend(rest);
    t
}

fn with_meta(mut table: CsvTable, meta: &[(&str, String)]) -> CsvTable {
    for (k, v) in meta {
        table = table.meta(k, v);
    }
    table
}

fn solver(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { seed: cfg.seed, ..SolverOptions::default() }
}

fn pair(p: &JointPmf, hop: usize) -> Result<JointPmf, Error> {
    Ok(p.marginalize(&[hop - 1, hop])?)
}

fn hops(p: &JointPmf) -> usize {
    p.rank() - 1
}

/// Run a validated config and render its outputs without touching disk.
pub fn execute(cfg: &RunConfig) -> Result<Vec<Artifact>, Error> {
    let p = cfg.load_pmf()?;
    cfg.check_against(&p)?;
    log::info!("{} (config {}, seed {})", cfg.command.name(), cfg.hash(), cfg.seed);
    match cfg.command {
        Command::Eta => run_eta(cfg, &p),
        Command::Region => run_region(cfg, &p),
        Command::Wz => run_wz(cfg, &p),
        Command::Simulate => run_simulate(cfg, &p),
        Command::Sweep => run_sweep(cfg, &p),
        Command::Diagnose => run_diagnose(cfg, &p),
    }
}

/// [`execute`] and write every artifact under `cfg.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, Error> {
    let artifacts = execute(cfg)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = cfg.output_dir.join(&a.name);
        std::fs::write(&path, a.contents)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Serialize)]
struct EtaRecord<'a> {
    hop: usize,
    rate: f64,
    value: f64,
    channel: &'a ConditionalPmf,
}

fn run_eta(cfg: &RunConfig, p: &JointPmf) -> Result<Vec<Artifact>, Error> {
    let aux = cfg.aux_card_for(p);
    let opts = solver(cfg);
    let mut table = header(CsvTable::new(&["R", "eta", "hop"]), cfg);
    table = with_meta(table, &[("aux_card", aux.to_string())]);
    let mut points = Vec::new();
    for hop in 1..=hops(p) {
        let pr = pair(p, hop)?;
        for &r in &cfg.rates {
            points.push((hop, eta_with(&pr, r, aux, &opts)?));
        }
    }
    for (hop, pt) in &points {
        table.push(vec![sig12(pt.rate), sig12(pt.value), hop.to_string()]);
    }
    let report: Vec<_> =
        points.iter().map(|(hop, pt)| EtaRecord { hop: *hop, rate: pt.rate, value: pt.value, channel: &pt.channel }).collect();
    Ok(vec![Artifact::csv("eta.csv", table), Artifact::json("eta_channels.json", &report)])
}

fn run_region(cfg: &RunConfig, p: &JointPmf) -> Result<Vec<Artifact>, Error> {
    let aux = cfg.aux_card_for(p);
    let opts = solver(cfg);
    let mut grid = cfg.rate_grid.clone();
    grid.extend_from_slice(&cfg.rates);
    let mut curves = Vec::with_capacity(hops(p));
    for hop in 1..=hops(p) {
        curves.push(EtaCurve::tabulate(&pair(p, hop)?, hop, &grid, aux, &opts)?);
    }
    let region = region_for_rates(&cfg.rates, &curves)?;
    let meta = [("aux_card", aux.to_string())];
    let mut curve_table = with_meta(header(CsvTable::new(&["R", "eta", "hop"]), cfg), &meta);
    for c in &curves {
        for (r, v) in c.rate_grid.iter().zip(&c.values) {
            curve_table.push(vec![sig12(*r), sig12(*v), c.hop_index.to_string()]);
        }
    }
    let mut region_table = with_meta(header(CsvTable::new(&["k", "R_k", "eta_k", "theta_max"]), cfg), &meta);
    for k in 1..=region.k {
        region_table.push(vec![
            k.to_string(),
            sig12(region.rates[k - 1]),
            sig12(region.hop_values[k - 1]),
            sig12(region.bound(k)),
        ]);
    }
    Ok(vec![Artifact::csv("eta.csv", curve_table), Artifact::csv("region.csv", region_table)])
}

#[derive(Serialize)]
struct WzReport<'a> {
    max_distortion: f64,
    rate: f64,
    achieved_distortion: f64,
    lossless_bound: f64,
    test_channel: &'a ConditionalPmf,
    reconstruction: &'a [usize],
}

fn run_wz(cfg: &RunConfig, p: &JointPmf) -> Result<Vec<Artifact>, Error> {
    let file = cfg.load_distortion()?.expect("validated");
    let z_card = file.table.first().map_or(0, Vec::len);
    if file.table.iter().any(|row| row.len() != z_card) {
        return Err(Error::Config(vec!["distortion: rows have unequal lengths".to_string()]));
    }
    let d = cfg.max_distortion.expect("validated");
    let dist = DistortionSpec::new(file.table.concat(), z_card, d)?;
    let s_card = cfg.s_card.unwrap_or(p.shape()[0] + 1);
    let sol = wyner_ziv_rmin_with(p, &dist, s_card, &solver(cfg))?;
    let lossless = lossless_bound(p)?;
    let mut table = header(CsvTable::new(&["D", "rate", "achieved_distortion", "lossless_bound"]), cfg);
    table = with_meta(table, &[("s_card", s_card.to_string())]);
    table.push(vec![sig12(d), sig12(sol.rate), sig12(sol.achieved_distortion), sig12(lossless)]);
    let report = WzReport {
        max_distortion: d,
        rate: sol.rate,
        achieved_distortion: sol.achieved_distortion,
        lossless_bound: lossless,
        test_channel: &sol.test_channel,
        reconstruction: &sol.reconstruction,
    };
    Ok(vec![Artifact::csv("wz.csv", table), Artifact::json("wz_report.json", &report)])
}

/// Network of the config and, per hop, the `eta`-achieving channel at
/// `R_l - rate_margin`. Channels use the fixed default solver seed, so the
/// run seed only drives codebooks and trials.
fn network(cfg: &RunConfig, p: &JointPmf) -> Result<(HopNetworkSpec, Vec<ConditionalPmf>), Error> {
    let spec = HopNetworkSpec::new(p.clone(), cfg.rates.clone(), cfg.epsilons.clone())?;
    let aux = cfg.aux_card_for(p);
    let mut channels = Vec::with_capacity(spec.hops());
    for hop in 1..=spec.hops() {
        let r = (cfg.rates[hop - 1] - cfg.rate_margin).max(0.0);
        channels.push(eta(&spec.hop_pair(hop)?, r, aux)?.channel);
    }
    Ok((spec, channels))
}

fn experiment(cfg: &RunConfig, p: &JointPmf) -> Result<ExperimentSpec, Error> {
    let (spec, channels) = network(cfg, p)?;
    let mut e = ExperimentSpec::new(spec, channels, cfg.blocklengths.clone(), cfg.trials, cfg.seed);
    e.mu = cfg.mu;
    e.mode = cfg.mode;
    e.fit = cfg.fit;
    e.epsilon_sweep = cfg.epsilon_sweep.clone();
    e.validate()?;
    Ok(e)
}

fn mu_text(cfg: &RunConfig) -> String {
    cfg.mu.map_or_else(|| "n^(-1/3)".to_string(), sig12)
}

fn experiment_meta(cfg: &RunConfig, p: &JointPmf) -> Vec<(&'static str, String)> {
    vec![
        ("mu", mu_text(cfg)),
        ("trials", cfg.trials.to_string()),
        ("mode", serde_json::to_value(cfg.mode).expect("mode serializes").as_str().unwrap_or_default().to_string()),
        ("aux_card", cfg.aux_card_for(p).to_string()),
        ("rate_margin", sig12(cfg.rate_margin)),
        ("fit_ci_width_cap", sig12(cfg.fit.ci_width_cap)),
        ("fit_drop_smallest", cfg.fit.drop_smallest.to_string()),
    ]
}

#[derive(Serialize)]
struct ChannelEntry<'a> {
    hop: usize,
    target_rate: f64,
    channel: &'a ConditionalPmf,
}

fn channel_report(e: &ExperimentSpec, cfg: &RunConfig) -> Artifact {
    let entries: Vec<_> = e
        .channels
        .iter()
        .enumerate()
        .map(|(i, c)| ChannelEntry { hop: i + 1, target_rate: (cfg.rates[i] - cfg.rate_margin).max(0.0), channel: c })
        .collect();
    Artifact::json("channels.json", &entries)
}

fn run_simulate(cfg: &RunConfig, p: &JointPmf) -> Result<Vec<Artifact>, Error> {
    let e = experiment(cfg, p)?;
    let meta = experiment_meta(cfg, p);
    let mut estimates = run_trials(&e, 0)?;
    let h1 = run_trials(&e, 1)?;
    let aux = cfg.aux_card_for(p);
    let mut theta = 0.0;
    let mut fits = with_meta(
        header(CsvTable::new(&["k", "exponent", "slope_ci_lo", "slope_ci_hi", "points", "theta_max", "note"]), cfg),
        &meta,
    );
    for k in 1..=e.network.hops() {
        theta += eta(&e.network.hop_pair(k)?, cfg.rates[k - 1], aux)?.value;
        let row = match fit_exponent(&h1, k, &cfg.fit) {
            Ok(f) => vec![
                k.to_string(),
                sig12(f.slope),
                sig12(f.slope_ci.0),
                sig12(f.slope_ci.1),
                f.points.len().to_string(),
                sig12(theta),
                String::new(),
            ],
            Err(err @ (SimulationError::TooFewPoints { .. } | SimulationError::Unresolvable { .. })) => vec![
                k.to_string(),
                String::new(),
                String::new(),
                String::new(),
                "0".to_string(),
                sig12(theta),
                err.to_string().replace(',', ";"),
            ],
            Err(err) => return Err(err.into()),
        };
        fits.push(row);
    }
    estimates.extend(h1);
    let table = with_meta(header(estimates_table(&estimates), cfg), &meta);
    Ok(vec![Artifact::csv("estimates.csv", table), Artifact::csv("fits.csv", fits), channel_report(&e, cfg)])
}

fn run_sweep(cfg: &RunConfig, p: &JointPmf) -> Result<Vec<Artifact>, Error> {
    let e = experiment(cfg, p)?;
    let meta = experiment_meta(cfg, p);
    let sweep = strong_converse_sweep(&e)?;
    Ok(vec![
        Artifact::csv("sweep.csv", with_meta(header(sweep_table(&sweep), cfg), &meta)),
        Artifact::csv("calibration.csv", with_meta(header(calibration_table(&sweep), cfg), &meta)),
        channel_report(&e, cfg),
    ])
}

fn run_diagnose(cfg: &RunConfig, p: &JointPmf) -> Result<Vec<Artifact>, Error> {
    let (spec, channels) = network(cfg, p)?;
    // codebook seeds follow the simulator so both see the same code
    let e = ExperimentSpec::new(spec.clone(), channels.clone(), cfg.blocklengths.clone(), 1, cfg.seed);
    let meta = vec![
        ("mu", mu_text(cfg)),
        ("enumeration_cap", cfg.enumeration_cap.to_string()),
        ("aux_card", cfg.aux_card_for(p).to_string()),
        ("rate_margin", sig12(cfg.rate_margin)),
    ];
    let mut reports: Vec<InstanceReport> = Vec::new();
    for &n in &cfg.blocklengths {
        let code = Protocol::new(&spec, &channels, n, e.codebook_seed(n), cfg.mu)?;
        for k in 1..=spec.hops() {
            log::info!("diagnose n = {n}, k = {k}");
            reports.push(diagnose_code(&code, spec.p_joint(), k, code.mu(), spec.rates(), cfg.enumeration_cap)?);
        }
    }

    let mut main = with_meta(
        header(
            CsvTable::new(&[
                "n",
                "k",
                "mu",
                "region_cardinality",
                "delta",
                "delta_lower_bound",
                "alpha",
                "beta",
                "typical_mass",
                "kl",
                "neg_log2_delta",
                "entropy_gap",
                "exponent",
                "exponent_bound",
                "slack_iii",
                "chain_cmi",
                "chain_kl",
            ]),
            cfg,
        ),
        &meta,
    );
    let mut per_hop = with_meta(
        header(
            CsvTable::new(&[
                "n",
                "k",
                "hop",
                "message_entropy",
                "budget",
                "n_info_prev",
                "residual",
                "markov_gap",
                "slack_i",
                "slack_ii",
            ]),
            cfg,
        ),
        &meta,
    );
    for r in &reports {
        let opt = |v: Option<f64>| v.map(sig12).unwrap_or_default();
        main.push(vec![
            r.n.to_string(),
            r.k.to_string(),
            sig12(r.mu),
            r.region_cardinality.to_string(),
            sig12(r.delta.delta),
            sig12(r.delta.lower_bound),
            sig12(r.delta.alpha),
            sig12(r.delta.beta),
            sig12(r.delta.typical_mass),
            sig12(r.measure.kl),
            sig12(-r.delta.delta.log2()),
            sig12(r.entropy_gap()),
            sig12(r.lemma.exponent),
            sig12(r.lemma.exponent_bound),
            sig12(r.lemma.slack_iii),
            opt(r.chain.map(|c| c.0)),
            opt(r.chain.map(|c| c.1)),
        ]);
        for h in &r.lemma.hops {
            per_hop.push(vec![
                r.n.to_string(),
                r.k.to_string(),
                h.ell.to_string(),
                sig12(h.message_entropy),
                sig12(h.budget),
                sig12(h.n_info_prev),
                sig12(h.residual),
                sig12(h.markov_gap),
                sig12(h.slack_i),
                sig12(h.slack_ii),
            ]);
        }
    }

    let mut out = vec![Artifact::csv("diagnose.csv", main), Artifact::csv("diagnose_hops.csv", per_hop)];
    if cfg.blocklengths.len() >= 3 {
        let mut conv = with_meta(
            header(
                CsvTable::new(&[
                    "k",
                    "n",
                    "mu",
                    "per_letter_entropy",
                    "gap",
                    "cross_term",
                    "log_delta_term",
                    "single_letter_deviation",
                    "nonincreasing_after_first",
                ]),
                cfg,
            ),
            &meta,
        );
        for k in 1..=spec.hops() {
            let series: Vec<_> = reports.iter().filter(|r| r.k == k).map(|r| r.measure.clone()).collect();
            let table = entropy_convergence(&series)?;
            for g in &table.rows {
                conv.push(vec![
                    k.to_string(),
                    g.n.to_string(),
                    sig12(g.mu),
                    sig12(g.per_letter_entropy),
                    sig12(g.gap),
                    sig12(g.cross_term),
                    sig12(g.log_delta_term),
                    sig12(g.single_letter_deviation),
                    table.nonincreasing_after_first.to_string(),
                ]);
            }
        }
        out.push(Artifact::csv("entropy.csv", conv));
    }
    let hash = spec.hash();
    let fixtures: Vec<_> = reports.iter().map(|r| DiagnosticFixture::from_report(r, &hash, cfg.seed)).collect();
    out.push(Artifact::json("diagnose_fixtures.json", &fixtures));
    Ok(out)
}
