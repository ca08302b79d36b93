use std::path::Path;
use std::time::Instant;

use dignet::dyadic::rational_to_f64;
use dignet::integrand::Integrand;
use dignet::kappa::{KappaSet, KappaVector};
use dignet::moments::{
    closed_form_third_xsq, exact_third_moment_xsq, mc_moments, replicate_estimates,
    variance_lower_bound_xsq, variance_series_xsq, Centering, DEFAULT_CUTOFF_OFFSET,
};
use dignet::net::GeneratorSet;
use dignet::probes::{self, CstarConfig, PairEventOptions, ProbeResult};
use dignet::scramble::{generate_points, unscrambled_points, ScrambleSet};
use dignet::walsh::check_t_sum_bound;
use dignet::zprob;
use dignet::{Error, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::*;

/// Budget for the counterexample base search.
const SEARCH_BUDGET: u64 = 5_000_000;

/// What a command produced.
pub enum Report {
    /// A JSON document; CSV output flattens it to `key,value` rows.
    Json(Value),
    /// A JSON document with a natural table form for CSV output.
    Table {
        json: Value,
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
    /// Verbatim text, such as a net file.
    Text(String),
}

pub struct Outcome {
    pub report: Report,
    /// A probe or check did not pass.
    pub failed: bool,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self { report, failed: false }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Wraps a command body with its configuration, seed and timing.
fn envelope(command: &str, config: &impl Serialize, seed: Option<u64>, body: Value, start: Instant) -> Value {
    let mut map = Map::new();
    map.insert("command".into(), json!(command));
    map.insert("config".into(), serde_json::to_value(config).expect("arguments serialize"));
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    map.insert("seed".into(), json!(seed));
    map.insert("runtime_ms".into(), json!(start.elapsed().as_millis() as u64));
    Value::Object(map)
}

pub fn load_generators(g: &GenArgs) -> Result<GeneratorSet> {
    let gens = match g.source.as_str() {
        "identity" => {
            let m = g.m.ok_or_else(|| usage("--m is required for identity generators"))?;
            GeneratorSet::identity(m, g.s.unwrap_or(1))?
        }
        "random" => {
            let m = g.m.ok_or_else(|| usage("--m is required for random generators"))?;
            let seed = g
                .gen_seed
                .ok_or_else(|| usage("--gen-seed is required for random generators"))?;
            GeneratorSet::random(m, g.s.unwrap_or(1), seed)?
        }
        "counterexample" => {
            let m = g.m.ok_or_else(|| usage("--m is required for the counterexample"))?;
            if g.s.is_some_and(|s| s != 3) {
                return Err(usage("the counterexample is three-dimensional"));
            }
            counterexample(m, None, g.gen_seed.unwrap_or(3))?
        }
        path => GeneratorSet::load(Path::new(path))?,
    };
    if let Some(m) = g.m {
        if m != gens.m() {
            return Err(Error::DimensionMismatch(format!("--m {m} but the net has m = {}", gens.m())));
        }
    }
    if let Some(s) = g.s {
        if s != gens.s() {
            return Err(Error::DimensionMismatch(format!("--s {s} but the net has s = {}", gens.s())));
        }
    }
    Ok(gens)
}

fn counterexample(m: usize, base: Option<&Path>, seed: u64) -> Result<GeneratorSet> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(usage(format!("the counterexample needs an even m >= 2, got {m}")));
    }
    let base = match base {
        Some(path) => GeneratorSet::load(path)?,
        None => GeneratorSet::search(m - 1, 3, 1, seed, SEARCH_BUDGET)?,
    };
    GeneratorSet::embed_counterexample(&base)
}

fn integrand_for(name: &str, gens: &GeneratorSet) -> Result<Integrand> {
    Integrand::parse(name, gens.s())
}

pub fn run(command: &Command) -> Result<Outcome> {
    let start = Instant::now();
    match command {
        Command::Net(NetCommand::Quality(g)) => {
            let gens = load_generators(g)?;
            let q = serde_json::to_value(gens.quality()?).expect("quality serializes");
            Ok(Outcome::ok(Report::Json(envelope("net quality", g, None, q, start))))
        }
        Command::Net(NetCommand::Gen(g)) => {
            let gens = load_generators(g)?;
            Ok(Outcome::ok(Report::Text(gens.to_text())))
        }
        Command::Net(NetCommand::EmbedCounterexample(a)) => {
            let gens = counterexample(a.m, a.base.as_deref(), a.gen_seed)?;
            Ok(Outcome::ok(Report::Text(gens.to_text())))
        }
        Command::Points(a) => points(a, start),
        Command::Estimate(a) => estimate(a, start),
        Command::Skewness(a) => skewness(a, start),
        Command::Variance(a) => variance(a, start),
        Command::Zprob(a) => zprob_cmd(a, start),
        Command::Probe(p) => probe(p, start),
        Command::CiCoverage(a) => {
            let gens = load_generators(&a.gen)?;
            let f = integrand_for(&a.integrand, &gens)?;
            let rep = probes::ci_coverage(&f, &gens, a.precision, a.replicates, a.repetitions, a.level, a.seed)?;
            let body = json!({ "estimates": rep });
            Ok(Outcome::ok(Report::Json(envelope("ci-coverage", a, Some(a.seed), body, start))))
        }
        Command::LemmaT(a) => {
            let chk = check_t_sum_bound(a.max_l)?;
            let failed = !(chk.strict_bound_holds && chk.symmetric);
            let body = json!({ "estimates": chk, "verdict": if failed { "fail" } else { "pass" } });
            Ok(Outcome {
                report: Report::Json(envelope("lemma-t", a, None, body, start)),
                failed,
            })
        }
    }
}

fn points(a: &PointsArgs, start: Instant) -> Result<Outcome> {
    let gens = load_generators(&a.gen)?;
    let pts = match (a.unscrambled, a.seed) {
        (true, _) => unscrambled_points(&gens),
        (false, Some(seed)) => {
            let scr = ScrambleSet::random(gens.m(), gens.s(), a.precision, seed)?;
            generate_points(&gens, &scr)?
        }
        (false, None) => return Err(usage("--seed is required unless --unscrambled is given")),
    };
    let coords: Vec<Vec<f64>> = (0..pts.len()).map(|i| pts.point(i)).collect();
    let mut header = vec!["i".to_string()];
    header.extend((1..=gens.s()).map(|j| format!("x{j}")));
    let rows = coords
        .iter()
        .enumerate()
        .map(|(i, x)| std::iter::once(i.to_string()).chain(x.iter().map(f64::to_string)).collect())
        .collect();
    let body = json!({ "points": coords });
    Ok(Outcome::ok(Report::Table {
        json: envelope("points", a, a.seed, body, start),
        header,
        rows,
    }))
}

fn estimate(a: &EstimateArgs, start: Instant) -> Result<Outcome> {
    if a.replicates < 2 {
        return Err(usage("--replicates must be at least 2"));
    }
    let gens = load_generators(&a.gen)?;
    let f = integrand_for(&a.integrand, &gens)?;
    let values = replicate_estimates(&f, &gens, a.precision, a.replicates, a.seed)?;
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
    let body = json!({
        "estimates": { "mean": mean, "sd": sd },
        "se": { "mean": sd / r.sqrt() },
        "oracle": { "value": f.mean(), "tail_bound": 0.0 },
    });
    Ok(Outcome::ok(Report::Json(envelope("estimate", a, Some(a.seed), body, start))))
}

fn xsq_identity_only(f: &Integrand, gens: &GeneratorSet, what: &str) -> Result<()> {
    if *f != Integrand::Xsq || *gens != GeneratorSet::identity(gens.m(), 1)? {
        return Err(usage(format!(
            "{what} is only available for --integrand xsq with --gen identity and s = 1"
        )));
    }
    Ok(())
}

fn skewness(a: &SkewnessArgs, start: Instant) -> Result<Outcome> {
    if !a.oracle && a.replicates.is_none() {
        return Err(usage("nothing to do: give --replicates, --oracle or both"));
    }
    let gens = load_generators(&a.gen)?;
    let f = integrand_for(&a.integrand, &gens)?;
    let mut body = Map::new();
    if let Some(r) = a.replicates {
        let seed = a.seed.expect("clap enforces --seed");
        let centering = match a.centering {
            CenteringArg::Known => Centering::Known,
            CenteringArg::Sample => Centering::Sample,
        };
        let rep = mc_moments(&f, &gens, a.precision, r, seed, centering)?;
        body.insert(
            "estimates".into(),
            json!({ "mean": rep.mean, "var": rep.var, "m3": rep.m3, "m4": rep.m4, "gamma": rep.gamma, "theta": rep.theta }),
        );
        body.insert("se".into(), serde_json::to_value(&rep.se).expect("serializes"));
    }
    if a.oracle {
        xsq_identity_only(&f, &gens, "the exact third moment")?;
        let m = gens.m() as u32;
        let cutoff = a.cutoff.unwrap_or(m + DEFAULT_CUTOFF_OFFSET);
        let series = exact_third_moment_xsq(m, cutoff)?;
        body.insert(
            "oracle".into(),
            json!({
                "value": series.value.to_f64(),
                "tail_bound": series.tail_bound,
                "cutoff": cutoff,
                "closed_form": rational_to_f64(&closed_form_third_xsq(m)),
            }),
        );
    }
    Ok(Outcome::ok(Report::Json(envelope("skewness", a, a.seed, Value::Object(body), start))))
}

fn variance(a: &VarianceArgs, start: Instant) -> Result<Outcome> {
    let cutoff = a.cutoff.unwrap_or(a.m + DEFAULT_CUTOFF_OFFSET);
    let series = variance_series_xsq(a.m, cutoff)?;
    let bound = variance_lower_bound_xsq(a.m);
    let mut body = Map::new();
    body.insert(
        "oracle".into(),
        json!({
            "value": rational_to_f64(&series.total),
            "tail_bound": 0.0,
            "truncated": series.truncated.to_f64(),
            "tail": rational_to_f64(&series.tail),
            "lower_bound": rational_to_f64(&bound),
            "above_lower_bound": series.total >= bound,
            "singleton_subseries_equals_bound": series.singleton_subseries == bound,
        }),
    );
    if let Some(r) = a.replicates {
        let gens = GeneratorSet::identity(a.m as usize, 1)?;
        let seed = a.seed.expect("clap enforces --seed");
        let rep = mc_moments(&Integrand::Xsq, &gens, a.precision, r, seed, Centering::Known)?;
        body.insert("estimates".into(), json!({ "var": rep.var }));
        body.insert("se".into(), json!({ "var": rep.se.var }));
    }
    Ok(Outcome::ok(Report::Json(envelope("variance", a, a.seed, Value::Object(body), start))))
}

fn identity_component(k: &KappaVector) -> Result<KappaSet> {
    if k.dim() != 1 {
        return Err(usage("the identity rule is one-dimensional"));
    }
    Ok(k.component(0))
}

fn zprob_cmd(a: &ZprobArgs, start: Instant) -> Result<Outcome> {
    let gens = load_generators(&a.gen)?;
    let exact = |d: dignet::dyadic::Dyadic| json!({ "probability": d.to_f64(), "exact": d.to_string() });
    let body = match (a.method, &a.k2) {
        (ZprobMethod::Identity, k2) => {
            if gens != GeneratorSet::identity(gens.m(), 1)? {
                return Err(usage("the identity rule needs --gen identity with s = 1"));
            }
            let k1 = identity_component(&a.k1)?;
            exact(match k2 {
                None => zprob::z_prob_identity(k1, gens.m())?,
                Some(k2) => zprob::z_pair_prob_identity(k1, identity_component(k2)?, gens.m())?,
            })
        }
        (ZprobMethod::Enum, None) => exact(zprob::z_prob_enum(&a.k1, &gens, a.precision)?),
        (ZprobMethod::Enum, Some(k2)) => exact(zprob::z_pair_prob_enum(&a.k1, k2, &gens, a.precision)?),
        (ZprobMethod::Linear, None) => exact(zprob::z_prob_linear(&a.k1, &gens)?),
        (ZprobMethod::Linear, Some(k2)) => exact(zprob::z_pair_prob_linear(&a.k1, k2, &gens)?),
        (ZprobMethod::Mc, k2) => {
            let seed = a.seed.ok_or_else(|| usage("--seed is required by the mc method"))?;
            let freq = match k2 {
                None => zprob::z_events_mc(&[&a.k1], &gens, a.precision, a.trials, seed)?,
                Some(k2) => zprob::z_pair_prob_mc(&a.k1, k2, &gens, a.precision, a.trials, seed)?,
            };
            json!({ "probability": freq.p(), "se": freq.se(), "hits": freq.hits, "trials": freq.trials })
        }
    };
    let body = json!({ "estimates": body, "t": gens.t_value() });
    Ok(Outcome::ok(Report::Json(envelope("zprob", a, a.seed, body, start))))
}

fn probe_outcome(name: &str, config: &impl Serialize, seed: u64, res: ProbeResult, start: Instant) -> Outcome {
    let failed = !res.passed();
    let header = ["label", "kind", "empirical", "se", "target", "pass"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = res
        .checks
        .iter()
        .map(|c| {
            vec![
                c.label.clone(),
                serde_json::to_value(c.kind).expect("serializes").as_str().unwrap_or_default().to_string(),
                c.empirical.to_string(),
                c.se.to_string(),
                c.target.to_string(),
                c.pass.to_string(),
            ]
        })
        .collect();
    let body = serde_json::to_value(&res).expect("probe result serializes");
    Outcome {
        report: Report::Table {
            json: envelope(name, config, Some(seed), body, start),
            header,
            rows,
        },
        failed,
    }
}

fn probe(p: &ProbeCommand, start: Instant) -> Result<Outcome> {
    match p {
        ProbeCommand::SingleEvent(a) => {
            let gens = load_generators(&a.gen)?;
            let res = probes::probe_single_event(&gens, &a.k, a.precision, a.trials, a.seed)?;
            Ok(probe_outcome("probe single-event", a, a.seed, res, start))
        }
        ProbeCommand::PairEvent(a) => {
            let gens = load_generators(&a.gen)?;
            let opts = PairEventOptions { at_least: a.at_least };
            let res = probes::probe_pair_event(&gens, &a.k1, &a.k2, a.precision, a.trials, a.seed, &opts)?;
            Ok(probe_outcome("probe pair-event", a, a.seed, res, start))
        }
        ProbeCommand::TDistribution(a) => {
            let res = probes::probe_t_distribution(a.m, a.s, a.draws, a.seed)?;
            Ok(probe_outcome("probe t-distribution", a, a.seed, res, start))
        }
        ProbeCommand::PairLaw(a) => {
            if a.s == 0 || a.m == 0 {
                return Err(usage("--m and --s must be positive"));
            }
            let single = |j: usize, pos: usize| {
                let mut comps = vec![KappaSet::EMPTY; a.s];
                comps[j] = KappaSet::singleton(pos as u32);
                KappaVector::new(comps)
            };
            let k1 = a.k1.clone().unwrap_or_else(|| single(0, a.m.saturating_sub(1).max(1)));
            let k2 = a.k2.clone().unwrap_or_else(|| single(a.s - 1, a.m));
            let res = probes::probe_random_pair_law(a.m, a.s, &k1, &k2, a.trials, a.seed)?;
            Ok(probe_outcome("probe pair-law", a, a.seed, res, start))
        }
        ProbeCommand::Cstar(a) => {
            let cfg = CstarConfig {
                m: a.m,
                s: a.s,
                eps: a.eps,
                c_draws: a.c_draws,
                pair_samples: a.pair_samples,
                seed: a.seed,
                extra_pairs: a.pairs.clone(),
            };
            let res = match &a.fixed {
                None => probes::probe_cstar(&cfg)?,
                Some(source) => {
                    let gens = load_generators(&GenArgs {
                        source: source.clone(),
                        m: Some(a.m),
                        s: Some(a.s),
                        gen_seed: None,
                    })?;
                    probes::probe_cstar_fixed(&gens, &cfg)?
                }
            };
            Ok(probe_outcome("probe cstar", a, a.seed, res, start))
        }
    }
}
