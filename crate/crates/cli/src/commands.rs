use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use thicket_core::compression::certify_scheme;
use thicket_core::format::{load_with_prior, save_with_prior};
use thicket_core::learner::{monte_carlo_with_policy, ExactEvaluator, MaxMinPolicy, CSV_HEADER};
use thicket_core::random::{corpus, random_class, random_weights};
use thicket_core::rational::{self, Rational};
use thicket_core::staged::{
    staged_monte_carlo, CountableFamily, FiniteFamily, IntervalFamily, StagedConfig,
};
use thicket_core::thicket::EdgeConvention;
use thicket_core::verify::{verify_classes, Check, VerifyOptions};
use thicket_core::{learner, ConceptClass};

use crate::report::{emit, format_or, usage, write_to, Envelope};
use crate::{
    CheckArg, CompressArgs, ConventionArg, Format, GenArgs, LdimArgs, LearnArgs, LearnExactArgs,
    StagedArgs, VerifyArgs,
};

fn load(path: &Path) -> Result<thicket_core::format::ClassWithPrior> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_with_prior(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn load_class(path: &Path) -> Result<ConceptClass> {
    Ok(load(path)?.class)
}

fn target_index(class: &ConceptClass, label: &str) -> Result<usize> {
    class.index_of_label(label).map_err(|_| {
        usage(format!(
            "no concept labelled `{label}`; labels are {:?}",
            class.labels()
        ))
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn ldim(args: &LdimArgs) -> Result<bool> {
    let env = Envelope::new("ldim", None, args);
    let format = format_or(
        &args.out,
        Format::Text,
        &[Format::Text, Format::Json],
        "ldim",
    )?;
    let class = load_class(&args.class)?;
    let ldim = thicket_core::littlestone::ldim(&class);
    let bytes = match format {
        Format::Text => format!(
            "ldim: {ldim}\nconcepts: {}\npoints: {}\n",
            class.len(),
            class.domain().len()
        )
        .into_bytes(),
        _ => env.render(
            json!({"ldim": ldim, "concepts": class.len(), "points": class.domain().len()}),
            args.out.timing,
        ),
    };
    emit(&args.out, &bytes)?;
    Ok(true)
}

pub fn learn(args: &LearnArgs) -> Result<bool> {
    let env = Envelope::new("learn", Some(args.seed), args);
    let format = format_or(
        &args.out,
        Format::Json,
        &[Format::Json, Format::Csv],
        "learn",
    )?;
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let class = load_class(&args.class)?;
    let target = target_index(&class, &args.target)?;
    let policy = MaxMinPolicy::new(&class);
    let ldim = policy.cache().ldim_all();
    let summary = monte_carlo_with_policy(&policy, target, args.trials, args.seed)?;
    let bytes = match format {
        Format::Csv => format!(
            "{CSV_HEADER}\n{}\n",
            summary.csv_row(&args.class.display().to_string(), &args.target)
        )
        .into_bytes(),
        _ => {
            let bound = 2 * ldim as i64;
            env.render(
                json!({
                    "target": args.target,
                    "ldim": ldim,
                    "bound": bound,
                    "stderr": summary.stderr(),
                    "mean_within_bound": summary.mean <= bound as f64,
                    "mean_drop_per_counterexample": summary.mean_drop_per_counterexample(),
                    "summary": summary,
                }),
                args.out.timing,
            )
        }
    };
    emit(&args.out, &bytes)?;
    Ok(true)
}

#[derive(Serialize)]
struct ExactRow {
    target: String,
    expected_queries: String,
    expected_queries_f64: f64,
    expected_counterexamples: String,
}

pub fn learn_exact(args: &LearnExactArgs) -> Result<bool> {
    let env = Envelope::new("learn-exact", None, args);
    let format = format_or(
        &args.out,
        Format::Json,
        &[Format::Json, Format::Csv, Format::Text],
        "learn-exact",
    )?;
    let class = load_class(&args.class)?;
    let targets: Vec<usize> = match &args.target {
        Some(label) => vec![target_index(&class, label)?],
        None => (0..class.len()).collect(),
    };
    let policy = MaxMinPolicy::new(&class);
    let ldim = policy.cache().ldim_all();
    let eval = ExactEvaluator::new(&policy);
    let mut rows = Vec::new();
    for t in targets {
        let e = eval.expected_queries(t)?;
        rows.push(ExactRow {
            target: class.label(t).to_string(),
            expected_queries_f64: rational::to_f64(&e),
            expected_counterexamples: rational::format(&(&e - Rational::from_integer(1.into()))),
            expected_queries: rational::format(&e),
        });
    }
    let bytes = match format {
        Format::Text => rows
            .iter()
            .map(|r| format!("{}: {}\n", r.target, r.expected_queries))
            .collect::<String>()
            .into_bytes(),
        Format::Csv => {
            let mut s = String::from("class,target,expected_queries,ldim\n");
            for r in &rows {
                s += &format!(
                    "{},{},{},{ldim}\n",
                    csv_field(&args.class.display().to_string()),
                    csv_field(&r.target),
                    r.expected_queries
                );
            }
            s.into_bytes()
        }
        Format::Json => env.render(
            json!({"ldim": ldim, "bound": 2 * ldim, "targets": rows}),
            args.out.timing,
        ),
    };
    emit(&args.out, &bytes)?;
    Ok(true)
}

pub fn staged(args: &StagedArgs) -> Result<bool> {
    let env = Envelope::new("staged", Some(args.seed), args);
    let format = format_or(
        &args.out,
        Format::Json,
        &[Format::Json, Format::Csv],
        "staged",
    )?;
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if args.stage_cap == 0 {
        return Err(usage("--stage-cap must be at least 1"));
    }
    if args.family == "intervals" {
        let p = rational::parse(&args.prior_geometric)
            .map_err(|e| usage(format!("--prior-geometric: {e}")))?;
        let family = IntervalFamily::new(p).map_err(|e| usage(e.to_string()))?;
        run_staged(&family, args, &env, format)
    } else if let Some(path) = args.family.strip_prefix("file:") {
        let family = FiniteFamily::from_file(load(Path::new(path))?)
            .with_context(|| format!("building a family from {path}"))?;
        run_staged(&family, args, &env, format)
    } else {
        Err(usage(format!(
            "unknown family `{}`; expected `intervals` or `file:<path>`",
            args.family
        )))
    }
}

fn run_staged<F: CountableFamily>(
    family: &F,
    args: &StagedArgs,
    env: &Envelope,
    format: Format,
) -> Result<bool>
where
    F::Point: Send,
{
    let config = StagedConfig {
        stage_cap: args.stage_cap,
    };
    let summary = staged_monte_carlo(family, args.trials, args.seed, &config)?;
    let bytes = match format {
        Format::Csv => {
            let q = &summary.queries;
            format!(
                "family,trials,seed,mean,variance,max,stage_cap_hits\n{},{},{},{},{},{},{}\n",
                csv_field(&family.name()),
                q.trials,
                q.seed,
                q.mean,
                q.variance,
                q.max,
                summary.stage_cap_hits
            )
            .into_bytes()
        }
        _ => env.render(
            json!({
                "family": family.name(),
                "ldim_bound": family.ldim_bound(),
                "stderr": summary.queries.stderr(),
                "summary": summary,
            }),
            args.out.timing,
        ),
    };
    emit(&args.out, &bytes)?;
    Ok(summary.stage_cap_hits == 0)
}

pub fn compress(args: &CompressArgs) -> Result<bool> {
    let env = Envelope::new("compress", None, args);
    format_or(&args.out, Format::Json, &[Format::Json], "compress")?;
    let class = load_class(&args.class)?;
    if class.is_empty() {
        return Err(usage("class has no concepts"));
    }
    let k = args.max_sample_size.unwrap_or(class.domain().len());
    let report = certify_scheme(&class, k)?;
    let ok = report.passed();
    emit(&args.out, &env.render(&report, args.out.timing))?;
    Ok(ok)
}

fn check_of(c: CheckArg) -> Check {
    match c {
        CheckArg::DropPair => Check::DropPair,
        CheckArg::EdgePair => Check::EdgePair,
        CheckArg::QueryRank => Check::QueryRank,
        CheckArg::NoDeficientCycle => Check::NoDeficientCycle,
        CheckArg::LearnerBound => Check::LearnerBound,
        CheckArg::Compression => Check::Compression,
    }
}

pub fn verify(args: &VerifyArgs) -> Result<bool> {
    let env = Envelope::new("verify", args.random_classes.map(|_| args.seed), args);
    let format = format_or(
        &args.out,
        Format::Json,
        &[Format::Json, Format::Csv],
        "verify",
    )?;
    let classes = match (&args.class, args.random_classes) {
        (Some(path), _) => vec![load_class(path)?],
        (None, Some(n)) => {
            if !(1..=16).contains(&args.max_domain) {
                return Err(usage("--max-domain must lie in 1..=16"));
            }
            if args.max_concepts < 2 {
                return Err(usage("--max-concepts must be at least 2"));
            }
            corpus(args.seed, n, args.max_domain, args.max_concepts)
        }
        (None, None) => return Err(usage("pass --class or --random-classes")),
    };
    let mut checks: Vec<Check> = args.checks.iter().map(|&c| check_of(c)).collect();
    if checks.is_empty() {
        checks = Check::ALL.to_vec();
    }
    checks.dedup();
    let opts = VerifyOptions {
        checks,
        max_cycle_len: args.max_cycle_len,
        max_sample_size: args.max_sample_size,
        convention: match args.edge_convention {
            ConventionArg::Target => EdgeConvention::Target,
            ConventionArg::Query => EdgeConvention::Query,
        },
    };
    let report = verify_classes(&classes, &opts);

    if let Some(dir) = &args.witness_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (n, v) in report.violations.iter().enumerate() {
            let path = dir.join(format!("violation-{n}.json"));
            write_to(Some(&path), v.witness.as_bytes())?;
        }
    }

    let bytes = match format {
        Format::Csv => {
            let mut s = String::from("check,instances,failures\n");
            for c in &report.checks {
                s += &format!("{},{},{}\n", c.check.name(), c.instances, c.failures);
            }
            s.into_bytes()
        }
        _ => {
            let violations: Vec<Value> = report
                .violations
                .iter()
                .map(|v| {
                    json!({
                        "check": v.check,
                        "class_index": v.class_index,
                        "detail": v.detail,
                        "witness": serde_json::from_str::<Value>(&v.witness).expect("class file is JSON"),
                    })
                })
                .collect();
            env.render(
                json!({
                    "classes": report.classes,
                    "passed": report.passed(),
                    "checks": report.checks,
                    "violations": violations,
                }),
                args.out.timing,
            )
        }
    };
    emit(&args.out, &bytes)?;
    Ok(report.passed())
}

pub fn gen(args: &GenArgs) -> Result<bool> {
    if !(1..=16).contains(&args.domain) {
        return Err(usage("--domain must lie in 1..=16"));
    }
    let space = 1usize << args.domain;
    if args.concepts == 0 || args.concepts > space {
        return Err(usage(format!(
            "--concepts must lie in 1..={space} for {} points",
            args.domain
        )));
    }
    let mut rng = learner::rng_from_seed(args.seed);
    let class = random_class(&mut rng, args.domain, args.concepts);
    let tau = args.tau.then(|| random_weights(&mut rng, class.len()));
    write_to(
        args.output.as_deref(),
        &save_with_prior(&class, tau.as_deref()),
    )?;
    Ok(true)
}
