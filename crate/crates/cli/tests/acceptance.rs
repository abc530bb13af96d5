//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rreh_core::diff::{diff_hubs, DiffSet};
use rreh_core::dsl::{parse, serialize, HubDocument};
use rreh_core::model::{derive_byproducts, expand_hyperedges, validate, Code, Hub, SetName, Subject};
use rreh_core::optimize::{
    build_lp, check_kkt, parse_annex, presolve_lp, solve, LpStatus, ProfileSource, Sense, SizingProblem,
    SolverOptions,
};
use rreh_core::synth::{random_graph, random_hub, random_small_problem};

#[path = "../../core/tests/support/vertex.rs"]
mod vertex;

const REL_OBJ: f64 = 1e-6;
const CONSERVATION: f64 = 1e-7;
const CAPACITY: f64 = 1e-9;
const GAP: f64 = 1e-6;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check, Option<u64>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn rrehc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrehc"))
        .current_dir(fixtures())
        .args(args)
        .output()
        .expect("rrehc runs")
}

fn load(name: &str) -> Result<HubDocument, String> {
    let text = std::fs::read_to_string(fixtures().join(name)).map_err(|e| format!("{name}: {e}"))?;
    parse(&text, name).map_err(|d| format!("{name}: {} parse diagnostics", d.len()))
}

fn names(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn set(hub: &Hub, name: SetName) -> BTreeSet<String> {
    hub.set(name).iter().map(|c| c.as_str().to_string()).collect()
}

fn expect_sets(hub: &Hub, want: &[(SetName, &[&str])]) -> Check {
    for (name, members) in want {
        let got = set(hub, *name);
        ensure!(got == names(members), "{} = {got:?}, expected {members:?}", name.as_str());
    }
    Ok(())
}

fn greenland() -> Check {
    let doc = load("greenland.rreh")?;
    expect_sets(
        &doc.hub,
        &[
            (SetName::C, &["electricity", "H2O", "H2", "O2"]),
            (SetName::E, &["H2"]),
            (SetName::I, &["H2O"]),
            (SetName::B, &["O2"]),
            (SetName::O, &[]),
        ],
    )?;
    let out = rrehc(&["derive", "--set", "all", "greenland.rreh"]);
    let text = String::from_utf8_lossy(&out.stdout);
    ensure!(out.status.success(), "derive exited {:?}", out.status.code());
    for line in ["C = {H2, H2O, O2, electricity}", "E = {H2}", "I = {H2O}", "B = {O2}", "O = {}"] {
        ensure!(text.lines().any(|l| l.starts_with(line)), "missing `{line}` in\n{text}");
    }
    Ok(())
}

fn algeria_ch4() -> Check {
    let doc = load("algeria_ch4_corrected.rreh")?;
    expect_sets(
        &doc.hub,
        &[
            (SetName::E, &["CH4"]),
            (SetName::I, &["sea water"]),
            (SetName::B, &["O2", "heat"]),
            (SetName::O, &[]),
        ],
    )?;
    ensure!(validate(&doc.hub).is_valid(), "corrected fixture has errors");

    let verbatim = load("algeria_ch4_verbatim.rreh")?;
    let report = validate(&verbatim.hub);
    let edges = verbatim.hub.edges();
    let h2_dac = report.errors.iter().any(|f| {
        f.code == Code::E002
            && matches!(f.subject, Subject::Flow(i)
                if edges[i].commodity.as_str() == "H2"
                    && edges[i].consumers.iter().any(|t| t.name == "DAC"))
    });
    ensure!(h2_dac, "no E002 on the H2 flow into DAC");
    let sea_water = report.warnings.iter().any(|f| {
        f.code == Code::W002 && f.subject == Subject::Set(SetName::C) && f.message.contains("sea water")
    });
    ensure!(sea_water, "no W002 on C naming sea water");
    Ok(())
}

fn ch4_vs_nh3() -> Check {
    let left = load("algeria_ch4_corrected.rreh")?;
    let right = load("algeria_nh3_corrected.rreh")?;
    let report = diff_hubs(&left.hub, &right.hub).map_err(|e| e.to_string())?;
    let e = report.delta(DiffSet::E);
    ensure!(
        e.only_left == ["CH4"] && e.only_right == ["NH3"],
        "E delta {:?} / {:?}",
        e.only_left,
        e.only_right
    );
    let b = report.delta(DiffSet::B);
    ensure!(b.only_left.is_empty() && b.only_right == ["Ar"], "B delta {:?} / {:?}", b.only_left, b.only_right);
    for s in [DiffSet::L, DiffSet::I, DiffSet::O] {
        ensure!(report.delta(s).is_same(), "{} differs", s.as_str());
    }
    for (fmt, golden) in [("table", "algeria_ch4_vs_nh3.table.txt"), ("json", "algeria_ch4_vs_nh3.json")] {
        let out = rrehc(&[
            "diff",
            "--format",
            fmt,
            "algeria_ch4_corrected.rreh",
            "algeria_nh3_corrected.rreh",
        ]);
        let want = std::fs::read(fixtures().join("golden").join(golden)).map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "diff exited {:?}", out.status.code());
        ensure!(out.stdout == want, "{fmt} output differs from golden/{golden}");
    }
    Ok(())
}

fn australia() -> Check {
    let doc = load("australia_ch3oh.rreh")?;
    expect_sets(
        &doc.hub,
        &[
            (SetName::O, &["CH3OH"]),
            (SetName::B, &["O2", "heat"]),
            (SetName::I, &["sea water"]),
            (SetName::E, &["CH3OH"]),
        ],
    )?;
    let out = rrehc(&["design", "--from", "australia_ch3oh.rreh"]);
    ensure!(out.status.success(), "design exited {:?}", out.status.code());
    let text = String::from_utf8_lossy(&out.stdout);
    let marks: BTreeMap<usize, String> = text
        .lines()
        .filter_map(|l| {
            let rest = l.strip_prefix("#   ")?;
            let (k, tail) = rest.split_once(". ")?;
            Some((k.parse().ok()?, tail.to_string()))
        })
        .collect();
    for step in [1, 6] {
        let line = marks.get(&step).ok_or(format!("no checklist line for step {step}"))?;
        ensure!(line.trim_end().ends_with(" satisfied"), "step {step}: {line}");
    }
    Ok(())
}

fn expansion_property() -> Check {
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 12, 20);
        ensure!(g.technologies().len() <= 12 && g.edges().len() <= 20, "seed {seed}: graph too large");
        let expanded = expand_hyperedges(&g).map_err(|e| format!("seed {seed}: {e}"))?;
        let mut simple = Vec::new();
        for e in g.edges() {
            for p in &e.producers {
                for _ in &e.consumers {
                    simple.push((e.commodity.clone(), p.clone()));
                }
            }
        }
        let sum: usize = g.edges().iter().map(|e| e.producers.len() * e.consumers.len()).sum();
        ensure!(expanded.len() == sum, "seed {seed}: {} simple edges, expected {sum}", expanded.len());
        let mut brute = BTreeSet::new();
        for t in g.technologies() {
            for c in &t.outputs {
                if !simple.iter().any(|(k, p)| k == c && p == &t.id) {
                    brute.insert(c.clone());
                }
            }
        }
        let derived = derive_byproducts(&g).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(derived == brute, "seed {seed}: byproducts {derived:?} vs {brute:?}");
    }
    Ok(())
}

fn round_trip() -> Check {
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hub = random_hub(&mut rng);
        let text = serialize(&hub);
        let doc = parse(&text, "generated.rreh").map_err(|d| format!("seed {seed}: {d:?}"))?;
        ensure!(doc.hub == hub, "seed {seed}: hub changed through the text format");
    }
    Ok(())
}

fn lp_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SolverOptions::default();
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 200 {
        attempts += 1;
        ensure!(attempts < 20_000, "too few small programs generated");
        let problem = random_small_problem(&mut rng);
        let (lp, layout) = build_lp(&problem).map_err(|e| e.to_string())?;
        match presolve_lp(&lp) {
            Some(r) if r.num_vars() <= 8 => {}
            _ => continue,
        }
        checked += 1;
        let oracle = vertex::vertex_min(&lp);
        let sol = solve(&problem, &opts).map_err(|e| e.to_string())?;
        match oracle {
            None => ensure!(sol.status == LpStatus::Infeasible, "case {checked}: oracle infeasible, solver {:?}", sol.status),
            Some(v) => {
                ensure!(sol.status == LpStatus::Optimal, "case {checked}: oracle {v}, solver {:?}", sol.status);
                let rel = (sol.objective - v).abs() / v.abs().max(1.0);
                ensure!(rel <= REL_OBJ, "case {checked}: objective {} vs oracle {v}", sol.objective);
                let x = &sol.lp.x;
                let residual = sol.balance_residual(&lp, &layout);
                ensure!(residual <= CONSERVATION, "case {checked}: conservation residual {residual}");
                for &r in &layout.capacity_rows {
                    let row = &lp.rows[r];
                    ensure!(row.sense == Sense::Le, "capacity row {} is not ≤", row.name);
                    let over = row.activity(x) - row.rhs;
                    ensure!(over <= CAPACITY, "case {checked}: {} exceeded by {over}", row.name);
                }
                let gap = check_kkt(&lp, x, &sol.lp.y).gap;
                ensure!(gap <= GAP, "case {checked}: duality gap {gap}");
            }
        }
    }
    Ok(())
}

fn toy_problem(hub: &str, annex: &str, profiles: &str) -> Result<SizingProblem, String> {
    let doc = load(hub)?;
    let text = std::fs::read_to_string(fixtures().join(annex)).map_err(|e| e.to_string())?;
    let annex = parse_annex(&text, &doc.hub).map_err(|e| e.to_string())?;
    let source = ProfileSource {
        dir: Some(fixtures().join(profiles)),
        seed: None,
    };
    SizingProblem::from_annex(doc.hub, annex, &source).map_err(|e| e.to_string())
}

fn toy_objective(hub: &str, annex: &str, profiles: &str) -> Result<f64, String> {
    let started = Instant::now();
    let sol = solve(&toy_problem(hub, annex, profiles)?, &SolverOptions::default()).map_err(|e| e.to_string())?;
    ensure!(sol.status == LpStatus::Optimal, "{hub}/{profiles}: {:?}", sol.status);
    ensure!(started.elapsed() < Duration::from_secs(1), "{hub}/{profiles}: took {:?}", started.elapsed());
    Ok(sol.objective)
}

fn toy_optimum() -> Check {
    let close = |got: f64, want: f64| (got - want).abs() / want.abs().max(1.0) <= REL_OBJ;
    let uniform = toy_objective("toy_wind_h2.rreh", "toy_wind_h2.econ.toml", "profiles_uniform")?;
    ensure!(close(uniform, 20.0), "uniform objective {uniform}, expected 20");
    let half = toy_objective("toy_wind_h2.rreh", "toy_wind_h2.econ.toml", "profiles_half")?;
    ensure!(close(half, 30.0), "half objective {half}, expected 30");
    let battery = toy_objective("toy_wind_h2_battery.rreh", "toy_wind_h2_battery.econ.toml", "profiles_half")?;
    ensure!(battery < half * (1.0 - REL_OBJ), "battery objective {battery} not below {half}");
    Ok(())
}

fn corpus_commands() -> Vec<Vec<String>> {
    let hubs = [
        "greenland.rreh",
        "empty.rreh",
        "algeria_ch4_verbatim.rreh",
        "algeria_ch4_corrected.rreh",
        "algeria_nh3_verbatim.rreh",
        "algeria_nh3_corrected.rreh",
        "australia_ch3oh.rreh",
        "toy_wind_h2.rreh",
        "toy_wind_h2_battery.rreh",
    ];
    let mut cmds: Vec<Vec<&str>> = Vec::new();
    cmds.push(["validate"].into_iter().chain(hubs).collect());
    cmds.push(["validate", "--format", "json"].into_iter().chain(hubs).collect());
    for h in hubs {
        cmds.push(vec!["derive", h]);
        cmds.push(vec!["derive", "--format", "json", h]);
        cmds.push(vec!["derive", "--set", "B", h]);
        cmds.push(vec!["export", "--dot", h]);
        cmds.push(vec!["export", "--dot", "--expand", h]);
        cmds.push(vec!["export", "--skeleton", h]);
        cmds.push(vec!["design", "--from", h]);
        for other in hubs {
            cmds.push(vec!["diff", h, other]);
        }
    }
    cmds.push(vec!["diff", "--format", "json", "algeria_ch4_corrected.rreh", "algeria_nh3_corrected.rreh"]);
    cmds.push(vec!["design"]);
    for fmt in ["text", "json", "csv"] {
        for p in ["profiles_uniform", "profiles_half"] {
            cmds.push(vec!["optimize", "toy_wind_h2.rreh", "toy_wind_h2.econ.toml", p, "--format", fmt]);
        }
        cmds.push(vec![
            "optimize",
            "toy_wind_h2_battery.rreh",
            "toy_wind_h2_battery.econ.toml",
            "profiles_half",
            "--format",
            fmt,
        ]);
        cmds.push(vec!["optimize", "australia_ch3oh.rreh", "australia_ch3oh.econ.toml", "--seed", "42", "--format", fmt]);
    }
    cmds.into_iter().map(|c| c.into_iter().map(String::from).collect()).collect()
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("fixture dir readable") {
            let p = entry.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.clone(), std::fs::read(&p).expect("fixture readable"));
            }
        }
    }
    out
}

fn determinism() -> Check {
    let before = snapshot(&fixtures());
    for cmd in corpus_commands() {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let a = rrehc(&args);
        let b = rrehc(&args);
        ensure!(
            a.stdout == b.stdout && a.stderr == b.stderr && a.status.code() == b.status.code(),
            "rrehc {} differs between runs",
            args.join(" ")
        );
    }
    ensure!(snapshot(&fixtures()) == before, "fixture corpus modified");
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("greenland reproduction", greenland, Some(1)),
        ("algeria CH4 reproduction", algeria_ch4, Some(1)),
        ("NH3/CH4 comparison", ch4_vs_nh3, Some(1)),
        ("australia walkthrough", australia, Some(1)),
        ("hyperedge expansion property (1000 graphs)", expansion_property, Some(30)),
        ("text format round trip (1000 hubs)", round_trip, Some(30)),
        ("LP oracle equivalence (200 programs)", lp_oracle, Some(60)),
        ("toy analytic optimum", toy_optimum, None),
        ("determinism over the fixture corpus", determinism, None),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let started = Instant::now();
        let mut result = check();
        let elapsed = started.elapsed();
        if let (Ok(()), Some(secs)) = (&result, limit) {
            if elapsed > Duration::from_secs(secs) {
                result = Err(format!("took {elapsed:?}, limit {secs} s"));
            }
        }
        match result {
            Ok(()) => println!("PASS {name} ({} ms)", elapsed.as_millis()),
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: {e}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
