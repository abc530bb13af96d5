//! Seeded generators of hubs and sizing problems for property tests and
//! benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::model::{
    assemble_hub, commodity, CommodityId, DeclaredSets, Hub, Hyperedge, Level, Location,
    LocationId, SetName, TechGraph, TechId, Technology, TechnologyKind,
};
use crate::optimize::{
    synthetic_profile, DemandSpec, DemandTarget, Horizon, Profile, SizingProblem, StorageBoundary,
    StorageSpec, TechEcon, TechnoEconomics,
};

const COMMODITIES: &[&str] = &[
    "electricity", "H2", "H2O", "O2", "CO2", "CH4", "CH4(l)", "CH4(g)", "heat", "N2", "NH3",
    "Ar", "sea water", "CH3OH",
];

const TECH_NAMES: &[&str] = &[
    "Wind", "PV", "electrolyzer", "Desalination", "Methanation", "DAC", "Battery", "HVDC",
    "Air Separation Unit", "Haber-Bosch", "H2-Storage", "3rd stage", "pipe_1", "Liquefaction",
];

const LOCATION_NAMES: &[&str] = &["Greenland", "North Australia", "Algeria", "Belgium", "site \"B\"", "a\\b"];

fn level<R: Rng>(rng: &mut R) -> Level {
    *[Level::Low, Level::Medium, Level::High].choose(rng).unwrap()
}

fn subset<T: Clone, R: Rng>(rng: &mut R, pool: &[T], max: usize) -> Vec<T> {
    let k = rng.random_range(0..=max.min(pool.len()));
    pool.choose_multiple(rng, k).cloned().collect()
}

/// A structurally valid technology graph: unique ids, kinds respected and
/// every hyperedge consistent with its endpoints' ports.
pub fn random_graph<R: Rng>(rng: &mut R, max_techs: usize, max_edges: usize) -> TechGraph {
    let locs: Vec<String> = (1..=rng.random_range(1..=3)).map(|i| format!("l{i}")).collect();
    let pool: Vec<CommodityId> = COMMODITIES.iter().map(|c| commodity(c)).collect();
    let n = rng.random_range(1..=max_techs.max(1));
    let mut ids = BTreeSet::new();
    let mut techs = Vec::new();
    while techs.len() < n {
        let base = TECH_NAMES.choose(rng).unwrap();
        let name = if rng.random_bool(0.5) {
            base.to_string()
        } else {
            format!("{base} {}", rng.random_range(1..9))
        };
        let id = TechId::new(&name, locs.choose(rng).unwrap()).unwrap();
        if !ids.insert(id.clone()) {
            continue;
        }
        let kind = match rng.random_range(0..10) {
            0..=5 => TechnologyKind::Generic,
            6 => TechnologyKind::Import,
            7 | 8 => TechnologyKind::Export,
            _ => TechnologyKind::Opportunity,
        };
        let ins = if kind == TechnologyKind::Import { vec![] } else { subset(rng, &pool, 3) };
        let outs = if kind.is_sink() { vec![] } else { subset(rng, &pool, 3) };
        techs.push(Technology::new(id, kind, ins, outs));
    }
    let mut edges = Vec::new();
    let edge_count = rng.random_range(0..=max_edges);
    for _ in 0..edge_count {
        let c = pool.choose(rng).unwrap();
        let producers: Vec<TechId> = techs.iter().filter(|t| t.outputs.contains(c)).map(|t| t.id.clone()).collect();
        if producers.is_empty() {
            continue;
        }
        let consumers: Vec<TechId> = techs.iter().filter(|t| t.inputs.contains(c)).map(|t| t.id.clone()).collect();
        let mut p = subset(rng, &producers, 3);
        if p.is_empty() {
            p.push(producers[0].clone());
        }
        let q = subset(rng, &consumers, 3);
        let edge = Hyperedge::new(c.clone(), p, q);
        if !edges.contains(&edge) {
            edges.push(edge);
        }
    }
    TechGraph::new(techs, edges)
}

/// A random hub around [`random_graph`], with locations for every
/// referenced location id and, sometimes, declared sets.
pub fn random_hub<R: Rng>(rng: &mut R) -> Hub {
    let graph = random_graph(rng, 8, 10);
    let mut loc_ids: BTreeSet<LocationId> = graph.technologies().iter().map(|t| t.id.location.clone()).collect();
    if rng.random_bool(0.2) {
        loc_ids.insert(LocationId::new("l9").unwrap());
    }
    let locations = loc_ids
        .into_iter()
        .map(|id| {
            let mut resources: Vec<String> = subset(rng, &["wind".to_string(), "solar".into(), "renewable".into()], 2);
            if resources.is_empty() {
                resources.push("wind".into());
            }
            let potential: Vec<(String, Level)> = resources.into_iter().map(|r| (r, level(rng))).collect();
            Location::new(id, LOCATION_NAMES.choose(rng).unwrap(), potential, level(rng))
        })
        .collect();
    let declared = if rng.random_bool(0.3) {
        let pool: Vec<CommodityId> = COMMODITIES.iter().map(|c| commodity(c)).collect();
        let mut d = DeclaredSets::new();
        let mut names = SetName::ALL.to_vec();
        names.shuffle(rng);
        for name in names.into_iter().take(rng.random_range(1..=3)) {
            d.insert(name, subset(rng, &pool, 3).into_iter().collect());
        }
        Some(d)
    } else {
        None
    };
    let id = format!("hub {}", rng.random_range(0..1000));
    assemble_hub(&id, locations, graph, declared).expect("generated graphs are consistent")
}

fn tid(name: &str) -> TechId {
    TechId::new(name, "l1").unwrap()
}

/// Small wind→electrolyzer→export sizing problem with random costs,
/// conversions, availability and demand. Some instances are infeasible
/// through a tight capacity bound.
pub fn random_small_problem<R: Rng>(rng: &mut R) -> SizingProblem {
    let steps = if rng.random_bool(0.7) { 1 } else { 2 };
    let n_gen = rng.random_range(1..=2);
    let water = rng.random_bool(0.4);
    let oxygen = rng.random_bool(0.5);
    let e = commodity("electricity");
    let h2 = commodity("H2");
    let h2o = commodity("H2O");
    let o2 = commodity("O2");

    let mut techs = Vec::new();
    let mut econ = TechnoEconomics::default();
    let mut profiles = BTreeMap::new();
    let gens: Vec<TechId> = (0..n_gen).map(|i| tid(&format!("G{i}"))).collect();
    for g in &gens {
        techs.push(Technology::new(g.clone(), TechnologyKind::Generic, [], [e.clone()]));
        let mut te = TechEcon::new(rng.random_range(1.0..10.0), rng.random_range(0.0..2.0), [(e.clone(), 1.0)]);
        if rng.random_bool(0.6) {
            let id = format!("p_{}", g.name);
            let values = (0..steps).map(|_| rng.random_range(0.2..=1.0)).collect();
            profiles.insert(id.clone(), Profile { id: id.clone(), values });
            te.profile_ref = Some(id);
        }
        if rng.random_bool(0.2) {
            te.capacity_bounds = (0.0, rng.random_range(0.5..3.0));
        }
        econ.techs.insert(g.clone(), te);
    }
    let elec = tid("E");
    let mut ins = vec![e.clone()];
    let mut outs = vec![h2.clone()];
    let mut conv = vec![(e.clone(), -rng.random_range(0.5..2.0)), (h2.clone(), 1.0)];
    if water {
        ins.push(h2o.clone());
        conv.push((h2o.clone(), -rng.random_range(0.5..1.5)));
        techs.push(Technology::new(tid("W"), TechnologyKind::Import, [], [h2o.clone()]));
    }
    if oxygen {
        outs.push(o2.clone());
        conv.push((o2.clone(), rng.random_range(0.1..1.0)));
    }
    techs.push(Technology::new(elec.clone(), TechnologyKind::Generic, ins, outs));
    econ.techs.insert(elec.clone(), TechEcon::new(rng.random_range(1.0..10.0), rng.random_range(0.0..1.0), conv));
    techs.push(Technology::new(tid("X"), TechnologyKind::Export, [h2.clone()], []));

    let mut edges = vec![
        Hyperedge::new(e, gens.clone(), [elec.clone()]),
        Hyperedge::new(h2.clone(), [elec.clone()], [tid("X")]),
    ];
    if water {
        edges.push(Hyperedge::new(h2o, [tid("W")], [elec.clone()]));
    }
    if oxygen {
        edges.push(Hyperedge::new(o2, [elec], []));
    }
    let loc = Location::new(LocationId::new("l1").unwrap(), "site", [("wind".to_string(), Level::High)], Level::Low);
    let hub = assemble_hub("small", vec![loc], TechGraph::new(techs, edges), None).unwrap();
    let target = if rng.random_bool(0.7) { DemandTarget::PerStep } else { DemandTarget::Total };
    let demand = DemandSpec {
        commodity: h2,
        quantity: rng.random_range(0.0..3.0),
        target,
    };
    SizingProblem::new(
        hub,
        econ,
        profiles,
        vec![demand],
        Horizon { steps, step_hours: 1.0 },
        StorageBoundary::Cyclic,
    )
    .expect("generated problems are well-formed")
}

/// Wind and PV with a battery feeding an electrolyzer, sized over `steps`
/// hours with synthetic profiles. Used by the benchmark.
pub fn benchmark_problem(steps: usize, seed: u64) -> SizingProblem {
    let e = commodity("electricity");
    let h2 = commodity("H2");
    let o2 = commodity("O2");
    let (wind, pv, bat, elz, exp) = (tid("Wind"), tid("PV"), tid("Battery"), tid("electrolyzer"), tid("export"));
    let techs = vec![
        Technology::new(wind.clone(), TechnologyKind::Generic, [], [e.clone()]),
        Technology::new(pv.clone(), TechnologyKind::Generic, [], [e.clone()]),
        Technology::new(bat.clone(), TechnologyKind::Generic, [e.clone()], [e.clone()]),
        Technology::new(elz.clone(), TechnologyKind::Generic, [e.clone()], [h2.clone(), o2.clone()]),
        Technology::new(exp.clone(), TechnologyKind::Export, [h2.clone()], []),
    ];
    let edges = vec![
        Hyperedge::new(e.clone(), [wind.clone(), pv.clone(), bat.clone()], [bat.clone(), elz.clone()]),
        Hyperedge::new(h2.clone(), [elz.clone()], [exp]),
        Hyperedge::new(o2.clone(), [elz.clone()], []),
    ];
    let loc = Location::new(
        LocationId::new("l1").unwrap(),
        "bench",
        [("wind".to_string(), Level::High), ("solar".to_string(), Level::High)],
        Level::Low,
    );
    let hub = assemble_hub("bench", vec![loc], TechGraph::new(techs, edges), None).unwrap();
    let mut econ = TechnoEconomics::default();
    let mut w = TechEcon::new(12.0, 0.0, [(e.clone(), 1.0)]);
    w.profile_ref = Some("wind".into());
    let mut p = TechEcon::new(8.0, 0.0, [(e.clone(), 1.0)]);
    p.profile_ref = Some("pv".into());
    let mut b = TechEcon::new(3.0, 0.01, []);
    b.storage = Some(StorageSpec {
        commodity: e.clone(),
        charge_efficiency: 0.95,
        discharge_efficiency: 0.95,
        energy_to_power: 4.0,
    });
    econ.techs.insert(wind, w);
    econ.techs.insert(pv, p);
    econ.techs.insert(bat, b);
    econ.techs.insert(elz, TechEcon::new(6.0, 0.1, [(e, -1.4), (h2.clone(), 1.0), (o2, 0.8)]));
    let profiles = ["wind", "pv"]
        .into_iter()
        .map(|id| (id.to_string(), synthetic_profile(id, steps, seed)))
        .collect();
    SizingProblem::new(
        hub,
        econ,
        profiles,
        vec![DemandSpec {
            commodity: h2,
            quantity: steps as f64,
            target: DemandTarget::Total,
        }],
        Horizon { steps, step_hours: 1.0 },
        StorageBoundary::Cyclic,
    )
    .expect("benchmark problem is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_hubs_have_no_structural_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let hub = random_hub(&mut rng);
            let report = validate(&hub);
            assert!(report.errors.is_empty(), "{:?}", report.errors);
        }
    }

    #[test]
    fn benchmark_problem_builds() {
        let p = benchmark_problem(24, 1);
        assert!(crate::optimize::build_lp(&p).is_ok());
    }
}
