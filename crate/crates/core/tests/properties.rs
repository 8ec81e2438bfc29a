use std::collections::BTreeMap;

use loopsoup::harness::{self, ExperimentConfig};
use loopsoup::interlacements::{equilibrium_solve, hitting_asymptotics_check};
use loopsoup::rng::{stream, ModuleTag};
use loopsoup::{ModelParams, Site, SiteSet};
use proptest::prelude::*;

proptest! {
    #[test]
    fn config_text_round_trips(
        name in "[a-z][a-z0-9_]{0,8}",
        entries in prop::collection::btree_map("[a-z][a-z0-9_.]{0,12}", "[A-Za-z0-9_.,:|+-]([A-Za-z0-9_.,:|+ -]{0,14}[A-Za-z0-9_.,:|+-])?", 0..8),
    ) {
        let mut c = ExperimentConfig::new(&name);
        let entries: BTreeMap<String, String> = entries.into_iter().filter(|(k, _)| k != "experiment").collect();
        for (k, v) in &entries {
            c.set(k, v).unwrap();
        }
        let back = ExperimentConfig::parse(&c.to_text()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
        prop_assert_eq!(back.values(), &entries);
    }

    #[test]
    fn resolved_configs_round_trip(seed in any::<u64>(), replicas in 1u64..1000) {
        let mut c = ExperimentConfig::new("soup");
        c.set("seed", seed).unwrap();
        c.set("density.replicas", replicas).unwrap();
        let r = harness::resolve(&c).unwrap();
        let back = harness::resolve(&ExperimentConfig::parse(&r.to_text()).unwrap()).unwrap();
        prop_assert_eq!(back.hash(), r.hash());
        prop_assert_eq!(back.seed().unwrap(), seed);
    }
}

#[test]
fn stochastic_experiments_replay_bit_identically() {
    let mut c = ExperimentConfig::new("interlace");
    c.set("draws", 300).unwrap();
    c.set("seed", 9).unwrap();
    let a = harness::run(&c).unwrap();
    let b = harness::run(&c).unwrap();
    assert!(a.same_outcome(&b));
    assert_eq!(a.config_hash, b.config_hash);
}

#[test]
fn hitting_ratio_approaches_one_with_distance() {
    let p = ModelParams::critical(3, 1.0).unwrap();
    let eq = equilibrium_solve(&SiteSet::point(Site::origin(3)), &p, 20.0).unwrap();
    let check = |r: i32, walks: u64| {
        let mut rng = stream(21, ModuleTag::Hitting, r as u64, 0);
        let w = (r * r) as f64;
        hitting_asymptotics_check(&eq, &Site::origin(3), &Site::axis(3, 0, r), (w / 2.0, 2.0 * w), walks, &mut rng).unwrap()
    };
    let near = check(3, 200_000);
    let far = check(10, 1_000_000);
    let se = (near.ratio_se.powi(2) + far.ratio_se.powi(2)).sqrt();
    assert!((near.ratio - 1.0).abs() - (far.ratio - 1.0).abs() > 3.0 * se, "{near:?} {far:?}");
}
