//! Every config survives serialize → parse unchanged, and documented
//! defaults fill in missing fields.

use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use seglab::cli::{
    AcfConfig, AlmgrenConfig, BlowdownConfig, DecayConfig, Fault, FieldSource, GridConfig,
    LogRadii, PartitionConfig, PartitionInput, Profile1dConfig, Radii, SolveExperiment,
    SphereGridConfig, VerifyConfig,
};
use seglab::cones::{ConeProfile, HalfInt};
use seglab::elliptic::{BoundarySpec, SolveConfig};
use seglab::spectral::PartitionSpec;

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(c: &T) {
    let text = serde_json::to_string(c).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, c, "{text}");
}

fn grid() -> impl Strategy<Value = GridConfig> {
    (8usize..300, 8usize..200, 0.1f64..100.0).prop_map(|(n_r, half_theta, r_max)| GridConfig {
        n_r,
        n_theta: 2 * half_theta,
        r_max,
    })
}

fn profile() -> impl Strategy<Value = ConeProfile> {
    (1u32..8, -3.0f64..3.0).prop_map(|(twice, rot)| {
        ConeProfile::alternating(HalfInt::from_twice(twice).unwrap(), rot)
    })
}

fn radii() -> impl Strategy<Value = Radii> {
    prop_oneof![
        proptest::collection::vec(0.01f64..10.0, 1..6).prop_map(Radii::List),
        (proptest::option::of(0.01f64..1.0), proptest::option::of(1.0f64..5.0), 1usize..16)
            .prop_map(|(r_min, r_max, per_doubling)| Radii::Log(LogRadii { r_min, r_max, per_doubling })),
    ]
}

fn solve_experiment() -> impl Strategy<Value = SolveExperiment> {
    (grid(), profile(), 1.0f64..1e4, 0.5f64..500.0, any::<bool>()).prop_map(|(g, p, amp, beta, tb)| {
        SolveExperiment {
            grid: g,
            k: p.components().max(1),
            boundary: BoundarySpec::profile(p, amp),
            solve: SolveConfig::continuation(beta),
            theorem_b: tb,
            bump: None,
        }
    })
}

fn source() -> impl Strategy<Value = FieldSource> {
    prop_oneof![
        solve_experiment().prop_map(FieldSource::Solve),
        (profile(), grid(), proptest::option::of(1usize..5), 0.1f64..10.0).prop_map(
            |(profile, grid, k, amplitude)| FieldSource::Profile { profile, grid, k, amplitude }
        ),
        grid().prop_map(|grid| FieldSource::FieldCsv { path: "field.csv".into(), grid }),
    ]
}

fn partition_spec() -> impl Strategy<Value = PartitionSpec> {
    prop_oneof![
        (1usize..10).prop_map(|k| PartitionSpec::ArcsEqual { k }),
        proptest::collection::vec(0.1f64..3.0, 1..5).prop_map(PartitionSpec::Lunes),
        proptest::collection::vec((0.0f64..3.0, 3.0f64..6.0).prop_map(|(a, b)| [a, b]), 1..4)
            .prop_map(PartitionSpec::Arcs),
        Just(PartitionSpec::MaskFile("masks.csv".into())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_configs(c in solve_experiment()) {
        round_trip(&c);
    }

    #[test]
    fn analysis_configs(
        src in source(),
        beta in proptest::option::of(0.0f64..100.0),
        r in radii(),
        acf_r in radii(),
        d in proptest::option::of(0.1f64..4.0),
        windows in proptest::collection::vec(0.05f64..1.0, 1..4),
    ) {
        round_trip(&AlmgrenConfig {
            source: src.clone(),
            beta,
            radii: r,
            d,
            acf: Some(AcfConfig { group: vec![0, 1], q: 1.9, slack: 1e-3, radii: acf_r }),
        });
        round_trip(&BlowdownConfig {
            source: src,
            beta,
            windows,
            target: None,
            d: Some(HalfInt::from_twice(3).unwrap()),
        });
    }

    #[test]
    fn small_configs(
        spec in partition_spec(),
        masked in any::<bool>(),
        ks in proptest::collection::vec(0.0f64..20.0, 0..5),
        a in 0.1f64..10.0,
        x_max in proptest::option::of(1.0f64..50.0),
        coarsen in proptest::option::of(16usize..64),
    ) {
        round_trip(&PartitionConfig {
            partition: spec,
            sphere_grid: SphereGridConfig { n_phi: 32, n_lam: 96 },
            masked_lunes: masked,
            lk_check: None,
        });
        round_trip(&DecayConfig { ks, a, r: 2.0, n: 3 });
        round_trip(&Profile1dConfig { a, x_max, h: None, tol: 1e-6, extension: None });
        round_trip(&VerifyConfig { fault: coarsen.map(Fault::Coarsen) });
    }
}

#[test]
fn defaults_fill_missing_fields() {
    let c: DecayConfig = serde_json::from_str(r#"{"ks": [1], "r": 1, "n": 2}"#).unwrap();
    assert_eq!(c.a, 1.0);
    let p: Profile1dConfig = serde_json::from_str(r#"{"a": 2}"#).unwrap();
    assert_eq!((p.x_max, p.h, p.tol), (None, None, 1e-6));
    let g: GridConfig = serde_json::from_str(r#"{"n_r": 16, "n_theta": 32}"#).unwrap();
    assert_eq!(g.r_max, 1.0);
    let s: SolveConfig = serde_json::from_str(r#"{"beta": 10}"#).unwrap();
    assert_eq!((s.tol_grad, s.max_iter, s.cg_tol), (1e-6, 5000, 1e-12));
    let b: BlowdownConfig = serde_json::from_str(
        r#"{"source": {"field_csv": {"path": "f.csv", "grid": {"n_r": 16, "n_theta": 32}}}}"#,
    )
    .unwrap();
    assert_eq!(b.windows, vec![0.25, 0.5, 1.0]);
    let bare: PartitionInput = serde_json::from_str(r#"{"lunes": [3.14]}"#).unwrap();
    let full = PartitionConfig::from(bare);
    assert_eq!(full.sphere_grid, SphereGridConfig { n_phi: 128, n_lam: 384 });
    assert!(!full.masked_lunes);
}

#[test]
fn unknown_fields_are_rejected() {
    assert!(serde_json::from_str::<DecayConfig>(r#"{"ks": [1], "r": 1, "n": 2, "x": 0}"#).is_err());
    assert!(serde_json::from_str::<GridConfig>(r#"{"n_r": 16, "n_theta": 32, "nr": 1}"#).is_err());
    assert!(serde_json::from_str::<VerifyConfig>(r#"{"fault": {"shrink": 16}}"#).is_err());
    assert!(serde_json::from_str::<PartitionInput>(r#"{"partition": {"arcs_equal": {"k": 2}}, "y": 1}"#).is_err());
}
