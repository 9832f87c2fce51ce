use std::path::Path;

use proptest::prelude::*;
use seisfd::cli::main_with;
use seisfd::driver::{run, SimConfig};
use seisfd::grid::{Component, Field, Grid3D};
use seisfd::model::{load_model, save_model, two_layer_model, EarthModel};
use seisfd::propagators::PropagatorKind;
use seisfd::source::ShotRecord;
use seisfd::Error;

fn bits(f: &Field<f32>) -> Vec<u32> {
    f.interior_values().map(f32::to_bits).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn saved_models_load_bit_for_bit(
        n in prop::array::uniform3(1usize..7),
        d in prop::array::uniform3(1.0f64..50.0),
        seed in any::<u64>(),
        with_vs in any::<bool>(),
        with_rho in any::<bool>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let g = Grid3D::new(n, d, 4).unwrap();
        let vp = Field::from_fn(&g, Component::Vp, |_, _, _| rng.gen_range(1000.0f32..6000.0));
        let vs = with_vs.then(|| Field::from_fn(&g, Component::Vs, |_, _, _| rng.gen_range(0.0f32..500.0)));
        let rho = with_rho.then(|| Field::from_fn(&g, Component::Rho, |_, _, _| rng.gen_range(1000.0f32..3000.0)));
        let m = EarthModel::from_fields(vp, vs, rho).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        prop_assert_eq!(back.grid.n(), n);
        prop_assert_eq!(back.grid.d(), d);
        prop_assert_eq!(bits(&back.vp), bits(&m.vp));
        prop_assert_eq!(back.vs.as_ref().map(bits), m.vs.as_ref().map(bits));
        prop_assert_eq!(back.rho.as_ref().map(bits), m.rho.as_ref().map(bits));
    }
}

fn write_manifest(dir: &Path, json: &str, vp_values: usize) {
    std::fs::write(dir.join("model.json"), json).unwrap();
    let bytes: Vec<u8> = (0..vp_values).flat_map(|_| 2000f32.to_le_bytes()).collect();
    std::fs::write(dir.join("vp.f32"), bytes).unwrap();
}

#[test]
fn malformed_manifests_are_format_errors() {
    let cases = [
        r#"{"n":[4,4,4],"d":[10,10,10],"components":{"vp":"vp.f32"},"dtype":"f64le","order":"z-fastest"}"#,
        r#"{"n":[4,4,4],"d":[10,10,10],"components":{"vp":"vp.f32","qp":"vp.f32"},"dtype":"f32le","order":"z-fastest"}"#,
        r#"{"n":[4,4,4],"d":[10,10,10],"components":{"rho":"vp.f32"},"dtype":"f32le","order":"z-fastest"}"#,
        r#"{"n":[4,4,4],"d":[10,10,10],"components":{"vp":"vp.f32"},"dtype":"f32le","order":"z-slowest"}"#,
    ];
    for json in cases {
        let dir = tempfile::tempdir().unwrap();
        write_manifest(dir.path(), json, 64);
        let e = load_model(&dir.path().join("model.json")).unwrap_err();
        assert!(matches!(e, Error::Format { .. }), "{json}: {e}");
    }
}

#[test]
fn missing_volume_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("model.json"),
        r#"{"n":[4,4,4],"d":[10,10,10],"components":{"vp":"absent.f32"},"dtype":"f32le","order":"z-fastest"}"#,
    )
    .unwrap();
    let e = load_model(&dir.path().join("model.json")).unwrap_err();
    assert!(matches!(e, Error::Io { .. }), "{e}");
}

#[test]
fn manifest_run_matches_in_memory_run() {
    let cfg = SimConfig {
        ngrid: [22, 20, 18],
        dgrid: [15.0, 20.0, 25.0],
        nsteps: 40,
        ndamping: [5; 3],
        ..SimConfig::default()
    };
    let model = two_layer_model(&cfg.grid().unwrap()).unwrap();
    let (expected, _) = run::<f32>(&cfg, &model).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("model.json");
    save_model(&model, &manifest).unwrap();
    let out = dir.path().join("shot.f32");
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    // the manifest grid wins over --ngrid/--dgrid
    let code = main_with(
        [
            "seisfd",
            "--ngrid",
            "50,50,50",
            "--ndamping",
            "5,5,5",
            "--nsteps",
            "40",
            "--model-manifest",
            manifest.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        &mut stdout,
        &mut stderr,
    );
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&stderr));
    let (rec, side) = ShotRecord::load(&out).unwrap();
    assert_eq!(side.nreceivers, 22 * 20);
    assert_eq!(rec.nreceivers, expected.nreceivers);
    // traces are stored as f32, which is what the run computed in
    assert_eq!(rec.traces, expected.traces);
}

#[test]
fn elastic_run_from_manifest_needs_all_volumes() {
    let g = Grid3D::new([12; 3], [10.0; 3], 4).unwrap();
    let model = seisfd::model::constant_model(&g, 2500.0, None, Some(2000.0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("model.json");
    save_model(&model, &manifest).unwrap();
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let code = main_with(
        ["seisfd", "--ndamping", "2,2,2", "--nsteps", "3", "--propagator", PropagatorKind::ElasticIso.name(), "--model-manifest"]
            .into_iter()
            .map(String::from)
            .chain([manifest.to_string_lossy().into_owned()]),
        &mut stdout,
        &mut stderr,
    );
    assert_eq!(code, 2);
    assert!(String::from_utf8_lossy(&stderr).contains("vs"), "{}", String::from_utf8_lossy(&stderr));
}

#[test]
fn truncated_shot_record_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimConfig {
        ngrid: [16; 3],
        nsteps: 10,
        ndamping: [4; 3],
        ..SimConfig::default()
    };
    let g = cfg.grid().unwrap();
    let (rec, _) = run::<f32>(&cfg, &two_layer_model(&g).unwrap()).unwrap();
    let path = dir.path().join("shot.f32");
    rec.save(&path, &cfg.geometry(&g).unwrap()).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
    assert!(matches!(ShotRecord::load(&path), Err(Error::Format { .. })));
}
