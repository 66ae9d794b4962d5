use std::path::PathBuf;

use gva_core::data::synthetic::{write_synthetic_polypharmacy, write_synthetic_toenail, TOENAIL_MEASUREMENTS};
use gva_core::data::{
    build_epilepsy_model, build_polypharmacy_model, build_toenail_model, epilepsy_schema, load_csv, load_returns,
    mean_corrected_returns, polypharmacy_schema, read_csv, toenail_schema, write_returns_csv, EpilepsyVariant,
};
use gva_core::models::{GlmmSpec, TargetModel};
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn finite_design(spec: &GlmmSpec) -> bool {
    spec.subjects().iter().all(|s| s.y.iter().chain(&s.x).chain(&s.z).all(|v| v.is_finite()))
}

fn same_spec(a: &GlmmSpec, b: &GlmmSpec) -> bool {
    a.subjects() == b.subjects() && a.beta_names() == b.beta_names() && a.dim() == b.dim()
}

#[test]
fn epilepsy_models_have_the_expected_dimensions() {
    let table = load_csv(data("epilepsy.csv"), &epilepsy_schema()).unwrap();
    assert_eq!(table.n_subjects(), 59);
    let one = build_epilepsy_model(&table, EpilepsyVariant::I).unwrap();
    assert_eq!((one.n_observations(), one.dim()), (236, 66));
    let two = build_epilepsy_model(&table, EpilepsyVariant::II).unwrap();
    assert_eq!(two.dim(), 127);
    assert!(finite_design(&one) && finite_design(&two));

    let again = load_csv(data("epilepsy.csv"), &epilepsy_schema()).unwrap();
    assert!(same_spec(&one, &build_epilepsy_model(&again, EpilepsyVariant::I).unwrap()));
}

#[test]
fn toenail_and_polypharmacy_models() {
    let table = load_csv(data("toenail.csv"), &toenail_schema()).unwrap();
    let toenail = build_toenail_model(&table).unwrap();
    assert_eq!((toenail.n_subjects(), toenail.n_observations(), toenail.dim()), (294, 1908, 299));
    assert!(toenail.subjects().iter().any(|s| s.n_obs() < 7));
    assert!(toenail.subjects().iter().all(|s| s.n_obs() <= 7));
    assert!(finite_design(&toenail));

    let table = load_csv(data("polypharmacy.csv"), &polypharmacy_schema()).unwrap();
    let poly = build_polypharmacy_model(&table).unwrap();
    assert_eq!((poly.n_subjects(), poly.n_observations(), poly.dim()), (500, 3500, 509));
    assert!(finite_design(&poly));
    let again = load_csv(data("polypharmacy.csv"), &polypharmacy_schema()).unwrap();
    assert!(same_spec(&poly, &build_polypharmacy_model(&again).unwrap()));
}

#[test]
fn vendored_synthetic_files_regenerate_exactly() {
    let mut toenail = Vec::new();
    write_synthetic_toenail(1, &mut toenail).unwrap();
    assert_eq!(toenail, std::fs::read(data("toenail.csv")).unwrap());
    let table = read_csv(toenail.as_slice(), &toenail_schema()).unwrap();
    assert_eq!(table.n_rows(), TOENAIL_MEASUREMENTS);

    let mut poly = Vec::new();
    write_synthetic_polypharmacy(1, &mut poly).unwrap();
    assert_eq!(poly, std::fs::read(data("polypharmacy.csv")).unwrap());
}

#[test]
fn exchange_rate_series() {
    let gbp = load_returns(data("gbpusd.csv")).unwrap();
    assert_eq!(gbp.y.len(), 945);
    assert_eq!(gbp.rates.len(), 946);
    let scale = gbp.y.iter().map(|v| v.abs()).sum::<f64>();
    assert!(gbp.y.iter().sum::<f64>().abs() < 1e-9 * scale);
    assert_eq!(gbp, load_returns(data("gbpusd.csv")).unwrap());

    let dem = load_returns(data("demusd.csv")).unwrap();
    assert_eq!(dem.y.len(), 1866);

    let mut buf = Vec::new();
    write_returns_csv(&gbp, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 946);
    assert!(text.starts_with("t,y\n"));
}

#[test]
fn hand_computed_returns() {
    let series = mean_corrected_returns(&[1.0, 1f64.exp(), 1f64.exp()]).unwrap();
    assert!((series.y[0] - 50.0).abs() < 1e-12 && (series.y[1] + 50.0).abs() < 1e-12);
    assert!(mean_corrected_returns(&[2.0; 5]).unwrap().y.iter().all(|v| *v == 0.0));
    assert!(mean_corrected_returns(&[1.0, 0.0, 2.0]).is_err());
}

proptest! {
    #[test]
    fn returns_are_centred(rates in proptest::collection::vec(0.01f64..100.0, 2..300)) {
        let series = mean_corrected_returns(&rates).unwrap();
        prop_assert_eq!(series.y.len(), rates.len() - 1);
        let scale = series.y.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
        prop_assert!(series.y.iter().sum::<f64>().abs() <= 1e-9 * scale);
    }
}
