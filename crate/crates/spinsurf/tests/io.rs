use serde_json::json;
use spinsurf::io::{
    network_hash, network_to_json, parse_network, save_network, validation_report,
    write_matrix_market,
};
use spinsurf::{load_network, Error};
use spinsurf_core::{
    assemble_hamiltonian, build_basis, make_geometry, GeometryParams, SectorConstraint,
};

#[test]
fn round_trip_preserves_network() {
    for key in [
        "square2",
        "cube4",
        "ring(6)",
        "modular(2)",
        "nested_squares",
    ] {
        let net = make_geometry(key, &GeometryParams::default()).unwrap();
        let text = network_to_json(&net, json!({ "geometry": key }));
        let back = parse_network(&text).unwrap();
        assert_eq!(back, net, "{key}");
        assert_eq!(network_hash(&back), network_hash(&net));
    }
}

#[test]
fn save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube2.json");
    let net = make_geometry("cube2", &GeometryParams::default()).unwrap();
    save_network(&net, json!(null), &path).unwrap();
    assert_eq!(load_network(&path).unwrap(), net);
    assert!(matches!(
        load_network(dir.path().join("missing.json")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn hash_ignores_metadata_but_not_couplings() {
    let p = GeometryParams::default();
    let a = make_geometry("square2", &p).unwrap();
    let b = parse_network(&network_to_json(&a, json!({ "note": "anything" }))).unwrap();
    assert_eq!(network_hash(&a), network_hash(&b));
    let c = make_geometry("square2", &GeometryParams { lambda: 0.2, ..p }).unwrap();
    assert_ne!(network_hash(&a), network_hash(&c));
}

const PAIR: &str = r#"{
  "sites": [
    {"id": 0, "label": "B0", "kind": "bulk"},
    {"id": 1, "label": "B1", "kind": "bulk"},
    {"id": 2, "label": "S1", "kind": "surface"},
    {"id": 3, "label": "S2", "kind": "surface"}
  ],
  "bonds": [
    {"i": 0, "j": 1, "Jx": 1, "Jy": 1, "Jz": 0},
    {"i": 2, "j": 0, "Jx": 1, "Jy": 1, "Jz": 0, "weight": 0.1},
    {"i": 3, "j": 1, "Jx": 1, "Jy": 1, "Jz": 0, "weight": 0.1}
  ]
}"#;

fn codes(text: &str) -> Vec<String> {
    validation_report(text)
        .violations
        .into_iter()
        .map(|v| v.code)
        .collect()
}

#[test]
fn hand_written_file_is_valid() {
    let report = validation_report(PAIR);
    assert!(report.valid, "{report:?}");
    let net = parse_network(PAIR).unwrap();
    assert_eq!(net.surface_sites(), vec![2, 3]);
    assert_eq!(net.bonds()[0].weight, 1.0);
}

#[test]
fn surface_surface_bond_is_reported() {
    let text = PAIR.replace(
        r#"{"i": 3, "j": 1, "Jx": 1, "Jy": 1, "Jz": 0, "weight": 0.1}"#,
        r#"{"i": 3, "j": 1, "Jx": 1, "Jy": 1, "Jz": 0, "weight": 0.1},
    {"i": 2, "j": 3, "Jx": 1, "Jy": 1, "Jz": 0, "weight": 0.1}"#,
    );
    let c = codes(&text);
    assert!(c.contains(&"surface_surface_bond".to_string()), "{c:?}");
    assert!(parse_network(&text).is_err());
}

#[test]
fn odd_bulk_is_reported() {
    let text = PAIR
        .replace(
            r#"{"id": 3, "label": "S2", "kind": "surface"}"#,
            r#"{"id": 3, "label": "B2", "kind": "bulk"}"#,
        )
        .replace(
            r#"{"i": 3, "j": 1, "Jx": 1, "Jy": 1, "Jz": 0, "weight": 0.1}"#,
            r#"{"i": 3, "j": 1, "Jx": 1, "Jy": 1, "Jz": 0}"#,
        );
    assert_eq!(codes(&text), vec!["odd_bulk"]);
}

#[test]
fn all_violations_are_collected() {
    let text = PAIR
        .replace(r#""weight": 0.1}"#, r#""weight": 1.5}"#)
        .replace(
            r#"{"i": 0, "j": 1, "Jx": 1, "Jy": 1, "Jz": 0}"#,
            r#"{"i": 0, "j": 1, "Jx": 1, "Jy": 1, "Jz": 0, "weight": 0.5}"#,
        );
    let c = codes(&text);
    assert_eq!(
        c.iter().filter(|c| *c == "surface_weight").count(),
        2,
        "{c:?}"
    );
    assert!(c.contains(&"bulk_weight".to_string()));
}

#[test]
fn malformed_input_is_a_parse_error() {
    for text in [
        "",
        "{",
        r#"{"sites": [], "bonds": [], "extra": 1, "meta": 2}"#,
        &PAIR.replace("\"Jz\": 0}", "\"Jz\": 0, \"K\": 1}"),
    ] {
        let report = validation_report(text);
        assert!(!report.valid);
        if report.parse_error.is_none() {
            assert!(!report.violations.is_empty(), "{text}");
        }
    }
    let kind = PAIR.replace(r#""kind": "bulk"}"#, r#""kind": "core"}"#);
    assert!(validation_report(&kind).parse_error.is_some());
}

#[test]
fn matrix_market_lists_every_entry() {
    let net = parse_network(PAIR).unwrap();
    let basis = build_basis(4, SectorConstraint::Magnetization(0)).unwrap();
    let op = assemble_hamiltonian(&net, &basis).unwrap();
    let mut buf = Vec::new();
    write_matrix_market(&op, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
    assert_eq!(lines.next().unwrap(), format!("6 6 {}", op.nnz()));
    let mut dense = vec![0.0; 36];
    for l in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        let (i, j): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        dense[(i - 1) * 6 + (j - 1)] = f[2].parse::<f64>().unwrap();
    }
    assert_eq!(dense, op.to_dense());
}
