use std::path::Path;

use spinsurf::cli::{catalog_params, write_catalog, CATALOG_FILES};
use spinsurf::load_network;
use spinsurf_core::make_geometry;

#[test]
fn shipped_files_match_generators() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("catalog");
    for (key, stem) in CATALOG_FILES {
        let shipped = load_network(dir.join(format!("{stem}.json"))).unwrap();
        assert_eq!(
            shipped,
            make_geometry(key, &catalog_params()).unwrap(),
            "{key}"
        );
    }
}

#[test]
fn export_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("catalog");
    for path in write_catalog(dir.path()).unwrap() {
        let name = path.file_name().unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(shipped.join(name)).unwrap(),
            "{name:?}"
        );
    }
}
