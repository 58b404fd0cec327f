//! Byte-level entry points shared by the fuzz targets and the corpus replay
//! test. Each one must return without panicking for any input.

use friction_core::coarse::Partition;
use friction_core::dynamics::ParameterPath;
use friction_core::estimators::Table;
use friction_core::rom::RomSystem;

use crate::RunConfig;

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

/// Generic CSV table. Every numeric column read back has the table's length.
pub fn table_csv(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let Ok(table) = Table::parse_str(s) else { return };
    for name in table.header() {
        if let Ok(col) = table.column_f64(name) {
            assert_eq!(col.len(), table.len());
        }
    }
}

/// Sweep metrics CSV. Writing then re-reading a parsed file is a fixed point.
pub fn metrics_csv(data: &[u8]) {
    let Ok(records) = friction_marl::read_csv(data) else { return };
    let Ok(once) = friction_marl::to_csv_string(&records) else { return };
    let again = friction_marl::read_csv(once.as_bytes()).expect("written CSV re-reads");
    assert_eq!(friction_marl::to_csv_string(&again).unwrap(), once);
}

/// ROM system document. Accepted systems survive a JSON round trip; rows are
/// renormalized on load, so the kernel may move by rounding.
pub fn rom_system_json(data: &[u8]) {
    let Ok(sys) = serde_json::from_slice::<RomSystem>(data) else { return };
    let json = serde_json::to_string(&sys).expect("system serializes");
    let back: RomSystem = serde_json::from_str(&json).expect("serialized system re-parses");
    assert_eq!(back.weights(), sys.weights());
    assert_eq!(back.survival(), sys.survival());
    for (a, b) in back.mutation().iter().flatten().zip(sys.mutation().iter().flatten()) {
        assert!((a - b).abs() <= 1e-15);
    }
}

/// Partition as a class-assignment array.
pub fn partition_json(data: &[u8]) {
    let Ok(part) = serde_json::from_slice::<Partition>(data) else { return };
    assert_eq!(part.fine_count(), part.assignment().len());
    for c in 0..part.class_count() {
        assert!(!part.members(c).is_empty());
    }
    let back: Partition = serde_json::from_str(&serde_json::to_string(&part).unwrap()).unwrap();
    assert_eq!(back, part);
}

/// Parameter path. Accepted paths evaluate at their first knot.
pub fn parameter_path_json(data: &[u8]) {
    let Ok(path) = serde_json::from_slice::<ParameterPath>(data) else { return };
    let _ = path.friction_at(0.0);
    let back: ParameterPath = serde_json::from_str(&serde_json::to_string(&path).unwrap()).unwrap();
    assert_eq!(back, path);
}

/// Top-level run configuration.
pub fn run_config_json(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let _ = RunConfig::parse(s);
}

/// Target name and entry point, in corpus directory order.
pub const TARGETS: [(&str, fn(&[u8])); 6] = [
    ("table_csv", table_csv),
    ("metrics_csv", metrics_csv),
    ("rom_system_json", rom_system_json),
    ("partition_json", partition_json),
    ("parameter_path_json", parameter_path_json),
    ("run_config_json", run_config_json),
];
