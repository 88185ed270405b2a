//! Robot descriptions and scenarios compiled into the crate.

pub const ROBOTS: [&str; 5] = [
    "planar2r.json",
    "planar3r.json",
    "planar4r.json",
    "ur5_6dof.json",
    "panda7.json",
];

pub fn robot(name: &str) -> Option<&'static str> {
    Some(match name {
        "planar2r.json" => include_str!("../fixtures/planar2r.json"),
        "planar3r.json" => include_str!("../fixtures/planar3r.json"),
        "planar4r.json" => include_str!("../fixtures/planar4r.json"),
        "ur5_6dof.json" => include_str!("../fixtures/ur5_6dof.json"),
        "panda7.json" => include_str!("../fixtures/panda7.json"),
        _ => return None,
    })
}

pub const SCENARIOS: [&str; 3] = [
    "panda_pair_symmetric.json",
    "panda_pair_asymmetric.json",
    "panda_pair_heavy.json",
];

pub fn scenario(name: &str) -> Option<&'static str> {
    Some(match name {
        "panda_pair_symmetric.json" => include_str!("../fixtures/panda_pair_symmetric.json"),
        "panda_pair_asymmetric.json" => include_str!("../fixtures/panda_pair_asymmetric.json"),
        "panda_pair_heavy.json" => include_str!("../fixtures/panda_pair_heavy.json"),
        _ => return None,
    })
}

/// Absolute path of the on-disk fixtures directory (for tests and examples).
pub fn dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
