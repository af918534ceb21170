//! The canonical experiments.

use serde_json::{json, Value};

use super::config::ExperimentConfig;

pub const CANONICAL_NAMES: [&str; 8] = [
    "pw-alpha-0.8",
    "pw-alpha-1",
    "pw-alpha-1.25",
    "fock-s-0.8",
    "fock-s-1.2",
    "gabor-ab-0.8",
    "gabor-ab-1.2",
    "synthetic-poly-decay",
];

fn paley_wiener(id: &str, alpha: f64) -> Value {
    json!({
        "experiment_id": id,
        "space": {"type": "euclidean_lebesgue", "dim": 1},
        "kernel": {"type": "paley_wiener_box", "widths": [1.0]},
        "pointset": {"type": "lattice", "steps": [alpha], "window": 160.0},
        "centers": {"spacing": 1.0},
        "radii": [25.0, 50.0, 100.0],
        "quadrature": {"h": 0.05},
        "audit": {
            "centers": [[0.0], [0.37]],
            "wl_radii": [4.0, 8.0, 16.0, 32.0, 64.0],
            "hap_radii": [4.0, 8.0, 16.0, 32.0, 64.0]
        },
        "spectra": {
            "gram_half_widths": [16.0, 32.0, 64.0],
            "section_radii": [8.0, 16.0, 32.0],
            "section_quadrature": {"h": 0.1},
            "locspec_radii": [4.0, 8.0, 16.0]
        }
    })
}

fn fock(id: &str, s: f64) -> Value {
    let step = (std::f64::consts::PI * s).sqrt();
    json!({
        "experiment_id": id,
        "space": {"type": "fock_gaussian", "n": 1},
        "kernel": {"type": "fock_gaussian_normalized", "n": 1},
        "pointset": {"type": "lattice", "steps": [step, step], "window": 60.0},
        "centers": {"spacing": 4.0},
        "radii": [10.0, 20.0, 40.0],
        "quadrature": {"h": 0.1},
        "audit": {
            "centers": [[0.0, 0.0], [0.3, 0.7]],
            "wl_radii": [1.0, 2.0, 3.0, 4.0, 6.0],
            "hap_radii": [1.0, 2.0, 3.0, 4.0, 6.0]
        },
        "spectra": {
            "gram_half_widths": [6.0, 10.0, 14.0],
            "section_radii": [3.0, 4.0, 5.0],
            "section_quadrature": {"h": 0.2},
            "locspec_radii": [2.0, 3.0, 4.0],
            "locspec_quadrature": {"h": 0.2}
        }
    })
}

fn gabor(id: &str, ab: f64) -> Value {
    let step = ab.sqrt();
    json!({
        "experiment_id": id,
        "space": {"type": "phase_plane"},
        "kernel": {"type": "gabor_gaussian"},
        "pointset": {"type": "lattice", "steps": [step, step], "window": 50.0},
        "centers": {"spacing": 2.0},
        "radii": [8.0, 16.0, 32.0],
        "quadrature": {"h": 0.1},
        "audit": {
            "centers": [[0.0, 0.0], [0.3, 0.7]],
            "wl_radii": [1.0, 2.0, 3.0, 4.0, 6.0],
            "hap_radii": [1.0, 2.0, 3.0, 4.0, 6.0]
        },
        "spectra": {
            "gram_half_widths": [4.0, 6.0, 8.0],
            "section_radii": [2.0, 2.5, 3.0],
            "section_quadrature": {"h": 0.1},
            "locspec_radii": [1.5, 2.0]
        }
    })
}

fn synthetic(id: &str) -> Value {
    json!({
        "experiment_id": id,
        "space": {"type": "euclidean_lebesgue", "dim": 1},
        "kernel": {"type": "synthetic_poly_decay", "sigma": 2.0, "dim": 1},
        "pointset": {"type": "lattice", "steps": [1.0], "window": 160.0},
        "centers": {"spacing": 1.0},
        "radii": [25.0, 50.0, 100.0],
        "quadrature": {"h": 0.05},
        "audit": {
            "centers": [[0.0], [0.37]],
            "wl_radii": [4.0, 8.0, 16.0, 32.0, 64.0],
            "hap_radii": [4.0, 8.0, 16.0, 32.0, 64.0],
            "poly_decay": {"sigma": 2.0, "constant": 2.0}
        },
        "spectra": {
            "gram_half_widths": [16.0, 32.0, 64.0]
        }
    })
}

/// The named canonical config, unresolved.
pub fn canonical(name: &str) -> Option<ExperimentConfig> {
    let v = match name {
        "pw-alpha-0.8" => paley_wiener(name, 0.8),
        "pw-alpha-1" => paley_wiener(name, 1.0),
        "pw-alpha-1.25" => paley_wiener(name, 1.25),
        "fock-s-0.8" => fock(name, 0.8),
        "fock-s-1.2" => fock(name, 1.2),
        "gabor-ab-0.8" => gabor(name, 0.8),
        "gabor-ab-1.2" => gabor(name, 1.2),
        "synthetic-poly-decay" => synthetic(name),
        _ => return None,
    };
    Some(serde_json::from_value(v).expect("canonical configs match the schema"))
}
