//! Near-uniform launch directions from a subdivided icosahedron.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use crate::Point3;

/// Angle subtended by an icosahedron edge (degrees).
const ICOSA_EDGE_DEG: f64 = 63.434_948_822_922_01;

pub fn subdivision_for(angular_resolution: f64) -> usize {
    (ICOSA_EDGE_DEG.to_radians() / angular_resolution).ceil().max(1.0) as usize
}

fn icosahedron() -> ([Point3; 12], [[usize; 3]; 20]) {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let v = raw.map(|(x, y, z)| Point3::new(x, y, z).normalize());
    let f = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

/// Unit directions on a frequency-`freq` geodesic grid (`10·freq² + 2` points).
pub fn geodesic_directions(freq: usize) -> Vec<Point3> {
    let (v, faces) = icosahedron();
    let nf = freq as f64;
    let mut seen: HashSet<[i64; 3]> = HashSet::new();
    let mut out = Vec::with_capacity(10 * freq * freq + 2);
    for [a, b, c] in faces {
        for i in 0..=freq {
            for j in 0..=(freq - i) {
                let k = freq - i - j;
                let p = (v[a] * i as f64 + v[b] * j as f64 + v[c] * k as f64) / nf;
                let d = p.normalize();
                let key = [
                    (d.x * 1e9).round() as i64,
                    (d.y * 1e9).round() as i64,
                    (d.z * 1e9).round() as i64,
                ];
                if seen.insert(key) {
                    out.push(d);
                }
            }
        }
    }
    out
}

/// Cached direction set for a given angular resolution (radians).
pub fn launch_directions(angular_resolution: f64) -> Arc<Vec<Point3>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Point3>>>>> = OnceLock::new();
    let freq = subdivision_for(angular_resolution);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(freq)
        .or_insert_with(|| Arc::new(geodesic_directions(freq)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_geodesic_formula() {
        for f in [1, 2, 5, 16] {
            assert_eq!(geodesic_directions(f).len(), 10 * f * f + 2);
        }
    }

    #[test]
    fn spacing_is_bounded_by_resolution() {
        let res = 2f64.to_radians();
        let dirs = launch_directions(res);
        // every probe direction has a launch direction within the resolution
        let mut worst: f64 = 0.0;
        for i in 0..500 {
            let t = i as f64 * 0.618_033_988_75;
            let z = 1.0 - 2.0 * ((i as f64 + 0.5) / 500.0);
            let r = (1.0 - z * z).sqrt();
            let probe = Point3::new(r * (t * 6.283).cos(), r * (t * 6.283).sin(), z);
            let best = dirs
                .iter()
                .map(|d| d.dot(probe).clamp(-1.0, 1.0).acos())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        assert!(worst < res, "{worst}");
    }
}
