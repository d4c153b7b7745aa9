use ristrace::em::{fresnel, path_gain};
use ristrace::scalar::wavelength;
use ristrace::scene::{FaceId, Scene};
use ristrace::tracer::{
    filter_paths, image_trace, trace, trace_many, Interaction, PathFilter, PropagationPath,
    TraceConfig,
};
use ristrace::Point3;

const FREQ: f64 = 28.0;

fn cfg(r: usize, res_deg: f64) -> TraceConfig {
    TraceConfig {
        max_reflections: r,
        angular_resolution: res_deg.to_radians(),
        ..TraceConfig::default()
    }
}

fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

fn assert_same_paths(scene: &Scene, a: &[PropagationPath], b: &[PropagationPath]) {
    let la: Vec<_> = a.iter().map(|p| p.sequence_label(scene)).collect();
    let lb: Vec<_> = b.iter().map(|p| p.sequence_label(scene)).collect();
    assert_eq!(la, lb);
    for (x, y) in a.iter().zip(b) {
        assert!((x.length - y.length).abs() < 1e-6);
        let gx = path_gain(x, scene, FREQ).unwrap().amplitude;
        let gy = path_gain(y, scene, FREQ).unwrap().amplitude;
        assert!((gx - gy).norm() <= 1e-9 * gy.norm());
    }
}

#[test]
fn los_only_without_reflections() {
    let s = Scene::ground_only();
    let (a, b) = (p(0.0, 0.0, 5.0), p(30.0, 40.0, 1.0));
    let paths = trace(&s, a, b, &cfg(0, 1.0)).unwrap();
    assert_eq!(paths.len(), 1);
    assert!(paths[0].is_los());
    assert!((paths[0].length - a.distance(b)).abs() < 1e-12);
}

#[test]
fn ground_plane_gives_two_rays() {
    let s = Scene::ground_only();
    let d = 25.0;
    let paths = trace(&s, p(0.0, 0.0, 5.0), p(d, 0.0, 1.0), &cfg(1, 1.0)).unwrap();
    assert_eq!(paths.len(), 2);
    assert!((paths[0].length - (d * d + 16.0f64).sqrt()).abs() < 1e-9);
    assert_eq!(paths[1].interactions, vec![Interaction::Reflection(FaceId::GROUND)]);
    assert!((paths[1].length - (d * d + 36.0f64).sqrt()).abs() < 1e-9);
}

#[test]
fn single_wall_matches_image_method() {
    let s = Scene::bundled("single-wall").unwrap();
    for (a, b) in [
        (p(0.0, 0.0, 5.0), p(3.0, 12.0, 1.5)),
        (p(-5.0, -8.0, 2.0), p(6.0, 7.0, 1.0)),
    ] {
        for r in 0..=2 {
            let sbr = trace(&s, a, b, &cfg(r, 0.5)).unwrap();
            let img = image_trace(&s, a, b, r).unwrap();
            assert_same_paths(&s, &sbr, &img);
        }
    }
}

#[test]
fn parallel_walls_double_bounces() {
    let s = Scene::bundled("parallel-walls").unwrap();
    let paths = image_trace(&s, p(-3.0, -5.0, 4.0), p(4.0, 6.0, 2.0), 2).unwrap();
    let labels: Vec<String> = paths.iter().map(|x| x.sequence_label(&s)).collect();
    let east = labels.iter().position(|l| l.starts_with("R:east.") && l.contains("|R:west."));
    let west = labels.iter().position(|l| l.starts_with("R:west.") && l.contains("|R:east."));
    assert!(east.is_some() && west.is_some(), "{labels:?}");
    let sbr = trace(&s, p(-3.0, -5.0, 4.0), p(4.0, 6.0, 2.0), &cfg(2, 0.5)).unwrap();
    assert_same_paths(&s, &sbr, &paths);
}

#[test]
fn occluded_mirror_path_is_absent() {
    let open = Scene::bundled("single-wall").unwrap();
    let blocked = Scene::from_json_str(
        r#"{"schema": 1, "ground": {"material": "concrete"}, "buildings": [
            {"name": "wall", "footprint": [[10,-20],[10.5,-20],[10.5,20],[10,20]], "height": 10, "material": "brick"},
            {"name": "box", "footprint": [[6,-1],[8,-1],[8,1],[6,1]], "height": 8, "material": "brick"}]}"#,
    )
    .unwrap();
    let (a, b) = (p(0.0, -3.0, 3.0), p(0.0, 3.0, 3.0));
    let wall_hit = |s: &Scene| {
        image_trace(s, a, b, 1)
            .unwrap()
            .iter()
            .any(|x| x.sequence_label(s) == "R:wall.wall3")
    };
    assert!(wall_hit(&open));
    assert!(!wall_hit(&blocked));
}

#[test]
fn mirror_law_holds_at_every_reflection() {
    let s = Scene::bundled("suburb-28ghz").unwrap();
    let paths = trace(&s, p(30.0, 10.0, 5.0), p(34.0, 44.0, 1.0), &cfg(3, 0.5)).unwrap();
    assert!(paths.len() > 5);
    for path in &paths {
        for (i, inter) in path.interactions.iter().enumerate() {
            let Interaction::Reflection(f) = inter else { continue };
            let n = s.face(*f).normal();
            let din = (path.vertices[i + 1] - path.vertices[i]).normalize();
            let dout = (path.vertices[i + 2] - path.vertices[i + 1]).normalize();
            let a_in = din.dot(n).abs().acos();
            let a_out = dout.dot(n).abs().acos();
            assert!((a_in - a_out).abs() < 1e-9);
            let tangential = (din - n * din.dot(n)) - (dout - n * dout.dot(n));
            assert!(tangential.norm() < 1e-9);
        }
        let sum: f64 = path.vertices.windows(2).map(|w| w[0].distance(w[1])).sum();
        assert!((sum - path.length).abs() < 1e-9);
    }
}

#[test]
fn raising_order_keeps_paths() {
    let s = Scene::bundled("suburb-28ghz").unwrap();
    let (a, b) = (p(30.0, 30.0, 5.0), p(34.0, 52.0, 1.0));
    let mut prev: Vec<String> = Vec::new();
    for r in 0..=3 {
        let labels: Vec<String> = trace(&s, a, b, &cfg(r, 0.5))
            .unwrap()
            .iter()
            .map(|x| x.sequence_label(&s))
            .collect();
        for l in &prev {
            assert!(labels.contains(l), "order {r} lost {l}");
        }
        let mut dedup = labels.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), labels.len());
        prev = labels;
    }
}

#[test]
fn batch_equals_individual_traces() {
    let s = Scene::bundled("suburb-28ghz").unwrap();
    let src = p(30.0, 10.0, 5.0);
    let dsts = [p(34.0, 40.0, 1.0), p(34.0, 45.0, 1.0), p(30.0, 60.0, 1.5)];
    let c = cfg(2, 0.5);
    let batch = trace_many(&s, src, &dsts, &c).unwrap();
    for (d, paths) in dsts.iter().zip(&batch) {
        assert_eq!(&trace(&s, src, *d, &c).unwrap(), paths);
    }
}

#[test]
fn output_independent_of_thread_count() {
    let s = Scene::bundled("suburb-28ghz").unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| trace(&s, p(30.0, 10.0, 5.0), p(34.0, 44.0, 1.0), &cfg(3, 0.5)).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn filters_select_by_pattern() {
    let s = Scene::bundled("suburb-28ghz").unwrap();
    let all = trace(&s, p(30.0, 10.0, 5.0), p(34.0, 44.0, 1.0), &cfg(2, 0.5)).unwrap();
    let two = filter_paths(&all, |x| PathFilter::LosAndSingleGround.accepts(x));
    assert!(two.len() <= 2 && !two.is_empty());
    assert_eq!(filter_paths(&all, |x| PathFilter::All.accepts(x)), all);
    assert!(filter_paths(&[], |x| PathFilter::All.accepts(x)).is_empty());
    let no_los = filter_paths(&all, |x| PathFilter::ExcludeLos.accepts(x));
    assert_eq!(no_los.len() + 1, all.len());
    assert_eq!("los+ground".parse::<PathFilter>().unwrap(), PathFilter::LosAndSingleGround);
}

#[test]
fn endpoint_errors() {
    let s = Scene::bundled("single-wall").unwrap();
    let c = cfg(1, 1.0);
    assert!(trace(&s, p(10.2, 0.0, 2.0), p(0.0, 0.0, 2.0), &c).is_err());
    assert!(trace(&s, p(0.0, 0.0, -1.0), p(1.0, 0.0, 2.0), &c).is_err());
    assert!(trace(&s, p(1.0, 0.0, 2.0), p(1.0, 0.0, 2.0), &c).is_err());
    assert!(image_trace(&s, p(0.0, 0.0, 2.0), p(1.0, 0.0, 2.0), 4).is_err());
}

#[test]
fn los_gain_is_free_space() {
    let s = Scene::ground_only();
    let path = PropagationPath::new(vec![p(0.0, 0.0, 5.0), p(40.0, 3.0, 1.0)], vec![]);
    let g = path_gain(&path, &s, FREQ).unwrap();
    let want = wavelength(FREQ) / (4.0 * std::f64::consts::PI * path.length);
    assert!((g.magnitude() - want).abs() < 1e-15);
}

// Oracle: image-method closed form with the polarization-averaged coefficient.
#[test]
fn ground_bounce_gain_matches_closed_form() {
    let s = Scene::ground_only();
    let paths = trace(&s, p(0.0, 0.0, 3.0), p(20.0, 0.0, 3.0), &cfg(1, 1.0)).unwrap();
    let bounce = &paths[1];
    let theta = (10.0f64).atan2(3.0);
    let eps = s.ground_material().permittivity(FREQ).unwrap();
    let geff = fresnel(eps, theta).jones_averaged();
    let want = geff.norm() * wavelength(FREQ) / (4.0 * std::f64::consts::PI * bounce.length);
    let g = path_gain(bounce, &s, FREQ).unwrap();
    assert!((g.magnitude() - want).abs() < 1e-12 * want);
}

#[test]
fn path_gains_are_passive_and_reciprocal() {
    let s = Scene::bundled("suburb-28ghz").unwrap();
    let (a, b) = (p(30.0, 10.0, 5.0), p(34.0, 44.0, 1.0));
    let lambda = wavelength(FREQ);
    for path in trace(&s, a, b, &cfg(5, 0.5)).unwrap() {
        let g = path_gain(&path, &s, FREQ).unwrap().magnitude();
        assert!(g <= lambda / (4.0 * std::f64::consts::PI * path.length) * (1.0 + 1e-12));
        if path.interactions.len() <= 1 {
            let r = path_gain(&path.reversed(), &s, FREQ).unwrap().magnitude();
            assert!((g - r).abs() <= 1e-12 * g);
        }
    }
}

#[test]
fn swapping_endpoints_gives_the_same_paths() {
    let s = Scene::bundled("suburb-28ghz").unwrap();
    let (a, b) = (p(30.0, 10.0, 5.0), p(34.0, 44.0, 1.0));
    let fwd = trace(&s, a, b, &cfg(3, 0.25)).unwrap();
    let back: Vec<_> = trace(&s, b, a, &cfg(3, 0.25)).unwrap().iter().map(|x| x.reversed()).collect();
    let key = |v: &[ristrace::tracer::PropagationPath]| {
        let mut k: Vec<(String, f64)> = v.iter().map(|x| (x.sequence_label(&s), x.length)).collect();
        k.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        k
    };
    let (kf, kb) = (key(&fwd), key(&back));
    assert_eq!(kf.len(), kb.len());
    for (x, y) in kf.iter().zip(&kb) {
        assert_eq!(x.0, y.0);
        assert!((x.1 - y.1).abs() < 1e-9);
    }
}
