use fracphase::ModelKind;
use fracphase_web::engine::colour;
use fracphase_web::{DemoEngine, DemoSettings};

fn small(model: ModelKind, alpha: f64, horizon: f64) -> DemoEngine {
    let settings = DemoSettings {
        grid: 16,
        horizon,
        ..DemoSettings::new(model, alpha)
    };
    DemoEngine::new(settings).unwrap()
}

#[test]
fn allen_cahn_advances_and_conserves_mass() {
    let mut e = small(ModelKind::AllenCahn, 0.7, 50.0);
    assert_eq!(e.advance(25), 25);
    assert_eq!(e.step_count(), 25);
    assert!(e.time() > 0.0 && e.time() < 50.0);
    let [t, tau, _, e_mod, _, drift, _] = e.latest();
    assert_eq!(t, e.time());
    assert!(tau > 0.0);
    assert!(drift < 1e-12);
    let trace = e.energy_trace();
    assert_eq!(trace.len(), 2 * 26);
    assert_eq!(trace[trace.len() - 1], e_mod);
    assert!(trace[1] >= e_mod - 1e-9);
    assert!(e.diagnostics_csv().lines().count() == 27);
}

#[test]
fn swift_hohenberg_runs_to_its_horizon() {
    let mut e = small(ModelKind::SwiftHohenberg, 0.9, 2.0);
    let taken = e.advance(100_000);
    assert!(taken > 0);
    assert!(e.finished());
    assert!(e.halted().is_none());
    assert_eq!(e.time(), 2.0);
    assert_eq!(e.advance(10), 0);
    let trace = e.energy_trace();
    for pair in trace.chunks(2).collect::<Vec<_>>().windows(2) {
        assert!(pair[1][1] <= pair[0][1] + 1e-9, "modified energy rose");
    }
}

#[test]
fn pixels_cover_the_grid() {
    let e = small(ModelKind::CahnHilliard, 0.5, 1.0);
    let px = e.rgba();
    assert_eq!(px.len(), 4 * 16 * 16);
    assert!(px.chunks(4).all(|p| p[3] == 255));
    // the extremes of the field land on the two ends of the scale
    assert!(px.chunks(4).any(|p| p[..3] == colour(0.0)));
    assert!(px.chunks(4).any(|p| p[..3] == colour(1.0)));
}

#[test]
fn colour_scale() {
    assert_eq!(colour(0.5), [255, 255, 255]);
    assert_eq!(colour(0.0), [33, 102, 172]);
    assert_eq!(colour(1.0), [178, 24, 43]);
    assert_eq!(colour(-3.0), colour(0.0));
    assert_eq!(colour(f64::NAN), colour(0.5));
}

#[test]
fn rejects_bad_settings() {
    let bad = DemoSettings {
        grid: 15,
        ..DemoSettings::new(ModelKind::AllenCahn, 0.5)
    };
    assert!(DemoEngine::new(bad).is_err());
    assert!(DemoEngine::new(DemoSettings::new(ModelKind::AllenCahn, 0.0)).is_err());
}
