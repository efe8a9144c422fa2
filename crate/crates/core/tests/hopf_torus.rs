use pelastica::curve::{CurveTrace, DEFAULT_STEP_TOL};
use pelastica::hopf::{
    build_torus, horizontal_lift, horizontality_residual, norm_residual, projection_residual, willmore_check,
    CoverPolicy, Gluing, DEFAULT_POLE, DEFAULT_S_SAMPLES_PER_PERIOD, DEFAULT_T_SAMPLES,
};
use pelastica::hopf::stereographic_inverse;

fn gamma_23(samples: usize) -> CurveTrace {
    CurveTrace::closed(0.3, 2, 3, 1e-10, samples, DEFAULT_STEP_TOL).unwrap()
}

#[test]
fn torus_over_gamma_23() {
    let tr = gamma_23(512);
    let lift = horizontal_lift(&tr, None).unwrap();
    assert!(norm_residual(&lift.points) < 1e-10);
    assert!(projection_residual(&lift, &tr) < 1e-8);
    assert!(horizontality_residual(&lift) < 1e-8, "{}", horizontality_residual(&lift));

    let mut patch = build_torus(&tr, &lift, DEFAULT_T_SAMPLES, DEFAULT_S_SAMPLES_PER_PERIOD, CoverPolicy::Twisted).unwrap();
    assert!(!matches!(patch.gluing, Gluing::CylinderSegment));
    assert!(norm_residual(&patch.vertices) < 1e-10);
    let coarse = patch.curvature_check();
    assert!(coarse.max_relative_h_error < 0.02);
    assert!(coarse.max_abs_gaussian < 1e-2);

    let fine_trace = gamma_23(1024);
    let fine_lift = horizontal_lift(&fine_trace, None).unwrap();
    let fine = build_torus(&fine_trace, &fine_lift, 2 * DEFAULT_T_SAMPLES, 2 * DEFAULT_S_SAMPLES_PER_PERIOD, CoverPolicy::Twisted)
        .unwrap()
        .curvature_check();
    assert!(fine.max_relative_h_error <= 0.5 * coarse.max_relative_h_error);

    let idx = tr.index.clone().unwrap();
    let prm = pelastica::ElasticaParams::new(0.3, idx.a_solved.unwrap()).unwrap();
    assert!(coarse.h_min >= 0.5 * prm.beta - 1e-8 && coarse.h_max <= 0.5 * prm.alpha + 1e-8);

    let proj = patch.project(DEFAULT_POLE).unwrap().to_vec();
    let back = stereographic_inverse(&proj, DEFAULT_POLE).unwrap();
    for (u, v) in patch.vertices.iter().zip(&back) {
        for c in 0..4 {
            assert!((u[c] - v[c]).abs() < 1e-10);
        }
    }

    let w = willmore_check(&tr);
    assert!(w.identity_gap < 1e-6, "{w:?}");
    assert!(w.curve_residual < 1e-6 && w.surface_residual < 1e-6, "{w:?}");
}

