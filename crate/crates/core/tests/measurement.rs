mod common;

use common::{overtaking_params, overtaking_pair, equal_params, equal_pair, r};
use soliton_lab::lattice::FloatField;
use soliton_lab::measure::{
    measure_amplitude, measure_velocity, overtake_report, track_troughs, Anomaly, TrackerConfig,
};
use soliton_lab::soliton::{amplitude, sample_field, validate, velocity};
use soliton_lab::{Rat, Soliton, SolitonSpec, SystemParams};

/// Samples a lone soliton on a window that follows its trough.
fn lone_field(params: &SystemParams, s: &Soliton, (t0, t1): (i64, i64)) -> FloatField {
    let spec = SolitonSpec::new(vec![s.clone()]);
    let k = &validate(params, &spec).unwrap()[0];
    let (e0, e1) = (k.extremum_position(t0 as f64), k.extremum_position(t1 as f64));
    let lo = e0.min(e1).floor() as i64 - 20;
    let hi = e0.max(e1).ceil() as i64 + 20;
    sample_field(params, &spec, (lo, hi), (t0, t1)).unwrap().to_float_x()
}

#[test]
fn flat_field_has_no_tracks() {
    let field = FloatField { n_lo: -5, t0: 0, rows: vec![vec![1.0; 11]; 10] };
    assert!(track_troughs(&field, &TrackerConfig::default()).unwrap().is_empty());
}

#[test]
fn one_soliton_corpus_matches_closed_forms() {
    type Regime = ((i64, i64), (i64, i64), &'static [(i64, i64)]);
    let corpus: [Regime; 4] = [
        ((5, 6), (14, 15), &[(1, 30), (2, 15), (1, 5), (1, 2), (2, 3)]),
        ((14, 15), (5, 6), &[(1, 30), (2, 15), (1, 2), (2, 3)]),
        ((4, 5), (9, 10), &[(1, 20), (3, 20), (1, 2), (3, 5)]),
        ((3, 4), (3, 4), &[(1, 10), (2, 5)]),
    ];
    for (a, b, ps) in corpus {
        let params = SystemParams::new(r(a.0, a.1), r(b.0, b.1)).unwrap();
        let mid = params.p_max() * r(1, 2);
        for &(pn, pd) in ps {
            let p = r(pn, pd);
            let gamma = if p < mid { r(-1, 10) } else { r(1, 10) };
            let v = velocity(&params, &p).unwrap();
            let w = amplitude(&params, &p).unwrap();
            let field = lone_field(&params, &Soliton::new(p.clone(), gamma), (0, 40));
            let tracks = track_troughs(&field, &TrackerConfig::for_max_speed(v)).unwrap();
            assert_eq!(tracks.len(), 1, "alpha {a:?} beta {b:?} p {p}");
            let measured_v = measure_velocity(&tracks[0]).unwrap();
            assert!((measured_v - v).abs() <= 1e-2, "p {p}: {measured_v} vs {v}");
            let measured_w = field.rows.iter().map(|row| measure_amplitude(row).unwrap()).fold(0.0, f64::max);
            assert!((measured_w - w).abs() <= 5e-3, "p {p}: {measured_w} vs {w}");
        }
    }
}

#[test]
fn smaller_soliton_overtakes_larger() {
    let field = sample_field(&overtaking_params(), &overtaking_pair(), (-60, 90), (-40, 60)).unwrap().to_float_x();
    let tracks = track_troughs(&field, &TrackerConfig::default()).unwrap();
    assert_eq!(tracks.len(), 2);
    let rep = overtake_report(&tracks).unwrap();
    assert!(rep.crossing);
    assert_eq!(rep.anomaly, Anomaly::SmallerFaster);
    let json = serde_json::to_value(&rep).unwrap();
    assert_eq!(json["anomaly"], "smaller_faster");
}

#[test]
fn larger_leads_when_alpha_exceeds_beta() {
    let params = SystemParams::new(r(14, 15), r(5, 6)).unwrap();
    let field = sample_field(&params, &overtaking_pair(), (-60, 60), (-40, 40)).unwrap().to_float_x();
    let tracks = track_troughs(&field, &TrackerConfig::for_max_speed(1.4)).unwrap();
    assert_eq!(tracks.len(), 2);
    let rep = overtake_report(&tracks).unwrap();
    assert_eq!(rep.anomaly, Anomaly::None);
    let larger = usize::from(tracks[1].depth > tracks[0].depth);
    assert_eq!(rep.final_leader, larger);
}

#[test]
fn equal_parameters_give_unit_speeds() {
    let field = sample_field(&equal_params(), &equal_pair(), (-40, 60), (0, 40)).unwrap().to_float_x();
    let tracks = track_troughs(&field, &TrackerConfig::default()).unwrap();
    assert!(!tracks.is_empty());
    for t in &tracks {
        assert!((measure_velocity(t).unwrap() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn amplitude_row_at_trough_time() {
    let params = overtaking_params();
    let s = Soliton::new(r(2, 15), r(-1, 6));
    let field = lone_field(&params, &s, (0, 0));
    let w = measure_amplitude(&field.rows[0]).unwrap();
    assert!(w > 0.0 && w <= amplitude(&params, &Rat::new(2, 15).unwrap()).unwrap() + 5e-3);
}
