//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p soliton-lab --test acceptance`.

mod common;

use std::time::Instant;

use common::{overtaking_params, overtaking_pair, equal_params, equal_pair, r};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::boxball::{bbs_step, bbsc_sweep, simulate, ud_limit_check, BbscState, Carrier};
use soliton_lab::cli::{default_ud_field, random_pairs, random_points, UD_EPSILONS};
use soliton_lab::lattice::{step_gkdv, Slice};
use soliton_lab::measure::{
    detect_bbsc_solitons, measure_velocity, overtake_report, track_troughs, Anomaly, TrackerConfig,
};
use soliton_lab::soliton::{
    amplitude, check_sign_relation, check_kp_bilinear, check_reduction, sample_field, scan_monotonicity,
    velocity, verify_exactness, KpParams,
};
use soliton_lab::{Rat, SolitonSpec, SystemParams};

const CLOSED_FORM_TOL: f64 = 1e-3;
const VELOCITY_TOL: f64 = 1e-2;
const AMPLITUDE_TOL: f64 = 5e-3;
const UNIT_SPEED_TOL: f64 = 1e-6;
const UD_FINAL_TOL: f64 = 1e-2;

const V_SMALL: f64 = 0.783;
const V_LARGE: f64 = 0.723;
const W_SMALL: f64 = 0.363;
const W_LARGE: f64 = 0.722;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn closed_form_velocity() -> Outcome {
    let params = overtaking_params();
    let v1 = velocity(&params, &r(2, 15)).unwrap();
    let v2 = velocity(&params, &r(1, 30)).unwrap();
    let ok = (v1 - V_SMALL).abs() <= CLOSED_FORM_TOL
        && (v2 - V_LARGE).abs() <= CLOSED_FORM_TOL
        && (v1 - (8f64 / 3.0).ln() / 3.5f64.ln()).abs() < 1e-12
        && (v2 - 4.5f64.ln() / 8f64.ln()).abs() < 1e-12;
    outcome(ok, format!("v(2/15) = {v1:.6}, v(1/30) = {v2:.6}"))
}

fn closed_form_amplitude() -> Outcome {
    let params = overtaking_params();
    let w1 = amplitude(&params, &r(2, 15)).unwrap();
    let w2 = amplitude(&params, &r(1, 30)).unwrap();
    let ok = (w1 - W_SMALL).abs() <= CLOSED_FORM_TOL && (w2 - W_LARGE).abs() <= CLOSED_FORM_TOL;
    outcome(ok, format!("W(2/15) = {w1:.6}, W(1/30) = {w2:.6}"))
}

fn exact_solutions() -> Outcome {
    let params = overtaking_params();
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in [SolitonSpec::new(overtaking_pair().solitons[..1].to_vec()), overtaking_pair()] {
        let rep = verify_exactness(&params, &spec, 40).unwrap();
        ok &= rep.is_exact() && rep.points == 1600;
        parts.push(format!("N={}: residual 0 at {}/{}", spec.len(), rep.zero_residual_points, rep.points));
    }
    outcome(ok, parts.join("; "))
}

fn overtaking() -> Outcome {
    let params = overtaking_params();
    let spec = overtaking_pair();

    // Velocities and amplitudes on the stated window.
    let field = sample_field(&params, &spec, (-30, 90), (0, 60)).unwrap().to_float_x();
    let tracks = track_troughs(&field, &TrackerConfig::default()).unwrap();
    if tracks.len() != 2 {
        return outcome(false, format!("expected 2 tracks on n in [-30, 90], t in [0, 60], found {}", tracks.len()));
    }
    let (small, large) = if tracks[0].depth < tracks[1].depth { (&tracks[0], &tracks[1]) } else { (&tracks[1], &tracks[0]) };
    let (vs, vl) = (measure_velocity(small).unwrap(), measure_velocity(large).unwrap());
    let measured_ok = (vs - V_SMALL).abs() <= VELOCITY_TOL
        && (vl - V_LARGE).abs() <= VELOCITY_TOL
        && (small.depth - W_SMALL).abs() <= AMPLITUDE_TOL
        && (large.depth - W_LARGE).abs() <= AMPLITUDE_TOL;
    let stated = overtake_report(&tracks).unwrap();

    // The pair is already merged at t = 0, so the order before the
    // interaction is read from an earlier start.
    let wide = sample_field(&params, &spec, (-60, 90), (-40, 60)).unwrap().to_float_x();
    let wide_tracks = track_troughs(&wide, &TrackerConfig::default()).unwrap();
    let anomaly = overtake_report(&wide_tracks).map(|rep| rep.anomaly == Anomaly::SmallerFaster).unwrap_or(false);

    outcome(
        measured_ok && anomaly,
        format!(
            "[0,60]: v = {vs:.4}/{vl:.4}, W = {:.4}/{:.4}, crossing inside [0,60] = {}; \
             smaller overtakes larger on t in [-40,60]: {anomaly}",
            small.depth, large.depth, stated.crossing
        ),
    )
}

fn equal_parameters() -> Outcome {
    let params = equal_params();
    let spec = equal_pair();
    let exact = sample_field(&params, &spec, (-40, 60), (0, 40)).unwrap();
    // one step from an arbitrary row with incoming y = 1
    let row: Vec<Rat> = std::iter::once(Rat::one()).chain(exact.rows[0].x.iter().cloned()).collect();
    let out = step_gkdv(&Slice { n_lo: 0, x: row.clone(), y_in: Rat::one() }, &params).unwrap();
    let exchange = (0..row.len()).all(|j| out.x_next[j] == out.y[j] && out.y[j + 1] == row[j]);
    let translate = (1..exact.rows.len())
        .all(|t| (1..exact.width()).all(|k| exact.rows[t].x[k] == exact.rows[t - 1].x[k - 1]));
    let tracks = track_troughs(&exact.to_float_x(), &TrackerConfig::default()).unwrap();
    let speeds: Vec<f64> = tracks.iter().filter_map(|t| measure_velocity(t).ok()).collect();
    let speeds_ok = !speeds.is_empty()
        && speeds.len() == tracks.len()
        && speeds.iter().all(|v| (v - 1.0).abs() <= UNIT_SPEED_TOL);
    outcome(
        exchange && translate && speeds_ok,
        format!("exchange exact: {exchange}, field translates: {translate}, speeds {speeds:?}"),
    )
}

fn bbsc_speeds() -> Outcome {
    let s = BbscState::from_digits("300010", 3, Carrier::Finite(1)).unwrap();
    let history = simulate(&s, 9).unwrap();
    let conserved = history.iter().all(|h| h.ball_count() == 4);
    let tracks = detect_bbsc_solitons(&history).unwrap();
    let mut speeds: Vec<(u64, Rat)> = tracks.iter().filter_map(|t| Some((t.amplitude, t.speed()?))).collect();
    speeds.sort();
    let ok = conserved && speeds == vec![(1, Rat::one()), (3, r(1, 3))];
    let shown: Vec<String> = speeds.iter().map(|(a, v)| format!("{a} balls -> {v}")).collect();
    outcome(ok, format!("{}; balls conserved over 9 steps: {conserved}", shown.join(", ")))
}

fn ultradiscrete() -> Outcome {
    let rep = ud_limit_check(&default_ud_field(), &UD_EPSILONS).unwrap();
    let last = rep.entries.last().unwrap().max_deviation;
    let devs: Vec<String> = rep.entries.iter().map(|e| format!("{:.3e}", e.max_deviation)).collect();
    outcome(
        rep.strictly_decreasing && last < UD_FINAL_TOL,
        format!("deviations [{}] for eps = 1, 1e-1, 1e-2, 1e-3", devs.join(", ")),
    )
}

fn kp_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut total, mut zero) = (0, 0);
    for order in [1, 2] {
        let kp = KpParams::random(&mut rng, order, false);
        for p in random_points(&mut rng, 20) {
            let (a, b) = check_kp_bilinear(&kp, p).unwrap();
            total += 1;
            zero += usize::from(a.is_zero() && b.is_zero());
        }
        let reduced = KpParams::random(&mut rng, order, true);
        for p in random_points(&mut rng, 20) {
            total += 1;
            zero += usize::from(check_reduction(&reduced, p).unwrap().is_zero());
        }
    }
    outcome(zero == total, format!("bilinear and reduction residual 0 at {zero}/{total} checks"))
}

fn monotonicity_scans() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in [((5, 6), (14, 15)), ((14, 15), (5, 6)), ((5, 6), (5, 6))] {
        let params = SystemParams::new(r(a.0, a.1), r(b.0, b.1)).unwrap();
        let scan = scan_monotonicity(&params, 101).unwrap();
        let pairs = random_pairs(&params.p_max(), 100, 0);
        let rel = check_sign_relation(&params, &pairs).unwrap();
        ok &= scan.is_clean() && rel.violations.is_empty();
        parts.push(format!(
            "({}/{},{}/{}): {} scan, {} sign violations ({} pairs checked)",
            a.0,
            a.1,
            b.0,
            b.1,
            scan.violations.len(),
            rel.violations.len(),
            rel.checked
        ));
    }
    outcome(ok, parts.join("; "))
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut sites = 0usize;
    let mut product_ok = true;
    for _ in 0..40 {
        let params = SystemParams::new(r(rng.gen_range(1..20), 20), r(rng.gen_range(1..20), 20)).unwrap();
        let mut x = vec![Rat::one()];
        x.extend((0..rng.gen_range(2..10)).map(|_| r(rng.gen_range(1..9), rng.gen_range(1..9))));
        let mut slice = Slice { n_lo: 0, x, y_in: Rat::one() };
        for _ in 0..8 {
            let out = step_gkdv(&slice, &params).unwrap();
            for j in 0..slice.x.len() {
                sites += 1;
                product_ok &= &out.x_next[j] * &out.y[j + 1] == &slice.x[j] * &out.y[j];
            }
            slice = out.into_next(0);
        }
    }
    let mut runs_ok = true;
    for _ in 0..200 {
        let cb = rng.gen_range(1..=4u32);
        let cc = if rng.gen_bool(0.3) { Carrier::Infinite } else { Carrier::Finite(rng.gen_range(1..=4)) };
        let u: Vec<u32> = (0..rng.gen_range(1..30)).map(|_| if rng.gen_bool(0.6) { 0 } else { rng.gen_range(1..=cb) }).collect();
        let mut s = BbscState::new(u, cb, cc).unwrap();
        let balls = s.ball_count();
        for _ in 0..10 {
            let sweep = bbsc_sweep(&s).unwrap();
            if let Carrier::Finite(c) = cc {
                runs_ok &= sweep.carrier_loads.iter().all(|&v| v <= c);
            }
            s = sweep.state;
            runs_ok &= s.ball_count() == balls && s.u.iter().all(|&v| v <= cb);
            runs_ok &= bbs_step(&s).unwrap().ball_count() == balls;
        }
    }
    outcome(
        product_ok && runs_ok,
        format!("product exact at {sites} site-steps: {product_ok}; 200 box-ball runs conserve and bound: {runs_ok}"),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("closed-form velocity", closed_form_velocity),
        ("closed-form amplitude", closed_form_amplitude),
        ("exact N-soliton solutions", exact_solutions),
        ("overtaking reproduction", overtaking),
        ("equal-parameter degeneration", equal_parameters),
        ("box-ball speeds", bbsc_speeds),
        ("ultradiscrete bridge", ultradiscrete),
        ("KP bilinear identities", kp_identities),
        ("monotonicity scans", monotonicity_scans),
        ("conservation properties", conservation),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failures += usize::from(!o.passed);
        println!(
            "criterion {:>2} {} {name} ({:.2?}): {}",
            k + 1,
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed(),
            o.detail
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
